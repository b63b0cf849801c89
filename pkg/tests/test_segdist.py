import itertools
import time

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hiscript.errors import ValidationError
from hiscript.model import SegmentationPoints
from hiscript.segdist import (
    SegDistParams,
    corpus_segment_distance,
    segment_distance,
    segment_distance_bruteforce,
)


def P(n, pts):
    return SegmentationPoints(n, tuple(pts))


@pytest.mark.parametrize("pred,gold,n,k,shift,total", [
    ((2,), (4,), 6, 3, 2, 2),
    ((2, 5), (4,), 6, 3, 1, 4),
    ((1, 2, 3), (7,), 10, 4, 4, 12),
    ((), (), 5, 3, 0, 0),
])
def test_worked_examples(pred, gold, n, k, shift, total):
    for fn in (segment_distance, segment_distance_bruteforce):
        r = fn(P(n, pred), P(n, gold), SegDistParams(k))
        assert r.shift_cost == shift and r.total == total
        assert r.m == min(r.p - 1, r.g - 1)
        assert r.total == r.shift_cost + r.penalty


def test_single_segment_side_is_penalty_only():
    r = segment_distance(P(6, ()), P(6, (2, 4)), SegDistParams(3))
    assert r.m == 0 and r.shift_cost == 0 and r.total == 6


def _all_points(n, max_points=3):
    for size in range(min(max_points, n - 1) + 1):
        yield from itertools.combinations(range(1, n), size)


def test_exhaustive_sweep_matches_bruteforce():
    start = time.perf_counter()
    count = 0
    for n in range(1, 9):
        pts = list(_all_points(n))
        for a in pts:
            for b in pts:
                for k in (3, 4):
                    prm = SegDistParams(k)
                    assert segment_distance(P(n, a), P(n, b), prm) == \
                        segment_distance_bruteforce(P(n, a), P(n, b), prm)
                    count += 1
    assert count > 8000
    assert time.perf_counter() - start < 10


def test_bruteforce_guard():
    with pytest.raises(ValidationError) as e:
        segment_distance_bruteforce(P(10, range(1, 8)), P(10, (1,)))
    assert e.value.code == "TOO_LARGE"


def test_length_mismatch():
    with pytest.raises(ValidationError) as e:
        segment_distance(P(5, (2,)), P(6, (2,)))
    assert e.value.code == "LENGTH_MISMATCH"


def test_bad_k():
    with pytest.raises(ValidationError):
        SegDistParams(0)


points = st.integers(2, 14).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.integers(1, n - 1), unique=True, max_size=5).map(sorted),
    st.lists(st.integers(1, n - 1), unique=True, max_size=5).map(sorted),
))


@given(points, st.sampled_from([3, 3.5, 4]))
def test_identity_and_symmetry(case, k):
    n, a, b = case
    prm = SegDistParams(k)
    assert segment_distance(P(n, a), P(n, a), prm).total == 0
    ab, ba = segment_distance(P(n, a), P(n, b), prm), segment_distance(P(n, b), P(n, a), prm)
    assert ab.shift_cost == ba.shift_cost and ab.total == ba.total
    assert ab == segment_distance_bruteforce(P(n, a), P(n, b), prm)


def _matchings(a, b):
    m = min(len(a), len(b))
    for xs in itertools.combinations(range(len(a)), m):
        for ys in itertools.permutations(range(len(b)), m):
            yield list(zip(xs, ys))


def test_moving_matched_point_away_never_decreases():
    checked = 0
    for n in range(3, 9):
        pts = [p for p in _all_points(n) if p]
        for a, b in itertools.product(pts, pts):
            a, b = list(a), list(b)
            costs = [(sum(abs(a[i] - b[j]) for i, j in mt), mt) for mt in _matchings(a, b)]
            best = min(c for c, _ in costs)
            optimal = [mt for c, mt in costs if c == best]
            if len(optimal) != 1:
                continue
            before = segment_distance(P(n, a), P(n, b)).total
            for i, j in optimal[0]:
                moved = a[i] + (1 if a[i] >= b[j] else -1)
                if not 1 <= moved <= n - 1 or moved in a:
                    continue
                a2 = sorted(a[:i] + [moved] + a[i + 1:])
                assert segment_distance(P(n, a2), P(n, b)).total >= before
                checked += 1
    assert checked > 1000


def test_corpus_means():
    pairs = [(P(6, (2,)), P(6, (4,))), (P(6, (2, 5)), P(6, (4,)))]
    res = corpus_segment_distance(pairs, SegDistParams(3))
    assert res["mean_total_2dp"] == 3.00 and res["n"] == 2
    same = [(P(8, (3,)), P(8, (3,)))] * 1000
    assert corpus_segment_distance(same)["mean_total_2dp"] == 0.0
    with pytest.raises(ValidationError) as e:
        corpus_segment_distance([])
    assert e.value.code == "EMPTY_INPUT"
