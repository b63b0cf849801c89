import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiscript.errors import ValidationError
from hiscript.scoring import LocalBackend, TrigramLM
from hiscript.segment import (
    SegmenterConfig,
    count_communities,
    hac_labels,
    repair_contiguity,
    segment_equal,
    segment_hac,
    segment_nsp,
    segment_perplexity,
    segment_steps,
    segment_topics,
    topic_points,
)

from conftest import FixedEmbeddings


class ScoredPairs:
    name = "scored"

    def __init__(self, scores):
        self.scores = scores

    def next_sentence_prob(self, pairs):
        return list(self.scores)


def _steps(n):
    return [f"s{i}" for i in range(n)]


def test_nsp_two_lowest():
    assert segment_nsp(_steps(5), 2, ScoredPairs([0.9, 0.1, 0.8, 0.05])).points == (2, 4)


def test_nsp_tie_goes_to_earlier_pair():
    assert segment_nsp(_steps(3), 1, ScoredPairs([0.5, 0.5])).points == (1,)


def test_nsp_k_range():
    with pytest.raises(ValidationError):
        segment_nsp(_steps(3), 3, ScoredPairs([0.1, 0.2]))


def test_nsp_matches_sorting_oracle(local):
    steps = ["mix flour", "mix flour and sugar", "bake the cake", "bake it long", "paint a fence",
             "paint the fence white", "wash brushes", "wash the brushes well"]
    scores = local.next_sentence_prob(list(zip(steps, steps[1:])))
    for k in (1, 2, 3):
        order = np.argsort(np.asarray(scores), kind="stable")[:k]
        assert segment_nsp(steps, k, local).points == tuple(sorted(int(i) + 1 for i in order))
        assert segment_nsp(steps, k, local).n_segments == k + 1


def _perplexity_oracle(texts, lm):
    def cat(xs):
        return " ".join(x + "." for x in xs)
    n = len(texts)
    pre = [lm.perplexity(cat(texts[:i + 1])) for i in range(n)]
    suf = [lm.perplexity(cat(texts[i:])) for i in range(n)]
    return tuple(i for i in range(1, n) if pre[i] > pre[i - 1] and suf[i - 1] > suf[i])


def test_perplexity_planted_tail_single_point():
    train = ["mix the flour.", "mix the sugar.", "mix the flour and the sugar.",
             "paint the fence.", "paint the gate red."] * 3
    be = LocalBackend().fit_lm(train)
    steps = ["mix the flour", "mix the sugar", "mix the sugar and the flour",
             "paint the fence and the gate", "paint the fence"]
    got = segment_perplexity(steps, be)
    assert got.points == _perplexity_oracle(steps, TrigramLM().fit(train))
    assert got.points == (3,)


def test_perplexity_homogeneous_is_one_segment():
    be = LocalBackend().fit_lm(["mix the flour."])
    assert segment_perplexity(["mix the flour"] * 5, be).points == ()


def test_perplexity_three_steps_domain():
    be = LocalBackend().fit_lm(["a b c."])
    assert set(segment_perplexity(["a b", "x y", "c"], be).points) <= {1, 2}


def _ward_oracle(X, t):
    clusters = [[i] for i in range(len(X))]
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            A, B = clusters[a], clusters[b]
            ca, cb = X[A].mean(axis=0), X[B].mean(axis=0)
            d = np.sqrt(2 * len(A) * len(B) / (len(A) + len(B))) * np.linalg.norm(ca - cb)
            if best is None or d < best[0]:
                best = (d, a, b)
        if best[0] > t:
            break
        _, a, b = best
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]
    return {frozenset(c) for c in clusters}


def _partition(labels):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, set()).add(i)
    return {frozenset(g) for g in groups.values()}


@pytest.mark.parametrize("seed", range(5))
def test_hac_matches_ward_oracle(seed):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal([0, 0, 0], 0.15, (3, 3)), rng.normal([2, 0, 1], 0.15, (4, 3))])
    for t in (0.3, 1.0, 3.0):
        assert _partition(hac_labels(X, t)) == _ward_oracle(X, t)


def test_hac_two_far_groups():
    u, v = [1.0, 0.0], [0.0, 1.0]
    table = {f"s{i}": (u if i < 3 else v) for i in range(6)}
    assert segment_hac(_steps(6), 1.0, FixedEmbeddings(table)).points == (3,)
    same = FixedEmbeddings({f"s{i}": u for i in range(4)})
    assert segment_hac(_steps(4), 1.0, same).points == ()


def test_repair_examples():
    assert repair_contiguity(list("AABAA")) == list("AAAAA")
    assert repair_contiguity(list("AABB")) == list("AABB")
    out = repair_contiguity(list("ABABA"))
    assert _contiguous(out)


def _contiguous(labels):
    seen, prev = set(), object()
    for lab in labels:
        if lab != prev:
            if lab in seen:
                return False
            seen.add(lab)
            prev = lab
    return True


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
def test_repair_always_contiguous(labels):
    out = repair_contiguity(labels)
    assert len(out) == len(labels) and _contiguous(out)


def _uv_backend(pattern):
    vecs = {"u": [1.0, 0.0], "v": [0.0, 1.0], "w": [0.6, 0.8]}
    return FixedEmbeddings({f"s{i}": vecs[c] for i, c in enumerate(pattern)})


def test_topics_uuuvvv_one_boundary():
    assert segment_topics(_steps(6), 0.65, _uv_backend("uuuvvv")).points == (3,)


def test_topics_literal_reading_recorded():
    sims = np.array(_uv_backend("uuuvvv").embed(_steps(6)))
    sims = sims @ sims.T
    points, raw = topic_points(sims, 0.65)
    assert points == [3] and raw == [2]
    lit, _ = topic_points(sims, 0.65, literal=True)
    assert lit == [2, 3]


def test_topics_all_similar_zero_points():
    assert segment_topics(_steps(5), 0.65, _uv_backend("uuuuu")).points == ()


def test_topics_last_step_is_examined():
    assert segment_topics(_steps(4), 0.65, _uv_backend("uuuv")).points == (3,)


def test_count_communities_transitive():
    sims = np.array([[1, .7, 0], [.7, 1, .7], [0, .7, 1]])
    assert count_communities(sims, [0, 1, 2], 0.65) == 1
    assert count_communities(sims, [0, 2], 0.65) == 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(2, 5), min_size=1, max_size=5), st.integers(0, 10**6))
def test_topics_planted_orthogonal_blocks(sizes, seed):
    rng = random.Random(seed)
    topics = rng.sample(range(8), len(sizes))
    table, i = {}, 0
    expected, pos = [], 0
    for t, n in zip(topics, sizes):
        for _ in range(n):
            table[f"s{i}"] = np.eye(8)[t]
            i += 1
        pos += n
        expected.append(pos)
    if i < 3:
        return
    got = segment_topics(_steps(i), 0.65, FixedEmbeddings(table)).points
    assert got == tuple(expected[:-1])


@pytest.mark.parametrize("n,k,points", [(9, 3, (3, 6)), (10, 3, (3, 7)), (7, 1, ())])
def test_equal_split(n, k, points):
    seg = segment_equal(n, k)
    assert seg.points == points
    assert max(seg.sizes()) - min(seg.sizes()) <= 1


def test_equal_split_rejects_bad_n():
    with pytest.raises(ValidationError):
        segment_equal(3, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30))
def test_equal_split_balanced(n, k):
    if k > n:
        return
    sizes = segment_equal(n, k).sizes()
    assert len(sizes) == k and sum(sizes) == n and max(sizes) - min(sizes) <= 1


@pytest.mark.parametrize("method", ["nsp", "perplexity", "hac", "topic", "equal"])
def test_segment_steps_invariants_and_short_inputs(method, gold_corpus):
    be = LocalBackend().fit_lm(gold_corpus)
    cfg = SegmenterConfig(method, equal_n=3)
    for s in gold_corpus[:30]:
        texts = [st.text for seg in s.segments for st in seg.steps]
        p1, _ = segment_steps(texts, cfg, be)
        p2, _ = segment_steps(texts, cfg, be)
        assert p1 == p2
        assert all(1 <= x <= len(texts) - 1 for x in p1.points)
    for n in (1, 2):
        pts, _ = segment_steps(["mix the flour"] * n, cfg, be)
        assert pts.n_steps == n


def test_config_validation():
    with pytest.raises(ValidationError):
        SegmenterConfig("kmeans")
    with pytest.raises(ValidationError):
        SegmenterConfig("nsp", nsp_k=0)
    assert SegmenterConfig().topic_sim_threshold == 0.65
