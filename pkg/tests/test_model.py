import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hiscript.errors import ValidationError
from hiscript.model import (
    NON_CONTIGUOUS_INDICES,
    SUBGOAL_HAS_HOWTO_PREFIX,
    Script,
    Segment,
    SegmentationPoints,
    Step,
    apply_segmentation,
    build_script,
    ensure_valid,
    flatten,
    points_of,
    validate_script,
)

from conftest import random_script


def codes(script):
    return [v.code for v in validate_script(script)]


def test_well_formed_script_has_empty_report():
    s = build_script("How to bake", [(None, ["a", "b", "c"])])
    assert codes(s) == []


def test_index_gap_is_reported():
    s = Script("How to x", (Segment((Step("a", 0), Step("b", 1))), Segment((Step("c", 5),))))
    assert NON_CONTIGUOUS_INDICES in codes(s)


def test_howto_subgoal_is_reported():
    s = build_script("How to x", [("How to mix batter", ["a"])])
    assert SUBGOAL_HAS_HOWTO_PREFIX in codes(s)


@pytest.mark.parametrize("text,code", [
    ("  ", "EMPTY_STEP"), ("a <section> b", "STEP_HAS_SECTION_TOKEN"), ("a\nb", "STEP_HAS_NEWLINE"),
])
def test_step_invariants(text, code):
    assert code in codes(build_script("How to x", [(None, [text])]))


def test_every_violation_listed():
    s = Script("", ())
    assert codes(s) == ["EMPTY_GOAL", "NO_SEGMENTS"]


def test_ensure_valid_raises_with_codes():
    with pytest.raises(ValidationError) as e:
        ensure_valid(Script("", ()))
    assert list(e.value.violations) == ["EMPTY_GOAL", "NO_SEGMENTS"]


def test_flatten_examples():
    s = build_script("How to x", [(None, ["a", "b"]), (None, ["c"])])
    assert [st.text for st in flatten(s)] == ["a", "b", "c"]
    one = build_script("How to x", [(None, ["a", "b"])])
    assert flatten(one) == list(one.segments[0].steps)
    six = build_script("How to x", [(None, ["1", "2"]), (None, ["3", "4"]), (None, ["5", "6"])])
    assert [st.text for st in flatten(six)] == list("123456")


def test_flatten_rejects_invalid():
    with pytest.raises(ValidationError):
        flatten(Script("How to x", ()))


@pytest.mark.parametrize("n,points,sizes", [(5, [2], [2, 3]), (4, [], [4]), (6, [1, 4], [1, 3, 2])])
def test_apply_segmentation_sizes(n, points, sizes):
    steps = [Step(str(i), i) for i in range(n)]
    segs = apply_segmentation(steps, SegmentationPoints(n, tuple(points)))
    assert [len(s.steps) for s in segs] == sizes
    assert [x for s in segs for x in s.steps] == steps


def test_apply_segmentation_length_mismatch():
    with pytest.raises(ValidationError) as e:
        apply_segmentation([Step("a", 0)], SegmentationPoints(3, (1,)))
    assert e.value.code == "LENGTH_MISMATCH"


@pytest.mark.parametrize("n,points", [(0, ()), (3, (0,)), (3, (3,)), (5, (2, 2)), (5, (3, 1))])
def test_bad_points(n, points):
    with pytest.raises(ValidationError):
        SegmentationPoints(n, points)


@given(st.integers(0, 10**6))
def test_segmentation_round_trip(seed):
    s = random_script(random.Random(seed))
    segs = apply_segmentation(flatten(s), points_of(s))
    assert [x.steps for x in segs] == [x.steps for x in s.segments]
    assert points_of(s).n_segments == len(s.segments)


@given(st.integers(0, 10**6))
def test_dict_round_trip_and_purity(seed):
    s = random_script(random.Random(seed))
    assert Script.from_dict(s.to_dict()) == s
    assert validate_script(s) == validate_script(s) == []
