import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiscript.errors import ValidationError
from hiscript.ingest import goal_to_phrase
from hiscript.model import SECTION_TOKEN, build_script, flatten, validate_script
from hiscript.promptfmt import (
    INTERLEAVING,
    MODES,
    NO_SECTION_TOKEN,
    SUBGOAL_COUNT_MISMATCH,
    TOPDOWN,
    make_inference_prompt,
    parse_generated,
    render,
    render_interleaving,
    render_tokens_only,
    render_topdown,
    strip_for_eval,
)

from conftest import random_script


def test_web_design_prefix(web_design):
    assert render_interleaving(web_design).startswith(
        "To learn Web Design, <section> with Finding Web Design Resources, "
        "check online for web design courses")


def test_single_step_one_token():
    s = build_script("How to Wave", [("lift a hand", ["wave it"])])
    assert render_interleaving(s).count(SECTION_TOKEN) == 1
    assert render_topdown(s).count(SECTION_TOKEN) == 1


def test_topdown_shape(web_design):
    out = render_topdown(web_design)
    assert out.count("the subgoals are:") == 1
    assert out.count(SECTION_TOKEN) == 2
    assert "Finding Web Design Resources, Learning the Basics." in out


def test_missing_subgoal_rejected():
    s = build_script("How to Wave", [(None, ["wave it"])])
    for mode in MODES:
        with pytest.raises(ValidationError):
            render(s, mode)


def _same(a, b):
    return [(x.subgoal, [t.text for t in x.steps]) for x in a.segments] == \
        [(x.subgoal, [t.text for t in x.steps]) for x in b.segments]


@pytest.mark.parametrize("mode", MODES)
def test_round_trip_random_scripts(mode):
    rng = random.Random(7 if mode == INTERLEAVING else 8)
    for _ in range(1000):
        s = random_script(rng)
        out = parse_generated(render(s, mode), mode, s.goal)
        assert out.warnings == [], (s.to_dict(), render(s, mode))
        assert _same(out.script, s)
        assert out.goal_phrase == goal_to_phrase(s.goal)
        assert strip_for_eval(out) == ". ".join(t.text for t in flatten(s))


def test_round_trip_sections_count(gold_corpus):
    for s in gold_corpus:
        for mode in MODES:
            assert render(s, mode).count(SECTION_TOKEN) == len(s.segments)


def test_no_section_token():
    out = parse_generated("just some steps. more steps.", INTERLEAVING, "How to X")
    assert out.warnings == [NO_SECTION_TOKEN]
    assert len(out.script.segments) == 1
    assert [t.text for t in out.script.segments[0].steps] == ["just some steps", "more steps"]


def test_topdown_count_mismatch():
    text = "To bake, the subgoals are: mix, bake, cool. <section>, stir it. <section>, heat it."
    out = parse_generated(text, TOPDOWN, "How to bake")
    assert SUBGOAL_COUNT_MISMATCH in out.warnings
    assert [g.subgoal for g in out.script.segments] == ["mix", "bake"]


def test_extra_step_blocks_unlabeled():
    text = "To bake, the subgoals are: mix. <section>, stir it. <section>, heat it."
    out = parse_generated(text, TOPDOWN, "How to bake")
    assert SUBGOAL_COUNT_MISMATCH in out.warnings
    assert [g.subgoal for g in out.script.segments] == ["mix", None]


def test_connective_case_insensitive():
    out = parse_generated("To bake, <section> With Mixing, stir it.", INTERLEAVING, "How to bake")
    assert out.warnings == [] and out.script.segments[0].subgoal == "Mixing"


def test_strip_has_no_template(web_design):
    text = strip_for_eval(parse_generated(render_interleaving(web_design), INTERLEAVING, web_design.goal))
    assert SECTION_TOKEN not in text
    assert "Finding Web Design Resources" not in text and "the subgoals are" not in text


def test_strip_empty():
    out = parse_generated("", INTERLEAVING, "How to X")
    assert strip_for_eval(out) == ""


def test_inference_prompt():
    assert make_inference_prompt("How to go green") == "Ask question: How to go green"
    assert make_inference_prompt("Ask question: x") == "Ask question: Ask question: x"
    with pytest.raises(ValidationError):
        make_inference_prompt("")


def test_tokens_only_round_trip(web_design):
    text = render_tokens_only(web_design)
    assert " with " not in text.replace("web design", "")
    assert text.count(SECTION_TOKEN) == 2
    out = parse_generated(text, INTERLEAVING, web_design.goal, expect_subgoals=False)
    assert out.warnings == []
    assert strip_for_eval(out) == ". ".join(t.text for t in flatten(web_design))
    assert all(g.subgoal is None for g in out.script.segments)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(list("ab .,<>sectionwhWT:\n") + ["<section>", "the subgoals are:", "with "]),
                max_size=40).map("".join),
       st.sampled_from(MODES), st.booleans())
def test_parse_is_total(text, mode, expect):
    out = parse_generated(text, mode, "How to X", expect_subgoals=expect)
    assert isinstance(out.warnings, list)
    if out.script.segments:
        assert validate_script(out.script) == []
    strip_for_eval(out)
