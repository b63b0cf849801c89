"""Segmentation study and subgoal ablation harnesses.

Both return JSON-ready dicts and can write a text table and a figure next to
the JSON report.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from .errors import HiScriptError, ValidationError
from .geneval import eval_corpus
from .jsonl import write_json, write_jsonl
from .model import Script, SegmentationPoints, points_of
from .promptfmt import INTERLEAVING, parse_generated, render, render_tokens_only, strip_for_eval
from .segdist import SegDistParams, corpus_segment_distance
from .segment import SegmenterConfig, segment_steps

log = logging.getLogger(__name__)

ORACLE = "Oracle (debug)"

DEFAULT_METHODS: tuple[tuple[str, SegmenterConfig], ...] = (
    ("2 Segments", SegmenterConfig("equal", equal_n=2)),
    ("3 Segments", SegmenterConfig("equal", equal_n=3)),
    ("Next Sentence Prediction", SegmenterConfig("nsp", nsp_k=2)),
    ("Perplexity", SegmenterConfig("perplexity")),
    ("Agglomerative Clustering", SegmenterConfig("hac", hac_distance_threshold=1.0)),
    ("Topic Detecting", SegmenterConfig("topic", topic_sim_threshold=0.65)),
)


def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _ensure_lm(backend, corpus) -> str | None:
    lm = getattr(backend, "lm", None)
    if not hasattr(backend, "fit_lm") or (lm is not None and lm.fitted):
        return None
    backend.fit_lm(corpus)
    return "segexp-corpus"


def format_segexp_table(report: dict) -> str:
    ks = report["k_values"]
    width = max([len("Method")] + [len(r["method"]) for r in report["rows"]]) + 2
    lines = ["Method".ljust(width) + "".join(f"k={k}".rjust(8) for k in ks)]
    lines.append("-" * len(lines[0]))
    for r in report["rows"]:
        if r.get("error"):
            cells = "".join("failed".rjust(8) for _ in ks)
        else:
            cells = "".join(f"{r['scores'][str(k)]:8.2f}" for k in ks)
        lines.append(r["method"].ljust(width) + cells)
    return "\n".join(lines) + "\n"


def run_segexp(corpus: Sequence[Script], backend, methods=None, k_values=(3, 4),
               include_oracle: bool = False, jobs: int = 1, out_dir=None, plot: bool = True) -> dict:
    """Mean segment distance of each method against the gold segmentation.

    Rows follow ``methods`` order (the default puts the equal-split
    baselines first).  A method that raises is recorded with its error and
    the other rows still run.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValidationError("segexp needs a non-empty corpus", "EMPTY_INPUT")
    k_values = [int(k) if float(k).is_integer() else float(k) for k in k_values]
    methods = list(DEFAULT_METHODS if methods is None else methods)
    if include_oracle:
        methods.append((ORACLE, None))
    golds = [points_of(s) for s in corpus]
    texts = [[st.text for seg in s.segments for st in seg.steps] for s in corpus]
    try:
        lm_note = _ensure_lm(backend, corpus)
    except HiScriptError as exc:
        lm_note = f"not fitted: {exc.code}"
    rows = []
    for name, cfg in methods:
        row = {"method": name, "config": None if cfg is None else {"method": cfg.method, **cfg.params()},
               "scores": {}, "raw": {}, "mean_pred_segments": None, "error": None}
        try:
            if cfg is None:
                preds = list(golds)
            else:
                preds = _pmap(lambda t: segment_steps(t, cfg, backend)[0], texts, jobs)
            for k in k_values:
                res = corpus_segment_distance(zip(preds, golds), SegDistParams(k))
                row["scores"][str(k)] = res["mean_total_2dp"]
                row["raw"][str(k)] = res
            row["mean_pred_segments"] = round(sum(p.n_segments for p in preds) / len(preds), 4)
        except HiScriptError as exc:
            log.warning("segexp method %s failed: %s", name, exc)
            row["error"] = {"code": exc.code, "message": str(exc)}
        rows.append(row)
    report = {
        "n_scripts": len(corpus),
        "mean_gold_segments": round(sum(g.n_segments for g in golds) / len(golds), 4),
        "k_values": list(k_values),
        "backend": backend.name,
        "lm_fit": lm_note,
        "rows": rows,
    }
    if out_dir is not None:
        out = Path(out_dir)
        write_json(out / "segexp.json", report)
        (out / "segexp.txt").write_text(format_segexp_table(report), encoding="utf-8")
        if plot:
            from .plotting import segexp_figure

            segexp_figure(report, out / "segexp.png")
    return report


TOKENS_ONLY = "tokens-only"
TOKENS_SUBGOALS = "tokens+subgoals"
ARMS = (TOKENS_ONLY, TOKENS_SUBGOALS)


def ablation_renderings(corpus: Sequence[Script], mode: str = INTERLEAVING) -> dict:
    """Training targets for both arms, keyed by arm name."""
    out = {TOKENS_ONLY: [], TOKENS_SUBGOALS: []}
    for s in corpus:
        out[TOKENS_ONLY].append(render_tokens_only(s))
        out[TOKENS_SUBGOALS].append(render(s, mode))
    return out


def run_ablation(corpus: Sequence[Script], mode: str = INTERLEAVING, generations: dict | None = None,
                 golds: Sequence[Script] | None = None, backend=None, ppl_backend=None,
                 out_dir=None, plot: bool = True) -> dict:
    """Compare a tokens-only rendering with the tokens-plus-subgoals rendering.

    ``generations`` maps arm name to model output strings aligned with
    ``golds``; when given (with a backend) each arm gets an evaluation report.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValidationError("ablation needs a labeled corpus", "EMPTY_INPUT")
    renders = ablation_renderings(corpus, mode)
    same = True
    for a, b, s in zip(renders[TOKENS_ONLY], renders[TOKENS_SUBGOALS], corpus):
        pa = parse_generated(a, INTERLEAVING, s.goal, expect_subgoals=False)
        pb = parse_generated(b, mode, s.goal)
        if strip_for_eval(pa) != strip_for_eval(pb):
            same = False
            break
    arms = {}
    for arm in ARMS:
        entry = {"n_training": len(renders[arm]), "eval": None}
        if generations and arm in generations:
            if golds is None or backend is None:
                raise ValidationError("evaluating an arm needs gold scripts and a backend", "BAD_CONFIG")
            outs = [parse_generated(t, INTERLEAVING if arm == TOKENS_ONLY else mode, g.goal,
                                    expect_subgoals=arm == TOKENS_SUBGOALS)
                    for t, g in zip(generations[arm], golds)]
            entry["eval"] = eval_corpus(outs, golds, backend, ppl_backend).to_dict()
        arms[arm] = entry
    report = {"mode": mode, "arms": arms, "strip_identical": same}
    if out_dir is not None:
        out = Path(out_dir)
        for arm in ARMS:
            fname = "train_" + arm.replace("+", "_plus_") + ".jsonl"
            write_jsonl(out / fname, ({"source_id": s.source_id, "input": s.goal, "target": t}
                                      for s, t in zip(corpus, renders[arm])))
        write_json(out / "ablation.json", report)
        if plot:
            from .plotting import ablation_figure

            ablation_figure(report, out / "ablation.png")
    return report


def points_from_record(rec: dict, script: Script) -> SegmentationPoints:
    """Predicted points stored by the segment command, else the script's own."""
    if "predicted_points" in rec:
        return SegmentationPoints(script.n_steps, tuple(rec["predicted_points"]))
    return points_of(script)
