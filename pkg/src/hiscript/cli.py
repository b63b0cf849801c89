"""Command line entry point (``hiscript``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import BackendError, ConfigurationError, HiScriptError, StageError, ValidationError
from .jsonl import dumps, read_jsonl, read_scripts, write_json, write_jsonl, write_scripts

log = logging.getLogger("hiscript")


def _backend(args, fit_on=None):
    from .scoring import BackendConfig, make_backend

    be = make_backend(BackendConfig.parse(args.backend))
    if fit_on is not None and hasattr(be, "fit_lm"):
        be.fit_lm(fit_on)
    return be


def _by_id(records):
    out = {}
    for r in records:
        sid = r.get("source_id")
        if sid:
            out[sid] = r
    return out


def _align(cands: list[dict], golds: list[dict]) -> list[tuple[dict, dict]]:
    """Pair records by ``source_id`` when both sides have ids, else by position."""
    gid = _by_id(golds)
    if cands and all(c.get("source_id") in gid for c in cands):
        return [(c, gid[c["source_id"]]) for c in cands]
    if len(cands) != len(golds):
        raise ValidationError(f"{len(cands)} candidates vs {len(golds)} gold records", "MISALIGNED")
    return list(zip(cands, golds))


# -- subcommands ---------------------------------------------------------------

def cmd_ingest(args):
    from .ingest import FilterConfig, ingest_corpus

    cfg = FilterConfig(max_section_words=args.max_section_words,
                       english_confidence_threshold=args.lang_threshold,
                       drop_supply_sections=not args.keep_supplies)
    res = ingest_corpus(read_jsonl(args.inp, strict=False), cfg)
    write_scripts(args.out, res.corpus)
    out = Path(args.out)
    quarantine = args.quarantine or out.with_name(out.stem + ".quarantine.jsonl")
    stats = args.stats or out.with_name(out.stem + ".stats.json")
    write_jsonl(quarantine, (d for d in res.decisions if not d["accepted"]))
    write_json(stats, res.stats.to_dict())
    print(f"accepted {res.stats.accepted} / {res.stats.total}; rejected {res.stats.rejected}; "
          f"unreadable {res.stats.unreadable}")
    return 0


def cmd_split(args):
    from .pipeline import split_corpus

    splits = split_corpus(read_scripts(args.inp), args.seed)
    out = Path(args.out_dir)
    for name, scripts in splits.items():
        write_scripts(out / f"{name}.jsonl", scripts)
    print(" ".join(f"{k}={len(v)}" for k, v in splits.items()))
    return 0


def cmd_segment(args):
    from .pipeline import segment_record
    from .segment import SegmenterConfig

    cfg = SegmenterConfig(method=args.method, nsp_k=args.k, hac_distance_threshold=args.hac_threshold,
                          topic_sim_threshold=args.topic_threshold, equal_n=args.n_segments,
                          topic_literal=args.topic_literal)
    scripts = read_scripts(args.inp)
    fit = None
    if args.method == "perplexity":
        fit = read_scripts(args.lm_train) if args.lm_train else None
        if fit is None:
            raise ConfigurationError("--method perplexity with the local backend needs --lm-train", "LM_NOT_FITTED")
    be = _backend(args, fit)
    recs = _pmap(lambda s: segment_record(s, cfg, be), scripts, args.jobs)
    write_jsonl(args.out, recs)
    return 0


def cmd_label(args):
    from .pipeline import resegment
    from .subgoal import label_script

    be = _backend(args)

    def one(rec):
        s = resegment(rec)
        return label_script(s.goal, s.segments, be, args.strategy, s.source_id, s.category, s.meta)

    write_scripts(args.out, _pmap(one, list(read_jsonl(args.inp)), args.jobs))
    return 0


def cmd_render(args):
    from .promptfmt import make_inference_prompt, render, render_tokens_only

    recs = []
    for s in read_scripts(args.inp):
        target = render_tokens_only(s) if args.mode == "tokens-only" else render(s, args.mode)
        recs.append({"source_id": s.source_id, "input": make_inference_prompt(s.goal), "target": target,
                     "mode": args.mode})
    write_jsonl(args.out, recs)
    return 0


def cmd_generate(args):
    from .promptfmt import make_inference_prompt

    be = _backend(args)
    if args.exemplars and hasattr(be, "set_exemplars"):
        ex = list(read_jsonl(args.exemplars))
        be.set_exemplars((r.get("goal") or r["input"], r["target"]) for r in ex)
    scripts = read_scripts(args.inp)
    texts = _pmap(lambda s: be.generate(make_inference_prompt(s.goal), seed=args.seed), scripts, args.jobs)
    write_jsonl(args.out, ({"source_id": s.source_id, "goal": s.goal, "text": t} for s, t in zip(scripts, texts)))
    return 0


def cmd_parse(args):
    from .promptfmt import parse_generated

    mode = "interleaving" if args.mode == "tokens-only" else args.mode
    expect = args.mode != "tokens-only" and not args.no_subgoals
    n_warn = 0
    recs = []
    for g in read_jsonl(args.inp):
        o = parse_generated(g.get("text", ""), mode, g.get("goal", ""), expect_subgoals=expect)
        d = o.to_dict()
        if g.get("source_id"):
            d["source_id"] = g["source_id"]
        n_warn += bool(o.warnings)
        recs.append(d)
    write_jsonl(args.out, recs)
    print(f"parsed {len(recs)} outputs; {n_warn} with repair warnings")
    return 0


def cmd_evaluate(args):
    from .geneval import eval_corpus
    from .model import Script

    cands = list(read_jsonl(args.cand))
    golds = list(read_jsonl(args.gold))
    pairs = _align(cands, golds)
    fit = read_scripts(args.lm_train) if args.lm_train else None
    if fit is None and args.backend == "local":
        raise ConfigurationError("local perplexity needs --lm-train (a training-split scripts file)",
                                 "LM_NOT_FITTED")
    be = _backend(args, fit)
    outs = [Script.from_dict(c) if "segments" in c else c.get("text", "") for c, _ in pairs]
    report = eval_corpus(outs, [Script.from_dict(g) for _, g in pairs], be, corpus_bleu=args.corpus_bleu)
    write_json(args.report, report.to_dict())
    print(dumps(report.row()))
    return 0


def cmd_segdist(args):
    from .experiments import points_from_record
    from .model import Script
    from .segdist import SegDistParams, corpus_segment_distance

    preds = list(read_jsonl(args.pred))
    golds = list(read_jsonl(args.gold))
    pairs = []
    for p, g in _align(preds, golds):
        ps, gs = Script.from_dict(p), Script.from_dict(g)
        pairs.append((points_from_record(p, ps), points_from_record({}, gs)))
    res = corpus_segment_distance(pairs, SegDistParams(args.k))
    report = {k: res[k] for k in ("mean_total", "mean_shift", "mean_penalty", "n")}
    report["k"] = args.k
    if args.report:
        write_json(args.report, report)
    print(dumps(report))
    return 0


def cmd_segexp(args):
    from .experiments import format_segexp_table, run_segexp

    corpus = read_scripts(args.inp)
    fit = read_scripts(args.lm_train) if args.lm_train else None
    be = _backend(args, fit)
    report = run_segexp(corpus, be, k_values=args.k, include_oracle=args.oracle, jobs=args.jobs,
                        out_dir=args.out_dir, plot=not args.no_plot)
    sys.stdout.write(format_segexp_table(report))
    failed = [r["method"] for r in report["rows"] if r["error"]]
    return 4 if failed else 0


def cmd_ablation(args):
    from .experiments import TOKENS_ONLY, TOKENS_SUBGOALS, run_ablation

    corpus = read_scripts(args.inp)
    gens = None
    golds = be = None
    if args.gen_tokens or args.gen_subgoals:
        if not args.gold:
            raise ValidationError("--gold is required when generations are given", "BAD_CONFIG")
        golds = read_scripts(args.gold)
        gens = {}
        for arm, path in ((TOKENS_ONLY, args.gen_tokens), (TOKENS_SUBGOALS, args.gen_subgoals)):
            if path:
                recs = {r.get("source_id"): r.get("text", "") for r in read_jsonl(path)}
                gens[arm] = [recs.get(g.source_id, "") for g in golds]
        be = _backend(args, read_scripts(args.lm_train) if args.lm_train else corpus)
    report = run_ablation(corpus, args.mode, gens, golds, be, out_dir=args.out_dir, plot=not args.no_plot)
    print(dumps({"arms": list(report["arms"]), "strip_identical": report["strip_identical"]}))
    return 0


def cmd_run(args):
    from .pipeline import PipelineConfig, load_config_file, run_pipeline

    base = {}
    base_dir = None
    if args.config:
        base = load_config_file(args.config)
        base = base.get("pipeline", base)
        base_dir = Path(args.config).parent
    if args.inp:
        base["input"] = args.inp
    if args.out_dir:
        base["out_dir"] = args.out_dir
    if args.stages:
        base["stages"] = args.stages.split(",")
    if args.generations:
        base["generations"] = args.generations
    base.setdefault("seed", args.seed)
    base.setdefault("backend", args.backend)
    base["jobs"] = args.jobs
    if args.input_format:
        base["input_format"] = args.input_format
    for req in ("input", "out_dir"):
        if req not in base:
            raise ValidationError(f"run needs {req} (flag or config)", "BAD_CONFIG")
    cfg = PipelineConfig.from_dict(base, base_dir)
    m = run_pipeline(cfg)
    print(f"pipeline ok: {', '.join(m['stages'])} -> {cfg.out_dir}")
    return 0


def cmd_serve_stub(args):  # pragma: no cover - blocking server
    from .scoring.stub import StubServer

    with StubServer(port=args.port) as srv:
        print(f"stub listening on {srv.url}", flush=True)
        try:
            srv.wait()
        except KeyboardInterrupt:
            pass
    return 0


def cmd_conformance(args):
    from .scoring.stub import run_conformance

    results = run_conformance()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 3


def _pmap(fn, items, jobs):
    from .pipeline import _pmap as pm

    return pm(fn, items, jobs)


# -- parser --------------------------------------------------------------------

def _globals(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="TOML or JSON config file")
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS if suppress else 1)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)
    p.add_argument("--backend", default=argparse.SUPPRESS if suppress else "local",
                   help="local or remote:<url>")
    p.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiscript", description="Hierarchical script toolkit")
    parser.add_argument("--version", action="version", version=f"hiscript {__version__}")
    _globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("ingest", cmd_ingest, "filter raw project records into scripts")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--quarantine")
    p.add_argument("--stats")
    p.add_argument("--max-section-words", type=int, default=128)
    p.add_argument("--lang-threshold", type=float, default=0.9)
    p.add_argument("--keep-supplies", action="store_true")

    p = add("split", cmd_split, "seeded 90/10 split with 5%% of train held out as dev")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out-dir", required=True)

    p = add("segment", cmd_segment, "predict segmentation points")
    p.add_argument("--method", choices=["nsp", "perplexity", "hac", "topic", "equal"], default="topic")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--hac-threshold", type=float, default=1.0)
    p.add_argument("--topic-threshold", type=float, default=0.65)
    p.add_argument("--topic-literal", action="store_true")
    p.add_argument("--n-segments", type=int)
    p.add_argument("--lm-train")

    p = add("label", cmd_label, "label segments with subgoals")
    p.add_argument("--strategy", choices=["generative", "extractive"], default="extractive")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = add("render", cmd_render, "render scripts as prompt targets")
    p.add_argument("--mode", choices=["interleaving", "topdown", "tokens-only"], default="interleaving")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = add("generate", cmd_generate, "run the generation backend on script goals")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--exemplars", help="rendered training prompts for the local backend")

    p = add("parse", cmd_parse, "parse model outputs back into scripts")
    p.add_argument("--mode", choices=["interleaving", "topdown", "tokens-only"], default="interleaving")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-subgoals", action="store_true")

    p = add("evaluate", cmd_evaluate, "score candidates against gold scripts")
    p.add_argument("--cand", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--lm-train")
    p.add_argument("--corpus-bleu", action="store_true")

    p = add("segdist", cmd_segdist, "mean segment distance of predictions")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--k", type=float, default=3.0)
    p.add_argument("--report")

    p = add("segexp", cmd_segexp, "segmentation study over a gold corpus")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--k", type=float, nargs="+", default=[3, 4])
    p.add_argument("--oracle", action="store_true", help="add the pred := gold debug row")
    p.add_argument("--lm-train")
    p.add_argument("--no-plot", action="store_true")

    p = add("ablation", cmd_ablation, "tokens-only vs tokens+subgoals renderings")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mode", choices=["interleaving", "topdown"], default="interleaving")
    p.add_argument("--gen-tokens")
    p.add_argument("--gen-subgoals")
    p.add_argument("--gold")
    p.add_argument("--lm-train")
    p.add_argument("--no-plot", action="store_true")

    p = add("run", cmd_run, "run the configured pipeline")
    p.add_argument("--in", dest="inp")
    p.add_argument("--out-dir")
    p.add_argument("--stages", help="comma-separated stage list")
    p.add_argument("--generations")
    p.add_argument("--input-format", choices=["raw", "scripts"])

    p = add("serve-stub", cmd_serve_stub, "serve the protocol stub on localhost")
    p.add_argument("--port", type=int, default=8765)

    add("conformance", cmd_conformance, "run the wire-protocol conformance suite")
    return parser


def _apply_config_defaults(parser, argv):
    """Section ``[<command>]`` of ``--config`` supplies defaults for that command."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    from .pipeline import load_config_file

    cfg = load_config_file(known.config)
    for action in parser._subparsers._group_actions:
        for name, sp in action.choices.items():
            section = cfg.get(name)
            if isinstance(section, dict):
                sp.set_defaults(**{k.replace("-", "_"): v for k, v in section.items()})
    top = {k: v for k, v in cfg.items() if k in ("jobs", "seed", "backend")}
    parser.set_defaults(**top)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_defaults(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except StageError as exc:
        print(json.dumps({"error": {"stage": exc.stage, "code": exc.code, "message": str(exc.cause)}}),
              file=sys.stderr)
        return exc.exit_code
    except (ValidationError, ConfigurationError, BackendError, HiScriptError) as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": {"code": "IO", "message": str(exc)}}), file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
