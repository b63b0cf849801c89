"""End-to-end pipeline: ingest, split, segment, label, render, generate, parse,
evaluate and the segmentation study, with a reproducibility manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import ConfigurationError, HiScriptError, StageError, ValidationError
from .experiments import run_segexp
from .geneval import eval_corpus
from .ingest import FilterConfig, RawProject, ingest_corpus
from .jsonl import dumps, file_sha256, read_jsonl, read_scripts, write_json, write_jsonl, write_scripts
from .model import Script, apply_segmentation, flatten, segments_from_texts
from .promptfmt import MODES, make_inference_prompt, parse_generated, render
from .scoring import BackendConfig, make_backend
from .segment import SegmenterConfig, segment_steps
from .subgoal import EXTRACTIVE, label_script

log = logging.getLogger(__name__)

STAGES = ("ingest", "split", "segment", "label", "render", "generate", "parse", "evaluate", "segexp")
# stage -> stages that must run earlier in the same config
REQUIRES = {
    "ingest": (),
    "split": (),
    "segment": ("split",),
    "label": ("segment",),
    "render": ("label",),
    "generate": ("render",),
    "parse": ("generate",),
    "evaluate": ("parse",),
    "segexp": ("split",),
}
# stages that pull in "split" automatically when it is not listed
_AUTO_SPLIT = {"segment", "segexp"}

TEST_FRACTION = (1, 10)
DEV_FRACTION = (5, 100)


def split_sizes(n: int) -> tuple[int, int, int]:
    """(train, dev, test): a tenth (rounded down) to test, then 5% of the rest to dev."""
    n_test = n * TEST_FRACTION[0] // TEST_FRACTION[1]
    n_dev = (n - n_test) * DEV_FRACTION[0] // DEV_FRACTION[1]
    return n - n_test - n_dev, n_dev, n_test


def split_corpus(corpus: Sequence[Script], seed: int = 0) -> dict[str, list[Script]]:
    """Seeded shuffle, then test, dev and train slices in that order.

    Each returned script carries ``meta["split"]``.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValidationError("cannot split an empty corpus", "EMPTY_INPUT")
    order = list(range(len(corpus)))
    random.Random(seed).shuffle(order)
    n_train, n_dev, n_test = split_sizes(len(corpus))
    cuts = {"test": order[:n_test], "dev": order[n_test:n_test + n_dev], "train": order[n_test + n_dev:]}
    out = {}
    for name in ("train", "dev", "test"):
        out[name] = [corpus[i].with_segments(corpus[i].segments, split=name) for i in sorted(cuts[name])]
    return out


@dataclass
class PipelineConfig:
    input: str
    out_dir: str
    input_format: str = "raw"  # raw | scripts
    stages: tuple = ("ingest", "split", "segment", "label", "render", "generate", "parse", "evaluate", "segexp")
    seed: int = 0
    jobs: int = 1
    backend: str = "local"
    filter: FilterConfig = field(default_factory=FilterConfig)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    label_strategy: str = EXTRACTIVE
    render_mode: str = "interleaving"
    generations: str | None = None
    segexp_k: tuple = (3, 4)
    segexp_split: str = "all"
    plots: bool = True

    def __post_init__(self):
        self.stages = tuple(self.stages)
        self.segexp_k = tuple(self.segexp_k)
        unknown = [s for s in self.stages if s not in STAGES]
        if unknown:
            raise ValidationError(f"unknown stages: {unknown}", "BAD_STAGE")
        if "split" not in self.stages and _AUTO_SPLIT & set(self.stages):
            at = 1 if self.stages[0] == "ingest" else 0
            self.stages = self.stages[:at] + ("split",) + self.stages[at:]
        pos = [STAGES.index(s) for s in self.stages]
        if pos != sorted(pos) or len(set(pos)) != len(pos):
            raise ValidationError(f"stages out of order: {list(self.stages)}", "STAGE_ORDER")
        for s in self.stages:
            for dep in REQUIRES[s]:
                if dep == "generate" and self.generations:
                    continue
                if dep not in self.stages:
                    raise ValidationError(f"stage {s!r} needs {dep!r} earlier in the pipeline", "STAGE_ORDER")
        if self.input_format not in ("raw", "scripts"):
            raise ValidationError("input_format must be raw or scripts", "BAD_CONFIG")
        if self.render_mode not in MODES:
            raise ValidationError(f"unknown render mode {self.render_mode!r}", "BAD_CONFIG")
        if self.segexp_split not in ("all", "train", "dev", "test"):
            raise ValidationError("segexp_split must be all, train, dev or test", "BAD_CONFIG")
        if self.jobs < 1:
            raise ValidationError("jobs must be >= 1", "BAD_CONFIG")

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "PipelineConfig":
        d = dict(d)
        sub = {}
        for key, typ in (("filter", FilterConfig), ("segmenter", SegmenterConfig)):
            if key in d:
                try:
                    sub[key] = typ(**d.pop(key))
                except TypeError as exc:
                    raise ValidationError(f"bad [{key}] section: {exc}", "BAD_CONFIG") from exc
        for key in ("input", "generations"):
            if d.get(key) and base_dir is not None and not Path(d[key]).is_absolute():
                d[key] = str(Path(base_dir) / d[key])
        try:
            return cls(**d, **sub)
        except TypeError as exc:
            raise ValidationError(f"bad pipeline config: {exc}", "BAD_CONFIG") from exc

    def canonical(self) -> dict:
        """Config as recorded in the manifest: file names only, no directories."""
        d = asdict(self)
        d["input"] = Path(self.input).name
        d["generations"] = Path(self.generations).name if self.generations else None
        del d["out_dir"]
        del d["jobs"]  # parallelism never changes results
        d["stages"] = list(self.stages)
        d["segexp_k"] = list(self.segexp_k)
        return d

    def config_hash(self) -> str:
        return hashlib.sha256(dumps(self.canonical()).encode("utf-8")).hexdigest()


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}", "BAD_CONFIG") from exc
    if path.suffix.lower() == ".toml":
        import tomli

        try:
            return tomli.loads(raw.decode("utf-8"))
        except tomli.TOMLDecodeError as exc:
            raise ValidationError(f"{path}: {exc}", "BAD_CONFIG") from exc
    try:
        return json.loads(raw)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}", "BAD_CONFIG") from exc


def _pmap(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def segment_record(script: Script, cfg: SegmenterConfig, backend) -> dict:
    points, debug = segment_steps([st.text for st in flatten(script)], cfg, backend)
    rec = script.to_dict()
    rec["predicted_points"] = list(points.points)
    rec["method"] = cfg.method
    rec["params"] = cfg.params()
    if debug:
        rec["debug"] = debug
    return rec


def resegment(rec: dict) -> Script:
    """Script whose segments follow ``predicted_points`` (subgoals cleared)."""
    script = Script.from_dict(rec)
    if "predicted_points" not in rec:
        return script
    from .model import SegmentationPoints

    seg = SegmentationPoints(script.n_steps, tuple(rec["predicted_points"]))
    return script.with_segments(apply_segmentation(flatten(script), seg))


class _Run:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = Path(cfg.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.backend = make_backend(BackendConfig.parse(cfg.backend))
        self.artifacts: list[str] = []
        self.timings: dict[str, float] = {}
        self.state: dict = {}

    def path(self, name) -> Path:
        return self.out / name

    def wrote(self, *names):
        self.artifacts.extend(names)

    # -- stages ---------------------------------------------------------------

    def ingest(self):
        c = self.cfg
        if c.input_format == "scripts":
            corpus = read_scripts(c.input)
            stats = {"total": len(corpus), "accepted": len(corpus), "rejected": 0}
            quarantine = []
        else:
            res = ingest_corpus(read_jsonl(c.input, strict=False), c.filter)
            corpus, stats = res.corpus, res.stats.to_dict()
            quarantine = [d for d in res.decisions if not d["accepted"]]
        write_scripts(self.path("corpus.jsonl"), corpus)
        write_jsonl(self.path("quarantine.jsonl"), quarantine)
        write_json(self.path("ingest_stats.json"), stats)
        self.wrote("corpus.jsonl", "quarantine.jsonl", "ingest_stats.json")
        self.state["corpus"] = corpus

    def _corpus(self):
        if "corpus" not in self.state:
            self.state["corpus"] = read_scripts(self.cfg.input)
        return self.state["corpus"]

    def split(self):
        splits = split_corpus(self._corpus(), self.cfg.seed)
        for name, scripts in splits.items():
            write_scripts(self.path(f"{name}.jsonl"), scripts)
            self.wrote(f"{name}.jsonl")
        self.state["splits"] = splits
        if hasattr(self.backend, "fit_lm"):
            self.backend.fit_lm(splits["train"], split="train")

    def segment(self):
        splits = self.state["splits"]
        scripts = splits["train"] + splits["dev"]
        cfg, be = self.cfg.segmenter, self.backend
        recs = _pmap(lambda s: segment_record(s, cfg, be), scripts, self.cfg.jobs)
        write_jsonl(self.path("segmented.jsonl"), recs)
        self.wrote("segmented.jsonl")
        self.state["segmented"] = recs

    def label(self):
        be, strategy = self.backend, self.cfg.label_strategy

        def one(rec):
            s = resegment(rec)
            return label_script(s.goal, s.segments, be, strategy, s.source_id, s.category, s.meta)

        labeled = _pmap(one, self.state["segmented"], self.cfg.jobs)
        write_scripts(self.path("labeled.jsonl"), labeled)
        self.wrote("labeled.jsonl")
        self.state["labeled"] = labeled

    def render(self):
        mode = self.cfg.render_mode
        recs = [{"source_id": s.source_id, "split": s.meta.get("split"), "input": make_inference_prompt(s.goal),
                 "target": render(s, mode), "mode": mode} for s in self.state["labeled"]]
        write_jsonl(self.path("prompts.jsonl"), recs)
        self.wrote("prompts.jsonl")
        self.state["prompts"] = recs

    def generate(self):
        if self.cfg.generations:
            return
        be = self.backend
        if hasattr(be, "set_exemplars"):
            train = [r for r in self.state["prompts"] if r["split"] == "train"]
            goals = {s.source_id: s.goal for s in self.state["labeled"]}
            be.set_exemplars((goals[r["source_id"]], r["target"]) for r in train)
        test = self.state["splits"]["test"]
        texts = _pmap(lambda s: be.generate(make_inference_prompt(s.goal), seed=self.cfg.seed), test,
                      self.cfg.jobs)
        recs = [{"source_id": s.source_id, "goal": s.goal, "text": t} for s, t in zip(test, texts)]
        write_jsonl(self.path("generations.jsonl"), recs)
        self.wrote("generations.jsonl")

    def parse(self):
        src = self.cfg.generations or self.path("generations.jsonl")
        gens = list(read_jsonl(src))
        outs = [parse_generated(g.get("text", ""), self.cfg.render_mode, g.get("goal", "")) for g in gens]
        recs = []
        for g, o in zip(gens, outs):
            d = o.to_dict()
            d["source_id"] = g.get("source_id", d.get("source_id", ""))
            recs.append(d)
        write_jsonl(self.path("parsed.jsonl"), recs)
        self.wrote("parsed.jsonl")
        self.state["parsed"] = (gens, outs)

    def evaluate(self):
        gens, outs = self.state["parsed"]
        test = {s.source_id: s for s in self.state["splits"]["test"]}
        pairs = [(o, test[g["source_id"]]) for g, o in zip(gens, outs) if g.get("source_id") in test]
        if not pairs:
            raise ValidationError("no generations align with the test split", "MISALIGNED")
        report = eval_corpus([p[0] for p in pairs], [p[1] for p in pairs], self.backend)
        write_json(self.path("eval_report.json"), report.to_dict())
        self.wrote("eval_report.json")

    def segexp(self):
        splits = self.state["splits"]
        name = self.cfg.segexp_split
        corpus = splits["train"] + splits["dev"] + splits["test"] if name == "all" else splits[name]
        run_segexp(corpus, self.backend, k_values=self.cfg.segexp_k, jobs=self.cfg.jobs,
                   out_dir=self.out, plot=self.cfg.plots)
        self.wrote("segexp.json", "segexp.txt")
        if self.cfg.plots:
            self.wrote("segexp.png")

    # -- driver ---------------------------------------------------------------

    def manifest(self, failure=None) -> dict:
        c = self.cfg
        inputs = {Path(c.input).name: file_sha256(c.input)}
        if c.generations:
            inputs[Path(c.generations).name] = file_sha256(c.generations)
        arts = {}
        for name in sorted(set(self.artifacts)):
            p = self.path(name)
            if p.exists():
                arts[name] = file_sha256(p)
        m = {
            "hiscript_version": __version__,
            "config_hash": c.config_hash(),
            "config": c.canonical(),
            "backend": self.backend.name,
            "inputs": inputs,
            "stages": list(c.stages),
            "artifacts": arts,
            "timings_file": "timings.json",
            "status": "ok" if failure is None else "failed",
        }
        if failure is not None:
            m["failure"] = failure
        return m

    def run(self) -> dict:
        for stage in self.cfg.stages:
            t0 = time.perf_counter()
            try:
                getattr(self, stage)()
            except HiScriptError as exc:
                failure = {"stage": stage, "code": exc.code, "message": str(exc)}
                self.timings[stage] = round(time.perf_counter() - t0, 6)
                self._finish(failure)
                raise StageError(stage, exc) from exc
            self.timings[stage] = round(time.perf_counter() - t0, 6)
            log.info("stage %s done in %.3fs", stage, self.timings[stage])
        return self._finish(None)

    def _finish(self, failure):
        m = self.manifest(failure)
        write_json(self.path("manifest.json"), m)
        write_json(self.path("timings.json"), self.timings)
        return m


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run the configured stages; returns the manifest.

    Raises ``StageError`` naming the failed stage; artifacts written before
    the failure stay on disk and the manifest records the cause.
    """
    if not Path(cfg.input).exists():
        raise ValidationError(f"input {cfg.input} does not exist", "MISSING_INPUT")
    if cfg.generations and not Path(cfg.generations).exists():
        raise ValidationError(f"generations file {cfg.generations} does not exist", "MISSING_INPUT")
    if "ingest" not in cfg.stages:
        cfg = replace(cfg, input_format="scripts")
    return _Run(cfg).run()


__all__ = [
    "PipelineConfig", "STAGES", "load_config_file", "resegment", "run_pipeline", "segment_record",
    "split_corpus", "split_sizes", "segments_from_texts",
]
