"""Freeze golden files for the test suite.

Extractive labels use a plain-Python medoid (loops over pairwise cosines);
segmentation-study scores are recomputed by trying every order-preserving matching and must
agree with the harness before its report is written.  Run from the
repository root:

    python3 scripts/make_goldens.py
"""

import itertools
import json
import math
import shutil
import tempfile
from importlib import resources
from pathlib import Path

from hiscript.experiments import run_segexp
from hiscript.jsonl import read_scripts
from hiscript.model import points_of
from hiscript.scoring import LocalBackend
from hiscript.segment import segment_steps
from hiscript.subgoal import _tidy, leading_verb_phrase

OUT = Path(__file__).resolve().parents[1] / "tests" / "golden"
DATA = Path(str(resources.files("hiscript") / "data"))


def cos(a, b):
    num = sum(x * y for x, y in zip(a, b))
    da = math.sqrt(sum(x * x for x in a))
    db = math.sqrt(sum(y * y for y in b))
    return num / (da * db) if da and db else 0.0


def oracle_medoid(vectors):
    best, best_i = None, 0
    for i, v in enumerate(vectors):
        total = sum(cos(v, w) for j, w in enumerate(vectors) if j != i)
        if best is None or total > best + 1e-12:
            best, best_i = total, i
    return best_i


def labels(corpus):
    be = LocalBackend()
    out = {}
    for s in corpus:
        segs = []
        for seg in s.segments:
            texts = [st.text for st in seg.steps]
            vecs = [list(map(float, v)) for v in be.embed(texts)]
            i = oracle_medoid(vecs)
            segs.append({"medoid": i, "label": _tidy(leading_verb_phrase(texts[i]))})
        out[s.source_id] = segs
    return out


def exhaustive_total(pred, gold, k):
    a, b = sorted((pred.points, gold.points), key=len)
    shift = min((sum(abs(x - y) for x, y in zip(a, sub)) for sub in itertools.combinations(b, len(a))),
                default=0)
    return shift + k * abs(pred.n_segments - gold.n_segments)


def segexp(corpus):
    tmp = Path(tempfile.mkdtemp())
    be = LocalBackend()
    report = run_segexp(corpus, be, include_oracle=True, out_dir=tmp, plot=False)
    golds = [points_of(s) for s in corpus]
    texts = [[st.text for seg in s.segments for st in seg.steps] for s in corpus]
    from hiscript.experiments import DEFAULT_METHODS

    for (name, cfg), row in zip(list(DEFAULT_METHODS) + [(None, None)], report["rows"]):
        preds = golds if cfg is None else [segment_steps(t, cfg, be)[0] for t in texts]
        for k in report["k_values"]:
            totals = [exhaustive_total(p, g, k) for p, g in zip(preds, golds)]
            assert round(math.fsum(totals) / len(totals), 2) == row["scores"][str(k)], (name, k)
    for name in ("segexp.json", "segexp.txt"):
        shutil.copy(tmp / name, OUT / name)
    shutil.rmtree(tmp)


def main():
    corpus = read_scripts(DATA / "gold_scripts.jsonl")
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "extractive_labels.json").write_text(
        json.dumps(labels(corpus), indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    segexp(corpus)


if __name__ == "__main__":
    main()
