"""Static figures for experiment reports (Agg backend, reproducible PNG bytes)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linestyle": ":",
    "savefig.dpi": 110,
    "svg.hashsalt": "hiscript",
}
# PNG metadata carries the matplotlib version unless it is cleared
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", metadata=_META, bbox_inches="tight")
    plt.close(fig)
    return path


def grouped_bars(labels, series: dict, path, title="", ylabel="", value_fmt="{:.2f}"):
    """One group per label, one bar per series key; missing values are skipped."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(max(5.0, 0.9 * len(labels) + 2), 3.4))
        names = list(series)
        width = 0.8 / max(1, len(names))
        x = np.arange(len(labels))
        for j, name in enumerate(names):
            vals = series[name]
            xs = [x[i] + (j - (len(names) - 1) / 2) * width for i, v in enumerate(vals) if v is not None]
            ys = [v for v in vals if v is not None]
            bars = ax.bar(xs, ys, width * 0.92, label=str(name))
            for b, v in zip(bars, ys):
                ax.annotate(value_fmt.format(v), (b.get_x() + b.get_width() / 2, b.get_height()),
                            ha="center", va="bottom", fontsize=7, xytext=(0, 1), textcoords="offset points")
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=20, ha="right")
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, fontsize=8)
        ax.set_axisbelow(True)
        return _save(fig, path)


def segexp_figure(report: dict, path) -> Path:
    rows = [r for r in report["rows"] if r.get("error") is None]
    labels = [r["method"] for r in rows]
    series = {f"k={k}": [r["scores"].get(str(k)) for r in rows] for k in report["k_values"]}
    return grouped_bars(labels, series, path, title="Mean segment distance (lower is better)",
                        ylabel="segment distance")


def ablation_figure(report: dict, path) -> Path | None:
    arms = report["arms"]
    if not all(a.get("eval") for a in arms.values()):
        return None
    metrics = ["bleu1", "rougeL", "distinct3", "bertscore"]
    series = {name: [arm["eval"][m] for m in metrics] for name, arm in arms.items()}
    return grouped_bars(metrics, series, path, title="Ablation", ylabel="score (%)", value_fmt="{:.1f}")
