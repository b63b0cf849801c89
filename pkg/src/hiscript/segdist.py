"""Segment distance between predicted and gold segmentation points.

The distance is the least total shift needed to move ``m = min(p-1, g-1)``
predicted boundaries onto gold boundaries, plus ``k * |p - g|`` for getting
the number of segments wrong (``p``/``g`` are segment counts).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError
from .model import SegmentationPoints


@dataclass(frozen=True)
class SegDistParams:
    k: float = 3.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError(f"penalty coefficient must be positive, got {self.k}", "BAD_K")


@dataclass(frozen=True)
class SegDistResult:
    shift_cost: int
    d: int
    penalty: float
    total: float
    p: int
    g: int
    m: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _check(pred: SegmentationPoints, gold: SegmentationPoints):
    if pred.n_steps != gold.n_steps:
        raise ValidationError(
            f"pred covers {pred.n_steps} steps, gold covers {gold.n_steps}", "LENGTH_MISMATCH"
        )


def _result(shift, pred, gold, params) -> SegDistResult:
    p, g = pred.n_segments, gold.n_segments
    d = abs(p - g)
    penalty = params.k * d
    return SegDistResult(int(shift), d, penalty, shift + penalty, p, g, min(p - 1, g - 1))


def min_shift(a: Sequence[int], b: Sequence[int]) -> int:
    """Cheapest order-preserving matching of every point of the shorter list
    into the longer one under L1 cost.  O(len(a) * len(b))."""
    if len(a) > len(b):
        a, b = b, a
    if not a:
        return 0
    inf = math.inf
    # f[j] = cost of matching a[:i] into b[:j]
    f = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        g = [inf] * (len(b) + 1)
        for j in range(i, len(b) + 1):
            g[j] = min(g[j - 1], f[j - 1] + abs(a[i - 1] - b[j - 1]))
        f = g
    return int(f[len(b)])


def segment_distance(pred: SegmentationPoints, gold: SegmentationPoints,
                     params: SegDistParams = SegDistParams()) -> SegDistResult:
    _check(pred, gold)
    return _result(min_shift(pred.points, gold.points), pred, gold, params)


BRUTEFORCE_LIMIT = 6


def segment_distance_bruteforce(pred: SegmentationPoints, gold: SegmentationPoints,
                                params: SegDistParams = SegDistParams()) -> SegDistResult:
    """Exact minimum by enumerating every size-m subset pair and every bijection.

    Test oracle only; guarded to at most six points per side.
    """
    _check(pred, gold)
    if len(pred.points) > BRUTEFORCE_LIMIT or len(gold.points) > BRUTEFORCE_LIMIT:
        raise ValidationError("brute force is limited to 6 points per side", "TOO_LARGE")
    m = min(len(pred.points), len(gold.points))
    best = 0
    if m:
        best = math.inf
        for ps in itertools.combinations(pred.points, m):
            for gs in itertools.combinations(gold.points, m):
                for perm in itertools.permutations(gs):
                    cost = sum(abs(x - y) for x, y in zip(ps, perm))
                    if cost < best:
                        best = cost
    return _result(best, pred, gold, params)


def corpus_segment_distance(pairs: Iterable[tuple[SegmentationPoints, SegmentationPoints]],
                            params: SegDistParams = SegDistParams()) -> dict:
    """Mean total, shift and penalty over (pred, gold) pairs.

    ``mean_total`` is also given rounded to two decimals as ``mean_total_2dp``.
    """
    results = [segment_distance(p, g, params) for p, g in pairs]
    if not results:
        raise ValidationError("corpus_segment_distance needs at least one pair", "EMPTY_INPUT")
    n = len(results)
    mean_total = math.fsum(r.total for r in results) / n
    return {
        "mean_total": mean_total,
        "mean_total_2dp": round(mean_total, 2),
        "mean_shift": math.fsum(r.shift_cost for r in results) / n,
        "mean_penalty": math.fsum(r.penalty for r in results) / n,
        "n": n,
    }
