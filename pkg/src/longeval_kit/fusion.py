"""Reciprocal Rank Fusion (RRF) of several runs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .metrics import MeasureId, ScoreTable, evaluate
from .trec_io import Qrels, Run

__all__ = ["FusionConfig", "rrf_fuse", "rrf_sweep", "DEFAULT_SWEEP"]

# min_k=10, max_k=100, step=10
DEFAULT_SWEEP: tuple[float, ...] = tuple(float(k) for k in range(10, 101, 10))


@dataclass(frozen=True)
class FusionConfig:
    k: float = 60.0
    depth: int = 1000
    tag: str = "rrf"

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")


def rrf_fuse(runs: Sequence[Run], config: FusionConfig = FusionConfig()) -> Run:
    """Fuse runs by summing ``1 / (k + rank)`` over the runs that retrieved each document.

    Ranks are positions in each run's canonical ordering. The result is
    canonicalized and cut to ``config.depth`` documents per topic.
    """
    if len(runs) < 2:
        raise ValueError(f"fusion needs at least two runs, got {len(runs)}")
    k = float(config.k)
    topics = sorted(set().union(*(run.topics for run in runs)))
    fused: dict[str, list[tuple[str, float]]] = {}
    for topic in topics:
        contributions: dict[str, list[float]] = {}
        for run in runs:
            for rank, (doc, _) in enumerate(run.topics.get(topic, ()), start=1):
                contributions.setdefault(doc, []).append(1.0 / (k + rank))
        # fsum over sorted terms makes the score independent of run order
        entries = [(doc, math.fsum(sorted(terms))) for doc, terms in contributions.items()]
        fused[topic] = entries
    return Run.from_scores(config.tag, fused).truncate(config.depth)


def rrf_sweep(
    runs: Sequence[Run],
    qrels: Qrels,
    measure: MeasureId,
    k_values: Sequence[float] = DEFAULT_SWEEP,
    depth: int = 1000,
    tag: str = "rrf",
) -> tuple[float, ScoreTable]:
    """Pick the ``k`` whose fusion has the highest ARP on ``measure`` (ties go to the smaller k)."""
    if not k_values:
        raise ValueError("k_values is empty")
    if not qrels:
        raise ValueError("qrels are empty")
    best: tuple[float, ScoreTable, float] | None = None
    for k in sorted(float(v) for v in k_values):
        table = evaluate(rrf_fuse(runs, FusionConfig(k, depth, tag)), qrels, [measure])
        score = table.arp(measure)
        if best is None or score > best[2]:
            best = (k, table, score)
    return best[0], best[1]
