"""Per-topic retrieval effectiveness and average retrieval performance (ARP).

Binary measures (P@k, AP, RR, bpref) treat a document as relevant when its
grade is at least 1. nDCG uses the raw grade as gain with a ``log2(rank + 1)``
discount.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .trec_io import Qrels, Run

__all__ = [
    "MeasureKind",
    "MeasureId",
    "DEFAULT_MEASURES",
    "parse_measure",
    "parse_measures",
    "precision_at_k",
    "average_precision",
    "reciprocal_rank",
    "ndcg",
    "bpref",
    "score_topic",
    "ScoreTable",
    "evaluate",
    "arp",
]

RELEVANCE_THRESHOLD = 1


class MeasureKind(enum.Enum):
    P = "P"
    MAP = "MAP"
    RR = "RR"
    NDCG = "NDCG"
    BPREF = "BPREF"


_DISPLAY = {
    MeasureKind.P: "P",
    MeasureKind.MAP: "MAP",
    MeasureKind.RR: "RR",
    MeasureKind.NDCG: "nDCG",
    MeasureKind.BPREF: "Bpref",
}


@dataclass(frozen=True, order=False)
class MeasureId:
    kind: MeasureKind
    cutoff: int | None = None

    def __post_init__(self):
        if self.cutoff is not None and (not isinstance(self.cutoff, int) or self.cutoff < 1):
            raise ValueError(f"cutoff must be a positive integer, got {self.cutoff!r}")
        if self.kind is MeasureKind.P and self.cutoff is None:
            raise ValueError("precision needs a cutoff (e.g. P@20)")
        if self.kind in (MeasureKind.MAP, MeasureKind.RR, MeasureKind.BPREF) and self.cutoff is not None:
            raise ValueError(f"{_DISPLAY[self.kind]} does not take a cutoff")

    def __str__(self) -> str:
        name = _DISPLAY[self.kind]
        return f"{name}@{self.cutoff}" if self.cutoff is not None else name

    def sort_key(self) -> tuple[int, int]:
        return (list(MeasureKind).index(self.kind), self.cutoff or 0)


_ALIASES = {
    "p": MeasureKind.P,
    "precision": MeasureKind.P,
    "map": MeasureKind.MAP,
    "ap": MeasureKind.MAP,
    "rr": MeasureKind.RR,
    "mrr": MeasureKind.RR,
    "recip_rank": MeasureKind.RR,
    "ndcg": MeasureKind.NDCG,
    "ndcg_cut": MeasureKind.NDCG,
    "bpref": MeasureKind.BPREF,
}

_MEASURE_RE = re.compile(r"^\s*([A-Za-z_]+?)(?:\s*[@_.]\s*(\d+))?\s*$")


def parse_measure(text: str) -> MeasureId:
    """Parse names such as ``P@20``, ``ndcg@20``, ``map``, ``Bpref`` or ``P_20``."""
    m = _MEASURE_RE.match(text)
    if not m or m.group(1).lower() not in _ALIASES:
        raise ValueError(f"unknown measure {text!r}")
    cutoff = int(m.group(2)) if m.group(2) is not None else None
    return MeasureId(_ALIASES[m.group(1).lower()], cutoff)


def parse_measures(text: str | Iterable[str]) -> list[MeasureId]:
    items = text.split(",") if isinstance(text, str) else list(text)
    out: list[MeasureId] = []
    for item in items:
        if item.strip():
            mid = parse_measure(item)
            if mid not in out:
                out.append(mid)
    if not out:
        raise ValueError("no measures given")
    return out


DEFAULT_MEASURES: tuple[MeasureId, ...] = (
    MeasureId(MeasureKind.MAP),
    MeasureId(MeasureKind.BPREF),
    MeasureId(MeasureKind.RR),
    MeasureId(MeasureKind.P, 20),
    MeasureId(MeasureKind.NDCG),
    MeasureId(MeasureKind.NDCG, 20),
)


def _is_rel(grade: int | None) -> bool:
    return grade is not None and grade >= RELEVANCE_THRESHOLD


def precision_at_k(ranking: Sequence[str], qrels: Mapping[str, int], k: int) -> float:
    """Relevant documents in the top ``k`` divided by ``k``; short rankings are not padded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for doc in ranking[:k] if _is_rel(qrels.get(doc)))
    return hits / k


def average_precision(ranking: Sequence[str], qrels: Mapping[str, int]) -> float:
    num_rel = sum(1 for g in qrels.values() if _is_rel(g))
    if num_rel == 0:
        return 0.0
    hits = 0
    total = 0.0
    for i, doc in enumerate(ranking, start=1):
        if _is_rel(qrels.get(doc)):
            hits += 1
            total += hits / i
    return total / num_rel


def reciprocal_rank(ranking: Sequence[str], qrels: Mapping[str, int]) -> float:
    for i, doc in enumerate(ranking, start=1):
        if _is_rel(qrels.get(doc)):
            return 1.0 / i
    return 0.0


def _dcg(gains: Iterable[float]) -> float:
    return sum(g / math.log2(i + 1) for i, g in enumerate(gains, start=1) if g)


def ndcg(ranking: Sequence[str], qrels: Mapping[str, int], cutoff: int | None = None) -> float:
    """Normalized DCG with raw grades as gains, optionally truncated at ``cutoff``."""
    depth = len(ranking) if cutoff is None else min(cutoff, len(ranking))
    ideal = sorted((g for g in qrels.values() if g > 0), reverse=True)
    if cutoff is not None:
        ideal = ideal[:cutoff]
    idcg = _dcg(ideal)
    if idcg == 0.0:
        return 0.0
    dcg = _dcg(max(qrels.get(doc, 0), 0) for doc in ranking[:depth])
    return dcg / idcg


def bpref(ranking: Sequence[str], qrels: Mapping[str, int]) -> float:
    """Binary preference over judged documents; unjudged retrieved documents are skipped."""
    num_rel = sum(1 for g in qrels.values() if _is_rel(g))
    if num_rel == 0:
        return 0.0
    num_nonrel = len(qrels) - num_rel
    denom = min(num_rel, num_nonrel)
    nonrel_above = 0
    total = 0.0
    for doc in ranking:
        grade = qrels.get(doc)
        if grade is None:
            continue
        if _is_rel(grade):
            if denom == 0:
                total += 1.0
            else:
                total += 1.0 - min(nonrel_above, denom) / denom
        else:
            nonrel_above += 1
    return total / num_rel


def score_topic(measure: MeasureId, ranking: Sequence[str], qrels: Mapping[str, int]) -> float:
    kind = measure.kind
    if kind is MeasureKind.P:
        return precision_at_k(ranking, qrels, measure.cutoff)
    if kind is MeasureKind.MAP:
        return average_precision(ranking, qrels)
    if kind is MeasureKind.RR:
        return reciprocal_rank(ranking, qrels)
    if kind is MeasureKind.NDCG:
        return ndcg(ranking, qrels, measure.cutoff)
    if kind is MeasureKind.BPREF:
        return bpref(ranking, qrels)
    raise ValueError(f"unsupported measure {measure}")


@dataclass(frozen=True)
class ScoreTable:
    """Per-topic scores of one run on one evaluation environment."""

    run_tag: str
    ee_label: str
    scores: Mapping[tuple[MeasureId, str], float]
    evaluated_topics: tuple[str, ...]
    measures: tuple[MeasureId, ...] = field(default=())

    def score(self, measure: MeasureId, topic: str) -> float:
        try:
            return self.scores[(measure, topic)]
        except KeyError:
            raise KeyError(f"no {measure} score for topic {topic!r} in table {self.run_tag!r}") from None

    def per_topic(self, measure: MeasureId, topics: Sequence[str] | None = None) -> dict[str, float]:
        topics = self.evaluated_topics if topics is None else topics
        return {t: self.score(measure, t) for t in topics}

    def arp(self, measure: MeasureId, topics: Sequence[str] | None = None) -> float:
        return arp(self, measure, topics)

    def to_rows(self, include_arp: bool = True) -> list[tuple[str, str, float]]:
        """``(measure, topic, score)`` rows, topics in evaluation order, ARP rows labelled ``all``."""
        rows = []
        for m in self.measures:
            for t in self.evaluated_topics:
                rows.append((str(m), t, self.scores[(m, t)]))
            if include_arp:
                rows.append((str(m), "all", self.arp(m)))
        return rows

    def to_tsv(self, precision: int = 4, include_arp: bool = True) -> str:
        return "".join(f"{m}\t{t}\t{s:.{precision}f}\n" for m, t, s in self.to_rows(include_arp))

    def to_dict(self, precision: int | None = None) -> dict:
        def rnd(x: float) -> float:
            return round(x, precision) if precision is not None else x

        return {
            "run": self.run_tag,
            "ee": self.ee_label,
            "topics": list(self.evaluated_topics),
            "per_topic": {
                str(m): {t: rnd(self.scores[(m, t)]) for t in self.evaluated_topics} for m in self.measures
            },
            "arp": {str(m): rnd(self.arp(m)) for m in self.measures},
        }

    def to_json(self, precision: int | None = None) -> str:
        return json.dumps(self.to_dict(precision), indent=2) + "\n"


def evaluate(
    run: Run,
    qrels: Qrels,
    measures: Iterable[MeasureId] = DEFAULT_MEASURES,
    ee_label: str = "",
) -> ScoreTable:
    """Score ``run`` on every topic of ``qrels``.

    Topics missing from the run score 0; run topics without judgments are ignored.
    """
    if not qrels:
        raise ValueError("qrels are empty, nothing to evaluate")
    measures = tuple(dict.fromkeys(measures))
    if not measures:
        raise ValueError("no measures given")
    topics = tuple(qrels.topics())
    scores: dict[tuple[MeasureId, str], float] = {}
    for topic in topics:
        ranking = run.ranking(topic)
        judged = qrels.for_topic(topic)
        for m in measures:
            scores[(m, topic)] = score_topic(m, ranking, judged) if ranking else 0.0
    return ScoreTable(run_tag=run.tag, ee_label=ee_label, scores=scores, evaluated_topics=topics, measures=measures)


def arp(table: ScoreTable, measure: MeasureId, topics: Sequence[str] | None = None) -> float:
    """Mean per-topic score over all evaluated topics or the given subset."""
    topics = table.evaluated_topics if topics is None else list(topics)
    if not topics:
        raise ValueError("cannot average over an empty topic set")
    values = [table.score(measure, t) for t in topics]
    # fsum is exactly rounded, so the mean does not depend on topic order
    return math.fsum(values) / len(values)
