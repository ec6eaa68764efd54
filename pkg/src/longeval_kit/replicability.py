"""Temporal persistence of a system between two evaluation environments (EEs).

A longitudinal comparison is treated as a replication: the same experimental
system ``S`` and the same pivot system ``P`` are evaluated on two snapshots,
and the per-topic improvement of ``S`` over ``P`` is compared between them.

Undefined quantities (zero denominators) are represented as ``None`` and
rendered as ``undef`` by the serializers.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

from .errors import EmptyResultError
from .metrics import DEFAULT_MEASURES, MeasureId, ScoreTable, evaluate
from .significance import unpaired_ttest
from .trec_io import Qrels, QuerySet, Run

__all__ = [
    "UNDEF",
    "result_delta",
    "DeltaVector",
    "per_topic_deltas",
    "effect_ratio",
    "relative_improvement",
    "delta_ri",
    "normalize_query",
    "TopicAlignment",
    "core_topics",
    "EEPair",
    "MeasureReplicability",
    "ReplicabilityReport",
    "replicability_report",
    "topic_drift",
    "format_value",
]

UNDEF = "undef"


def format_value(value: float | None, precision: int = 4) -> str:
    """Fixed-point rendering; ``None`` becomes ``undef``."""
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return UNDEF
    return f"{value:.{precision}f}"


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def result_delta(arp_ee1: float, arp_ee2: float) -> float:
    """ARP in the first environment minus ARP in the second."""
    return arp_ee1 - arp_ee2


@dataclass(frozen=True)
class DeltaVector:
    """Per-topic differences ``M_j(S) - M_j(P)`` within one environment."""

    topics: tuple[str, ...]
    values: tuple[float, ...]
    measure: MeasureId | None = None
    ee_label: str = ""

    def __len__(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        if not self.values:
            raise ValueError("empty delta vector")
        return _mean(self.values)

    def scaled(self, factor: float) -> "DeltaVector":
        return DeltaVector(self.topics, tuple(v * factor for v in self.values), self.measure, self.ee_label)


def _lookup(table: ScoreTable, measure: MeasureId, topic: str) -> float:
    try:
        return table.scores[(measure, topic)]
    except KeyError:
        raise KeyError(f"topic {topic!r} has no {measure} score in table {table.run_tag!r}") from None


def per_topic_deltas(
    system_scores: ScoreTable,
    pivot_scores: ScoreTable,
    core_topics: Sequence[str],
    measure: MeasureId,
) -> DeltaVector:
    values = tuple(
        _lookup(system_scores, measure, t) - _lookup(pivot_scores, measure, t) for t in core_topics
    )
    return DeltaVector(tuple(core_topics), values, measure, system_scores.ee_label)


def effect_ratio(deltas_ee2: DeltaVector | Sequence[float], deltas_ee1: DeltaVector | Sequence[float]) -> float | None:
    """Mean improvement in the second environment over mean improvement in the first.

    The two vectors may have different lengths. Returns ``None`` when the
    first environment shows no mean improvement.
    """
    v2 = deltas_ee2.values if isinstance(deltas_ee2, DeltaVector) else tuple(deltas_ee2)
    v1 = deltas_ee1.values if isinstance(deltas_ee1, DeltaVector) else tuple(deltas_ee1)
    if not v1 or not v2:
        raise ValueError("effect ratio needs non-empty delta vectors")
    denom = _mean(v1)
    if denom == 0.0:
        return None
    return _mean(v2) / denom


def relative_improvement(
    system_scores: ScoreTable,
    pivot_scores: ScoreTable,
    core_topics: Sequence[str],
    measure: MeasureId,
) -> float | None:
    """``(mean S - mean P) / mean P`` over ``core_topics``; ``None`` if the pivot mean is 0."""
    if not core_topics:
        raise ValueError("relative improvement needs at least one topic")
    s = _mean(_lookup(system_scores, measure, t) for t in core_topics)
    p = _mean(_lookup(pivot_scores, measure, t) for t in core_topics)
    if p == 0.0:
        return None
    return (s - p) / p


def delta_ri(ri: float | None, ri_prime: float | None) -> float | None:
    if ri is None or ri_prime is None:
        return None
    return ri - ri_prime


_WS = re.compile(r"\s+")


def normalize_query(text: str) -> str:
    return _WS.sub(" ", text).strip().lower()


@dataclass(frozen=True)
class TopicAlignment:
    """Core topics shared by several environments.

    ``keys[i]`` is the shared key (normalized query text or topic id) and
    ``topic_ids[e][i]`` the topic id used for it in environment ``e``.
    """

    mode: str
    labels: tuple[str, ...]
    keys: tuple[str, ...]
    topic_ids: tuple[tuple[str, ...], ...]
    discarded: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.keys)

    def topics_for(self, ee: int | str) -> tuple[str, ...]:
        idx = self.labels.index(ee) if isinstance(ee, str) else ee
        return self.topic_ids[idx]

    def rows(self) -> list[tuple[str, ...]]:
        return [(key, *ids) for key, *ids in zip(self.keys, *self.topic_ids)]


def core_topics(
    query_sets: Sequence[QuerySet],
    mode: Literal["by-id", "by-text"] = "by-text",
) -> TopicAlignment:
    """Align topics present in every query set.

    ``by-text`` matches lowercased, whitespace-collapsed query strings. When
    one set holds the same text under several ids, the lexicographically
    smallest id is kept and the others are reported as discarded. Empty
    queries never match. ``by-id`` intersects topic ids.
    """
    if len(query_sets) < 2:
        raise ValueError("need at least two query sets to align")
    labels = tuple(qs.ee_label or f"EE{i + 1}" for i, qs in enumerate(query_sets))
    if len(set(labels)) != len(labels):
        raise ValueError(f"query set labels must be distinct, got {labels}")

    if mode == "by-id":
        common = set(query_sets[0].queries)
        for qs in query_sets[1:]:
            common &= set(qs.queries)
        keys = tuple(sorted(common))
        if not keys:
            raise EmptyResultError("no topic id is shared by all query sets")
        return TopicAlignment(mode, labels, keys, tuple(keys for _ in query_sets), {})

    if mode != "by-text":
        raise ValueError(f"unknown alignment mode {mode!r}")

    maps: list[dict[str, str]] = []
    discarded: dict[str, tuple[str, ...]] = {}
    for label, qs in zip(labels, query_sets):
        by_text: dict[str, list[str]] = {}
        for topic, text in qs.queries.items():
            norm = normalize_query(text)
            if norm:
                by_text.setdefault(norm, []).append(topic)
        chosen: dict[str, str] = {}
        dropped: list[str] = []
        for norm, ids in by_text.items():
            ids = sorted(ids)
            chosen[norm] = ids[0]
            if len(ids) > 1:
                dropped.extend(ids[1:])
                warnings.warn(
                    f"{label}: query {norm!r} appears under topics {ids}; keeping {ids[0]}",
                    stacklevel=2,
                )
        maps.append(chosen)
        if dropped:
            discarded[label] = tuple(sorted(dropped))

    common = set(maps[0])
    for m in maps[1:]:
        common &= set(m)
    keys = tuple(sorted(common))
    if not keys:
        raise EmptyResultError("no query text is shared by all query sets")
    ids = tuple(tuple(m[k] for k in keys) for m in maps)
    return TopicAlignment(mode, labels, keys, ids, discarded)


@dataclass(frozen=True)
class EEPair:
    """Pivot and experimental score tables on two environments plus aligned core topics."""

    ee1_label: str
    ee2_label: str
    pivot_ee1: ScoreTable
    pivot_ee2: ScoreTable
    system_ee1: ScoreTable
    system_ee2: ScoreTable
    topics_ee1: tuple[str, ...]
    topics_ee2: tuple[str, ...]
    discarded: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.topics_ee1 or not self.topics_ee2:
            raise EmptyResultError("an environment has no core topics")
        for tables, topics in (
            ((self.pivot_ee1, self.system_ee1), self.topics_ee1),
            ((self.pivot_ee2, self.system_ee2), self.topics_ee2),
        ):
            for table in tables:
                missing = sorted(set(topics) - set(table.evaluated_topics))
                if missing:
                    raise ValueError(
                        f"core topics {missing[:5]} were not evaluated in table "
                        f"{table.run_tag!r} ({table.ee_label or 'unlabelled'})"
                    )

    @classmethod
    def from_runs(
        cls,
        pivot: tuple[Run, Run],
        system: tuple[Run, Run],
        qrels: tuple[Qrels, Qrels],
        alignment: TopicAlignment | None = None,
        measures: Iterable[MeasureId] = DEFAULT_MEASURES,
        labels: tuple[str, str] | None = None,
    ) -> "EEPair":
        """Evaluate both systems in both environments and attach the core topics.

        Without an alignment, topic ids judged in both qrels are used.
        """
        measures = tuple(measures)
        if labels is None:
            labels = alignment.labels[:2] if alignment is not None else ("EE1", "EE2")
        tables = [
            [evaluate(run, q, measures, ee_label=label) for run, q, label in zip(pair, qrels, labels)]
            for pair in (pivot, system)
        ]
        if alignment is None:
            shared = tuple(sorted(set(qrels[0].topics()) & set(qrels[1].topics())))
            if not shared:
                raise EmptyResultError("the two qrels share no topic id")
            t1 = t2 = shared
            discarded: Mapping[str, tuple[str, ...]] = {}
        else:
            t1, t2 = alignment.topic_ids[0], alignment.topic_ids[1]
            discarded = alignment.discarded
            t1, t2 = _judged_only(t1, t2, qrels)
        return cls(labels[0], labels[1], tables[0][0], tables[0][1], tables[1][0], tables[1][1], t1, t2, discarded)


def _judged_only(t1: Sequence[str], t2: Sequence[str], qrels: tuple[Qrels, Qrels]):
    judged1, judged2 = set(qrels[0].judgments), set(qrels[1].judgments)
    kept = [(a, b) for a, b in zip(t1, t2) if a in judged1 and b in judged2]
    if len(kept) < len(t1):
        warnings.warn(
            f"{len(t1) - len(kept)} aligned topics lack judgments in one environment and are skipped",
            stacklevel=3,
        )
    if not kept:
        raise EmptyResultError("no aligned core topic is judged in both environments")
    return tuple(a for a, _ in kept), tuple(b for _, b in kept)


@dataclass(frozen=True)
class MeasureReplicability:
    measure: MeasureId
    arp_ee1: float
    arp_ee2: float
    re_delta: float
    er: float | None
    ri: float | None
    ri_prime: float | None
    delta_ri: float | None
    p_unpaired: float | None


@dataclass(frozen=True)
class ReplicabilityReport:
    pivot_tag: str
    system_tag: str
    ee1_label: str
    ee2_label: str
    n_topics_ee1: int
    n_topics_ee2: int
    rows: tuple[MeasureReplicability, ...]
    discarded: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def row(self, measure: MeasureId) -> MeasureReplicability:
        for r in self.rows:
            if r.measure == measure:
                return r
        raise KeyError(str(measure))

    def all_undefined(self) -> bool:
        return all(r.er is None and r.delta_ri is None for r in self.rows)

    def columns(self) -> list[str]:
        return [
            "measure",
            "system",
            f"ARP {self.ee1_label}",
            f"ARP {self.ee2_label}",
            "ReΔ",
            "ER",
            "ΔRI",
            "p-val",
        ]

    def table_rows(self, precision: int = 4) -> list[list[str]]:
        out = []
        for r in self.rows:
            out.append(
                [
                    str(r.measure),
                    self.system_tag,
                    format_value(r.arp_ee1, precision),
                    format_value(r.arp_ee2, precision),
                    format_value(r.re_delta, precision),
                    format_value(r.er, precision),
                    format_value(r.delta_ri, precision),
                    format_value(r.p_unpaired, precision),
                ]
            )
        return out

    def to_dict(self, precision: int | None = None) -> dict:
        def num(v: float | None):
            if v is None:
                return UNDEF
            return round(v, precision) if precision is not None else v

        return {
            "pivot": self.pivot_tag,
            "system": self.system_tag,
            "ee1": self.ee1_label,
            "ee2": self.ee2_label,
            "n_topics": [self.n_topics_ee1, self.n_topics_ee2],
            "discarded_topics": {k: list(v) for k, v in sorted(self.discarded.items())},
            "measures": [
                {
                    "measure": str(r.measure),
                    "arp_ee1": num(r.arp_ee1),
                    "arp_ee2": num(r.arp_ee2),
                    "re_delta": num(r.re_delta),
                    "er": num(r.er),
                    "ri": num(r.ri),
                    "ri_prime": num(r.ri_prime),
                    "delta_ri": num(r.delta_ri),
                    "p_value": num(r.p_unpaired),
                }
                for r in self.rows
            ],
        }

    def to_json(self, precision: int | None = None) -> str:
        return json.dumps(self.to_dict(precision), indent=2, ensure_ascii=False) + "\n"


def _scores(table: ScoreTable, measure: MeasureId, topics: Sequence[str]) -> list[float]:
    return [_lookup(table, measure, t) for t in topics]


def replicability_report(
    pair: EEPair,
    measures: Iterable[MeasureId] = DEFAULT_MEASURES,
    equal_var: bool = True,
) -> ReplicabilityReport:
    """ReΔ, ER, RI, RI′, ΔRI and the unpaired p-value per measure over the core topics.

    When the system's scores equal the pivot's in both environments the row
    is the identity (ER 1, ΔRI 0, p 1).
    """
    rows = []
    t1, t2 = pair.topics_ee1, pair.topics_ee2
    for m in measures:
        s1 = _scores(pair.system_ee1, m, t1)
        s2 = _scores(pair.system_ee2, m, t2)
        arp1, arp2 = _mean(s1), _mean(s2)
        is_pivot = s1 == _scores(pair.pivot_ee1, m, t1) and s2 == _scores(pair.pivot_ee2, m, t2)
        if is_pivot:
            rows.append(MeasureReplicability(m, arp1, arp2, result_delta(arp1, arp2), 1.0, 0.0, 0.0, 0.0, 1.0))
            continue
        d1 = per_topic_deltas(pair.system_ee1, pair.pivot_ee1, t1, m)
        d2 = per_topic_deltas(pair.system_ee2, pair.pivot_ee2, t2, m)
        er = effect_ratio(d2, d1)
        ri = relative_improvement(pair.system_ee1, pair.pivot_ee1, t1, m)
        ri_prime = relative_improvement(pair.system_ee2, pair.pivot_ee2, t2, m)
        try:
            p = unpaired_ttest(s1, s2, equal_var=equal_var)
        except ValueError:
            p = None
        rows.append(MeasureReplicability(m, arp1, arp2, result_delta(arp1, arp2), er, ri, ri_prime, delta_ri(ri, ri_prime), p))
    return ReplicabilityReport(
        pivot_tag=pair.pivot_ee1.run_tag,
        system_tag=pair.system_ee1.run_tag,
        ee1_label=pair.ee1_label,
        ee2_label=pair.ee2_label,
        n_topics_ee1=len(t1),
        n_topics_ee2=len(t2),
        rows=tuple(rows),
        discarded=pair.discarded,
    )


def topic_drift(
    table_ee1: ScoreTable,
    table_ee2: ScoreTable,
    core_topics: Sequence[str],
    measure: MeasureId,
    topics_ee2: Sequence[str] | None = None,
) -> list[tuple[str, float]]:
    """Per-topic ``score_ee1 - score_ee2`` sorted from largest to smallest.

    Topics are reported by their first-environment id; pass ``topics_ee2``
    when the second environment uses different ids for the same topics.
    """
    topics_ee2 = core_topics if topics_ee2 is None else topics_ee2
    if len(topics_ee2) != len(core_topics):
        raise ValueError("topic lists of the two environments differ in length")
    deltas = [
        (t1, _lookup(table_ee1, measure, t1) - _lookup(table_ee2, measure, t2))
        for t1, t2 in zip(core_topics, topics_ee2)
    ]
    return sorted(deltas, key=lambda d: (-d[1], d[0]))
