"""Collection-level analyses: corpus evolution, size/length statistics, qrels distribution."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping
from urllib.parse import urlsplit, urlunsplit

from .trec_io import CorpusManifest, Qrels, QuerySet

__all__ = [
    "normalize_url",
    "EvolutionStats",
    "diff_corpora",
    "CollectionStats",
    "collection_stats",
    "token_count",
    "QrelsDistribution",
    "qrels_distribution",
]


def normalize_url(url: str) -> str:
    """Lowercase scheme and host and strip trailing slashes; path and query keep their case."""
    url = url.strip()
    parts = urlsplit(url)
    if parts.scheme or parts.netloc:
        url = urlunsplit((parts.scheme.lower(), parts.netloc.lower(), parts.path, parts.query, parts.fragment))
    return url.rstrip("/")


@dataclass(frozen=True)
class EvolutionStats:
    added: int
    removed: int
    increased: int
    decreased: int
    unchanged: int
    matched_urls: int

    def to_dict(self) -> dict[str, int]:
        return asdict(self)


def _by_url(manifest: CorpusManifest) -> dict[str, int]:
    lengths: dict[str, int] = {}
    collapsed = 0
    for rec in manifest.records:
        url = normalize_url(rec.url)
        if url in lengths:
            collapsed += 1
            lengths[url] = max(lengths[url], rec.length)
        else:
            lengths[url] = rec.length
    if collapsed:
        label = manifest.ee_label or "manifest"
        warnings.warn(f"{label}: {collapsed} records share a URL with another record; keeping the longest", stacklevel=3)
    return lengths


def diff_corpora(old: CorpusManifest, new: CorpusManifest) -> EvolutionStats:
    """Join two snapshots on normalized URL and classify each document."""
    old_len = _by_url(old)
    new_len = _by_url(new)
    increased = decreased = unchanged = 0
    for url, length in new_len.items():
        before = old_len.get(url)
        if before is None:
            continue
        if length > before:
            increased += 1
        elif length < before:
            decreased += 1
        else:
            unchanged += 1
    matched = increased + decreased + unchanged
    return EvolutionStats(
        added=len(new_len) - matched,
        removed=len(old_len) - matched,
        increased=increased,
        decreased=decreased,
        unchanged=unchanged,
        matched_urls=matched,
    )


def token_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class CollectionStats:
    doc_count: int
    doc_length_mean: float
    doc_length_min: int
    doc_length_max: int
    query_count: int
    query_length_mean: float
    query_length_min: int
    query_length_max: int
    excluded_topics: tuple[str, ...] = ()
    unit: str = "tokens"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["excluded_topics"] = list(self.excluded_topics)
        return d


def _summary(values: list[int]) -> tuple[float, int, int]:
    if not values:
        return 0.0, 0, 0
    return math.fsum(values) / len(values), min(values), max(values)


def collection_stats(
    manifest: CorpusManifest,
    queries: QuerySet | None = None,
    exclusions: Iterable[str] = (),
) -> CollectionStats:
    """Document and query counts and length statistics.

    Document lengths come from the manifest in its own unit; query lengths
    are whitespace token counts. Excluded topics are left out of the query
    statistics and listed in ``excluded_topics``.
    """
    doc_mean, doc_min, doc_max = _summary([r.length for r in manifest.records])
    exclusions = set(exclusions)
    qmap = queries.queries if queries is not None else {}
    kept = [token_count(text) for topic, text in qmap.items() if topic not in exclusions]
    q_mean, q_min, q_max = _summary(kept)
    return CollectionStats(
        doc_count=len(manifest.records),
        doc_length_mean=doc_mean,
        doc_length_min=doc_min,
        doc_length_max=doc_max,
        query_count=len(kept),
        query_length_mean=q_mean,
        query_length_min=q_min,
        query_length_max=q_max,
        excluded_topics=tuple(sorted(t for t in exclusions if t in qmap)),
        unit=manifest.unit,
    )


@dataclass(frozen=True)
class QrelsDistribution:
    """Judgment counts per topic and grade, with mean/min/max over topics."""

    grades: tuple[int, ...]
    per_topic: Mapping[str, Mapping[int, int]]
    per_grade: Mapping[int, tuple[float, int, int]]
    total: tuple[float, int, int]

    def topic_totals(self) -> dict[str, int]:
        return {t: sum(c.values()) for t, c in self.per_topic.items()}

    def to_dict(self) -> dict:
        def agg(a):
            return {"mean": a[0], "min": a[1], "max": a[2]}

        return {
            "grades": list(self.grades),
            "per_topic": {t: {str(g): c[g] for g in self.grades} for t, c in self.per_topic.items()},
            "per_grade": {str(g): agg(a) for g, a in self.per_grade.items()},
            "total": agg(self.total),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def qrels_distribution(qrels: Qrels, grades: Iterable[int] = (0, 1, 2)) -> QrelsDistribution:
    if not qrels:
        raise ValueError("qrels are empty")
    observed = {g for j in qrels.judgments.values() for g in j.values()}
    all_grades = tuple(sorted(set(grades) | observed))
    per_topic: dict[str, dict[int, int]] = {}
    for topic in qrels.topics():
        counts = dict.fromkeys(all_grades, 0)
        for g in qrels.for_topic(topic).values():
            counts[g] += 1
        per_topic[topic] = counts
    per_grade = {g: _summary([c[g] for c in per_topic.values()]) for g in all_grades}
    total = _summary([sum(c.values()) for c in per_topic.values()])
    return QrelsDistribution(all_grades, per_topic, per_grade, total)
