"""Reading and writing TREC-style runs, qrels, query files and corpus manifests.

All parsers take any iterable of text lines (an open file, ``io.StringIO``,
a list of strings) and consume it in a single pass. Parsed objects are
treated as immutable once built.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import ParseError, ValidationError

__all__ = [
    "Run",
    "Qrels",
    "QuerySet",
    "ManifestRecord",
    "CorpusManifest",
    "canonical_order",
    "parse_run",
    "parse_qrels",
    "parse_queries",
    "parse_manifest",
    "write_run",
    "format_score",
    "read_run",
    "read_qrels",
    "read_queries",
    "read_manifest",
]

Ranking = tuple[tuple[str, float], ...]


def canonical_order(entries: Iterable[tuple[str, float]]) -> Ranking:
    """Sort ``(doc_id, score)`` pairs by score descending, then doc_id descending."""
    return tuple(sorted(entries, key=lambda e: (e[1], e[0]), reverse=True))


@dataclass(frozen=True)
class Run:
    """Ranked result lists of one system, keyed by topic id.

    ``topics`` maps each topic id to its canonical ranking, a tuple of
    ``(doc_id, score)`` pairs whose position (1-based) is the rank.
    ``parsed_ranks`` keeps the rank column as it appeared in the source file;
    it is never used for ordering.
    """

    tag: str
    topics: Mapping[str, Ranking]
    parsed_ranks: Mapping[str, Mapping[str, int | None]] = field(default_factory=dict, compare=False)

    @classmethod
    def from_scores(cls, tag: str, topics: Mapping[str, Iterable[tuple[str, float]]]) -> "Run":
        """Build a canonical run from unordered ``(doc_id, score)`` pairs per topic."""
        canon: dict[str, Ranking] = {}
        dupes: list[tuple[str, str]] = []
        for topic in sorted(topics):
            entries = list(topics[topic])
            seen: set[str] = set()
            for doc, _ in entries:
                if doc in seen:
                    dupes.append((topic, doc))
                seen.add(doc)
            canon[topic] = canonical_order((str(d), float(s)) for d, s in entries)
        if dupes:
            raise ValidationError(_describe_duplicates(dupes))
        return cls(tag=tag, topics=canon)

    def ranking(self, topic: str) -> list[str]:
        """Doc ids of ``topic`` in rank order; empty if the topic is absent."""
        return [doc for doc, _ in self.topics.get(topic, ())]

    def canonicalize(self) -> "Run":
        topics = {t: canonical_order(self.topics[t]) for t in sorted(self.topics)}
        return Run(tag=self.tag, topics=topics, parsed_ranks=self.parsed_ranks)

    def truncate(self, depth: int) -> "Run":
        return Run(tag=self.tag, topics={t: r[:depth] for t, r in self.topics.items()})

    def __len__(self) -> int:
        return sum(len(r) for r in self.topics.values())


@dataclass(frozen=True)
class Qrels:
    """Graded judgments: topic id -> doc id -> non-negative integer grade."""

    judgments: Mapping[str, Mapping[str, int]]

    def topics(self) -> list[str]:
        return sorted(self.judgments)

    def for_topic(self, topic: str) -> Mapping[str, int]:
        return self.judgments.get(topic, {})

    def __len__(self) -> int:
        return sum(len(j) for j in self.judgments.values())

    def __bool__(self) -> bool:
        return bool(self.judgments)


@dataclass(frozen=True)
class QuerySet:
    queries: Mapping[str, str]
    ee_label: str = ""

    def __len__(self) -> int:
        return len(self.queries)


@dataclass(frozen=True)
class ManifestRecord:
    doc_id: str
    url: str
    length: int


@dataclass(frozen=True)
class CorpusManifest:
    """Per-document (id, url, length) records of one corpus snapshot."""

    records: Sequence[ManifestRecord]
    ee_label: str = ""
    unit: str = "chars"

    def __len__(self) -> int:
        return len(self.records)

    def duplicate_urls(self) -> dict[str, list[str]]:
        """URLs shared by several records, mapped to the doc ids sharing them."""
        by_url: dict[str, list[str]] = {}
        for rec in self.records:
            by_url.setdefault(rec.url, []).append(rec.doc_id)
        return {u: ids for u, ids in sorted(by_url.items()) if len(ids) > 1}


def _describe_duplicates(dupes: list[tuple[str, str]], limit: int = 10) -> str:
    shown = ", ".join(f"({t}, {d})" for t, d in dupes[:limit])
    more = f" and {len(dupes) - limit} more" if len(dupes) > limit else ""
    return f"duplicate (topic, doc) entries: {shown}{more}"


def _lines(stream: Iterable[str]):
    for number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if line:
            yield number, line


def parse_run(stream: Iterable[str], source: str | None = None) -> Run:
    """Parse a 6-column TREC run and return it canonicalized.

    The tag is taken from the first line; a differing tag later in the file
    triggers a warning and is otherwise ignored.
    """
    tag: str | None = None
    mixed_tag_warned = False
    entries: dict[str, list[tuple[str, float]]] = {}
    ranks: dict[str, dict[str, int | None]] = {}
    dupes: list[tuple[str, str]] = []

    for number, line in _lines(stream):
        fields = line.split()
        if len(fields) != 6:
            raise ParseError(f"expected 6 fields, found {len(fields)}", number, source)
        topic, _q0, doc, rank_text, score_text, line_tag = fields
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"unparseable score {score_text!r}", number, source) from None
        if not math.isfinite(score):
            raise ParseError(f"non-finite score {score_text!r}", number, source)
        try:
            rank: int | None = int(rank_text)
        except ValueError:
            rank = None

        if tag is None:
            tag = line_tag
        elif line_tag != tag and not mixed_tag_warned:
            warnings.warn(
                f"run contains several tags ({tag!r}, {line_tag!r}, ...); keeping {tag!r}",
                stacklevel=2,
            )
            mixed_tag_warned = True

        topic_ranks = ranks.setdefault(topic, {})
        if doc in topic_ranks:
            dupes.append((topic, doc))
            continue
        topic_ranks[doc] = rank
        entries.setdefault(topic, []).append((doc, score))

    if dupes:
        raise ValidationError(_describe_duplicates(dupes))

    topics = {t: canonical_order(entries[t]) for t in sorted(entries)}
    return Run(tag=tag or "", topics=topics, parsed_ranks=ranks)


def parse_qrels(stream: Iterable[str], source: str | None = None) -> Qrels:
    """Parse ``topic iter doc grade`` lines; later duplicates override earlier ones."""
    judgments: dict[str, dict[str, int]] = {}
    for number, line in _lines(stream):
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, found {len(fields)}", number, source)
        topic, _iteration, doc, grade_text = fields
        try:
            grade = int(grade_text)
        except ValueError:
            raise ParseError(f"grade {grade_text!r} is not an integer", number, source) from None
        if grade < 0:
            raise ParseError(f"negative grade {grade}", number, source)
        topic_j = judgments.setdefault(topic, {})
        if doc in topic_j:
            warnings.warn(
                f"line {number}: duplicate judgment for ({topic}, {doc}); "
                f"grade {topic_j[doc]} replaced by {grade}",
                stacklevel=2,
            )
        topic_j[doc] = grade
    return Qrels({t: judgments[t] for t in sorted(judgments)})


def parse_queries(stream: Iterable[str], ee_label: str = "", source: str | None = None) -> QuerySet:
    """Parse a ``topic_id<TAB>query text`` file. A missing text column means an empty query."""
    queries: dict[str, str] = {}
    for number, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        topic, _, text = line.partition("\t")
        topic = topic.strip()
        if not topic:
            raise ParseError("missing topic id", number, source)
        if topic in queries:
            raise ValidationError(f"duplicate topic id {topic!r} (line {number})")
        queries[topic] = text.strip()
    return QuerySet(queries=queries, ee_label=ee_label)


def parse_manifest(
    stream: Iterable[str], ee_label: str = "", unit: str = "chars", source: str | None = None
) -> CorpusManifest:
    """Parse a ``doc_id<TAB>url<TAB>length`` manifest."""
    if unit not in ("chars", "tokens"):
        raise ValueError(f"unit must be 'chars' or 'tokens', got {unit!r}")
    records: list[ManifestRecord] = []
    seen: set[str] = set()
    for number, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, found {len(fields)}", number, source)
        doc_id, url, length_text = (f.strip() for f in fields)
        try:
            length = int(length_text)
        except ValueError:
            raise ParseError(f"length {length_text!r} is not an integer", number, source) from None
        if length < 0:
            raise ParseError(f"negative length {length}", number, source)
        if doc_id in seen:
            raise ValidationError(f"duplicate doc_id {doc_id!r} (line {number})")
        seen.add(doc_id)
        records.append(ManifestRecord(doc_id, url, length))
    return CorpusManifest(records=tuple(records), ee_label=ee_label, unit=unit)


def format_score(score: float) -> str:
    # repr gives the shortest string that round-trips to the same binary64 value
    return repr(float(score))


def write_run(run: Run, sink: TextIO) -> None:
    """Write ``run`` as 6-column TREC lines in canonical order."""
    tag = run.tag or "run"
    for topic in sorted(run.topics):
        for rank, (doc, score) in enumerate(run.topics[topic], start=1):
            sink.write(f"{topic} Q0 {doc} {rank} {format_score(score)} {tag}\n")


def _read(path: str | Path, parser, **kwargs):
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parser(fh, source=str(path), **kwargs)


def read_run(path: str | Path) -> Run:
    return _read(path, parse_run)


def read_qrels(path: str | Path) -> Qrels:
    return _read(path, parse_qrels)


def read_queries(path: str | Path, ee_label: str = "") -> QuerySet:
    return _read(path, parse_queries, ee_label=ee_label)


def read_manifest(path: str | Path, ee_label: str = "", unit: str = "chars") -> CorpusManifest:
    return _read(path, parse_manifest, ee_label=ee_label, unit=unit)
