"""Readers and writers for TREC-style evaluation files.

Four line-oriented text formats:

* run files: ``topic Q0 doc rank score tag`` (exactly 6 whitespace-separated
  columns; the second column is required on the wire but carries no meaning)
* graded qrels: ``topic Q0 doc grade`` (4 columns, integer grade >= 0)
* preference qrels: ``topic Q0 doc preference`` (4 columns, positive real;
  documents sharing a preference value are tied)
* judgment ledger: one self-describing JSON object per line, append only

Parsing is pure and reentrant: these functions hold no state between calls.
The ledger has a single-writer contract; concurrent readers observe a prefix
of the record sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping


def _records(text: str | Iterable[str], source: str) -> Iterator[tuple[int, list[str]]]:
    """Yield (line_number, columns) for every non-blank line."""
    lines = text.splitlines() if isinstance(text, str) else text
    for lineno, raw in enumerate(lines, 1):
        parts = raw.split()
        if parts:
            yield lineno, parts


def _parse_score(token: str, source: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ValueError(f"{source}:{lineno}: {what} is not a number: {token!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{source}:{lineno}: {what} must be finite, got {token!r}")
    return value


# ---------------------------------------------------------------------------
# run files


@dataclass(frozen=True)
class RunEntry:
    topic_id: str
    doc_id: str
    rank: int
    score: float


@dataclass(frozen=True)
class RunFile:
    """A parsed retrieval run: one ranked document list per topic."""

    run_tag: str
    entries: tuple[RunEntry, ...] = ()

    @cached_property
    def _rankings(self) -> dict[str, tuple[str, ...]]:
        grouped: dict[str, list[RunEntry]] = {}
        for entry in self.entries:
            grouped.setdefault(entry.topic_id, []).append(entry)
        out: dict[str, tuple[str, ...]] = {}
        for topic_id, group in grouped.items():
            # Score decides the ranking; the rank column, then doc_id, break ties.
            group.sort(key=lambda e: (-e.score, e.rank, e.doc_id))
            out[topic_id] = tuple(e.doc_id for e in group)
        return out

    def topics(self) -> list[str]:
        return sorted(self._rankings)

    def ranking(self, topic_id: str) -> list[str]:
        """Ranked doc ids for a topic; empty list if the topic is absent."""
        return list(self._rankings.get(topic_id, ()))


def parse_run(text: str | Iterable[str], source: str = "run") -> RunFile:
    """Parse a 6-column run file.

    Raises ValueError with the offending line number on malformed lines,
    duplicate (topic, doc) pairs, or an inconsistent run tag.
    """
    entries: list[RunEntry] = []
    seen: set[tuple[str, str]] = set()
    tag: str | None = None
    for lineno, parts in _records(text, source):
        if len(parts) != 6:
            raise ValueError(f"{source}:{lineno}: expected 6 columns, got {len(parts)}")
        topic_id, _q0, doc_id, rank_token, score_token, line_tag = parts
        try:
            rank = int(rank_token)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: rank is not an integer: {rank_token!r}") from None
        if rank < 1:
            raise ValueError(f"{source}:{lineno}: rank must be positive, got {rank}")
        score = _parse_score(score_token, source, lineno, "score")
        if tag is None:
            tag = line_tag
        elif line_tag != tag:
            raise ValueError(f"{source}:{lineno}: run tag changed from {tag!r} to {line_tag!r}")
        key = (topic_id, doc_id)
        if key in seen:
            raise ValueError(f"{source}:{lineno}: duplicate entry for topic {topic_id} doc {doc_id}")
        seen.add(key)
        entries.append(RunEntry(topic_id, doc_id, rank, score))
    return RunFile(tag or "", tuple(entries))


def emit_run(run: RunFile) -> str:
    lines = [
        f"{e.topic_id} Q0 {e.doc_id} {e.rank} {e.score!r} {run.run_tag}"
        for e in run.entries
    ]
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# graded qrels


@dataclass(frozen=True)
class QrelEntry:
    topic_id: str
    doc_id: str
    grade: int


@dataclass(frozen=True)
class GradedQrels:
    """Graded relevance judgments; grade 0 means judged non-relevant."""

    entries: tuple[QrelEntry, ...] = ()

    @cached_property
    def _by_topic(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for entry in self.entries:
            out.setdefault(entry.topic_id, {})[entry.doc_id] = entry.grade
        return out

    def topics(self) -> list[str]:
        return sorted(self._by_topic)

    def grades(self, topic_id: str) -> Mapping[str, int]:
        if topic_id not in self._by_topic:
            raise ValueError(f"topic {topic_id} not present in graded qrels")
        return self._by_topic[topic_id]

    def grade_sets(self, topic_id: str) -> dict[int, set[str]]:
        """Docs grouped by grade, including grade 0."""
        sets: dict[int, set[str]] = {}
        for doc_id, grade in self.grades(topic_id).items():
            sets.setdefault(grade, set()).add(doc_id)
        return sets


def parse_graded_qrels(text: str | Iterable[str], source: str = "qrels") -> GradedQrels:
    entries: list[QrelEntry] = []
    seen: set[tuple[str, str]] = set()
    for lineno, parts in _records(text, source):
        if len(parts) != 4:
            raise ValueError(f"{source}:{lineno}: expected 4 columns, got {len(parts)}")
        topic_id, _q0, doc_id, grade_token = parts
        try:
            grade = int(grade_token)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: grade is not an integer: {grade_token!r}") from None
        if grade < 0:
            raise ValueError(f"{source}:{lineno}: grade must be >= 0, got {grade}")
        key = (topic_id, doc_id)
        if key in seen:
            raise ValueError(f"{source}:{lineno}: duplicate judgment for topic {topic_id} doc {doc_id}")
        seen.add(key)
        entries.append(QrelEntry(topic_id, doc_id, grade))
    return GradedQrels(tuple(entries))


def emit_graded_qrels(qrels: GradedQrels) -> str:
    return "".join(f"{e.topic_id} Q0 {e.doc_id} {e.grade}\n" for e in qrels.entries)


# ---------------------------------------------------------------------------
# preference qrels


@dataclass(frozen=True)
class PreferenceEntry:
    topic_id: str
    doc_id: str
    preference: float


@dataclass(frozen=True)
class PreferenceQrels:
    """Preference judgments: higher value is better, equal values are tied."""

    entries: tuple[PreferenceEntry, ...] = ()

    @cached_property
    def _by_topic(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for entry in self.entries:
            out.setdefault(entry.topic_id, {})[entry.doc_id] = entry.preference
        return out

    def topics(self) -> list[str]:
        return sorted(self._by_topic)

    def preferences(self, topic_id: str) -> Mapping[str, float]:
        if topic_id not in self._by_topic:
            raise ValueError(f"topic {topic_id} not present in preference qrels")
        return self._by_topic[topic_id]

    def level_groups(self, topic_id: str) -> list[frozenset[str]]:
        """Tie groups ordered best first (descending preference value)."""
        prefs = self.preferences(topic_id)
        groups: dict[float, set[str]] = {}
        for doc_id, value in prefs.items():
            groups.setdefault(value, set()).add(doc_id)
        return [frozenset(groups[v]) for v in sorted(groups, reverse=True)]


def parse_preference_qrels(text: str | Iterable[str], source: str = "prefs") -> PreferenceQrels:
    entries: list[PreferenceEntry] = []
    seen: set[tuple[str, str]] = set()
    for lineno, parts in _records(text, source):
        if len(parts) != 4:
            raise ValueError(f"{source}:{lineno}: expected 4 columns, got {len(parts)}")
        topic_id, _q0, doc_id, pref_token = parts
        preference = _parse_score(pref_token, source, lineno, "preference")
        if preference <= 0:
            raise ValueError(f"{source}:{lineno}: preference must be positive, got {pref_token}")
        key = (topic_id, doc_id)
        if key in seen:
            raise ValueError(f"{source}:{lineno}: duplicate judgment for topic {topic_id} doc {doc_id}")
        seen.add(key)
        entries.append(PreferenceEntry(topic_id, doc_id, preference))
    return PreferenceQrels(tuple(entries))


def emit_preference_qrels(qrels: PreferenceQrels) -> str:
    return "".join(
        f"{e.topic_id} Q0 {e.doc_id} {e.preference!r}\n" for e in qrels.entries
    )


# ---------------------------------------------------------------------------
# judgment ledger


@dataclass(frozen=True)
class PreferenceJudgment:
    """One pairwise preference: ``winner`` must be one of the two docs.

    ``stage`` tags the campaign phase that issued the pair (for example
    ``reduction:1``, ``round_robin``, ``tournament``); ``batch_id`` ties the
    record to the HIT batch it was collected in.  Ties cannot be recorded.
    """

    topic_id: str
    doc_a: str
    doc_b: str
    winner: str
    assessor_id: str
    stage: str
    batch_id: str
    is_challenge: bool = False
    timestamp: str = ""

    def __post_init__(self) -> None:
        if self.doc_a == self.doc_b:
            raise ValueError(f"judgment pairs distinct docs, got {self.doc_a!r} twice")
        if self.winner not in (self.doc_a, self.doc_b):
            raise ValueError(
                f"winner {self.winner!r} is neither {self.doc_a!r} nor {self.doc_b!r}"
            )

    def pair_key(self) -> tuple[str, str]:
        return (self.doc_a, self.doc_b) if self.doc_a < self.doc_b else (self.doc_b, self.doc_a)

    def to_json(self) -> str:
        return json.dumps(
            {
                "topic": self.topic_id,
                "doc_a": self.doc_a,
                "doc_b": self.doc_b,
                "winner": self.winner,
                "assessor": self.assessor_id,
                "stage": self.stage,
                "batch": self.batch_id,
                "challenge": self.is_challenge,
                "ts": self.timestamp,
            }
        )

    @classmethod
    def from_json(cls, line: str, source: str = "ledger", lineno: int = 0) -> "PreferenceJudgment":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{source}:{lineno}: not a JSON record: {exc}") from None
        try:
            return cls(
                topic_id=obj["topic"],
                doc_a=obj["doc_a"],
                doc_b=obj["doc_b"],
                winner=obj["winner"],
                assessor_id=obj["assessor"],
                stage=obj["stage"],
                batch_id=obj["batch"],
                is_challenge=bool(obj.get("challenge", False)),
                timestamp=obj.get("ts", ""),
            )
        except KeyError as exc:
            raise ValueError(f"{source}:{lineno}: record missing field {exc}") from None


def read_ledger(path: str | Path) -> list[PreferenceJudgment]:
    """Read every record of an append-only judgment ledger."""
    records: list[PreferenceJudgment] = []
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip():
            records.append(PreferenceJudgment.from_json(line, str(path), lineno))
    return records


def append_ledger(path: str | Path, record: PreferenceJudgment) -> None:
    """Append one record; creates the file on first use."""
    with open(path, "a") as handle:
        handle.write(record.to_json() + "\n")
        handle.flush()
