"""Rank similarity and effectiveness measures.

Rank-biased overlap (RBO) scores the agreement of two rankings with
geometrically decaying attention to depth:

    rbo(R, I) = (1 - p) * sum_{i>=1} p**(i-1) * |R_{1:i} & I_{1:i}| / i

``p`` is the persistence (the chance the simulated reader continues to the
next rank) and the sum is truncated at ``depth``.  A prefix past a ranking's
end is the whole ranking, so comparing rankings of different lengths is well
defined.  Normalized RBO divides by the ideal ranking's self-similarity,
removing the residual a finite ideal leaves behind.

Compatibility is the maximum (normalized) RBO between an actual ranking and
the set of ideal rankings induced by effectiveness levels; the maximum is
attained by ``best_ideal`` so no enumeration is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from prefeval.ideal import (
    EffectivenessLevels,
    best_ideal,
    levels_combined,
    levels_from_grades,
    levels_from_preferences,
    topk_from_preferences,
)
from prefeval.trec_io import GradedQrels, PreferenceQrels, RunFile

DEFAULT_PERSISTENCE = 0.95
DEFAULT_DEPTH = 1000

# Persistence values whose run orderings track NDCG@k most closely; deeper
# evaluation wants higher persistence.
NDCG_EQUIVALENT_PERSISTENCE = {3: 0.80, 5: 0.85, 10: 0.90, 20: 0.95}

_SOURCES = ("grades", "topk", "combined", "best-only")


@dataclass(frozen=True)
class RboParams:
    """Persistence in (0, 1) and evaluation depth (>= 1)."""

    p: float = DEFAULT_PERSISTENCE
    depth: int = DEFAULT_DEPTH

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"persistence must be in (0, 1), got {self.p}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")


@lru_cache(maxsize=64)
def _weights(p: float, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-depth term weights (1-p) p^(i-1) / i and their cumulative sums."""
    i = np.arange(1, depth + 1, dtype=np.float64)
    w = (1.0 - p) * np.power(p, i - 1.0) / i
    cum = np.cumsum(w)
    w.setflags(write=False)
    cum.setflags(write=False)
    return w, cum


def _check_ranking(ranking: Sequence[str], what: str) -> None:
    if len(set(ranking)) != len(ranking):
        seen: set[str] = set()
        for doc in ranking:
            if doc in seen:
                raise ValueError(f"{what} ranking repeats doc {doc!r}")
            seen.add(doc)


def rbo(
    actual: Sequence[str], ideal: Sequence[str], params: RboParams | None = None
) -> float:
    """Rank-biased overlap of two duplicate-free rankings, in [0, 1)."""
    params = params or RboParams()
    _check_ranking(actual, "actual")
    _check_ranking(ideal, "ideal")
    w, cum = _weights(params.p, params.depth)
    horizon = min(params.depth, max(len(actual), len(ideal)))
    if horizon == 0:
        return 0.0
    seen_actual: set[str] = set()
    seen_ideal: set[str] = set()
    overlap = 0
    terms: list[float] = []
    for d in range(1, horizon + 1):
        if d <= len(actual):
            doc = actual[d - 1]
            if doc in seen_ideal:
                overlap += 1
            seen_actual.add(doc)
        if d <= len(ideal):
            doc = ideal[d - 1]
            if doc in seen_actual:
                overlap += 1
            seen_ideal.add(doc)
        terms.append(w[d - 1] * overlap)
    total = math.fsum(terms)
    if horizon < params.depth:
        # Both prefixes are now the whole rankings; the overlap is constant.
        total += overlap * float(cum[params.depth - 1] - cum[horizon - 1])
    return total


def rbo_self(ideal: Sequence[str], params: RboParams | None = None) -> float:
    """RBO of a ranking with itself: the best score a finite ideal can reach."""
    return rbo(ideal, ideal, params)


def nrbo(
    actual: Sequence[str], ideal: Sequence[str], params: RboParams | None = None
) -> float:
    """RBO normalized by the ideal's self-similarity, in [0, 1].

    An empty ideal leaves the measure undefined; this returns 0.0 and
    callers that can flag the topic should do so.
    """
    denominator = rbo_self(ideal, params)
    if denominator == 0.0:
        return 0.0
    return rbo(actual, ideal, params) / denominator


def compatibility(
    actual: Sequence[str],
    levels: EffectivenessLevels,
    params: RboParams | None = None,
    normalized: bool = True,
) -> float:
    """Maximum (normalized) RBO between ``actual`` and any ideal ranking."""
    ideal = best_ideal(levels, actual)
    if not ideal:
        return 0.0
    if normalized:
        return nrbo(actual, ideal, params)
    return rbo(actual, ideal, params)


def ndcg_at_k(actual: Sequence[str], qrels: GradedQrels, topic_id: str, k: int) -> float:
    """NDCG at depth k with linear gain and log2(rank + 1) discount.

    Documents below rank k never change the score.  Topics with no positive
    grades (ideal DCG of zero) score 0.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    grades = qrels.grades(topic_id)
    dcg = 0.0
    for rank, doc in enumerate(actual[:k], 1):
        dcg += grades.get(doc, 0) / math.log2(rank + 1)
    ideal_gains = sorted(grades.values(), reverse=True)[:k]
    idcg = 0.0
    for rank, gain in enumerate(ideal_gains, 1):
        idcg += gain / math.log2(rank + 1)
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


# ---------------------------------------------------------------------------
# measure specs and run-level evaluation


@dataclass(frozen=True)
class MeasureSpec:
    """A parsed measure string such as ``ndcg:k=3`` or ``compat:p=0.8``.

    ``source`` picks the judgments an ideal ranking is built from: graded
    qrels (``grades``), preference qrels (``topk``), both stacked
    (``combined``), or only the best preference group (``best-only``).
    """

    kind: str
    k: int = 10
    p: float = DEFAULT_PERSISTENCE
    depth: int = DEFAULT_DEPTH
    normalized: bool = True
    source: str = "grades"

    def __post_init__(self) -> None:
        if self.kind not in ("ndcg", "compat"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "ndcg" and self.k < 1:
            raise ValueError(f"ndcg depth k must be >= 1, got {self.k}")
        if self.source not in _SOURCES:
            raise ValueError(f"unknown judgment source {self.source!r}")
        RboParams(self.p, self.depth)  # range checks

    def rbo_params(self) -> RboParams:
        return RboParams(self.p, self.depth)

    def __str__(self) -> str:
        if self.kind == "ndcg":
            return f"ndcg:k={self.k}"
        norm = "true" if self.normalized else "false"
        return f"compat:p={self.p:g},depth={self.depth},norm={norm},src={self.source}"


def _parse_bool(token: str, key: str) -> bool:
    if token == "true":
        return True
    if token == "false":
        return False
    raise ValueError(f"measure option {key} expects true or false, got {token!r}")


def parse_measure_spec(text: str) -> MeasureSpec:
    """Parse ``kind[:key=value,...]`` measure strings."""
    head, _, rest = text.partition(":")
    options: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep or not key or not value:
                raise ValueError(f"malformed measure option {item!r} in {text!r}")
            if key in options:
                raise ValueError(f"repeated measure option {key!r} in {text!r}")
            options[key] = value
    if head == "ndcg":
        allowed = {"k"}
        unknown = set(options) - allowed
        if unknown:
            raise ValueError(f"unknown ndcg option(s) {sorted(unknown)} in {text!r}")
        k = int(options.get("k", "10"))
        return MeasureSpec(kind="ndcg", k=k)
    if head == "compat":
        allowed = {"p", "depth", "norm", "src"}
        unknown = set(options) - allowed
        if unknown:
            raise ValueError(f"unknown compat option(s) {sorted(unknown)} in {text!r}")
        return MeasureSpec(
            kind="compat",
            p=float(options.get("p", str(DEFAULT_PERSISTENCE))),
            depth=int(options.get("depth", str(DEFAULT_DEPTH))),
            normalized=_parse_bool(options.get("norm", "true"), "norm"),
            source=options.get("src", "grades"),
        )
    raise ValueError(f"unknown measure kind {head!r} in {text!r}")


@dataclass(frozen=True)
class MeasureReport:
    """Per-topic scores of one run under one measure.

    ``empty_ideal_topics`` flags topics whose judgment source produced no
    effective documents; they score 0 but are still averaged.
    """

    run_tag: str
    measure: str
    per_topic: dict[str, float]
    mean: float
    empty_ideal_topics: frozenset[str] = frozenset()


def _topic_levels(
    spec: MeasureSpec,
    topic_id: str,
    graded: GradedQrels | None,
    prefs: PreferenceQrels | None,
) -> EffectivenessLevels:
    if spec.source == "grades":
        assert graded is not None
        return levels_from_grades(graded, topic_id)
    assert prefs is not None
    if spec.source == "topk":
        return levels_from_preferences(prefs, topic_id)
    if spec.source == "best-only":
        groups = prefs.level_groups(topic_id)
        return EffectivenessLevels(topic_id, tuple(groups[:1]))
    if graded is None:
        raise ValueError("combined source requires graded qrels")
    return levels_combined(topk_from_preferences(prefs, topic_id), graded, topic_id)


def evaluate_run(
    run: RunFile,
    spec: MeasureSpec,
    graded: GradedQrels | None = None,
    prefs: PreferenceQrels | None = None,
) -> MeasureReport:
    """Score a run on every topic of the measure's judgment source.

    Topics the run did not retrieve are scored against an empty ranking and
    get 0.  Raises ValueError when the measure needs a judgment source that
    was not supplied.
    """
    if spec.kind == "ndcg" or spec.source == "grades":
        if graded is None:
            raise ValueError(f"measure {spec} requires graded qrels")
    if spec.kind == "compat" and spec.source != "grades":
        if prefs is None:
            raise ValueError(f"measure {spec} requires preference qrels")
        if spec.source == "combined" and graded is None:
            raise ValueError(f"measure {spec} requires graded qrels")

    topics = graded.topics() if spec.kind == "ndcg" or spec.source == "grades" else prefs.topics()
    if not topics:
        raise ValueError("judgment source contains no topics")

    per_topic: dict[str, float] = {}
    flagged: set[str] = set()
    params = spec.rbo_params() if spec.kind == "compat" else None
    for topic_id in topics:
        ranking = run.ranking(topic_id)
        if spec.kind == "ndcg":
            per_topic[topic_id] = ndcg_at_k(ranking, graded, topic_id, spec.k)
            if not any(grade > 0 for grade in graded.grades(topic_id).values()):
                flagged.add(topic_id)
            continue
        levels = _topic_levels(spec, topic_id, graded, prefs)
        if not levels.levels:
            flagged.add(topic_id)
            per_topic[topic_id] = 0.0
            continue
        per_topic[topic_id] = compatibility(ranking, levels, params, spec.normalized)
    mean = math.fsum(per_topic.values()) / len(per_topic)
    return MeasureReport(run.run_tag, str(spec), per_topic, mean, frozenset(flagged))
