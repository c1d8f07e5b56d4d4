"""Significance testing and measure-agreement statistics.

Everything here is self-contained: the Student t distribution is evaluated
through the regularized incomplete beta function (continued fraction), so
the package does not need a stats dependency at runtime.  Degenerate
zero-variance inputs follow explicit conventions instead of dividing by
zero: a paired test on identical score vectors gives p = 1, on vectors with
a constant nonzero difference p = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from prefeval.metrics import MeasureReport

_BETACF_MAX_ITER = 300
_BETACF_EPS = 3e-16
_BETACF_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a} b={b} x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError(f"shape parameters must be positive, got a={a} b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # Use whichever tail the continued fraction converges fastest on.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: int) -> float:
    """CDF of Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 0.0 if t < 0 else 1.0
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t < 0 else 1.0 - tail


def student_t_ppf(q: float, df: int) -> float:
    """Quantile of Student's t found by bisection on the CDF."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile probability must be in (0, 1), got {q}")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -student_t_ppf(1.0 - q, df)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, df) < q:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError(f"quantile bracket overflow for q={q} df={df}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if student_t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test with n - 1 degrees of freedom.

    Zero-variance differences use the documented conventions: all-zero
    differences give (0, 1); constant nonzero differences give
    (signed infinity, 0).
    """
    if len(a) != len(b):
        raise ValueError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError(f"paired t-test needs at least 2 pairs, got {n}")
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    mean = float(diff.mean())
    sd = float(diff.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0)
        return TTestResult(math.copysign(math.inf, mean), 0.0)
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    # Two-sided p in one call: P(|T| >= |t|) = I_x(df/2, 1/2), x = df/(df+t^2).
    p = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return TTestResult(t, min(max(p, 0.0), 1.0))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Kendall's tau-b (tie corrected) between two paired sequences.

    Raises ValueError when either sequence is constant, where the
    coefficient is undefined.
    """
    if len(x) != len(y):
        raise ValueError(f"sequences differ in length: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise ValueError(f"kendall tau needs at least 2 observations, got {n}")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx == 0 or dy == 0:
                continue
            if (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt(float(n0 - ties_x) * float(n0 - ties_y))
    if denom == 0.0:
        raise ValueError("kendall tau is undefined for a constant sequence")
    return (concordant - discordant) / denom


@dataclass(frozen=True)
class ConfidenceInterval:
    mean: float
    lower: float
    upper: float
    level: float


def mean_ci(scores: Sequence[float], level: float = 0.95) -> ConfidenceInterval:
    """Mean with a two-sided t confidence interval (sample stdev, ddof 1)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    n = len(scores)
    if n < 2:
        raise ValueError(f"confidence interval needs at least 2 scores, got {n}")
    arr = np.asarray(scores, dtype=np.float64)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1))
    half = student_t_ppf(0.5 * (1.0 + level), n - 1) * sd / math.sqrt(n)
    return ConfidenceInterval(mean, mean - half, mean + half, level)


# ---------------------------------------------------------------------------
# run-by-topic score grids


@dataclass(frozen=True)
class ScoreMatrix:
    """Scores of several runs over one shared topic set."""

    run_tags: tuple[str, ...]
    topics: tuple[str, ...]
    scores: np.ndarray  # shape (runs, topics)

    def __post_init__(self) -> None:
        if self.scores.shape != (len(self.run_tags), len(self.topics)):
            raise ValueError(
                f"score grid shape {self.scores.shape} does not match "
                f"{len(self.run_tags)} runs x {len(self.topics)} topics"
            )

    @classmethod
    def from_reports(cls, reports: Sequence[MeasureReport]) -> "ScoreMatrix":
        if not reports:
            raise ValueError("no reports to combine")
        topics = tuple(sorted(reports[0].per_topic))
        for report in reports[1:]:
            if tuple(sorted(report.per_topic)) != topics:
                raise ValueError(
                    f"topic set of run {report.run_tag!r} does not match "
                    f"run {reports[0].run_tag!r}"
                )
        grid = np.array(
            [[report.per_topic[t] for t in topics] for report in reports],
            dtype=np.float64,
        )
        return cls(tuple(r.run_tag for r in reports), topics, grid)

    def row(self, run_tag: str) -> np.ndarray:
        return self.scores[self.run_tags.index(run_tag)]


@dataclass(frozen=True)
class PairwiseTest:
    run_a: str
    run_b: str
    statistic: float
    p_value: float
    distinguished: bool


def pairwise_tests(matrix: ScoreMatrix, alpha: float = 0.05) -> tuple[PairwiseTest, ...]:
    """Paired t-test for every unordered run pair, in run order."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    out: list[PairwiseTest] = []
    n = len(matrix.run_tags)
    for i in range(n - 1):
        for j in range(i + 1, n):
            result = paired_t_test(matrix.scores[i], matrix.scores[j])
            out.append(
                PairwiseTest(
                    matrix.run_tags[i],
                    matrix.run_tags[j],
                    result.statistic,
                    result.p_value,
                    result.p_value < alpha,
                )
            )
    return tuple(out)


@dataclass(frozen=True)
class SensitivityReport:
    """Fraction of run pairs a measure tells apart at the given alpha.

    No multiple-test correction is applied: the count is of nominal
    p < alpha outcomes over all n(n-1)/2 pairs.
    """

    measure: str
    distinguished: int
    total_pairs: int
    sensitivity: float
    alpha: float


def sensitivity(
    matrix: ScoreMatrix, alpha: float = 0.05, measure: str = ""
) -> SensitivityReport:
    tests = pairwise_tests(matrix, alpha)
    if not tests:
        raise ValueError("sensitivity needs at least two runs")
    distinguished = sum(1 for t in tests if t.distinguished)
    return SensitivityReport(
        measure=measure,
        distinguished=distinguished,
        total_pairs=len(tests),
        sensitivity=distinguished / len(tests),
        alpha=alpha,
    )
