"""Descriptive statistics, correlations with significance, friend influence.

The correlation significance test is the usual two-tailed t test on
Pearson's r, evaluated through the regularized incomplete beta function
(implemented here with the standard continued-fraction expansion, good to
well below 1e-8 absolute error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .domain import ParticipantProfile, SensorSample
from .errors import UndefinedCorrelationError, ValidationError
from .geo import haversine_m

LEVEL_NAMES = {2: "high", 1: "medium", 0: "low"}

STAR_THRESHOLDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


# ---------------------------------------------------------------------------
# descriptive statistics


@dataclass(frozen=True)
class TargetDescriptives:
    counts: dict[str, int]  # keys: high, medium, low
    percentages: dict[str, float]
    mean: float
    sd: float  # population standard deviation
    n: int


@dataclass(frozen=True)
class DescriptiveReport:
    pleasance: TargetDescriptives
    activation: TargetDescriptives
    n: int


def descriptives_from_counts(level_counts: Mapping[int, int]) -> TargetDescriptives:
    """Mean and population SD of a 0/1/2 coded variable given level counts."""
    counts = {level: int(level_counts.get(level, 0)) for level in (0, 1, 2)}
    n = sum(counts.values())
    if n == 0:
        raise ValidationError("cannot describe an empty label set")
    mean = sum(level * c for level, c in counts.items()) / n
    mean_sq = sum(level * level * c for level, c in counts.items()) / n
    sd = math.sqrt(max(mean_sq - mean * mean, 0.0))
    return TargetDescriptives(
        counts={LEVEL_NAMES[lv]: counts[lv] for lv in (2, 1, 0)},
        percentages={LEVEL_NAMES[lv]: 100.0 * counts[lv] / n for lv in (2, 1, 0)},
        mean=mean,
        sd=sd,
        n=n,
    )


def descriptive_stats(labels: Sequence[tuple[int, int]]) -> DescriptiveReport:
    """Per-target level counts, percentages, mean and SD over (p, a) pairs."""
    if not labels:
        raise ValidationError("cannot describe an empty label set")
    p_counts: dict[int, int] = {0: 0, 1: 0, 2: 0}
    a_counts: dict[int, int] = {0: 0, 1: 0, 2: 0}
    for p, a in labels:
        p_counts[p] += 1
        a_counts[a] += 1
    return DescriptiveReport(
        pleasance=descriptives_from_counts(p_counts),
        activation=descriptives_from_counts(a_counts),
        n=len(labels),
    )


@dataclass(frozen=True)
class HourlyPoint:
    mean_pleasance: float
    mean_activation: float
    n: int


def hourly_profile(examples: Sequence) -> dict[int, HourlyPoint]:
    """Mean pleasance/activation per local hour; empty hours are absent."""
    sums: dict[int, list[float]] = {}
    for ex in examples:
        hour = int(ex.features.hour_of_day)
        acc = sums.setdefault(hour, [0.0, 0.0, 0])
        acc[0] += ex.pleasance
        acc[1] += ex.activation
        acc[2] += 1
    return {
        hour: HourlyPoint(acc[0] / acc[2], acc[1] / acc[2], int(acc[2]))
        for hour, acc in sorted(sums.items())
    }


# ---------------------------------------------------------------------------
# Pearson correlation and significance


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValidationError("x and y must be 1-d vectors of equal length")
    n = len(xs)
    if n < 3:
        raise ValidationError(f"need at least 3 observations, got {n}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-variance input")
    return float(np.dot(dx, dy) / math.sqrt(sxx * syy))


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ValidationError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), accurate to well under 1e-8 absolute error."""
    if a <= 0 or b <= 0:
        raise ValidationError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def correlation_p_value(r: float, n: int) -> float:
    """Two-tailed p for Pearson's r under the t distribution with n-2 df."""
    if n < 3:
        raise ValidationError(f"need at least 3 observations, got {n}")
    if abs(r) > 1.0:
        raise ValidationError(f"|r| must be <= 1, got {r}")
    if abs(r) == 1.0:
        return 0.0
    df = n - 2
    t = r * math.sqrt(df / (1.0 - r * r))
    # P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def significance_stars(r: float, n: int) -> str:
    """Map a correlation to its star marker: p<.001 ***, p<.01 **, p<.05 *."""
    p = correlation_p_value(r, n)
    for threshold, stars in STAR_THRESHOLDS:
        if p < threshold:
            return stars
    return ""


# ---------------------------------------------------------------------------
# correlation matrix


@dataclass(frozen=True)
class CorrelationCell:
    r: float
    stars: str
    n: int


@dataclass(frozen=True)
class CorrelationMatrix:
    variables: tuple[str, ...]
    cells: tuple[tuple[CorrelationCell | None, ...], ...]  # None = absent

    def cell(self, a: str, b: str) -> CorrelationCell | None:
        i = self.variables.index(a)
        j = self.variables.index(b)
        return self.cells[i][j]


def correlation_matrix(
    rows: Sequence[Mapping[str, float | None]],
    variables: Sequence[str],
    min_n: int = 3,
) -> CorrelationMatrix:
    """Pairwise-complete Pearson matrix with significance stars.

    Each unordered pair is computed once and mirrored, so the result is
    exactly symmetric. Pairs with fewer than min_n complete rows or zero
    variance are recorded as absent.
    """
    variables = tuple(variables)
    columns = {
        v: np.array(
            [float(row[v]) if row.get(v) is not None else np.nan for row in rows],
            dtype=np.float64,
        )
        for v in variables
    }
    size = len(variables)
    cells: list[list[CorrelationCell | None]] = [[None] * size for _ in range(size)]
    for i, vi in enumerate(variables):
        present_i = ~np.isnan(columns[vi])
        n_i = int(present_i.sum())
        cells[i][i] = CorrelationCell(r=1.0, stars="***", n=n_i) if n_i >= min_n else None
        for j in range(i + 1, size):
            vj = variables[j]
            both = present_i & ~np.isnan(columns[vj])
            n = int(both.sum())
            if n < min_n:
                continue
            try:
                r = pearson_r(columns[vi][both], columns[vj][both])
            except UndefinedCorrelationError:
                continue
            cell = CorrelationCell(r=r, stars=significance_stars(r, n), n=n)
            cells[i][j] = cell
            cells[j][i] = cell
    return CorrelationMatrix(variables=variables, cells=tuple(tuple(r) for r in cells))


TABLE_VARIABLES = (
    "pleasance",
    "activation",
    "age",
    "gender_male",
    "neuroticism",
    "extraversion",
    "openness",
    "agreeableness",
    "conscientiousness",
    "heart_rate",
    "light_level",
    "activity",
    "vmc",
    "vmc_window",
    "temperature",
    "humidity",
    "pressure",
    "wind",
    "clouds",
    "weekend_holiday",
    "hour",
)


def build_correlation_rows(
    examples: Sequence,
    profiles: Mapping[str, ParticipantProfile],
    vmc_window_values: Sequence[float] | None = None,
) -> list[dict[str, float | None]]:
    """One row per labeled example over the standard correlation variables.

    Profile-derived columns are None for users without a profile entry,
    leaving them to pairwise-complete handling. `vmc_window_values`
    optionally replaces the per-example trailing-window VMC (e.g. a 24 h
    variant recomputed by the caller).
    """
    if vmc_window_values is not None and len(vmc_window_values) != len(examples):
        raise ValidationError("vmc_window_values must align with examples")
    rows: list[dict[str, float | None]] = []
    for idx, ex in enumerate(examples):
        profile = profiles.get(ex.user)
        big5 = profile.big_five if profile else None
        fv = ex.features
        rows.append(
            {
                "pleasance": float(ex.pleasance),
                "activation": float(ex.activation),
                "age": float(profile.age) if profile and profile.age is not None else None,
                "gender_male": (
                    None
                    if profile is None or profile.gender.value == "unknown"
                    else float(profile.gender.value == "male")
                ),
                "neuroticism": big5.neuroticism if big5 else None,
                "extraversion": big5.extraversion if big5 else None,
                "openness": big5.openness if big5 else None,
                "agreeableness": big5.agreeableness if big5 else None,
                "conscientiousness": big5.conscientiousness if big5 else None,
                "heart_rate": float(fv.heart_rate),
                "light_level": float(fv.light_level),
                "activity": float(fv.activity),
                "vmc": float(fv.vmc),
                "vmc_window": (
                    float(vmc_window_values[idx])
                    if vmc_window_values is not None
                    else float(fv.vmc_last_4h)
                ),
                "temperature": float(fv.temperature),
                "humidity": float(fv.humidity),
                "pressure": float(fv.pressure),
                "wind": float(fv.wind),
                "clouds": float(fv.clouds),
                "weekend_holiday": float(fv.is_weekend_or_holiday),
                "hour": float(fv.hour_of_day),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# friend influence


@dataclass(frozen=True)
class InfluenceScore:
    subject: str
    friend: str
    r: float
    n_events: int  # number of co-presence occurrences
    direction: str  # "positive" | "negative"


def copresence_events(
    subject_moods: Sequence,
    subject_samples: Sequence[SensorSample],
    friend_samples: Sequence[SensorSample],
    radius_m: float = 50.0,
    slack_s: float = 1800.0,
) -> list[bool | None]:
    """Per mood input: was the friend within radius of the subject nearby in time?

    None (absent) when either side has no positioned samples inside the
    slack window around that mood input.
    """
    subj = [s for s in subject_samples if s.has_position]
    frnd = [s for s in friend_samples if s.has_position]
    out: list[bool | None] = []
    for mood in subject_moods:
        t = mood.timestamp
        near_subj = [s for s in subj if abs((s.timestamp - t).total_seconds()) <= slack_s]
        near_frnd = [s for s in frnd if abs((s.timestamp - t).total_seconds()) <= slack_s]
        if not near_subj or not near_frnd:
            out.append(None)
            continue
        together = any(
            haversine_m(a.latitude, a.longitude, b.latitude, b.longitude) <= radius_m
            for a in near_subj
            for b in near_frnd
        )
        out.append(together)
    return out


def friend_influence(
    subject: str,
    friend: str,
    pleasance: Sequence[int],
    indicators: Sequence[bool | None],
    min_events: int = 5,
) -> InfluenceScore | None:
    """Point-biserial correlation between mood and friend co-presence.

    Returns None (excluded from ranking) without at least min_events
    co-present and min_events non-co-present observations, or when the
    correlation is undefined.
    """
    if len(pleasance) != len(indicators):
        raise ValidationError("pleasance and indicators must align")
    pairs = [(p, ind) for p, ind in zip(pleasance, indicators) if ind is not None]
    n_true = sum(1 for _, ind in pairs if ind)
    n_false = len(pairs) - n_true
    if n_true < min_events or n_false < min_events:
        return None
    try:
        r = pearson_r(
            [float(p) for p, _ in pairs], [1.0 if ind else 0.0 for _, ind in pairs]
        )
    except (UndefinedCorrelationError, ValidationError):
        return None
    return InfluenceScore(
        subject=subject,
        friend=friend,
        r=r,
        n_events=n_true,
        direction="positive" if r >= 0 else "negative",
    )


def rank_influences(scores: Sequence[InfluenceScore]) -> list[InfluenceScore]:
    """Strongest influence first (by |r|, then friend id for stability)."""
    return sorted(scores, key=lambda s: (-abs(s.r), s.friend))
