"""Random recall matrices with no planted group structure.

Two null models: fixed-margin curveball shuffles of an observed matrix,
and a five-parameter synthetic classroom generator (size, report count,
nomination probability, and skews of child salience and report size).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .recall import DataError, RecallMatrix

# Parameter ranges spanned by the profile-audit default bounds.
PROFILE_BOUNDS = {
    "n_children": (15, 40),
    "n_reports": (15, 200),
    "nomination_probability": (0.10, 0.45),
    "nomination_skew": (-1.77, 1.99),
    "group_size_skew": (-0.52, 2.37),
}

MAX_REPORT_SIZE = 20
_CONCENTRATION_RANGE = (0.05, 1e4)


class InfeasibleProfileError(DataError):
    """Raised when a classroom profile cannot be realized."""


@dataclass(frozen=True)
class ClassroomProfile:
    """Generator parameters for one synthetic classroom."""

    n_children: int
    n_reports: int
    nomination_probability: float
    nomination_skew: float
    group_size_skew: float

    def __post_init__(self):
        if self.n_children < 2:
            raise ValueError("n_children must be >= 2")
        if self.n_reports < 1:
            raise ValueError("n_reports must be >= 1")
        if not 0.0 < self.nomination_probability < 1.0:
            raise ValueError("nomination_probability must be in (0, 1)")


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def skewness(x) -> float:
    """Adjusted Fisher-Pearson sample skewness (bias-corrected g1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < 3:
        raise ValueError("skewness needs at least 3 values")
    if np.ptp(x) == 0:
        raise ValueError("skewness undefined for a constant vector")
    return float(stats.skew(x, bias=False))


def curveball_randomize(
    rm: RecallMatrix, n_trades: int | None = None, seed=None
) -> RecallMatrix:
    """Fixed-margin shuffle by curveball trades.

    Each trade picks two rows and exchanges a random subset of the column
    indices held by exactly one of them, keeping both row sums (and all
    column sums) intact. Default trade count is 5x the number of rows.
    """
    rng = as_rng(seed)
    n, m = rm.entries.shape
    if n_trades is None:
        n_trades = 5 * n
    if n_trades < 0:
        raise ValueError("n_trades must be >= 0")
    if n < 2 or n_trades == 0:
        return RecallMatrix(rm.children, rm.entries.copy())
    rows = [set(np.flatnonzero(rm.entries[i]).tolist()) for i in range(n)]
    for _ in range(n_trades):
        i, j = rng.choice(n, size=2, replace=False)
        a, b = rows[i], rows[j]
        a_only = a - b
        b_only = b - a
        if not a_only or not b_only:
            continue
        pool = np.array(sorted(a_only | b_only))
        rng.shuffle(pool)
        new_a_only = set(pool[: len(a_only)].tolist())
        shared = a & b
        rows[i] = shared | new_a_only
        rows[j] = shared | (set(pool.tolist()) - new_a_only)
    entries = np.zeros((n, m), dtype=np.int8)
    for i, cols in enumerate(rows):
        entries[i, sorted(cols)] = 1
    return RecallMatrix(rm.children, entries)


def _beta_skew(mean: float, conc: float) -> float:
    a = mean * conc
    b = (1.0 - mean) * conc
    return 2.0 * (b - a) * np.sqrt(a + b + 1.0) / ((a + b + 2.0) * np.sqrt(a * b))


def _solve_concentration(mean: float, target_skew: float) -> float:
    """Concentration of a Beta with the given mean whose skewness is as
    close as possible to the target (clamped to a stable range)."""
    lo, hi = _CONCENTRATION_RANGE
    achievable_sign = np.sign(1.0 - 2.0 * mean)
    if target_skew == 0.0 or achievable_sign == 0 or np.sign(target_skew) != achievable_sign:
        return hi  # skew -> 0 as concentration grows; closest we can get
    f = lambda conc: abs(_beta_skew(mean, conc)) - abs(target_skew)
    if f(lo) <= 0.0:
        return lo
    if f(hi) >= 0.0:
        return hi
    return float(optimize.brentq(f, lo, hi, xtol=1e-10))


def _solve_mean_for_skew(target_skew: float, conc: float = 5.0) -> float:
    """Mean of a Beta with fixed concentration hitting the target skewness.

    Skewness decreases monotonically from +inf to -inf as the mean runs
    over (0, 1), so any target is reachable.
    """
    if target_skew == 0.0:
        return 0.5
    f = lambda mean: _beta_skew(mean, conc) - target_skew
    return float(optimize.brentq(f, 1e-4, 1.0 - 1e-4, xtol=1e-12))


def _subset_weight_table(odds: np.ndarray, max_size: int) -> np.ndarray:
    """Weighted counts of k-subsets of items i..n-1 (conditional Poisson DP).

    table[k, i] = sum over k-subsets S of {i..n-1} of prod(odds[S]).
    Shared by every report of a classroom; scale-invariant in the odds.
    """
    n = odds.size
    table = np.zeros((max_size + 1, n + 1))
    table[0, :] = 1.0
    for i in range(n - 1, -1, -1):
        table[1:, i] = odds[i] * table[:-1, i + 1] + table[1:, i + 1]
    return table


def _fixed_size_weighted_sample(
    rng: np.random.Generator, odds: np.ndarray, table: np.ndarray, size: int
) -> list[int]:
    """Draw a fixed-size subset with selection odds proportional to ``odds``.

    Conditional Poisson design: P(S) is proportional to prod(odds[S]) over
    subsets of the requested size, so fixed-size reports stay compatible
    with a multiplicative (maximum-entropy) cell-probability null.
    """
    n = odds.size
    chosen: list[int] = []
    need = size
    for i in range(n):
        if need == 0:
            break
        if n - i == need:  # must take everything that is left
            chosen.extend(range(i, n))
            break
        denom = table[need, i]
        p_inc = odds[i] * table[need - 1, i + 1] / denom if denom > 0 else 1.0
        if rng.random() < p_inc:
            chosen.append(i)
            need -= 1
    return chosen


def generate_classroom(profile: ClassroomProfile, seed=None) -> RecallMatrix:
    """Random classroom with the profile's margins-in-expectation.

    Report sizes come from a Beta moment-matched to the target mean
    (nomination probability x class size, clamped to [1, 20]) and size
    skew; per-child salience weights come from a Beta matched to the
    nomination skew; each report samples members without replacement with
    probability proportional to salience weight. Realized skews should be
    measured from the output, not assumed equal to the targets.
    """
    rng = as_rng(seed)
    n, m = profile.n_children, profile.n_reports
    size_max = min(MAX_REPORT_SIZE, n)
    mean_size = profile.nomination_probability * n
    if mean_size > size_max + 0.5:
        raise InfeasibleProfileError(
            f"mean report size {mean_size:.2f} exceeds the support maximum {size_max}"
        )
    if size_max == 1:
        sizes = np.ones(m, dtype=np.int64)
    else:
        mean01 = np.clip((mean_size - 1.0) / (size_max - 1.0), 0.02, 0.98)
        conc = _solve_concentration(mean01, profile.group_size_skew)
        draws = rng.beta(mean01 * conc, (1.0 - mean01) * conc, size=m)
        sizes = np.rint(1.0 + draws * (size_max - 1.0)).astype(np.int64)
        sizes = np.clip(sizes, 1, size_max)
    w_mean = _solve_mean_for_skew(profile.nomination_skew)
    weights = rng.beta(w_mean * 5.0, (1.0 - w_mean) * 5.0, size=n)
    odds = np.clip(weights / weights.mean(), 1e-8, 1e8)
    table = _subset_weight_table(odds, int(sizes.max()))
    entries = np.zeros((n, m), dtype=np.int8)
    names = [f"c{i + 1:02d}" for i in range(n)]
    for j in range(m):
        members = _fixed_size_weighted_sample(rng, odds, table, int(sizes[j]))
        entries[members, j] = 1
    return RecallMatrix(tuple(names), entries)


def sample_profile(bounds: dict | None = None, seed=None) -> ClassroomProfile:
    """Uniform draw of a profile within the given (or default) ranges."""
    rng = as_rng(seed)
    b = dict(PROFILE_BOUNDS)
    if bounds:
        b.update(bounds)
    lo, hi = b["n_children"]
    n_children = int(rng.integers(lo, hi + 1))
    lo, hi = b["n_reports"]
    n_reports = int(rng.integers(lo, hi + 1))
    return ClassroomProfile(
        n_children=n_children,
        n_reports=n_reports,
        nomination_probability=float(rng.uniform(*b["nomination_probability"])),
        nomination_skew=float(rng.uniform(*b["nomination_skew"])),
        group_size_skew=float(rng.uniform(*b["group_size_skew"])),
    )
