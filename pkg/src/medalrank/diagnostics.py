"""Checks of the Poisson assumption across successive Games.

Under a stable Poisson rate a NOC's medal counts over several Games have
variance close to their mean; the panel diagnostic compares each NOC's
sample variance against a Monte Carlo predictive band, and the pairwise
test scores the split of two successive counts against Binomial(R, 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .data import MultiGamesPanel


@dataclass(frozen=True)
class MeanVarPoint:
    code: str
    sample_mean: float
    sample_variance: float
    games_count: int
    is_host_in_window: bool


def mean_variance_panel(panel: MultiGamesPanel) -> list[MeanVarPoint]:
    """Per-NOC mean and unbiased variance of medal counts over the panel.

    Games a NOC did not enter are missing, not zero; NOCs with fewer
    than two non-missing entries are dropped.
    """
    hosts = panel.host_codes()
    out = []
    for code in panel.codes:
        counts = [c for c in panel.series[code] if c is not None]
        if len(counts) < 2:
            continue
        arr = np.asarray(counts, dtype=float)
        out.append(
            MeanVarPoint(
                code=code,
                sample_mean=float(arr.mean()),
                sample_variance=float(arr.var(ddof=1)),
                games_count=len(counts),
                is_host_in_window=code in hosts,
            )
        )
    return out


def poisson_variance_band(
    mean: float,
    n_games: int,
    level: float = 0.90,
    reps: int = 10_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Equal-tailed predictive band for the sample variance of n_games
    Poisson(mean) counts, estimated from ``reps`` simulations."""
    if mean <= 0:
        raise ValueError("mean must be positive")
    if n_games < 2:
        raise ValueError("need at least 2 Games for a sample variance")
    if reps < 10_000:
        raise ValueError("reps must be at least 10000")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    draws = rng.poisson(mean, size=(reps, n_games))
    variances = draws.var(axis=1, ddof=1)
    lo, hi = np.quantile(variances, [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    return float(lo), float(hi)


def excess_variation_pvalue(m_a: int, m_b: int) -> float:
    """Exact two-sided test of m_a against Binomial(m_a + m_b, 1/2).

    p = P(|X - R/2| >= |m_a - R/2|), exact by integer summation; R = 0
    carries no information and is defined as p = 1.
    """
    if m_a < 0 or m_b < 0:
        raise ValueError("counts must be non-negative")
    r = m_a + m_b
    if r == 0:
        return 1.0
    # work in half-units to keep |2k - R| integral
    d = abs(2 * m_a - r)
    total = sum(comb(r, k) for k in range(r + 1) if abs(2 * k - r) >= d)
    return min(1.0, total / 2**r)


def successive_pair_pvalues(panel: MultiGamesPanel) -> dict[str, list[tuple[int, int, float]]]:
    """Excess-variation p-values for every adjacent Games pair per NOC.

    Pairs where the NOC is missing from either Games are skipped; the
    result maps code -> [(year_a, year_b, p-value), ...].
    """
    years = panel.years
    out: dict[str, list[tuple[int, int, float]]] = {}
    for code, series in panel.series.items():
        pairs = []
        for i in range(len(series) - 1):
            a, b = series[i], series[i + 1]
            if a is None or b is None:
                continue
            pairs.append((years[i], years[i + 1], excess_variation_pvalue(a, b)))
        if pairs:
            out[code] = pairs
    return out
