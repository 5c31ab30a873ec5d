"""Classical comparison rankings: lexicographic, per-capita, U-index.

The U-index treats every one of the M possible medal slots as landing in
NOC c with probability pi_c = (n_c/N)(T/M) and scores each NOC by the
upper-tail binomial p-value of its observed medal count, reported as
-log10(p).  Two definitions of the reference population N are supported
because the source material describes both: the aggregate population of
all NOCs in the dataset, and of those that had already won a medal at an
earlier Games.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import betainc, gammaln, logsumexp
from scipy.stats import binom, poisson

from .data import GamesDataset

logger = logging.getLogger(__name__)

N_DEFINITIONS = ("all", "previous-winners")

# below this the tail is recomputed by log-space summation, and the
# reported p-value is floored so U never exceeds 300
_LINEAR_TAIL_LIMIT = 1e-250
_P_VALUE_FLOOR = 1e-300


@dataclass(frozen=True)
class BaselineEntry:
    code: str
    per_capita_rate_per_million: float
    per_capita_rank: int | None
    lexicographic_rank: int | None
    u_index: float
    u_index_rank: int | None


@dataclass(frozen=True, eq=False)
class BaselineTable:
    entries: tuple[BaselineEntry, ...]
    n_definition: str
    n_population_used: float
    has_lexicographic: bool

    def entry(self, code: str) -> BaselineEntry:
        for e in self.entries:
            if e.code == code:
                return e
        raise KeyError(code)


def _assign_min_ranks(ordered: list[tuple[str, object]]) -> dict[str, int]:
    """Positions for a best-first list; exactly equal keys share the min rank."""
    ranks: dict[str, int] = {}
    prev_key: object = None
    prev_rank = 0
    for pos, (code, key) in enumerate(ordered, start=1):
        if pos > 1 and key == prev_key:
            ranks[code] = prev_rank
        else:
            ranks[code] = pos
            prev_key, prev_rank = key, pos
    return ranks


def per_capita_rank(data: GamesDataset) -> tuple[dict[str, float], dict[str, int]]:
    """Observed medals per million and the descending-rate ranking.

    Returns (rates for every NOC, ranks over medal winners).
    """
    rates = {r.code: r.observed_rate_per_million for r in data.records}
    winners = sorted(
        ((r.code, rates[r.code]) for r in data.medal_winners),
        key=lambda t: (-t[1], t[0]),
    )
    return rates, _assign_min_ranks(winners)


def lexicographic_rank(data: GamesDataset) -> dict[str, int] | None:
    """Official-style ranking by gold, then silver, bronze, total.

    Returns None (with a warning) when any medal winner lacks the
    gold/silver/bronze split.
    """
    winners = data.medal_winners
    if any(not r.has_medal_split for r in winners):
        missing = [r.code for r in winners if not r.has_medal_split]
        logger.warning(
            "lexicographic ranking omitted: no medal split for %s", ", ".join(missing)
        )
        return None
    keyed = sorted(
        (
            (r.code, (r.gold, r.silver, r.bronze, r.total_medals))
            for r in winners
        ),
        key=lambda t: (tuple(-v for v in t[1]), t[0]),
    )
    return _assign_min_ranks(keyed)


def _log_binom_upper_tail(m_trials: int, k: int, pi: float) -> float:
    """ln P(Binomial(m_trials, pi) >= k) by log-space summation."""
    if k <= 0:
        return 0.0
    if k > m_trials:
        return -math.inf
    ks = np.arange(k, m_trials + 1)
    log_pmf = (
        gammaln(m_trials + 1.0)
        - gammaln(ks + 1.0)
        - gammaln(m_trials - ks + 1.0)
        + ks * math.log(pi)
        + (m_trials - ks) * math.log1p(-pi)
    )
    return float(logsumexp(log_pmf))


def binomial_tail_pvalue(m_trials: int, k: int, pi: float) -> float:
    """Upper-tail p-value P(X >= k), X ~ Binomial(m_trials, pi).

    Uses the regularized incomplete beta identity, switching to direct
    log-space summation when the tail is too small for it, and floors
    the result at 1e-300 (with a warning) instead of underflowing.
    """
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi={pi} outside (0, 1)")
    if k <= 0:
        return 1.0
    if k > m_trials:
        return 0.0
    p = float(betainc(k, m_trials - k + 1, pi))
    if p < _LINEAR_TAIL_LIMIT:
        # exp underflows to 0.0 for very small tails; the floor below catches it
        p = math.exp(_log_binom_upper_tail(m_trials, k, pi))
    if p < _P_VALUE_FLOOR:
        logger.warning(
            "binomial tail below %.0e floored (trials=%d, k=%d)", _P_VALUE_FLOOR, m_trials, k
        )
        p = _P_VALUE_FLOOR
    return p


def reference_population(
    data: GamesDataset,
    n_definition: str = "all",
    n_override: float | None = None,
    first_medal_year: Mapping[str, int] | None = None,
) -> float:
    """Aggregate population N used by the U-index null."""
    if n_override is not None:
        if n_override <= 0:
            raise ValueError("n_override must be positive")
        return float(n_override)
    if n_definition not in N_DEFINITIONS:
        raise ValueError(f"unknown N definition {n_definition!r}")
    if n_definition == "all":
        return float(data.total_population)
    if first_medal_year is None:
        from .datasets import first_medal_years

        first_medal_year = first_medal_years()
    total = sum(
        r.population
        for r in data.records
        if first_medal_year.get(r.code, data.year) < data.year
    )
    if total == 0:
        raise ValueError("no NOC in the dataset had won a medal before these Games")
    return float(total)


def dp_u_index(
    data: GamesDataset,
    n_definition: str = "all",
    n_override: float | None = None,
    first_medal_year: Mapping[str, int] | None = None,
) -> tuple[dict[str, float], dict[str, int], float]:
    """U-index values for every NOC plus the ranking over medal winners.

    Returns (U values, ranks, N used).  U = -log10 of the upper-tail
    binomial p-value; a NOC with no medals has an empty upper-tail
    complement, p-value 1, U = 0.
    """
    n_pop = reference_population(data, n_definition, n_override, first_medal_year)
    t_total = data.total_medals_awarded
    quota = data.medal_quota
    values: dict[str, float] = {}
    for r in data.records:
        pi = (r.population / n_pop) * (t_total / quota)
        if pi >= 1.0:
            raise ValueError(f"{r.code}: medal-slot probability {pi:.3f} >= 1")
        if r.total_medals == 0:
            values[r.code] = 0.0
            continue
        p = binomial_tail_pvalue(quota, r.total_medals, pi)
        # p == 1.0 would give -0.0; keep the zero unsigned
        values[r.code] = max(0.0, -math.log10(p))
    winners = sorted(
        ((r.code, values[r.code]) for r in data.medal_winners),
        key=lambda t: (-t[1], t[0]),
    )
    return values, _assign_min_ranks(winners), n_pop


def dp_poisson_equivalence(n_c: float, n_pop: float, t_total: int, quota: int) -> float:
    """Total-variation distance between the U-index binomial null and its
    Poisson approximation with matching mean n_c T / N."""
    if min(n_c, n_pop, t_total, quota) <= 0:
        raise ValueError("all inputs must be positive")
    pi = (n_c / n_pop) * (t_total / quota)
    if pi >= 1.0:
        raise ValueError(f"medal-slot probability {pi:.3f} >= 1")
    lam = n_c * t_total / n_pop
    support = np.arange(quota + 1)
    b = binom.pmf(support, quota, pi)
    q = poisson.pmf(support, lam)
    tail = max(0.0, 1.0 - float(poisson.cdf(quota, lam)))
    return 0.5 * (float(np.abs(b - q).sum()) + tail)


def compute_baselines(
    data: GamesDataset,
    n_definition: str = "all",
    n_override: float | None = None,
    first_medal_year: Mapping[str, int] | None = None,
) -> BaselineTable:
    """All three baseline rankings joined into one table (record order)."""
    rates, pc_ranks = per_capita_rank(data)
    lex_ranks = lexicographic_rank(data)
    u_values, u_ranks, n_pop = dp_u_index(data, n_definition, n_override, first_medal_year)
    entries = tuple(
        BaselineEntry(
            code=r.code,
            per_capita_rate_per_million=rates[r.code],
            per_capita_rank=pc_ranks.get(r.code),
            lexicographic_rank=None if lex_ranks is None else lex_ranks.get(r.code),
            u_index=u_values[r.code],
            u_index_rank=u_ranks.get(r.code),
        )
        for r in data.records
    )
    return BaselineTable(
        entries=entries,
        n_definition="override" if n_override is not None else n_definition,
        n_population_used=n_pop,
        has_lexicographic=lex_ranks is not None,
    )
