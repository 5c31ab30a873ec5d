"""Posterior rank tables, credible intervals, shrinkage and trajectories.

Ranking happens per draw: medal-winning NOCs are ordered by expected
medals per person (rank 1 = best) and the per-draw ranks are then
aggregated to means, medians and equal-tailed intervals.  Because the
expected rate is p_c times a factor shared by every NOC, per-draw rank
order coincides with ordering by p_c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import GamesDataset, MultiGamesPanel
from .model import PriorSpec
from .sampler import PosteriorDraws, SamplerConfig, run_sampler

PER_MILLION = 1e6


@dataclass(frozen=True)
class RankSummary:
    """Posterior rank and rate summaries for one NOC.

    Rank fields are None for NOCs that won no medals: they get rate
    summaries but are never ranked.
    """

    code: str
    posterior_mean_rank: float | None
    posterior_median_rank: float | None
    rank_ci80: tuple[float, float] | None
    rate_median_per_million: float
    rate_ci95_per_million: tuple[float, float]
    observed_rate_per_million: float


@dataclass(frozen=True, eq=False)
class RankingTable:
    """Ordered posterior ranking of the medal-winning NOCs."""

    statistic: str  # "mean" or "median": which summary orders the table
    rows: tuple[RankSummary, ...]
    zero_medal: tuple[RankSummary, ...]
    year: int
    label: str

    def row(self, code: str) -> RankSummary:
        for r in self.rows + self.zero_medal:
            if r.code == code:
                return r
        raise KeyError(code)

    def seat(self, code: str) -> int:
        """1-based position of a medal winner in the ordered table."""
        for i, r in enumerate(self.rows):
            if r.code == code:
                return i + 1
        raise KeyError(code)

    def top(self, k: int) -> tuple[str, ...]:
        return tuple(r.code for r in self.rows[:k])


@dataclass(frozen=True)
class ShrinkageRecord:
    code: str
    population: int
    observed_rate_per_million: float
    posterior_median_rate_per_million: float
    medal_total: int
    has_multimedalist: bool
    zero_medal: bool


def per_draw_rates(draws: PosteriorDraws) -> np.ndarray:
    """(total draws, C) matrix of expected medals per person."""
    if draws.n_stored == 0:
        raise ValueError("no draws")
    q = draws.flat_q()
    factor = 1.0 + q[:, 0] * (1.0 + q[:, 1] * (1.0 + q[:, 2]))
    return draws.flat_p() * factor[:, None]


def per_draw_ranks(rates: np.ndarray, codes: tuple[str, ...]) -> np.ndarray:
    """Rank each draw's rates descending; rank 1 = best.

    Exact float ties are broken by ascending NOC code so the result is
    deterministic.
    """
    n_draws, w = rates.shape
    # alphabetical position of each column, used as the secondary sort key
    code_order = np.argsort(np.argsort(np.asarray(codes)))
    ranks = np.empty((n_draws, w), dtype=np.int32)
    seats = np.arange(1, w + 1, dtype=np.int32)
    for d in range(n_draws):
        order = np.lexsort((code_order, -rates[d]))
        ranks[d, order] = seats
    return ranks


def summarize_ranks(
    draws: PosteriorDraws, data: GamesDataset, statistic: str = "mean"
) -> RankingTable:
    """Aggregate per-draw ranks and rates into the reporting table.

    Ranks cover medal winners only; rate medians and 95% intervals are
    produced for every NOC.  ``statistic`` selects whether the table is
    ordered by posterior mean rank (default) or posterior median rank.
    """
    if statistic not in ("mean", "median"):
        raise ValueError(f"unknown ordering statistic {statistic!r}")
    if draws.codes != data.codes:
        raise ValueError("draws and dataset disagree on NOC codes")
    winner_idx = [i for i, r in enumerate(data.records) if r.total_medals > 0]
    if not winner_idx:
        raise ValueError("dataset has no medal winners")

    rates = per_draw_rates(draws)
    winner_codes = tuple(data.codes[i] for i in winner_idx)
    ranks = per_draw_ranks(rates[:, winner_idx], winner_codes)

    mean_rank = ranks.mean(axis=0)
    median_rank = np.median(ranks, axis=0)
    rank_lo, rank_hi = np.quantile(ranks, [0.10, 0.90], axis=0)

    rate_med = np.median(rates, axis=0) * PER_MILLION
    rate_lo, rate_hi = np.quantile(rates, [0.025, 0.975], axis=0) * PER_MILLION

    summaries: dict[str, RankSummary] = {}
    for j, i in enumerate(winner_idx):
        rec = data.records[i]
        summaries[rec.code] = RankSummary(
            code=rec.code,
            posterior_mean_rank=float(mean_rank[j]),
            posterior_median_rank=float(median_rank[j]),
            rank_ci80=(float(rank_lo[j]), float(rank_hi[j])),
            rate_median_per_million=float(rate_med[i]),
            rate_ci95_per_million=(float(rate_lo[i]), float(rate_hi[i])),
            observed_rate_per_million=rec.observed_rate_per_million,
        )

    key = {
        "mean": lambda s: (s.posterior_mean_rank, s.code),
        "median": lambda s: (s.posterior_median_rank, s.code),
    }[statistic]
    rows = tuple(sorted(summaries.values(), key=key))

    zero = tuple(
        RankSummary(
            code=rec.code,
            posterior_mean_rank=None,
            posterior_median_rank=None,
            rank_ci80=None,
            rate_median_per_million=float(rate_med[i]),
            rate_ci95_per_million=(float(rate_lo[i]), float(rate_hi[i])),
            observed_rate_per_million=rec.observed_rate_per_million,
        )
        for i, rec in enumerate(data.records)
        if rec.total_medals == 0
    )
    return RankingTable(
        statistic=statistic, rows=rows, zero_medal=zero, year=data.year, label=data.label
    )


def shrinkage_table(draws: PosteriorDraws, data: GamesDataset) -> list[ShrinkageRecord]:
    """Observed versus posterior-median rates for every NOC."""
    if draws.codes != data.codes:
        raise ValueError("draws and dataset disagree on NOC codes")
    rates = per_draw_rates(draws)
    med = np.median(rates, axis=0) * PER_MILLION
    out = []
    for i, rec in enumerate(data.records):
        out.append(
            ShrinkageRecord(
                code=rec.code,
                population=rec.population,
                observed_rate_per_million=rec.observed_rate_per_million,
                posterior_median_rate_per_million=float(med[i]),
                medal_total=rec.total_medals,
                has_multimedalist=(rec.m2 + rec.m3 + rec.m4plus) > 0,
                zero_medal=rec.total_medals == 0,
            )
        )
    return out


def rank_trajectory(
    panel: MultiGamesPanel,
    spec: PriorSpec,
    config: SamplerConfig,
    statistic: str = "mean",
) -> dict[int, RankingTable]:
    """Fit every Games in the panel independently; no pooling across years."""
    tables: dict[int, RankingTable] = {}
    for games in panel.games:
        try:
            draws, _ = run_sampler(games, spec, config)
            tables[games.year] = summarize_ranks(draws, games, statistic=statistic)
        except Exception as exc:
            raise RuntimeError(f"fit for {games.year} failed: {exc}") from exc
    return tables


def trajectory_path(
    tables: dict[int, RankingTable], code: str
) -> list[tuple[int, int | None]]:
    """A NOC's seat per year; None when it has no rank that year."""
    path = []
    for year in sorted(tables):
        try:
            seat = tables[year].seat(code)
        except KeyError:
            seat = None
        path.append((year, seat))
    return path
