"""Poisson-assumption diagnostics: mean-variance panel, predictive band,
and the exact excess-variation test."""

from __future__ import annotations

from fractions import Fraction

import pytest

from medalrank.data import MultiGamesPanel
from medalrank.diagnostics import (
    excess_variation_pvalue,
    mean_variance_panel,
    poisson_variance_band,
    successive_pair_pvalues,
)

import oracles
from conftest import make_games, noc


def seven_games_series(*counts_by_noc):
    """Builds a panel where NOC k wins counts_by_noc[k][t] singles in year t."""
    n_games = len(counts_by_noc[0])
    games = []
    for t in range(n_games):
        records = [
            noc(f"N{k}", 1_000_000, m1=series[t])
            for k, series in enumerate(counts_by_noc)
            if series[t] is not None
        ]
        games.append(make_games(records, year=2000 + 4 * t))
    return MultiGamesPanel(games=tuple(games))


# --- mean/variance panel -------------------------------------------------------


def test_constant_series_has_zero_variance():
    panel = seven_games_series([2] * 7, [1] * 7)
    point = next(p for p in mean_variance_panel(panel) if p.code == "N0")
    assert point.sample_mean == 2.0
    assert point.sample_variance == 0.0
    assert point.games_count == 7


def test_arithmetic_series_variance_by_hand():
    panel = seven_games_series([0, 1, 2, 3, 4, 5, 6], [1] * 7)
    point = next(p for p in mean_variance_panel(panel) if p.code == "N0")
    assert point.sample_mean == pytest.approx(3.0)
    assert point.sample_variance == pytest.approx(14.0 / 3.0)


def test_single_appearance_noc_dropped():
    panel = seven_games_series([2, 2, 2], [None, 1, None])
    points = {p.code for p in mean_variance_panel(panel)}
    assert points == {"N0"}


def test_missing_years_excluded_not_zeroed():
    panel = seven_games_series([4, None, 2], [1, 1, 1])
    point = next(p for p in mean_variance_panel(panel) if p.code == "N0")
    assert point.games_count == 2
    assert point.sample_mean == pytest.approx(3.0)
    assert point.sample_variance == pytest.approx(2.0)


def test_host_flag_covers_the_window():
    g1 = make_games([noc("AAA", 1_000_000, m1=1), noc("BBB", 1_000_000, m1=1)],
                    year=2020, host_code="AAA")
    g2 = make_games([noc("AAA", 1_000_000, m1=2), noc("BBB", 1_000_000, m1=2)],
                    year=2024, host_code="CCC")
    points = {p.code: p for p in mean_variance_panel(MultiGamesPanel(games=(g1, g2)))}
    assert points["AAA"].is_host_in_window
    assert not points["BBB"].is_host_in_window


# --- predictive band -------------------------------------------------------------


def test_band_degenerate_at_tiny_mean():
    assert poisson_variance_band(1e-6, 7) == (0.0, 0.0)


def test_band_contains_the_poisson_variance():
    lo, hi = poisson_variance_band(3.0, 7)
    assert lo < 3.0 < hi


def test_band_self_consistent_at_ten_times_reps():
    lo, hi = poisson_variance_band(3.0, 7, reps=10_000)
    lo10, hi10 = poisson_variance_band(3.0, 7, reps=100_000)
    assert lo == pytest.approx(lo10, rel=0.05)
    assert hi == pytest.approx(hi10, rel=0.05)


def test_band_stable_when_reps_double():
    lo, hi = poisson_variance_band(3.0, 7, reps=10_000)
    lo2, hi2 = poisson_variance_band(3.0, 7, reps=20_000)
    assert lo == pytest.approx(lo2, rel=0.05)
    assert hi == pytest.approx(hi2, rel=0.05)


def test_band_against_independent_stream():
    # the variance law is discrete, so endpoint values are stream-sensitive;
    # what must hold is the band's coverage under a fresh stream
    lo, hi = poisson_variance_band(4.0, 7, reps=100_000)
    below, inside, above = oracles.band_coverage_mc(4.0, 7, lo, hi, 200_000, seed=77)
    assert below <= 0.06
    assert above <= 0.06
    assert inside >= 0.88
    # and the band must not be trivially wide either
    assert below >= 0.02 and above >= 0.02


def test_band_upper_endpoint_monotone_in_mean():
    highs = [
        poisson_variance_band(mean, 7, reps=100_000)[1]
        for mean in (0.5, 1.0, 2.0, 4.0, 8.0)
    ]
    assert all(a < b for a, b in zip(highs, highs[1:])), highs


def test_band_validation():
    with pytest.raises(ValueError, match="mean"):
        poisson_variance_band(0.0, 7)
    with pytest.raises(ValueError, match="at least 2"):
        poisson_variance_band(3.0, 1)
    with pytest.raises(ValueError, match="reps"):
        poisson_variance_band(3.0, 7, reps=5000)
    with pytest.raises(ValueError, match="level"):
        poisson_variance_band(3.0, 7, level=1.0)


@pytest.mark.slow
def test_panel_coverage_excluding_hosts(panel):
    """Medal counts of most NOCs over the seven bundled Games should look
    Poisson: at least 80% of non-host NOCs fall inside their 90% band."""
    hosts = panel.host_codes()
    inside = outside = 0
    for point in mean_variance_panel(panel):
        if point.code in hosts or point.sample_mean <= 0.0:
            continue
        lo, hi = poisson_variance_band(point.sample_mean, point.games_count)
        if lo <= point.sample_variance <= hi:
            inside += 1
        else:
            outside += 1
    total = inside + outside
    assert total > 50
    assert inside / total >= 0.80, f"{inside}/{total} inside"


# --- excess variation --------------------------------------------------------------


def test_excess_variation_worked_examples():
    assert excess_variation_pvalue(3, 3) == 1.0
    assert excess_variation_pvalue(6, 0) == pytest.approx(2.0 / 64.0)
    assert excess_variation_pvalue(0, 0) == 1.0


def test_excess_variation_symmetric_and_exact_to_fifty():
    for r in range(0, 51):
        for a in range(0, r + 1):
            b = r - a
            p = excess_variation_pvalue(a, b)
            assert p == excess_variation_pvalue(b, a)
            exact = oracles.exact_half_binomial_two_sided(a, b)
            assert p == float(min(Fraction(1), exact))


def test_excess_variation_rejects_negative_counts():
    with pytest.raises(ValueError, match="non-negative"):
        excess_variation_pvalue(-1, 3)


def test_successive_pairs_skip_missing_years():
    panel = seven_games_series([4, None, 2, 1], [1, 2, 1, 1])
    pairs = successive_pair_pvalues(panel)
    # N0 is missing 2004, so only the 2008-2012 pair survives for it
    assert [(a, b) for a, b, _ in pairs["N0"]] == [(2008, 2012)]
    assert pairs["N0"][0][2] == excess_variation_pvalue(2, 1)
    assert [(a, b) for a, b, _ in pairs["N1"]] == [
        (2000, 2004), (2004, 2008), (2008, 2012),
    ]
