"""Frozen facts about the bundled Games datasets.

The fingerprints pin the exact file contents: any silent edit to a
bundled CSV or its metadata shows up here first.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from medalrank.datasets import (
    available_years,
    bundled_csv_path,
    bundled_panel,
    first_medal_years,
    games_meta,
    load_bundled,
)

# year -> (records, medal winners, table total, official total, quota, host)
FROZEN = {
    2000: (202, 78, 922, 922, 496, "AUS"),
    2004: (203, 74, 922, 922, 496, "GRC"),
    2008: (204, 83, 934, 934, 503, "CHN"),
    2012: (204, 83, 946, 946, 509, "GBR"),
    2016: (206, 81, 949, 949, 511, "BRA"),
    2020: (205, 93, 1080, 1080, 579, "JPN"),
    2024: (204, 90, 1037, 1039, 559, "FRA"),
}

FINGERPRINTS = {
    2000: "25344f634d7d572ceac53fc6c7756ab667cd2bbe791861ffbf876dfc74708a68",
    2004: "419e4de708620b9d56abb6fd3e12f267aba40d427b2035e6d34490a646067bcc",
    2008: "9004a1e291759db23664499eded80d30b4908476d4391bdb7d812297f41438f4",
    2012: "10d524670297497b178f039a680cd874501f7715b364d72c41c28221dbe5df52",
    2016: "8d1fb097198d5c025fee848e4e0bd40c0b324401673ef0614d2c24209bc2a654",
    2020: "787a07233566b6dc7f16b513ff434408b20402a962b259da1274a62604c32cc8",
    2024: "6ef844399de05b4d47f52cb9c32ad854101f45bef6ae6e493a92ef991d68d22f",
}


def test_all_seven_summer_games_present():
    assert available_years() == (2000, 2004, 2008, 2012, 2016, 2020, 2024)


@pytest.mark.parametrize("year", sorted(FROZEN))
def test_dataset_shape_is_frozen(year):
    records, winners, table, official, quota, host = FROZEN[year]
    data = load_bundled(year)
    assert data.n_records == records
    assert len(data.medal_winners) == winners
    assert sum(r.total_medals for r in data.records) == table
    assert data.total_medals_awarded == official
    assert data.medal_quota == quota
    assert data.host_code == host
    assert data.fingerprint == FINGERPRINTS[year]
    meta = games_meta(year)
    assert (meta.total_medals_awarded, meta.medal_quota) == (official, quota)


def test_unknown_year_lists_available():
    with pytest.raises(KeyError, match="1996"):
        games_meta(1996)


def test_csv_paths_resolve():
    path = bundled_csv_path(2024)
    assert path.endswith("games_2024.csv")


def test_paris_key_rows():
    data = load_bundled(2024)
    usa = data.record("USA")
    assert (usa.gold, usa.silver, usa.bronze) == (40, 44, 42)
    assert usa.total_medals == 126
    chn = data.record("CHN")
    assert (chn.gold, chn.total_medals) == (40, 91)
    nzl = data.record("NZL")
    assert nzl.population == 5_214_000
    assert nzl.total_medals == 20
    grd = data.record("GRD")
    assert grd.population == 117_000
    assert (grd.total_medals, grd.unique_medalists) == (2, 2)
    dma = data.record("DMA")
    assert (dma.population, dma.total_medals) == (66_000, 1)
    lca = data.record("LCA")
    assert (lca.population, lca.total_medals) == (180_000, 2)
    # multi-medalist splits that pin the unique-athlete reconstruction
    irl = data.record("IRL")
    assert (irl.m1, irl.m2, irl.m3, irl.m4plus) == (5, 1, 0, 0)
    nld = data.record("NLD")
    assert (nld.m1, nld.m2, nld.m3, nld.m4plus) == (27, 2, 1, 0)


def test_paris_per_capita_anchor_rates_exact():
    data = load_bundled(2024)
    anchors = {
        "GRD": Fraction(2, 117_000),
        "DMA": Fraction(1, 66_000),
        "LCA": Fraction(2, 180_000),
        "NZL": Fraction(20, 5_214_000),
    }
    for code, exact in anchors.items():
        rec = data.record(code)
        assert Fraction(rec.total_medals, rec.population) == exact


def test_tokyo_usa_row():
    usa = load_bundled(2020).record("USA")
    assert usa.total_medals == 113


def test_panel_alignment_over_all_years():
    panel = bundled_panel()
    assert panel.years == (2000, 2004, 2008, 2012, 2016, 2020, 2024)
    assert panel.host_codes() == {"AUS", "GRC", "CHN", "GBR", "BRA", "JPN", "FRA"}
    usa = panel.series["USA"]
    assert all(c is not None and c > 0 for c in usa)
    subset = bundled_panel(years=(2004, 2008, 2012, 2016, 2020, 2024))
    assert subset.years == (2004, 2008, 2012, 2016, 2020, 2024)


def test_first_medal_years_spot_checks():
    first = first_medal_years()
    assert len(first) == 140
    assert first["USA"] == 1896
    assert first["FRA"] == 1896
    assert first["GRD"] == 2012
    assert first["NZL"] == 1920
    assert first["CHN"] == 1984
    assert all(1896 <= year <= 2024 for year in first.values())
    # every bundled medal winner has a first-medal year on record; the
    # registry keeps calendar years, so the postponed 2020 Games held in
    # 2021 may postdate their own edition year by one
    for games_year in available_years():
        held = 2021 if games_year == 2020 else games_year
        data = load_bundled(games_year)
        for rec in data.medal_winners:
            assert rec.code in first
            assert first[rec.code] <= held


def test_previous_winners_population_is_smaller_than_all():
    from medalrank.baselines import reference_population

    data = load_bundled(2024)
    assert reference_population(data, "previous-winners") < reference_population(data, "all")
