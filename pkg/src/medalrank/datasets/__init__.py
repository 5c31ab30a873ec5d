"""Bundled Games datasets (Sydney 2000 through Paris 2024).

Each Games ships as a CSV in the ingestion schema plus an entry in
``games.json`` carrying its metadata (year, label, host, official medal
total T, medal quota M).  ``first_summer_medal_year.json`` records the
first Summer Games at which each NOC won a medal, which drives the
"previous-winners" population definition of the U-index.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib.resources import files

from ..data import GamesDataset, GamesMeta, MultiGamesPanel, load_games_csv


def _resource(name: str):
    return files(__package__).joinpath(name)


@lru_cache(maxsize=1)
def _registry() -> dict[int, dict]:
    with _resource("games.json").open(encoding="utf-8") as fh:
        raw = json.load(fh)
    return {int(year): entry for year, entry in raw.items()}


def available_years() -> tuple[int, ...]:
    return tuple(sorted(_registry()))


def games_meta(year: int) -> GamesMeta:
    try:
        entry = _registry()[year]
    except KeyError:
        raise KeyError(
            f"no bundled Games for {year}; available: {available_years()}"
        ) from None
    return GamesMeta(
        year=year,
        label=entry["label"],
        host_code=entry["host"],
        total_medals_awarded=entry["total_medals"],
        medal_quota=entry["medal_quota"],
    )


def bundled_csv_path(year: int) -> str:
    return str(_resource(_registry()[year]["file"]))


def load_bundled(year: int) -> GamesDataset:
    return load_games_csv(bundled_csv_path(year), games_meta(year))


def bundled_panel(years: tuple[int, ...] | None = None) -> MultiGamesPanel:
    """Panel over the given years (default: every bundled Games)."""
    chosen = available_years() if years is None else tuple(sorted(years))
    return MultiGamesPanel(games=tuple(load_bundled(y) for y in chosen))


@lru_cache(maxsize=1)
def first_medal_years() -> dict[str, int]:
    """NOC code -> year of its first Summer Games medal."""
    with _resource("first_summer_medal_year.json").open(encoding="utf-8") as fh:
        return json.load(fh)
