"""CSV ingestion, validation, and alignment of per-Games medal datasets.

A Games file lists one row per NOC with its population and the athlete
medal-multiplicity counts (how many athletes won exactly 1, 2, 3, or 4+
medals).  Totals are always recomputed from the multiplicity columns,
never trusted from the file.
"""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

logger = logging.getLogger(__name__)

GAMES_CSV_HEADER = (
    "code",
    "name",
    "population",
    "m1",
    "m2",
    "m3",
    "m4plus",
    "gold",
    "silver",
    "bronze",
)

MISSING = None  # panel marker for "NOC did not enter this Games"


class IngestionError(ValueError):
    """A dataset file violates the schema or a dataset invariant."""


@dataclass(frozen=True)
class NocRecord:
    """One NOC at one Games.

    ``m1``..``m4plus`` count athletes who won exactly 1, 2, 3, and >=4
    medals; ``gold``/``silver``/``bronze`` are optional and only feed the
    lexicographic baseline.
    """

    code: str
    name: str
    population: int
    m1: int
    m2: int
    m3: int
    m4plus: int
    gold: int | None = None
    silver: int | None = None
    bronze: int | None = None

    def __post_init__(self) -> None:
        if self.population < 1:
            raise ValueError(f"{self.code}: population must be >= 1")
        for col in ("m1", "m2", "m3", "m4plus"):
            if getattr(self, col) < 0:
                raise ValueError(f"{self.code}: {col} must be non-negative")
        split = (self.gold, self.silver, self.bronze)
        present = [x is not None for x in split]
        if any(present) and not all(present):
            raise ValueError(
                f"{self.code}: gold/silver/bronze must be given together or not at all"
            )
        if all(present):
            if any(x < 0 for x in split):  # type: ignore[operator]
                raise ValueError(f"{self.code}: medal split must be non-negative")
            if sum(split) != self.total_medals:  # type: ignore[arg-type]
                raise ValueError(
                    f"{self.code}: gold+silver+bronze = {sum(split)} "
                    f"does not match recomputed medal total {self.total_medals}"
                )

    @property
    def total_medals(self) -> int:
        """M_c, recomputed: one athlete on k medals contributes k."""
        return self.m1 + 2 * self.m2 + 3 * self.m3 + 4 * self.m4plus

    @property
    def unique_medalists(self) -> int:
        """U_c, recomputed: number of distinct medal-winning athletes."""
        return self.m1 + self.m2 + self.m3 + self.m4plus

    @property
    def has_medal_split(self) -> bool:
        return self.gold is not None

    @property
    def observed_rate_per_million(self) -> float:
        return 1e6 * self.total_medals / self.population


@dataclass(frozen=True)
class GamesMeta:
    """Sidecar metadata for one Games file (not stored in the CSV)."""

    year: int
    label: str
    host_code: str
    total_medals_awarded: int  # official total T across all events
    medal_quota: int  # M, the most medals a single NOC could have won

    def __post_init__(self) -> None:
        if self.total_medals_awarded < 1 or self.medal_quota < 1:
            raise ValueError("total_medals_awarded and medal_quota must be positive")
        if self.medal_quota > self.total_medals_awarded:
            raise ValueError(
                f"medal_quota {self.medal_quota} exceeds "
                f"total_medals_awarded {self.total_medals_awarded}"
            )


@dataclass(frozen=True)
class GamesDataset:
    """All validated NOC records of one Games plus its totals."""

    year: int
    label: str
    host_code: str
    records: tuple[NocRecord, ...]
    total_medals_awarded: int
    medal_quota: int

    def __post_init__(self) -> None:
        codes = [r.code for r in self.records]
        if len(codes) != len(set(codes)):
            seen: set[str] = set()
            dup = next(c for c in codes if c in seen or seen.add(c))  # type: ignore[func-returns-value]
            raise IngestionError(f"duplicate NOC code {dup}")
        if self.medal_quota > self.total_medals_awarded:
            raise IngestionError(
                f"{self.label}: medal_quota {self.medal_quota} exceeds "
                f"total_medals_awarded {self.total_medals_awarded}"
            )
        table_total = sum(r.total_medals for r in self.records)
        drift = abs(self.total_medals_awarded - table_total)
        if drift > 0.02 * self.total_medals_awarded:
            logger.warning(
                "%s: sum of per-NOC medals (%d) differs from official total (%d) "
                "by more than 2%%",
                self.label,
                table_total,
                self.total_medals_awarded,
            )

    @property
    def meta(self) -> GamesMeta:
        return GamesMeta(
            year=self.year,
            label=self.label,
            host_code=self.host_code,
            total_medals_awarded=self.total_medals_awarded,
            medal_quota=self.medal_quota,
        )

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(r.code for r in self.records)

    @property
    def n_records(self) -> int:
        return len(self.records)

    @property
    def medal_winners(self) -> tuple[NocRecord, ...]:
        return tuple(r for r in self.records if r.total_medals > 0)

    @property
    def total_population(self) -> int:
        return sum(r.population for r in self.records)

    def record(self, code: str) -> NocRecord:
        for r in self.records:
            if r.code == code:
                return r
        raise KeyError(code)

    @cached_property
    def fingerprint(self) -> str:
        """SHA-256 over a canonical serialization; ties draws to their data."""
        h = hashlib.sha256()
        h.update(
            f"{self.year}|{self.label}|{self.host_code}|"
            f"{self.total_medals_awarded}|{self.medal_quota}\n".encode()
        )
        for r in self.records:
            h.update(
                f"{r.code},{r.name},{r.population},{r.m1},{r.m2},{r.m3},{r.m4plus},"
                f"{'' if r.gold is None else r.gold},"
                f"{'' if r.silver is None else r.silver},"
                f"{'' if r.bronze is None else r.bronze}\n".encode()
            )
        return h.hexdigest()


@dataclass(frozen=True)
class MultiGamesPanel:
    """Several Games aligned by NOC.

    A NOC absent from a Games is marked missing (``None``); a NOC present
    that won nothing is an explicit zero.
    """

    games: tuple[GamesDataset, ...]
    series: dict[str, tuple[int | None, ...]] = field(init=False)

    def __post_init__(self) -> None:
        years = [g.year for g in self.games]
        if len(self.games) < 2:
            raise IngestionError("panel needs at least 2 Games")
        if any(b <= a for a, b in zip(years, years[1:])):
            raise IngestionError(f"Games years must be strictly increasing, got {years}")
        all_codes = sorted({r.code for g in self.games for r in g.records})
        per_game = [{r.code: r.total_medals for r in g.records} for g in self.games]
        series = {
            code: tuple(counts.get(code, MISSING) for counts in per_game)
            for code in all_codes
        }
        object.__setattr__(self, "series", series)

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(g.year for g in self.games)

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(sorted(self.series))

    def host_codes(self) -> frozenset[str]:
        return frozenset(g.host_code for g in self.games)


def _parse_int(value: str, *, row: int, column: str, minimum: int = 0) -> int:
    text = value.strip()
    try:
        number = int(text)
    except ValueError:
        raise IngestionError(
            f"row {row}, column {column}: expected an integer, got {value!r}"
        ) from None
    if number < minimum:
        raise IngestionError(
            f"row {row}, column {column}: value {number} below minimum {minimum}"
        )
    return number


def load_games_csv(path: str | Path, meta: GamesMeta) -> GamesDataset:
    """Read and validate one Games CSV.

    Rows whose population is absent or zero are dropped with a warning
    (the model needs a measurable population).  Any malformed value is an
    error naming the row and column; so is a duplicate NOC code.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != GAMES_CSV_HEADER:
            raise IngestionError(
                f"{path}: bad header {header!r}, expected {','.join(GAMES_CSV_HEADER)}"
            )
        records: list[NocRecord] = []
        seen: set[str] = set()
        dropped: list[str] = []
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(GAMES_CSV_HEADER):
                raise IngestionError(
                    f"row {row_num}: expected {len(GAMES_CSV_HEADER)} fields, got {len(row)}"
                )
            code = row[0].strip()
            if not code:
                raise IngestionError(f"row {row_num}, column code: empty")
            if code in seen:
                raise IngestionError(f"duplicate NOC code {code}")
            seen.add(code)
            name = row[1].strip()
            pop_text = row[2].strip()
            population = (
                0 if not pop_text else _parse_int(pop_text, row=row_num, column="population")
            )
            counts = {
                col: _parse_int(row[i], row=row_num, column=col)
                for i, col in ((3, "m1"), (4, "m2"), (5, "m3"), (6, "m4plus"))
            }
            split: dict[str, int | None] = {}
            for i, col in ((7, "gold"), (8, "silver"), (9, "bronze")):
                split[col] = (
                    None if not row[i].strip() else _parse_int(row[i], row=row_num, column=col)
                )
            if population == 0:
                dropped.append(code)
                continue
            try:
                records.append(
                    NocRecord(code=code, name=name, population=population, **counts, **split)
                )
            except ValueError as exc:
                raise IngestionError(f"row {row_num}: {exc}") from None
    if dropped:
        logger.warning(
            "%s: dropped %d row(s) with absent/zero population: %s",
            path.name,
            len(dropped),
            ", ".join(dropped),
        )
    return GamesDataset(
        year=meta.year,
        label=meta.label,
        host_code=meta.host_code,
        records=tuple(records),
        total_medals_awarded=meta.total_medals_awarded,
        medal_quota=meta.medal_quota,
    )


def write_games_csv(data: GamesDataset, path: str | Path) -> None:
    """Emit a dataset in the ingestion schema (round-trips bit-exactly)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(GAMES_CSV_HEADER)
        for r in data.records:
            writer.writerow(
                [
                    r.code,
                    r.name,
                    r.population,
                    r.m1,
                    r.m2,
                    r.m3,
                    r.m4plus,
                    "" if r.gold is None else r.gold,
                    "" if r.silver is None else r.silver,
                    "" if r.bronze is None else r.bronze,
                ]
            )


def load_panel_csv(
    paths: Sequence[str | Path], metas: Sequence[GamesMeta]
) -> MultiGamesPanel:
    """Load >=2 Games files (years strictly increasing) into an aligned panel."""
    if len(paths) != len(metas):
        raise IngestionError(
            f"got {len(paths)} paths but {len(metas)} metadata entries"
        )
    if len(paths) < 2:
        raise IngestionError("panel needs at least 2 Games files")
    games = tuple(load_games_csv(p, m) for p, m in zip(paths, metas))
    return MultiGamesPanel(games=games)
