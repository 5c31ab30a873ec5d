"""Command-line interface for reproducible fits and report tables.

Commands: fit, rank, compare, sensitivity, diagnose, trajectory.
Every command writes a JSON manifest describing the run; all other
output files embed the manifest's hash so results are traceable to
their configuration.  Exit codes: 0 success, 2 validation error,
3 convergence failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, datasets
from .baselines import N_DEFINITIONS, compute_baselines
from .data import GamesDataset, GamesMeta, IngestionError, MultiGamesPanel, load_games_csv
from .diagnostics import mean_variance_panel, poisson_variance_band, successive_pair_pvalues
from .model import (
    FAMILY_BETA,
    FAMILY_BETA_MIXTURE,
    FAMILY_LOGIT_NORMAL,
    FAMILY_TRUNC_LOGNORMAL,
    PriorSpec,
)
from .ranking import RankingTable, rank_trajectory, shrinkage_table, summarize_ranks
from .sampler import (
    RNG_NAME,
    SamplerConfig,
    read_draws_csv,
    run_sampler,
    write_draws_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

PRIOR_ALIASES = {
    "beta": FAMILY_BETA,
    "lognormal": FAMILY_TRUNC_LOGNORMAL,
    "trunc-lognormal": FAMILY_TRUNC_LOGNORMAL,
    "logitnormal": FAMILY_LOGIT_NORMAL,
    "logit-normal": FAMILY_LOGIT_NORMAL,
    "mixture": FAMILY_BETA_MIXTURE,
    "beta-mixture": FAMILY_BETA_MIXTURE,
}

logger = logging.getLogger(__name__)


class CommandError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.exit_code = exit_code


# --- manifest plumbing --------------------------------------------------------


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _finalize_manifest(payload: dict) -> dict:
    """Add the payload's own hash under "manifest_hash"."""
    digest = hashlib.sha256(_canonical(payload).encode()).hexdigest()
    return {**payload, "manifest_hash": digest}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_table(path: Path, manifest_hash: str, header: list[str], rows: list[list]) -> None:
    def cell(v) -> str:
        if v is None:
            return ""
        if isinstance(v, float):
            return format(v, ".10g")
        return str(v)

    # csv quoting matters: NOC names may contain commas
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# manifest_hash={manifest_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([cell(v) for v in row] for row in rows)


# --- dataset loading ----------------------------------------------------------


def _meta_from_args(args: argparse.Namespace, path: Path) -> GamesMeta:
    fields: dict = {}
    if args.meta:
        sidecar = json.loads(Path(args.meta).read_text(encoding="utf-8"))
        fields.update(sidecar)
    overrides = {
        "year": args.year,
        "label": args.label,
        "host": args.host,
        "total_medals": args.total_medals,
        "medal_quota": args.medal_quota,
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    missing = [k for k in ("year", "total_medals", "medal_quota") if fields.get(k) is None]
    if missing:
        raise CommandError(
            f"{path}: missing metadata {', '.join(missing)} "
            "(provide --meta or the individual flags)"
        )
    return GamesMeta(
        year=int(fields["year"]),
        label=str(fields.get("label") or f"Games {fields['year']}"),
        host_code=str(fields.get("host") or ""),
        total_medals_awarded=int(fields["total_medals"]),
        medal_quota=int(fields["medal_quota"]),
    )


def _load_games(args: argparse.Namespace) -> GamesDataset:
    if getattr(args, "bundled", None) is not None:
        return datasets.load_bundled(args.bundled)
    if not args.games:
        raise CommandError("provide --games CSV or --bundled YEAR")
    path = Path(args.games)
    return load_games_csv(path, _meta_from_args(args, path))


def _load_panel(args: argparse.Namespace) -> MultiGamesPanel:
    if getattr(args, "bundled_panel", False):
        years = tuple(args.years) if args.years else None
        return datasets.bundled_panel(years)
    paths = args.panel or []
    metas = args.panel_meta or []
    if len(paths) != len(metas):
        raise CommandError("--panel and --panel-meta must pair up one-to-one")
    if len(paths) < 2:
        raise CommandError("panel commands need at least 2 Games (or --bundled-panel)")
    games = []
    for p, m in zip(paths, metas):
        sidecar = json.loads(Path(m).read_text(encoding="utf-8"))
        meta = GamesMeta(
            year=int(sidecar["year"]),
            label=str(sidecar.get("label") or f"Games {sidecar['year']}"),
            host_code=str(sidecar.get("host") or ""),
            total_medals_awarded=int(sidecar["total_medals"]),
            medal_quota=int(sidecar["medal_quota"]),
        )
        games.append(load_games_csv(p, meta))
    return MultiGamesPanel(games=tuple(games))


def _sampler_config(args: argparse.Namespace) -> SamplerConfig:
    return SamplerConfig(
        chains=args.chains,
        adapt_iters=args.adapt,
        burn_in=args.burn_in,
        keep_iters=args.keep,
        thin=args.thin,
        seed=args.seed,
        target_accept=args.target_accept,
        rhat_threshold=args.rhat_threshold,
        workers=args.workers,
    )


def _prior_spec(family_alias: str) -> PriorSpec:
    return PriorSpec(family=PRIOR_ALIASES[family_alias])


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dataset_block(data: GamesDataset) -> dict:
    return {
        "fingerprint": data.fingerprint,
        "year": data.year,
        "label": data.label,
        "n_records": data.n_records,
        "n_medal_winners": len(data.medal_winners),
    }


# --- table emitters -----------------------------------------------------------

_RANK_HEADER = [
    "seat",
    "code",
    "name",
    "posterior_mean_rank",
    "posterior_median_rank",
    "rank_ci80_lo",
    "rank_ci80_hi",
    "rate_median_per_million",
    "rate_ci95_lo",
    "rate_ci95_hi",
    "observed_rate_per_million",
]


def _ranking_rows(table: RankingTable, data: GamesDataset) -> list[list]:
    names = {r.code: r.name for r in data.records}
    rows = []
    for seat, s in enumerate(table.rows, start=1):
        rows.append(
            [
                seat,
                s.code,
                names[s.code],
                s.posterior_mean_rank,
                s.posterior_median_rank,
                s.rank_ci80[0],
                s.rank_ci80[1],
                s.rate_median_per_million,
                s.rate_ci95_per_million[0],
                s.rate_ci95_per_million[1],
                s.observed_rate_per_million,
            ]
        )
    for s in table.zero_medal:
        rows.append(
            [
                None,
                s.code,
                names[s.code],
                None,
                None,
                None,
                None,
                s.rate_median_per_million,
                s.rate_ci95_per_million[0],
                s.rate_ci95_per_million[1],
                s.observed_rate_per_million,
            ]
        )
    return rows


def _ranking_json(table: RankingTable) -> dict:
    def row(s, seat=None):
        return {
            "seat": seat,
            "code": s.code,
            "posterior_mean_rank": s.posterior_mean_rank,
            "posterior_median_rank": s.posterior_median_rank,
            "rank_ci80": list(s.rank_ci80) if s.rank_ci80 else None,
            "rate_median_per_million": s.rate_median_per_million,
            "rate_ci95_per_million": list(s.rate_ci95_per_million),
            "observed_rate_per_million": s.observed_rate_per_million,
        }

    return {
        "statistic": table.statistic,
        "year": table.year,
        "label": table.label,
        "rows": [row(s, i + 1) for i, s in enumerate(table.rows)],
        "zero_medal": [row(s) for s in table.zero_medal],
    }


def _emit_shrinkage(path: Path, manifest_hash: str, draws, data: GamesDataset) -> None:
    records = shrinkage_table(draws, data)
    rows = [
        [
            r.code,
            r.population,
            r.observed_rate_per_million,
            r.posterior_median_rate_per_million,
            r.medal_total,
            int(r.has_multimedalist),
            int(r.zero_medal),
        ]
        for r in records
    ]
    _write_table(
        path,
        manifest_hash,
        [
            "code",
            "population",
            "observed_rate_per_million",
            "posterior_median_rate_per_million",
            "medal_total",
            "has_multimedalist",
            "zero_medal",
        ],
        rows,
    )


# --- commands -----------------------------------------------------------------


def cmd_fit(args: argparse.Namespace) -> int:
    data = _load_games(args)
    config = _sampler_config(args)
    spec = _prior_spec(args.prior)
    draws, report = run_sampler(data, spec, config)
    payload = {
        "package": "medalrank",
        "version": __version__,
        "command": "fit",
        "rng": RNG_NAME,
        "seed": config.seed,
        "config": asdict(config),
        "prior": asdict(spec),
        "dataset": _dataset_block(data),
        "acceptance": {
            "per_chain_mean": [float(a.mean()) for a in draws.acceptance],
            "min": float(draws.acceptance.min()),
            "max": float(draws.acceptance.max()),
        },
        "convergence": report.summary(),
    }
    manifest = _finalize_manifest(payload)
    out = _out_dir(args)
    write_draws_csv(draws, out / "draws.csv", manifest=manifest)
    _write_json(out / "manifest.json", manifest)
    _write_json(
        out / "convergence.json",
        {
            "manifest_hash": manifest["manifest_hash"],
            "passed": report.passed,
            "threshold": report.threshold,
            "max_rhat": report.max_rhat,
            "min_ess": report.min_ess,
            "flagged": list(report.flagged),
            "parameters": {
                name: {"rhat": float(r), "ess": float(e)}
                for name, r, e in zip(report.parameters, report.rhat, report.ess)
            },
        },
    )
    if not report.passed:
        logger.warning("convergence check failed: %s", "; ".join(report.flagged[:5]))
        if not args.allow_unconverged:
            print(
                f"convergence failed (max R-hat {report.max_rhat:.4f}); "
                "draws written, rerun with --allow-unconverged to proceed anyway",
                file=sys.stderr,
            )
            return EXIT_CONVERGENCE
    print(f"wrote {out / 'draws.csv'}")
    return EXIT_OK


def _load_draws_checked(args: argparse.Namespace, data: GamesDataset):
    draws, manifest = read_draws_csv(args.draws)
    if manifest is None:
        raise CommandError(f"{args.draws}: no embedded manifest; cannot verify lineage")
    recorded = manifest.get("dataset", {}).get("fingerprint")
    if recorded != data.fingerprint:
        raise CommandError(
            f"dataset fingerprint mismatch: draws were fit to {recorded}, "
            f"supplied dataset is {data.fingerprint}"
        )
    return draws, manifest


def cmd_rank(args: argparse.Namespace) -> int:
    data = _load_games(args)
    draws, manifest = _load_draws_checked(args, data)
    table = summarize_ranks(draws, data, statistic=args.order)
    out = _out_dir(args)
    h = manifest["manifest_hash"]
    _write_table(out / "ranking.csv", h, _RANK_HEADER, _ranking_rows(table, data))
    _write_json(out / "ranking.json", {"manifest_hash": h, **_ranking_json(table)})
    _emit_shrinkage(out / "shrinkage.csv", h, draws, data)
    print(f"wrote {out / 'ranking.csv'} (ordered by {args.order} rank)")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    data = _load_games(args)
    draws, manifest = _load_draws_checked(args, data)
    table = summarize_ranks(draws, data, statistic=args.order)
    baselines = compute_baselines(data, n_definition=args.n_definition)
    h = manifest["manifest_hash"]
    out = _out_dir(args)

    by_code = {e.code: e for e in baselines.entries}
    header = _RANK_HEADER + [
        "per_capita_rate_per_million",
        "per_capita_rank",
        "lexicographic_rank",
        "u_index",
        "u_index_rank",
    ]
    rows = []
    for row in _ranking_rows(table, data):
        e = by_code[row[1]]
        rows.append(
            row
            + [
                e.per_capita_rate_per_million,
                e.per_capita_rank,
                e.lexicographic_rank,
                e.u_index,
                e.u_index_rank,
            ]
        )
    _write_table(out / "compare.csv", h, header, rows)

    populations = {r.code: r.population for r in data.records}
    fig_rows = []
    for seat, s in enumerate(table.rows, start=1):
        e = by_code[s.code]
        methods = [
            ("bayes", seat),
            ("per_capita", e.per_capita_rank),
            ("lexicographic", e.lexicographic_rank),
            ("u_index", e.u_index_rank),
        ]
        for method, rank in methods:
            if rank is not None:
                fig_rows.append([s.code, populations[s.code], method, rank])
    _write_table(
        out / "fig3_rank_vs_population.csv",
        h,
        ["code", "population", "method", "rank"],
        fig_rows,
    )
    print(f"wrote {out / 'compare.csv'} (N definition: {baselines.n_definition})")
    return EXIT_OK


def cmd_sensitivity(args: argparse.Namespace) -> int:
    data = _load_games(args)
    config = _sampler_config(args)
    families = [FAMILY_BETA, FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL, FAMILY_BETA_MIXTURE]
    payload = {
        "package": "medalrank",
        "version": __version__,
        "command": "sensitivity",
        "rng": RNG_NAME,
        "seed": config.seed,
        "config": asdict(config),
        "families": families,
        "order": args.order,
        "dataset": _dataset_block(data),
    }
    manifest = _finalize_manifest(payload)
    h = manifest["manifest_hash"]
    out = _out_dir(args)
    _write_json(out / "manifest.json", manifest)

    tables: dict[str, RankingTable] = {}
    failures = []
    for family in families:
        draws, report = run_sampler(data, PriorSpec(family=family), config)
        if not report.passed:
            failures.append(f"{family}: max R-hat {report.max_rhat:.4f}")
        table = summarize_ranks(draws, data, statistic=args.order)
        tables[family] = table
        _write_table(
            out / f"ranking_{family}.csv", h, _RANK_HEADER, _ranking_rows(table, data)
        )

    codes: list[str] = []
    for table in tables.values():
        for code in table.top(10):
            if code not in codes:
                codes.append(code)
    rows = []
    for code in codes:
        seats = []
        for family in families:
            try:
                seats.append(tables[family].seat(code))
            except KeyError:
                seats.append(None)
        rows.append([code] + seats)
    _write_table(out / "sensitivity.csv", h, ["code"] + families, rows)
    if failures and not args.allow_unconverged:
        print("convergence failed: " + "; ".join(failures), file=sys.stderr)
        return EXIT_CONVERGENCE
    print(f"wrote {out / 'sensitivity.csv'}")
    return EXIT_OK


def cmd_diagnose(args: argparse.Namespace) -> int:
    panel = _load_panel(args)
    payload = {
        "package": "medalrank",
        "version": __version__,
        "command": "diagnose",
        "seed": args.seed,
        "reps": args.reps,
        "band_seed": args.seed + 1,
        "years": list(panel.years),
        "fingerprints": [g.fingerprint for g in panel.games],
    }
    manifest = _finalize_manifest(payload)
    h = manifest["manifest_hash"]
    out = _out_dir(args)
    _write_json(out / "manifest.json", manifest)

    points = mean_variance_panel(panel)
    rows = []
    for pt in points:
        if pt.sample_mean > 0:
            lo, hi = poisson_variance_band(
                pt.sample_mean, pt.games_count, reps=args.reps, seed=args.seed + 1
            )
            inside = int(lo <= pt.sample_variance <= hi)
        else:
            lo = hi = inside = None
        rows.append(
            [
                pt.code,
                pt.sample_mean,
                pt.sample_variance,
                pt.games_count,
                int(pt.is_host_in_window),
                lo,
                hi,
                inside,
            ]
        )
    _write_table(
        out / "meanvar.csv",
        h,
        ["code", "mean", "variance", "games_count", "is_host", "band_lo", "band_hi", "inside"],
        rows,
    )

    positive = sorted({pt.sample_mean for pt in points if pt.sample_mean > 0})
    band_rows = []
    if positive:
        grid = np.geomspace(positive[0], positive[-1], num=args.band_points)
        n_games = len(panel.years)
        for mean in grid:
            lo, hi = poisson_variance_band(
                float(mean), n_games, reps=args.reps, seed=args.seed + 1
            )
            band_rows.append([float(mean), lo, hi])
    _write_table(out / "band.csv", h, ["mean", "band_lo", "band_hi"], band_rows)

    pair_rows = []
    for code, pairs in sorted(successive_pair_pvalues(panel).items()):
        series = panel.series[code]
        for year_a, year_b, p in pairs:
            pair_rows.append(
                [code, year_a, year_b, series[panel.years.index(year_a)],
                 series[panel.years.index(year_b)], p]
            )
    _write_table(
        out / "pairs.csv",
        h,
        ["code", "year_a", "year_b", "medals_a", "medals_b", "p_value"],
        pair_rows,
    )
    print(f"wrote {out / 'meanvar.csv'} ({len(points)} NOCs)")
    return EXIT_OK


def cmd_trajectory(args: argparse.Namespace) -> int:
    panel = _load_panel(args)
    config = _sampler_config(args)
    spec = _prior_spec(args.prior)
    payload = {
        "package": "medalrank",
        "version": __version__,
        "command": "trajectory",
        "rng": RNG_NAME,
        "seed": config.seed,
        "config": asdict(config),
        "prior": asdict(spec),
        "order": args.order,
        "years": list(panel.years),
        "fingerprints": [g.fingerprint for g in panel.games],
    }
    manifest = _finalize_manifest(payload)
    h = manifest["manifest_hash"]
    out = _out_dir(args)
    _write_json(out / "manifest.json", manifest)

    tables = rank_trajectory(panel, spec, config, statistic=args.order)
    rows = []
    for year in sorted(tables):
        table = tables[year]
        for seat, s in enumerate(table.rows, start=1):
            rows.append(
                [year, seat, s.code, s.posterior_mean_rank, s.posterior_median_rank,
                 s.rate_median_per_million]
            )
    _write_table(
        out / "trajectory.csv",
        h,
        ["year", "seat", "code", "posterior_mean_rank", "posterior_median_rank",
         "rate_median_per_million"],
        rows,
    )
    print(f"wrote {out / 'trajectory.csv'} ({len(tables)} Games)")
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _add_games_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--games", help="Games CSV path")
    p.add_argument("--meta", help="sidecar JSON with year/label/host/total_medals/medal_quota")
    p.add_argument("--year", type=int)
    p.add_argument("--label")
    p.add_argument("--host")
    p.add_argument("--total-medals", type=int, dest="total_medals")
    p.add_argument("--medal-quota", type=int, dest="medal_quota")
    p.add_argument("--bundled", type=int, help="use a bundled Games by year")


def _add_sampler_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--adapt", type=int, default=5000)
    p.add_argument("--burn-in", type=int, default=5000, dest="burn_in")
    p.add_argument("--keep", type=int, default=20000)
    p.add_argument("--thin", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-accept", type=float, default=0.44, dest="target_accept")
    p.add_argument("--rhat-threshold", type=float, default=1.01, dest="rhat_threshold")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--allow-unconverged", action="store_true")


def _add_panel_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--panel", nargs="+", help="Games CSV paths, oldest first")
    p.add_argument("--panel-meta", nargs="+", dest="panel_meta",
                   help="sidecar JSON per panel CSV, same order")
    p.add_argument("--bundled-panel", action="store_true", dest="bundled_panel")
    p.add_argument("--years", nargs="+", type=int,
                   help="restrict --bundled-panel to these years")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medalrank",
        description="Bayesian per-capita ranking of Olympic medal tables",
    )
    parser.add_argument("--version", action="version", version=f"medalrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="run the sampler and persist draws")
    _add_games_source(p)
    _add_sampler_flags(p)
    p.add_argument("--prior", choices=sorted(PRIOR_ALIASES), default="beta")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rank", help="posterior ranking table from saved draws")
    _add_games_source(p)
    p.add_argument("--draws", required=True)
    p.add_argument("--order", choices=["mean", "median"], default="mean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("compare", help="join posterior ranking with the baselines")
    _add_games_source(p)
    p.add_argument("--draws", required=True)
    p.add_argument("--order", choices=["mean", "median"], default="mean")
    p.add_argument("--n-definition", choices=list(N_DEFINITIONS), default="all",
                   dest="n_definition")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sensitivity", help="refit under every prior family")
    _add_games_source(p)
    _add_sampler_flags(p)
    p.add_argument("--order", choices=["mean", "median"], default="mean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("diagnose", help="Poisson mean-variance diagnostics on a panel")
    _add_panel_source(p)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--band-points", type=int, default=40, dest="band_points")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("trajectory", help="independent per-Games fits across a panel")
    _add_panel_source(p)
    _add_sampler_flags(p)
    p.add_argument("--prior", choices=sorted(PRIOR_ALIASES), default="beta")
    p.add_argument("--order", choices=["mean", "median"], default="mean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trajectory)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (IngestionError, ValueError, KeyError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
