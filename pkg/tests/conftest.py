"""Shared fixtures: bundled datasets, session-scoped sampler fits, toy data.

The expensive fits (full-length Paris runs under each prior family, the
long two-country grid run, the calibration sweep) are session fixtures so
the acceptance tests and the unit tests share them.
"""

from __future__ import annotations

import numpy as np
import pytest

from medalrank.data import GamesDataset, NocRecord
from medalrank.datasets import bundled_panel, load_bundled
from medalrank.model import (
    FAMILY_BETA,
    FAMILY_BETA_MIXTURE,
    FAMILY_TRUNC_LOGNORMAL,
    PriorSpec,
)
from medalrank.sampler import SamplerConfig, run_sampler

import oracles

WORKERS = 4  # chains per fit; session fits run them in parallel


# --- dataset builders -------------------------------------------------------


def make_games(
    records, year=2024, label="Test Games", host_code="ZZZ", quota=None, total=None
):
    table = sum(r.total_medals for r in records)
    awarded = total if total is not None else max(table, 1)
    return GamesDataset(
        year=year,
        label=label,
        host_code=host_code,
        records=tuple(records),
        total_medals_awarded=awarded,
        medal_quota=quota if quota is not None else awarded,
    )


def noc(code, population, m1, m2=0, m3=0, m4plus=0, **kw):
    return NocRecord(
        code=code, name=code.title(), population=population,
        m1=m1, m2=m2, m3=m3, m4plus=m4plus, **kw,
    )


def two_noc_toy() -> GamesDataset:
    # pooled multiplicities (10, 5, 2, 1); q2 posterior is then Beta(9, 11)
    return make_games(
        [
            noc("AAA", 1_000_000, m1=6, m2=3, m3=1),
            noc("BBB", 2_000_000, m1=4, m2=2, m3=1, m4plus=1),
        ]
    )


# --- bundled data ------------------------------------------------------------


@pytest.fixture(scope="session")
def paris():
    return load_bundled(2024)


@pytest.fixture(scope="session")
def tokyo():
    return load_bundled(2020)


@pytest.fixture(scope="session")
def panel():
    return bundled_panel()


# --- session fits ------------------------------------------------------------


def full_fit(data, family=FAMILY_BETA, seed=0):
    spec = PriorSpec(family=family)
    config = SamplerConfig(seed=seed, workers=WORKERS)
    return run_sampler(data, spec, config)


@pytest.fixture(scope="session")
def paris_beta_fit(paris):
    """Default-configuration Paris fit, reused across many tests."""
    return full_fit(paris)


@pytest.fixture(scope="session")
def family_fits(paris, paris_beta_fit):
    """Paris fits for the prior-sensitivity comparisons, keyed (family, seed)."""
    fits = {(FAMILY_BETA, 0): paris_beta_fit}
    for seed in (1, 2):
        fits[(FAMILY_BETA, seed)] = full_fit(paris, FAMILY_BETA, seed)
    fits[(FAMILY_TRUNC_LOGNORMAL, 0)] = full_fit(paris, FAMILY_TRUNC_LOGNORMAL, 0)
    for seed in (0, 1, 2):
        fits[(FAMILY_BETA_MIXTURE, seed)] = full_fit(paris, FAMILY_BETA_MIXTURE, seed)
    return fits


@pytest.fixture(scope="session")
def grid_toy_fit():
    """Long run on the two-country toy: 1e6 retained sweeps across 4 chains."""
    config = SamplerConfig(
        chains=4,
        adapt_iters=5000,
        burn_in=5000,
        keep_iters=250_000,
        thin=5,
        seed=11,
        workers=WORKERS,
    )
    draws, report = run_sampler(two_noc_toy(), PriorSpec(family=FAMILY_BETA), config)
    assert report.passed, f"toy run failed to converge: {report.flagged}"
    return draws


@pytest.fixture(scope="session")
def sbc_counts():
    """Rank-calibration sweep over the generative model.

    100 synthetic datasets (C=30, n_c log-uniform in [1e5, 1e8]) drawn from
    the Beta-prior model with default hyper ranges; each fit keeps 199
    draws, so ranks take 200 values and split evenly into 20 bins.
    """
    n_countries, n_datasets, n_bins = 30, 100, 20
    rng = np.random.Generator(np.random.PCG64(2026))
    spec = PriorSpec(family=FAMILY_BETA)
    counts = np.zeros(n_bins, dtype=int)
    for rep in range(n_datasets):
        n = np.exp(rng.uniform(np.log(1e5), np.log(1e8), size=n_countries))
        populations = np.rint(n).astype(int)
        alpha = rng.uniform(0.0, spec.alpha_max)
        beta = rng.uniform(0.0, spec.beta_max)
        p_true = rng.beta(alpha, beta, size=n_countries)
        q2, q3, q4 = rng.uniform(size=3)
        f = np.array(oracles.cell_factors(q2, q3, q4))
        m = rng.poisson(populations[:, None] * p_true[:, None] * f[None, :])
        records = [
            noc(f"C{i:02d}", int(populations[i]), *(int(x) for x in m[i]))
            for i in range(n_countries)
        ]
        data = make_games(records, year=2024, label=f"sbc-{rep}")
        config = SamplerConfig(
            chains=1,
            adapt_iters=1500,
            burn_in=1000,
            keep_iters=5970,
            thin=30,
            seed=9000 + rep,
        )
        draws, _ = run_sampler(data, spec, config)
        flat = draws.flat_p()  # (199, 30)
        stored = flat.shape[0]
        assert stored == 199
        ranks = (flat < p_true[None, :]).sum(axis=0)
        per_bin = (stored + 1) // n_bins
        counts += np.bincount(ranks // per_bin, minlength=n_bins)
    return counts


# --- acceptance reporting -----------------------------------------------------

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def record_acceptance(criterion: int, label: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE.append((criterion, label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted({entry[0] for entry in _ACCEPTANCE}):
        subs = [entry for entry in _ACCEPTANCE if entry[0] == crit]
        verdict = "PASS" if all(ok for _, _, ok, _ in subs) else "FAIL"
        detail = "; ".join(
            f"{label}: {'ok' if ok else 'FAIL'} ({text})" for _, label, ok, text in subs
        )
        terminalreporter.write_line(f"criterion {crit}: {verdict} -- {detail}")
