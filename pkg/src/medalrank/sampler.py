"""Adaptive Metropolis-within-Gibbs sampling of the medal-rate posterior.

Update blocks per sweep: all country effects p_c at once (their full
conditionals are independent given the shared parameters), then q2, q3,
q4, then the hyperparameters — every block a random walk on an
unconstrained scale with per-coordinate step sizes tuned toward a target
acceptance rate during a dedicated adaptation phase and frozen afterwards.

The likelihood factorizes: the four cell probabilities of NOC c sum to
p_c, so the Poisson means sum to n_c p_c and the data enter the p-updates
only through each NOC's unique-medalist count U_c and the q-updates only
through pooled multiplicity totals.  A sweep therefore costs O(C) with
small constants.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import betaln, expit, log_expit, log_ndtr, logit, logsumexp, ndtri
from scipy.stats import rankdata

from . import _transforms as tr
from .data import GamesDataset
from .model import (
    FAMILY_BETA,
    FAMILY_BETA_MIXTURE,
    FAMILY_LOGIT_NORMAL,
    FAMILY_TRUNC_LOGNORMAL,
    PriorSpec,
    dataset_arrays,
)

RNG_NAME = "numpy-pcg64"


class ConvergenceError(RuntimeError):
    """Convergence diagnostics cannot be computed on this input."""


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    adapt_iters: int = 5000
    burn_in: int = 5000
    keep_iters: int = 20000
    thin: int = 5
    seed: int = 0
    target_accept: float = 0.44
    rhat_threshold: float = 1.01
    workers: int = 1

    def __post_init__(self) -> None:
        for name in ("chains", "adapt_iters", "burn_in", "keep_iters", "thin", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.keep_iters % self.thin != 0:
            raise ValueError("keep_iters must be a multiple of thin")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must be in (0, 1)")
        if self.rhat_threshold < 1.0:
            raise ValueError("rhat_threshold must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def stored_per_chain(self) -> int:
        return self.keep_iters // self.thin


def hyper_column_names(family: str) -> tuple[str, ...]:
    if family == FAMILY_BETA:
        return ("alpha", "beta")
    if family in (FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL):
        return ("mu", "sigma")
    return ("alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3", "w1", "w2", "w3")


def _n_hyper_coords(family: str) -> int:
    """Unconstrained hyper dimension (mixture weights use 2 stick logits)."""
    return 8 if family == FAMILY_BETA_MIXTURE else 2


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """Retained draws, indexed (chain, stored iteration)."""

    p: np.ndarray  # (chains, stored, C)
    q: np.ndarray  # (chains, stored, 3)
    hyper: np.ndarray  # (chains, stored, len(hyper_names))
    hyper_names: tuple[str, ...]
    codes: tuple[str, ...]
    prior: PriorSpec
    config: SamplerConfig
    dataset_fingerprint: str
    acceptance: np.ndarray | None = None  # (chains, coords), post-adaptation

    def __post_init__(self) -> None:
        if self.p.ndim != 3 or self.q.ndim != 3 or self.hyper.ndim != 3:
            raise ValueError("draw arrays must be (chains, iterations, dim)")
        chains, stored = self.p.shape[:2]
        if self.q.shape[:2] != (chains, stored) or self.hyper.shape[:2] != (chains, stored):
            raise ValueError("draw arrays disagree on (chains, iterations)")
        if self.q.shape[2] != 3:
            raise ValueError("q draws must have 3 columns")
        if self.p.shape[2] != len(self.codes):
            raise ValueError("p draws do not match the NOC code list")
        if self.hyper.shape[2] != len(self.hyper_names):
            raise ValueError("hyper draws do not match hyper_names")

    @property
    def n_chains(self) -> int:
        return self.p.shape[0]

    @property
    def n_stored(self) -> int:
        return self.p.shape[1]

    @property
    def n_countries(self) -> int:
        return self.p.shape[2]

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return ("q2", "q3", "q4") + self.hyper_names + tuple(f"p_{c}" for c in self.codes)

    def scalar_matrix(self) -> np.ndarray:
        """(chains, stored, parameters) in parameter_names order."""
        return np.concatenate([self.q, self.hyper, self.p], axis=2)

    def flat_p(self) -> np.ndarray:
        """(chains*stored, C) with chains concatenated in index order."""
        return self.p.reshape(-1, self.n_countries)

    def flat_q(self) -> np.ndarray:
        return self.q.reshape(-1, 3)


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    parameters: tuple[str, ...]
    rhat: np.ndarray
    ess: np.ndarray
    threshold: float
    passed: bool
    flagged: tuple[str, ...]

    @property
    def max_rhat(self) -> float:
        return float(np.max(self.rhat)) if self.rhat.size else math.nan

    @property
    def min_ess(self) -> float:
        return float(np.min(self.ess)) if self.ess.size else math.nan

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "max_rhat": self.max_rhat,
            "min_ess": self.min_ess,
            "threshold": self.threshold,
            "flagged": list(self.flagged),
        }


def _hyper_anchor(family: str, spec: PriorSpec, naive: np.ndarray) -> np.ndarray:
    """Centre of the overdispersed hyperparameter initialization."""
    mean_naive = float(np.clip(naive.mean(), 1e-12, 0.5))
    if family == FAMILY_BETA:
        beta0 = np.clip(0.5 * (1.0 - mean_naive) / mean_naive, 1.0, 0.99 * spec.beta_max)
        return np.array([0.0, logit(beta0 / spec.beta_max)])
    if family in (FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL):
        x = np.log(naive) if family == FAMILY_TRUNC_LOGNORMAL else logit(naive)
        return np.array([float(x.mean()), math.log(float(x.std()) + 0.5)])
    beta0 = np.clip(0.5 * (1.0 - mean_naive) / mean_naive, 1.0, 0.99 * spec.beta_max)
    zb = logit(beta0 / spec.beta_max)
    return np.array([0.0, 0.0, 0.0, zb, zb, zb, logit(1.0 / 3.0), 0.0])


def _run_chain(
    chain_index: int,
    n: np.ndarray,
    m: np.ndarray,
    spec: PriorSpec,
    config: SamplerConfig,
) -> dict[str, np.ndarray]:
    family = spec.family
    C = n.size
    U = m.sum(axis=1).astype(float)
    pooled = m.sum(axis=0).astype(float)  # (M1, M2, M3, M4)
    # continuation successes/failures: q_i ~ fraction continuing past i-1 medals
    q_succ = np.array([pooled[1] + pooled[2] + pooled[3], pooled[2] + pooled[3], pooled[3]])
    q_fail = np.array([pooled[0], pooled[1], pooled[2]])

    n_h = _n_hyper_coords(family)
    n_coords = C + 3 + n_h
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, chain_index))))

    # overdispersed start: naive posterior point + chain-specific unit noise
    naive = (U + 0.5) / (n + 1.0)
    zp = logit(naive) + rng.standard_normal(C)
    q_hat = (q_succ + 0.5) / (q_succ + q_fail + 1.0)
    zq = logit(q_hat) + rng.standard_normal(3)
    zh = _hyper_anchor(family, spec, naive) + rng.standard_normal(n_h)

    lnp = log_expit(zp)
    ln1mp = log_expit(-zp)
    pvec = expit(zp)

    mu_loc, mu_sd = spec.mu_loc, spec.mu_sd
    g_shape, g_rate = spec.sigma_shape, spec.sigma_rate
    a_max, b_max = spec.alpha_max, spec.beta_max
    ln_floor = math.log(spec.sigma_floor)

    state: dict[str, object] = {}

    def refresh_hyper_values() -> None:
        if family == FAMILY_BETA:
            state["alpha"] = expit(zh[0]) * a_max
            state["beta"] = expit(zh[1]) * b_max
        elif family in (FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL):
            state["mu"] = zh[0]
            state["sigma"] = math.exp(zh[1])
        else:
            state["mix_a"] = expit(zh[0:3]) * a_max
            state["mix_b"] = expit(zh[3:6]) * b_max
            state["mix_w"] = tr.weights_from_sticks(zh[6:8])

    def p_target(zp_, lnp_, ln1mp_, pv_) -> np.ndarray:
        """Per-coordinate unnormalized log target of each z_{p_c}.

        Combines the likelihood factor, the p-prior and the logit
        Jacobian; constants shared by all proposals are dropped.
        """
        base = U * lnp_ - n * pv_
        if family == FAMILY_BETA:
            return base + state["alpha"] * lnp_ + state["beta"] * ln1mp_
        if family == FAMILY_TRUNC_LOGNORMAL:
            d = lnp_ - state["mu"]
            return base - d * d / (2.0 * state["sigma"] ** 2) + ln1mp_
        if family == FAMILY_LOGIT_NORMAL:
            d = zp_ - state["mu"]
            return base - d * d / (2.0 * state["sigma"] ** 2)
        comp = (
            (state["mix_a"] - 1.0) * lnp_[:, None]
            + (state["mix_b"] - 1.0) * ln1mp_[:, None]
            - betaln(state["mix_a"], state["mix_b"])[None, :]
        )
        mix = logsumexp(comp, axis=1, b=state["mix_w"][None, :])
        return base + mix + lnp_ + ln1mp_

    def q_target(i: int, z: float) -> float:
        # uniform prior contributes nothing; Beta-like likelihood + Jacobian
        return float((q_succ[i] + 1.0) * log_expit(z) + (q_fail[i] + 1.0) * log_expit(-z))

    def hyper_target(zh_) -> float:
        if family == FAMILY_BETA:
            za, zb = zh_
            alpha = expit(za) * a_max
            beta = expit(zb) * b_max
            if alpha <= 0.0 or beta <= 0.0:
                return -math.inf
            value = (
                (alpha - 1.0) * state["S_lnp"]
                + (beta - 1.0) * state["S_ln1mp"]
                - C * betaln(alpha, beta)
            )
            return float(value + log_expit(za) + log_expit(-za) + log_expit(zb) + log_expit(-zb))
        if family in (FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL):
            mu, lsig = zh_
            if lsig < ln_floor:
                return -math.inf
            sigma = math.exp(lsig)
            if family == FAMILY_TRUNC_LOGNORMAL:
                s1, s2 = state["S_lnp"], state["S_lnp2"]
                trunc = -C * float(log_ndtr(-mu / sigma))
            else:
                s1, s2 = state["S_zp"], state["S_zp2"]
                trunc = 0.0
            quad = s2 - 2.0 * mu * s1 + C * mu * mu
            return float(
                -C * lsig
                - quad / (2.0 * sigma * sigma)
                + trunc
                - 0.5 * ((mu - mu_loc) / mu_sd) ** 2
                + (g_shape - 1.0) * lsig
                - g_rate * sigma
                + lsig  # Jacobian of sigma = exp(z)
            )
        a = expit(zh_[0:3]) * a_max
        b = expit(zh_[3:6]) * b_max
        if np.any(a <= 0.0) or np.any(b <= 0.0):
            return -math.inf
        w = tr.weights_from_sticks(zh_[6:8])
        if np.any(w <= 0.0):
            return -math.inf
        comp = (
            (a[None, :] - 1.0) * lnp[:, None]
            + (b[None, :] - 1.0) * ln1mp[:, None]
            - betaln(a, b)[None, :]
        )
        value = float(np.sum(logsumexp(comp, axis=1, b=w[None, :])))
        jac = float(np.sum(log_expit(zh_[0:6])) + np.sum(log_expit(-zh_[0:6])))
        jac += float(tr.sticks_log_jacobian(zh_[6:8]))
        return value + jac

    def refresh_sums() -> None:
        if family == FAMILY_BETA:
            state["S_lnp"] = float(lnp.sum())
            state["S_ln1mp"] = float(ln1mp.sum())
        elif family == FAMILY_TRUNC_LOGNORMAL:
            state["S_lnp"] = float(lnp.sum())
            state["S_lnp2"] = float(np.dot(lnp, lnp))
        elif family == FAMILY_LOGIT_NORMAL:
            state["S_zp"] = float(zp.sum())
            state["S_zp2"] = float(np.dot(zp, zp))

    refresh_hyper_values()
    refresh_sums()

    # fail fast if the starting point is outside the computable range
    t0 = p_target(zp, lnp, ln1mp, pvec)
    if not np.all(np.isfinite(t0)):
        idx = int(np.flatnonzero(~np.isfinite(t0))[0])
        raise ValueError(f"non-finite log-posterior at initialization: p[{idx}]")
    for i, name in enumerate(("q2", "q3", "q4")):
        if not math.isfinite(q_target(i, float(zq[i]))):
            raise ValueError(f"non-finite log-posterior at initialization: {name}")
    if not math.isfinite(hyper_target(zh)):
        raise ValueError("non-finite log-posterior at initialization: hyperparameters")

    step_p = np.full(C, 0.5)
    step_q = np.full(3, 0.5)
    step_h = np.full(n_h, 0.5)
    target = config.target_accept

    stored = config.stored_per_chain
    out_p = np.empty((stored, C))
    out_q = np.empty((stored, 3))
    out_h = np.empty((stored, len(hyper_column_names(family))))
    acc_counts = np.zeros(n_coords)

    tq_cur = np.array([q_target(i, float(zq[i])) for i in range(3)])
    post_adapt_sweeps = config.burn_in + config.keep_iters
    total = config.adapt_iters + post_adapt_sweeps
    store_at = 0

    for t in range(1, total + 1):
        eps = rng.standard_normal(n_coords)
        lnu = np.log(rng.random(n_coords))
        adapting = t <= config.adapt_iters
        gamma = t ** -0.6 if adapting else 0.0

        # --- p block: simultaneous coordinate-wise accepts -----------------
        tp_cur = p_target(zp, lnp, ln1mp, pvec)
        zp_prop = zp + step_p * eps[:C]
        lnp_prop = log_expit(zp_prop)
        ln1mp_prop = log_expit(-zp_prop)
        pv_prop = expit(zp_prop)
        delta_p = p_target(zp_prop, lnp_prop, ln1mp_prop, pv_prop) - tp_cur
        acc_p = lnu[:C] < delta_p
        if np.any(acc_p):
            zp[acc_p] = zp_prop[acc_p]
            lnp[acc_p] = lnp_prop[acc_p]
            ln1mp[acc_p] = ln1mp_prop[acc_p]
            pvec[acc_p] = pv_prop[acc_p]
            refresh_sums()
        if adapting:
            step_p *= np.exp(gamma * (np.exp(np.minimum(delta_p, 0.0)) - target))
        else:
            acc_counts[:C] += acc_p

        # --- q block: three scalar random walks ----------------------------
        for i in range(3):
            j = C + i
            z_new = float(zq[i] + step_q[i] * eps[j])
            t_new = q_target(i, z_new)
            delta = t_new - tq_cur[i]
            if lnu[j] < delta:
                zq[i] = z_new
                tq_cur[i] = t_new
                acc = True
            else:
                acc = False
            if adapting:
                step_q[i] *= math.exp(gamma * (math.exp(min(delta, 0.0)) - target))
            else:
                acc_counts[j] += acc

        # --- hyper block: scalar random walks, sequential ------------------
        th_cur = hyper_target(zh)
        for i in range(n_h):
            j = C + 3 + i
            zh_prop = zh.copy()
            zh_prop[i] = zh[i] + step_h[i] * eps[j]
            t_new = hyper_target(zh_prop)
            delta = t_new - th_cur
            if lnu[j] < delta:
                zh = zh_prop
                th_cur = t_new
                acc = True
            else:
                acc = False
            if adapting:
                step_h[i] *= math.exp(gamma * (math.exp(min(delta, 0.0)) - target))
            else:
                acc_counts[j] += acc
        refresh_hyper_values()

        # --- storage --------------------------------------------------------
        k = t - config.adapt_iters - config.burn_in
        if k > 0 and k % config.thin == 0:
            out_p[store_at] = pvec
            out_q[store_at] = expit(zq)
            if family == FAMILY_BETA:
                out_h[store_at] = (state["alpha"], state["beta"])
            elif family in (FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL):
                out_h[store_at] = (state["mu"], state["sigma"])
            else:
                out_h[store_at] = np.concatenate(
                    [state["mix_a"], state["mix_b"], state["mix_w"]]
                )
            store_at += 1

    return {
        "p": out_p,
        "q": out_q,
        "hyper": out_h,
        "acceptance": acc_counts / post_adapt_sweeps,
    }


def run_sampler(
    data: GamesDataset, spec: PriorSpec, config: SamplerConfig
) -> tuple[PosteriorDraws, ConvergenceReport]:
    """Sample the posterior; returns draws plus a convergence report.

    A failed R-hat check flags the report, it does not raise: callers
    decide whether unconverged draws are usable.
    """
    if data.n_records == 0:
        raise ValueError("dataset has no records")
    n, m = dataset_arrays(data)
    chain_ids = list(range(config.chains))
    if config.workers > 1 and config.chains > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.chains)) as pool:
            results = list(
                pool.map(_run_chain, chain_ids, [n] * config.chains, [m] * config.chains,
                         [spec] * config.chains, [config] * config.chains)
            )
    else:
        results = [_run_chain(k, n, m, spec, config) for k in chain_ids]

    draws = PosteriorDraws(
        p=np.stack([r["p"] for r in results]),
        q=np.stack([r["q"] for r in results]),
        hyper=np.stack([r["hyper"] for r in results]),
        hyper_names=hyper_column_names(spec.family),
        codes=data.codes,
        prior=spec,
        config=config,
        dataset_fingerprint=data.fingerprint,
        acceptance=np.stack([r["acceptance"] for r in results]),
    )
    if config.chains >= 2:
        report = convergence(draws)
    else:
        nan = np.full(len(draws.parameter_names), math.nan)
        report = ConvergenceReport(
            parameters=draws.parameter_names,
            rhat=nan,
            ess=nan.copy(),
            threshold=config.rhat_threshold,
            passed=False,
            flagged=("single chain: diagnostics unavailable",),
        )
    return draws, report


# --- convergence diagnostics -------------------------------------------------


def _split_halves(x: np.ndarray) -> np.ndarray:
    """(chains, S) -> (2*chains, S//2); drops the last draw when S is odd."""
    chains, s = x.shape
    half = s // 2
    return np.concatenate([x[:, :half], x[:, half : 2 * half]], axis=0)


def _rank_normalize(x: np.ndarray) -> np.ndarray:
    ranks = rankdata(x.ravel(), method="average").reshape(x.shape)
    return ndtri((ranks - 0.375) / (x.size + 0.25))


def _rhat_from_z(z: np.ndarray) -> tuple[float, bool]:
    """Split R-hat on rank-normalized halves; second value flags degeneracy."""
    m, n_draws = z.shape
    within = float(z.var(axis=1, ddof=1).mean())
    between = float(z.mean(axis=1).var(ddof=1))  # variance of chain means
    if within == 0.0:
        return (math.nan, True) if between == 0.0 else (math.inf, True)
    rhat = math.sqrt((n_draws - 1) / n_draws + between / within)
    # identical chains give exactly zero between-chain variance: a wiring
    # bug in practice, so it is surfaced instead of silently passing
    return rhat, between == 0.0


def _autocov(x: np.ndarray) -> np.ndarray:
    n_draws = x.size
    x = x - x.mean()
    nfft = 1 << (2 * n_draws - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    return np.fft.irfft(f * np.conj(f), nfft)[:n_draws] / n_draws


def _ess_from_z(z: np.ndarray) -> float:
    """Bulk effective sample size (Geyer initial monotone sequence)."""
    m, n_draws = z.shape
    acov = np.stack([_autocov(z[i]) for i in range(m)])
    chain_var = acov[:, 0] * n_draws / (n_draws - 1)
    within = float(chain_var.mean())
    if within == 0.0:
        return math.nan
    between = float(z.mean(axis=1).var(ddof=1))
    var_plus = within * (n_draws - 1) / n_draws + between
    rho = 1.0 - (within - acov.mean(axis=0)) / var_plus

    tau = 0.0
    prev_pair = math.inf
    k = 0
    while 2 * k + 1 < n_draws:
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev_pair)  # enforce monotone decrease
        tau += pair
        prev_pair = pair
        k += 1
    tau = max(2.0 * tau - 1.0, 1e-12)
    return float(min(m * n_draws / tau, m * n_draws))


def convergence(draws: PosteriorDraws) -> ConvergenceReport:
    """Rank-normalized split R-hat and bulk ESS for every scalar parameter."""
    if draws.n_chains < 2:
        raise ConvergenceError("convergence diagnostics need at least 2 chains")
    if draws.n_stored < 4:
        raise ConvergenceError("convergence diagnostics need at least 4 stored draws")
    matrix = draws.scalar_matrix()
    names = draws.parameter_names
    rhats = np.empty(len(names))
    esses = np.empty(len(names))
    flagged: list[str] = []
    threshold = draws.config.rhat_threshold
    # split R-hat cannot see that whole chains repeat (the split halves
    # still differ), so duplicated chains are caught by direct comparison
    for i in range(draws.n_chains):
        for j in range(i + 1, draws.n_chains):
            if np.array_equal(matrix[i], matrix[j]):
                flagged.append(
                    f"chain {j} duplicates chain {i}: degenerate chains (seeding error)"
                )
    for idx, name in enumerate(names):
        z = _rank_normalize(_split_halves(matrix[:, :, idx]))
        rhat, degenerate = _rhat_from_z(z)
        ess = _ess_from_z(z)
        rhats[idx] = rhat
        esses[idx] = ess
        if degenerate or not math.isfinite(rhat):
            flagged.append(f"{name}: degenerate chains (R-hat {rhat:g})")
        elif rhat > threshold:
            flagged.append(f"{name}: R-hat {rhat:.4f} > {threshold}")
    passed = not flagged
    return ConvergenceReport(
        parameters=names,
        rhat=rhats,
        ess=esses,
        threshold=threshold,
        passed=passed,
        flagged=tuple(flagged),
    )


# --- persistence --------------------------------------------------------------


def write_draws_csv(draws: PosteriorDraws, path: str | Path, manifest: dict | None = None) -> None:
    """Columnar draws file: chain, iter, q2, q3, q4, hypers, p_<code>...

    Floats use 17 significant digits so reloading reproduces the draws
    bit-exactly.  A context line records the sampler configuration, the
    prior, and the dataset fingerprint so the file round-trips on its
    own; an optional manifest line additionally ties it to a run.
    """
    path = Path(path)
    cols = draws.parameter_names
    context = {
        "config": asdict(draws.config),
        "prior": asdict(draws.prior),
        "fingerprint": draws.dataset_fingerprint,
    }
    with path.open("w", encoding="utf-8", newline="") as fh:
        if manifest is not None:
            fh.write(f"# manifest={json.dumps(manifest, sort_keys=True)}\n")
        fh.write(f"# context={json.dumps(context, sort_keys=True)}\n")
        fh.write("chain,iter," + ",".join(cols) + "\n")
        matrix = draws.scalar_matrix()
        for chain in range(draws.n_chains):
            for it in range(draws.n_stored):
                row = matrix[chain, it]
                fh.write(
                    f"{chain},{it}," + ",".join(f"{v:.17g}" for v in row) + "\n"
                )


def read_draws_csv(path: str | Path) -> tuple[PosteriorDraws, dict | None]:
    """Inverse of write_draws_csv (acceptance rates are not persisted)."""
    path = Path(path)
    manifest: dict | None = None
    context: dict | None = None
    with path.open(encoding="utf-8") as fh:
        line = fh.readline()
        if line.startswith("# manifest="):
            manifest = json.loads(line[len("# manifest=") :])
            line = fh.readline()
        if line.startswith("# context="):
            context = json.loads(line[len("# context=") :])
            line = fh.readline()
        header = line.rstrip("\n").split(",")
        if header[:2] != ["chain", "iter"] or header[2:5] != ["q2", "q3", "q4"]:
            raise ValueError(f"{path}: not a draws file")
        names = header[2:]
        first_p = next(i for i, h in enumerate(names) if h.startswith("p_"))
        hyper_names = tuple(names[3:first_p])
        codes = tuple(h[2:] for h in names[first_p:])
        rows = []
        chain_col = []
        for text in fh:
            parts = text.rstrip("\n").split(",")
            chain_col.append(int(parts[0]))
            rows.append([float(v) for v in parts[2:]])
    values = np.asarray(rows)
    chains = np.asarray(chain_col)
    n_chains = int(chains.max()) + 1
    stored = values.shape[0] // n_chains
    matrix = values.reshape(n_chains, stored, values.shape[1])
    if context is not None:
        config = SamplerConfig(**context["config"])
        prior = PriorSpec(**context["prior"])
        fingerprint = context["fingerprint"]
    else:
        config = SamplerConfig(chains=n_chains, keep_iters=stored, thin=1)
        prior = PriorSpec()
        fingerprint = ""
    draws = PosteriorDraws(
        p=matrix[:, :, 3 + len(hyper_names) :],
        q=matrix[:, :, :3],
        hyper=matrix[:, :, 3 : 3 + len(hyper_names)],
        hyper_names=hyper_names,
        codes=codes,
        prior=prior,
        config=config,
        dataset_fingerprint=fingerprint,
    )
    return draws, manifest
