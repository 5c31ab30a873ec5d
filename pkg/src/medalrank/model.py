"""Model parameters, prior families, and log-density evaluation.

The observation model: within NOC c of population n_c, the number of
athletes winning exactly i medals (i = 1..3, with 4 binning "4 or more")
is Poisson with mean n_c * p_{i,c}, where the cell probabilities share a
country effect p_c and global continuation probabilities q2, q3, q4.
Ranking is by expected medals per person, which factorizes as p_c times
a common function of the q's, so rank order is driven by p_c alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import betaln, gammaln, log_ndtr, logsumexp

from .data import GamesDataset

FAMILY_BETA = "beta"
FAMILY_TRUNC_LOGNORMAL = "trunc-lognormal"
FAMILY_LOGIT_NORMAL = "logit-normal"
FAMILY_BETA_MIXTURE = "beta-mixture"
FAMILIES = (
    FAMILY_BETA,
    FAMILY_TRUNC_LOGNORMAL,
    FAMILY_LOGIT_NORMAL,
    FAMILY_BETA_MIXTURE,
)

_LN_2PI = math.log(2.0 * math.pi)
_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class PriorSpec:
    """Prior family for the country effects p_c plus hyperprior constants.

    ``mu_scale_is_precision`` records how the Normal(-15, 0.323) hyperprior
    scale parameter is read: as a precision (the default, giving sd
    1/sqrt(0.323)) or directly as a standard deviation.
    """

    family: str = FAMILY_BETA
    alpha_max: float = 1.0
    beta_max: float = 1e8
    mu_loc: float = -15.0
    mu_scale: float = 0.323
    mu_scale_is_precision: bool = True
    sigma_shape: float = 0.001
    sigma_rate: float = 0.001
    sigma_floor: float = 1e-6
    dirichlet_concentration: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown prior family {self.family!r}")
        for name in (
            "alpha_max",
            "beta_max",
            "mu_scale",
            "sigma_shape",
            "sigma_rate",
            "sigma_floor",
            "dirichlet_concentration",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def mu_sd(self) -> float:
        if self.mu_scale_is_precision:
            return 1.0 / math.sqrt(self.mu_scale)
        return self.mu_scale

    @property
    def n_components(self) -> int:
        return 3 if self.family == FAMILY_BETA_MIXTURE else 1


@dataclass(frozen=True)
class BetaHyper:
    alpha: float
    beta: float


@dataclass(frozen=True)
class LogNormalHyper:
    """(mu, sigma) of the Normal driving either log(p) or logit(p)."""

    mu: float
    sigma: float


@dataclass(frozen=True, eq=False)
class MixtureHyper:
    """Three Beta components with simplex weights."""

    alphas: np.ndarray
    betas: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        for name in ("alphas", "betas", "weights"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,):
                raise ValueError(f"{name} must have shape (3,)")
            object.__setattr__(self, name, arr)


HyperParams = Union[BetaHyper, LogNormalHyper, MixtureHyper]


@dataclass(frozen=True, eq=False)
class ModelParams:
    """One point in parameter space.

    Construction is intentionally permissive about ranges: support
    membership is the job of log_prior (out-of-support points get -inf,
    they are not construction errors).
    """

    p: np.ndarray
    q2: float
    q3: float
    q4: float
    hyper: HyperParams

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("p must be a non-empty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ValueError("p contains non-finite values")
        for name in ("q2", "q3", "q4"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")
        object.__setattr__(self, "p", p)

    @property
    def n_countries(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class CellProbabilities:
    """Probabilities of exactly 1, 2, 3, and >=4 medals for one NOC."""

    p1: float
    p2: float
    p3: float
    p4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3, self.p4])


def _check_unit_interval(**values: float) -> None:
    for name, value in values.items():
        if not (0.0 <= value <= 1.0):
            raise ValueError(f"{name}={value} outside [0, 1]")


def cell_probabilities(p_c: float, q2: float, q3: float, q4: float) -> CellProbabilities:
    """Split the medal-winning probability p_c across multiplicity cells."""
    _check_unit_interval(p_c=p_c, q2=q2, q3=q3, q4=q4)
    return CellProbabilities(
        p1=p_c * (1.0 - q2),
        p2=p_c * q2 * (1.0 - q3),
        p3=p_c * q2 * q3 * (1.0 - q4),
        p4=p_c * q2 * q3 * q4,
    )


def expected_rate(p_c: float, q2: float, q3: float, q4: float) -> float:
    """Expected medals per person: sum of i * P(exactly i medals)."""
    _check_unit_interval(p_c=p_c, q2=q2, q3=q3, q4=q4)
    return p_c * (
        (1.0 - q2)
        + 2.0 * q2 * (1.0 - q3)
        + 3.0 * q2 * q3 * (1.0 - q4)
        + 4.0 * q2 * q3 * q4
    )


def rate_factor(q2: float, q3: float, q4: float) -> float:
    """expected_rate(p, q2, q3, q4) == p * rate_factor(q2, q3, q4)."""
    return 1.0 + q2 * (1.0 + q3 * (1.0 + q4))


def cells_matrix(p: np.ndarray, q2: float, q3: float, q4: float) -> np.ndarray:
    """Vectorized cell probabilities, shape (C, 4)."""
    p = np.asarray(p, dtype=float)
    f = np.array(
        [
            1.0 - q2,
            q2 * (1.0 - q3),
            q2 * q3 * (1.0 - q4),
            q2 * q3 * q4,
        ]
    )
    return p[:, None] * f[None, :]


def dataset_arrays(data: GamesDataset) -> tuple[np.ndarray, np.ndarray]:
    """(populations (C,), multiplicity counts (C, 4)) in record order."""
    n = np.array([r.population for r in data.records], dtype=float)
    m = np.array(
        [[r.m1, r.m2, r.m3, r.m4plus] for r in data.records], dtype=np.int64
    )
    return n, m


def log_likelihood(data: GamesDataset, params: ModelParams) -> float:
    """Joint Poisson log-density of all multiplicity counts.

    Full density: the log-factorial terms are kept so values are
    comparable across runs and datasets.
    """
    n, m = dataset_arrays(data)
    if params.n_countries != n.size:
        raise ValueError(
            f"params have {params.n_countries} countries, dataset has {n.size}"
        )
    lam = n[:, None] * cells_matrix(params.p, params.q2, params.q3, params.q4)
    if np.any(lam <= 0.0):
        raise ValueError("non-positive Poisson mean; parameters outside open support")
    value = float(np.sum(m * np.log(lam) - lam - gammaln(m + 1.0)))
    if not math.isfinite(value):
        raise FloatingPointError("log-likelihood is not finite")
    return value


def _log_beta_pdf_sum(p: np.ndarray, alpha: float, beta: float) -> float:
    return float(
        (alpha - 1.0) * np.sum(np.log(p))
        + (beta - 1.0) * np.sum(np.log1p(-p))
        - p.size * betaln(alpha, beta)
    )


def _hyper_in_support(spec: PriorSpec, hyper: HyperParams) -> bool:
    if spec.family == FAMILY_BETA:
        if not isinstance(hyper, BetaHyper):
            raise TypeError("beta family needs BetaHyper")
        # uniform hyperpriors: right-closed so alpha=1 (flat Beta) is legal
        return 0.0 < hyper.alpha <= spec.alpha_max and 0.0 < hyper.beta <= spec.beta_max
    if spec.family in (FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL):
        if not isinstance(hyper, LogNormalHyper):
            raise TypeError(f"{spec.family} family needs LogNormalHyper")
        return math.isfinite(hyper.mu) and hyper.sigma > 0.0
    if not isinstance(hyper, MixtureHyper):
        raise TypeError("beta-mixture family needs MixtureHyper")
    w = hyper.weights
    return (
        bool(np.all(hyper.alphas > 0.0))
        and bool(np.all(hyper.alphas <= spec.alpha_max))
        and bool(np.all(hyper.betas > 0.0))
        and bool(np.all(hyper.betas <= spec.beta_max))
        and bool(np.all(w > 0.0))
        and abs(float(np.sum(w)) - 1.0) <= _SIMPLEX_TOL
    )


def _log_hyperprior(spec: PriorSpec, hyper: HyperParams) -> float:
    """Log-density of the hyperparameters (support already checked)."""
    if spec.family == FAMILY_BETA:
        return -math.log(spec.alpha_max) - math.log(spec.beta_max)
    if spec.family in (FAMILY_TRUNC_LOGNORMAL, FAMILY_LOGIT_NORMAL):
        assert isinstance(hyper, LogNormalHyper)
        sd = spec.mu_sd
        lp_mu = -0.5 * _LN_2PI - math.log(sd) - 0.5 * ((hyper.mu - spec.mu_loc) / sd) ** 2
        a, b = spec.sigma_shape, spec.sigma_rate
        lp_sigma = (
            a * math.log(b)
            - math.lgamma(a)
            + (a - 1.0) * math.log(hyper.sigma)
            - b * hyper.sigma
        )
        return lp_mu + lp_sigma
    assert isinstance(hyper, MixtureHyper)
    # Dirichlet(1,1,1) density is Gamma(3) = 2 on the simplex
    lp = 3 * (-math.log(spec.alpha_max) - math.log(spec.beta_max))
    lp += math.lgamma(3.0 * spec.dirichlet_concentration) - 3.0 * math.lgamma(
        spec.dirichlet_concentration
    )
    return lp


def _log_p_prior(spec: PriorSpec, p: np.ndarray, hyper: HyperParams) -> float:
    if spec.family == FAMILY_BETA:
        assert isinstance(hyper, BetaHyper)
        return _log_beta_pdf_sum(p, hyper.alpha, hyper.beta)
    if spec.family == FAMILY_TRUNC_LOGNORMAL:
        assert isinstance(hyper, LogNormalHyper)
        mu, sigma = hyper.mu, hyper.sigma
        log_p = np.log(p)
        # renormalize the log-normal by its mass on (0,1): Phi((0-mu)/sigma)
        log_trunc_mass = log_ndtr(-mu / sigma)
        return float(
            np.sum(
                -log_p
                - math.log(sigma)
                - 0.5 * _LN_2PI
                - 0.5 * ((log_p - mu) / sigma) ** 2
            )
            - p.size * log_trunc_mass
        )
    if spec.family == FAMILY_LOGIT_NORMAL:
        assert isinstance(hyper, LogNormalHyper)
        mu, sigma = hyper.mu, hyper.sigma
        logit_p = np.log(p) - np.log1p(-p)
        return float(
            np.sum(
                -math.log(sigma)
                - 0.5 * _LN_2PI
                - 0.5 * ((logit_p - mu) / sigma) ** 2
                - np.log(p)
                - np.log1p(-p)
            )
        )
    assert isinstance(hyper, MixtureHyper)
    log_p = np.log(p)[:, None]
    log_1mp = np.log1p(-p)[:, None]
    a = hyper.alphas[None, :]
    b = hyper.betas[None, :]
    comp = (a - 1.0) * log_p + (b - 1.0) * log_1mp - betaln(a, b)
    return float(np.sum(logsumexp(comp, axis=1, b=hyper.weights[None, :])))


def log_prior(params: ModelParams, spec: PriorSpec) -> float:
    """Joint log-density of (p, q2, q3, q4, hyper); -inf outside support."""
    p = params.p
    qs = (params.q2, params.q3, params.q4)
    if not all(0.0 < q < 1.0 for q in qs):
        return -math.inf
    if not (np.all(p > 0.0) and np.all(p < 1.0)):
        return -math.inf
    if not _hyper_in_support(spec, params.hyper):
        return -math.inf
    # q2, q3, q4 ~ Uniform(0,1) contribute 0
    return _log_hyperprior(spec, params.hyper) + _log_p_prior(spec, p, params.hyper)


def log_posterior(data: GamesDataset, params: ModelParams, spec: PriorSpec) -> float:
    """log_prior + log_likelihood, short-circuiting out-of-support points."""
    lp = log_prior(params, spec)
    if lp == -math.inf:
        return -math.inf
    return lp + log_likelihood(data, params)
