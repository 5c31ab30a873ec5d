"""Bayesian per-capita ranking of Olympic medal tables.

The package fits a hierarchical Poisson model to national medal counts
(split by athlete multiplicity), summarises posterior rank distributions,
and compares the result against lexicographic, per-capita and
binomial-surprise (U-index) baselines.
"""

from .data import (
    GamesDataset,
    GamesMeta,
    IngestionError,
    MultiGamesPanel,
    NocRecord,
    load_games_csv,
    load_panel_csv,
    write_games_csv,
)
from .model import (
    BetaHyper,
    CellProbabilities,
    LogNormalHyper,
    MixtureHyper,
    ModelParams,
    PriorSpec,
    cell_probabilities,
    expected_rate,
    log_likelihood,
    log_posterior,
    log_prior,
)
from .sampler import (
    ConvergenceError,
    ConvergenceReport,
    PosteriorDraws,
    SamplerConfig,
    convergence,
    run_sampler,
)

__version__ = "0.1.0"

__all__ = [
    "BetaHyper",
    "CellProbabilities",
    "ConvergenceError",
    "ConvergenceReport",
    "GamesDataset",
    "GamesMeta",
    "IngestionError",
    "LogNormalHyper",
    "MixtureHyper",
    "ModelParams",
    "MultiGamesPanel",
    "NocRecord",
    "PosteriorDraws",
    "PriorSpec",
    "SamplerConfig",
    "cell_probabilities",
    "convergence",
    "expected_rate",
    "load_games_csv",
    "load_panel_csv",
    "log_likelihood",
    "log_posterior",
    "log_prior",
    "run_sampler",
    "write_games_csv",
]
