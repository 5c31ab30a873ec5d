"""Unconstrained reparameterisations used by the random-walk sampler.

Every constrained sampler block (rates in (0,1), positive scales,
simplex weights) is updated on an unconstrained scale; the functions
here provide the forward/inverse maps and the log absolute Jacobian
determinants that keep the target density correct after the change of
variables.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, log_expit, logit

__all__ = [
    "expit",
    "log_expit",
    "logit",
    "interval_from_unconstrained",
    "interval_log_jacobian",
    "interval_to_unconstrained",
    "positive_from_unconstrained",
    "positive_log_jacobian",
    "positive_to_unconstrained",
    "sticks_from_weights",
    "sticks_log_jacobian",
    "weights_from_sticks",
]


def interval_from_unconstrained(z, scale: float = 1.0):
    """Map real z to (0, scale) via a scaled logistic."""
    return scale * expit(z)


def interval_to_unconstrained(x, scale: float = 1.0):
    return logit(np.asarray(x, dtype=float) / scale)


def interval_log_jacobian(z, scale: float = 1.0):
    """log |d/dz scale*expit(z)| = log scale + log_expit(z) + log_expit(-z)."""
    z = np.asarray(z, dtype=float)
    return np.log(scale) + log_expit(z) + log_expit(-z)


def positive_from_unconstrained(z):
    return np.exp(z)


def positive_to_unconstrained(x):
    return np.log(x)


def positive_log_jacobian(z):
    # d/dz exp(z) = exp(z), so the log Jacobian is z itself.
    return np.asarray(z, dtype=float)


def weights_from_sticks(z: np.ndarray) -> np.ndarray:
    """Map 2 real stick logits to a 3-point simplex.

    w0 = v0, w1 = (1-v0) v1, w2 = (1-v0)(1-v1) with v_k = expit(z_k).
    """
    z = np.asarray(z, dtype=float)
    v0, v1 = expit(z[..., 0]), expit(z[..., 1])
    w0 = v0
    w1 = (1.0 - v0) * v1
    w2 = (1.0 - v0) * (1.0 - v1)
    return np.stack([w0, w1, w2], axis=-1)


def sticks_from_weights(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    v0 = w[..., 0]
    # remaining mass after the first stick; v1 is w1's share of it
    rest = 1.0 - v0
    v1 = w[..., 1] / rest
    return np.stack([logit(v0), logit(v1)], axis=-1)


def sticks_log_jacobian(z: np.ndarray) -> np.ndarray:
    """log |det d(w0,w1)/d(z0,z1)| for the stick-breaking map.

    The Jacobian is triangular: |det| = v0(1-v0) * (1-v0) v1(1-v1).
    """
    z = np.asarray(z, dtype=float)
    z0, z1 = z[..., 0], z[..., 1]
    return (
        log_expit(z0)
        + 2.0 * log_expit(-z0)
        + log_expit(z1)
        + log_expit(-z1)
    )
