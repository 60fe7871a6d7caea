"""Partial-linear single-index predictor and its identifiability rules.

The predictor is eta_i = g(beta . x_i) + gamma . z_i with g the neural link.
beta is kept on the unit sphere with a positive leading coordinate; when the
leading coordinate is exactly zero the first nonzero coordinate breaks the
tie, so every direction has one canonical representative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import neural_link
from .errors import DomainError, ShapeError
from .neural_link import MlpSpec

UNIT_NORM_TOL = 1e-9


def project_identifiable(beta: np.ndarray) -> tuple[np.ndarray, bool]:
    """Normalize to unit length and fix the sign; returns (beta', flipped)."""
    beta = np.asarray(beta, dtype=np.float64)
    norm = np.linalg.norm(beta)
    if norm == 0.0 or not np.isfinite(norm):
        raise DomainError("index direction is degenerate (zero or non-finite norm)")
    out = beta / norm
    nonzero = np.flatnonzero(out)
    lead = out[0] if out[0] != 0.0 else out[nonzero[0]]
    flipped = lead < 0.0
    if flipped:
        out = -out
    return out, bool(flipped)


def _check_identifiable(beta: np.ndarray) -> None:
    if abs(np.linalg.norm(beta) - 1.0) > UNIT_NORM_TOL:
        raise DomainError(
            f"index direction must have unit norm (got {np.linalg.norm(beta)!r})"
        )
    nonzero = np.flatnonzero(beta)
    if nonzero.size == 0:
        raise DomainError("index direction is all zeros")
    lead = beta[0] if beta[0] != 0.0 else beta[nonzero[0]]
    if lead < 0.0:
        raise DomainError("index direction violates the positive-lead sign rule")


@dataclass
class ModelParams:
    """Fitted (beta, gamma, theta) triple; invariants enforced on construction."""

    beta: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    mlp: MlpSpec = field(default_factory=MlpSpec)

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64)
        self.gamma = np.asarray(self.gamma, dtype=np.float64)
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.beta.ndim != 1 or self.beta.size < 1:
            raise ShapeError("beta must be a non-empty vector")
        if self.gamma.ndim != 1:
            raise ShapeError("gamma must be a vector")
        if self.theta.shape != (neural_link.n_params(self.mlp),):
            raise ShapeError(
                f"theta has length {self.theta.size}, expected {neural_link.n_params(self.mlp)}"
            )
        _check_identifiable(self.beta)

    @property
    def p(self) -> int:
        return self.beta.size

    @property
    def q(self) -> int:
        return self.gamma.size


def index(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Exposure index s_i = beta . x_i."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.p:
        raise ShapeError(f"exposures have shape {x.shape}, beta has length {params.p}")
    return x @ params.beta


def link_values(params: ModelParams, s: np.ndarray) -> np.ndarray:
    """g(s) on arbitrary index values (curve plotting, band evaluation)."""
    return neural_link.evaluate(params.theta, params.mlp, np.asarray(s, dtype=np.float64))


def predict_eta(params: ModelParams, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Additive predictor eta_i = g(beta . x_i) + gamma . z_i."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != params.q:
        raise ShapeError(f"covariates have shape {z.shape}, gamma has length {params.q}")
    s = index(params, x)
    if z.shape[0] != s.shape[0]:
        raise ShapeError("exposures and covariates disagree on the number of rows")
    return link_values(params, s) + z @ params.gamma


def apply_mean_link(family: str, eta: np.ndarray) -> np.ndarray:
    """Inverse link mapping eta to the outcome mean scale."""
    eta = np.asarray(eta, dtype=np.float64)
    if family == "gaussian":
        return eta.copy()
    if family == "binomial":
        # overflow-safe logistic
        out = np.empty_like(eta)
        pos = eta >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
        ex = np.exp(eta[~pos])
        out[~pos] = ex / (1.0 + ex)
        return out
    if family == "poisson":
        return np.exp(eta)
    if family == "cox":
        raise DomainError("cox has no mean link; the predictor is a relative log-hazard")
    raise DomainError(f"unknown outcome family {family!r}")
