"""Loss values and gradients w.r.t. the additive predictor, per outcome family.

Every loss is a (weighted) mean so learning rates keep their meaning across
sample and minibatch sizes; the Cox loss is a per-event mean of the negative
partial log-likelihood with Breslow handling of tied event times.  All losses
are minimized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import neural_link
from .errors import DataError, DomainError, ShapeError
from .neural_link import MlpSpec


@dataclass
class LossValue:
    """Scalar objective (to minimize) and its gradient d total / d eta_i."""

    total: float
    per_obs_grad: np.ndarray


def _weights(weights, n: int) -> tuple[np.ndarray, float]:
    if n == 0:
        raise DataError("loss evaluated on empty data")
    if weights is None:
        return np.ones(n), float(n)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ShapeError(f"weights have shape {w.shape}, expected ({n},)")
    total = float(w.sum())
    if total <= 0:
        raise DataError("weights sum to zero")
    return w, total


def loss_gaussian(y, eta, weights=None) -> LossValue:
    """Mean squared error."""
    y = np.asarray(y, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if y.shape != eta.shape:
        raise ShapeError(f"y shape {y.shape} does not match eta shape {eta.shape}")
    resid = y - eta
    if weights is None:
        n = y.shape[0]
        if n == 0:
            raise DataError("loss evaluated on empty data")
        return LossValue(float(resid @ resid) / n, (-2.0 / n) * resid)
    w, wsum = _weights(weights, y.shape[0])
    total = float(w @ (resid * resid) / wsum)
    grad = -2.0 * w * resid / wsum
    return LossValue(total, grad)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ex = np.exp(eta[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def loss_binomial(y, eta, weights=None) -> LossValue:
    """Mean negative Bernoulli log-likelihood with a logit link."""
    y = np.asarray(y, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if y.shape != eta.shape:
        raise ShapeError(f"y shape {y.shape} does not match eta shape {eta.shape}")
    if not np.isin(y, (0.0, 1.0)).all():
        raise DomainError("binomial outcomes must be 0/1")
    # log(1 + e^eta) = max(eta, 0) + log1p(e^{-|eta|}), safe for |eta| ~ 700+
    log1pexp = np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))
    if weights is None:
        n = y.shape[0]
        if n == 0:
            raise DataError("loss evaluated on empty data")
        return LossValue(
            float(-np.sum(y * eta - log1pexp)) / n, (_sigmoid(eta) - y) / n
        )
    w, wsum = _weights(weights, y.shape[0])
    total = float(-(w @ (y * eta - log1pexp)) / wsum)
    grad = w * (_sigmoid(eta) - y) / wsum
    return LossValue(total, grad)


def loss_poisson(y, eta, weights=None) -> LossValue:
    """Mean negative Poisson log-likelihood (log link, log y! constant dropped)."""
    y = np.asarray(y, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if y.shape != eta.shape:
        raise ShapeError(f"y shape {y.shape} does not match eta shape {eta.shape}")
    if np.any(y < 0) or np.any(y != np.round(y)):
        raise DomainError("poisson outcomes must be non-negative integers")
    mu = np.exp(eta)
    if weights is None:
        n = y.shape[0]
        if n == 0:
            raise DataError("loss evaluated on empty data")
        return LossValue(float(np.sum(mu - y * eta)) / n, (mu - y) / n)
    w, wsum = _weights(weights, y.shape[0])
    total = float(w @ (mu - y * eta) / wsum)
    grad = w * (mu - y) / wsum
    return LossValue(total, grad)


def loss_cox(time, event, eta, weights=None) -> LossValue:
    """Per-event mean negative Cox partial log-likelihood, Breslow ties.

    Risk sums are accumulated in one sorted sweep; tied times share the risk
    set of their first (smallest-index-after-sort) member, which is exactly
    the Breslow convention.
    """
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    n = eta.shape[0]
    if time.shape != (n,) or event.shape != (n,):
        raise ShapeError("time/event/eta lengths disagree")
    if n == 0:
        raise DataError("loss evaluated on empty data")
    if np.any(time <= 0):
        raise DomainError("event/censoring times must be positive")
    if not np.isin(event, (0.0, 1.0)).all():
        raise DomainError("event flags must be 0/1")
    w, _ = _weights(weights, n)
    d_total = float(w @ event)
    if d_total <= 0:
        raise DataError("no observed events; partial likelihood is undefined")

    # The partial likelihood is shift-invariant, so center eta before exp.
    eta_c = eta - eta.max()
    order = np.argsort(time, kind="stable")
    t_s = time[order]
    e_s = event[order]
    w_s = w[order]
    r_s = w_s * np.exp(eta_c[order])

    suffix = np.cumsum(r_s[::-1])[::-1]
    uniq_times, first_idx = np.unique(t_s, return_index=True)
    group = np.searchsorted(uniq_times, t_s)
    risk_sum = suffix[first_idx]  # per tie group

    log_risk = np.log(risk_sum)
    total = float(-(w_s * e_s) @ (eta_c[order] - log_risk[group]) / d_total)

    # grad_k = -(w_k d_k - w_k e^{eta_k} A(t_k)) / d_total with
    # A(t) = sum over events at times <= t of w_i / risk_sum(t_i)
    ev_per_group = np.bincount(group, weights=w_s * e_s, minlength=uniq_times.size)
    a_group = np.cumsum(ev_per_group / risk_sum)
    grad_sorted = -(w_s * e_s - r_s * a_group[group]) / d_total
    grad = np.empty(n)
    grad[order] = grad_sorted
    return LossValue(total, grad)


def family_loss(family: str, eta, y=None, time=None, event=None, weights=None) -> LossValue:
    """Dispatch to the family's loss."""
    if family == "gaussian":
        return loss_gaussian(y, eta, weights)
    if family == "binomial":
        return loss_binomial(y, eta, weights)
    if family == "poisson":
        return loss_poisson(y, eta, weights)
    if family == "cox":
        return loss_cox(time, event, eta, weights)
    raise DomainError(f"unknown outcome family {family!r}")


def anchoring_penalty(
    theta: np.ndarray, spec: MlpSpec, weight: float
) -> tuple[float, np.ndarray]:
    """weight * g(0)^2 and its gradient w.r.t. theta.

    Pins the link at zero so level shifts cannot migrate between the link and
    the linear part's intercept.
    """
    if weight < 0:
        raise DomainError("anchoring weight must be non-negative")
    if weight == 0.0:
        return 0.0, np.zeros(neural_link.n_params(spec))
    out, tape = neural_link.forward(theta, spec, np.zeros(1))
    g0 = float(out[0])
    grad_theta, _ = neural_link.backward(tape, np.array([2.0 * weight * g0]))
    return weight * g0 * g0, grad_theta
