"""Shared oracles for the test suite.

These are deliberately independent reimplementations (finite differences,
double loops, direct formulas); they must never call the code paths they
check.
"""

from __future__ import annotations

import numpy as np


def central_difference(f, x0: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x0 = np.asarray(x0, dtype=np.float64)
    grad = np.empty_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (f(xp) - f(xm)) / (2.0 * h)
    return grad


def max_rel_err(approx: np.ndarray, exact: np.ndarray, floor: float = 1e-8) -> float:
    """Largest elementwise relative error with an absolute floor for tiny values."""
    approx = np.asarray(approx, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    denom = np.maximum(np.abs(exact), floor)
    return float(np.max(np.abs(approx - exact) / denom))


def cox_loss_brute(time, event, eta, weights=None):
    """O(n^2) negative Breslow partial log-likelihood, per-event-weight mean."""
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n = eta.size
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    d = float((w * event).sum())
    total = 0.0
    for i in range(n):
        if event[i] == 1:
            risk = 0.0
            for j in range(n):
                if time[j] >= time[i]:
                    risk += w[j] * np.exp(eta[j])
            total -= w[i] * (eta[i] - np.log(risk))
    return total / d


def cox_grad_brute(time, event, eta, weights=None):
    """O(n^2) analytic gradient of cox_loss_brute w.r.t. eta."""
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n = eta.size
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    d = float((w * event).sum())
    risk_sums = np.empty(n)
    for i in range(n):
        risk_sums[i] = sum(
            w[j] * np.exp(eta[j]) for j in range(n) if time[j] >= time[i]
        )
    grad = np.zeros(n)
    for k in range(n):
        acc = w[k] * event[k]
        for i in range(n):
            if event[i] == 1 and time[k] >= time[i]:
                acc -= w[i] * w[k] * np.exp(eta[k]) / risk_sums[i]
        grad[k] = -acc / d
    return grad


def ols_fit(design: np.ndarray, y: np.ndarray):
    """(coef, classical SEs) for ordinary least squares."""
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    n, k = design.shape
    sigma2 = float(resid @ resid) / (n - k)
    cov = sigma2 * np.linalg.inv(design.T @ design)
    return coef, np.sqrt(np.diag(cov))


def ols_sandwich_se(design: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Heteroskedasticity-robust (HC0) OLS standard errors."""
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    bread = np.linalg.inv(design.T @ design)
    meat = design.T @ (design * (resid**2)[:, None])
    return np.sqrt(np.diag(bread @ meat @ bread))
