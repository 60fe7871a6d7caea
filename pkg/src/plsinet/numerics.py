"""Seeded randomness and the small dense linear-algebra kernels.

Randomness is pinned to the Philox4x64-10 counter-based generator.  A stream
is addressed by ``(seed, *path)``: the path is folded into the Philox key via
``numpy.random.SeedSequence`` spawn keys, so distinct paths yield independent,
non-overlapping streams and the same ``(seed, path)`` always replays the same
draws.  Normal variates use the generator's ziggurat method; both choices are
fixed for the life of the package so Monte-Carlo tables are bit-reproducible.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, FactorizationError, ShapeError

RNG_ALGORITHM = "Philox4x64-10 (numpy.random.Philox), ziggurat normals"


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator addressed by (seed, *path).

    Streams with different paths never overlap; an empty path gives the
    root stream for ``seed``.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Deterministic 63-bit child seed for nested components.

    Used where an API wants an integer seed (e.g. per-replicate fit configs)
    rather than a live generator.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def cholesky(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T == cov for symmetric positive-definite cov.

    Hand-rolled so a failing pivot can be reported by index; the matrices
    involved here are tiny (exposure covariances, p <= a few dozen).
    """
    a = np.asarray(cov, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"covariance must be square, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-8):
        raise DomainError("covariance matrix is not symmetric")
    n = a.shape[0]
    L = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0.0:
            raise FactorizationError(
                f"matrix is not positive definite: pivot {j} is {d:.6e}"
            )
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def mvn_sample(
    rng: np.random.Generator, mean: np.ndarray, chol: np.ndarray, n: int
) -> np.ndarray:
    """n rows of mean + L @ z with z i.i.d. standard normal from rng."""
    mean = np.asarray(mean, dtype=np.float64)
    chol = np.asarray(chol, dtype=np.float64)
    if chol.ndim != 2 or chol.shape[0] != chol.shape[1]:
        raise ShapeError(f"cholesky factor must be square, got shape {chol.shape}")
    if mean.shape != (chol.shape[0],):
        raise ShapeError(
            f"mean length {mean.shape} does not match factor dimension {chol.shape[0]}"
        )
    z = rng.standard_normal((n, chol.shape[0]))
    return mean + z @ chol.T


def standard_normal_quantile(p: float) -> float:
    """Phi^{-1}(p) for 0 < p < 1."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile argument must lie in (0, 1), got {p}")
    return float(ndtri(p))
