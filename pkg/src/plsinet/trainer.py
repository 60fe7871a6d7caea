"""Joint minibatch training of (beta, gamma, theta) with identifiability projection.

One Adam optimizer runs over the concatenation (gamma, beta, theta).  After
every minibatch update beta's sign is fixed (flip when the leading coordinate
goes negative, optionally flipping its first-moment estimates too) and beta is
renormalized to the unit sphere.  Early stopping tracks a held-out validation
split and returns the best-validation parameters.

The anchoring penalty's probe point s=0 rides along as an extra row of each
minibatch forward pass, so the penalty costs one row rather than a second
network evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import neural_link, objectives
from .data import Dataset
from .errors import DataError, DivergenceError, DomainError, ShapeError
from .model import ModelParams, project_identifiable
from .neural_link import MlpSpec
from .numerics import substream

BETA_INITS = ("least_squares_direction", "uniform_simplex_direction", "random_sphere")


@dataclass
class FitConfig:
    family: str = "gaussian"
    mlp: MlpSpec = field(default_factory=MlpSpec)
    epochs: int = 500
    batch_size: int | None = None  # None -> min(64, n_train)
    learning_rate: float = 1e-3
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    anchoring_weight: float = 1.0
    index_centering_weight: float = 0.0
    early_stop_patience: int = 20  # 0 disables early stopping
    validation_fraction: float = 0.1
    seed: int = 0
    flip_momentum: bool = True
    beta_init: str = "least_squares_direction"
    cox_minibatch: bool = False  # default: full-batch gradients for cox

    def validate(self) -> None:
        if self.epochs < 1:
            raise DomainError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise DomainError("learning rate must be positive")
        if not 0.0 <= self.validation_fraction < 0.5:
            raise DomainError("validation fraction must lie in [0, 0.5)")
        if self.early_stop_patience < 0:
            raise DomainError("patience must be >= 0")
        if self.beta_init not in BETA_INITS:
            raise DomainError(f"beta_init must be one of {BETA_INITS}")
        if self.anchoring_weight < 0 or self.index_centering_weight < 0:
            raise DomainError("penalty weights must be non-negative")


@dataclass
class FitResult:
    params: ModelParams
    loss_history: np.ndarray  # per-epoch training loss (penalties included)
    val_history: np.ndarray | None
    stopped_epoch: int  # epochs actually run
    flips: int
    config: FitConfig


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


def adam_step(
    state: AdamState,
    params: np.ndarray,
    grads: np.ndarray,
    lr: float,
    betas: tuple[float, float],
    eps: float,
) -> None:
    """Standard Adam update with bias correction, in place."""
    if state.m.shape != params.shape or grads.shape != params.shape:
        raise ShapeError("optimizer state/gradient shapes do not match the parameters")
    b1, b2 = betas
    state.t += 1
    state.m *= b1
    state.m += (1.0 - b1) * grads
    state.v *= b2
    state.v += (1.0 - b2) * (grads * grads)
    m_hat = state.m / (1.0 - b1**state.t)
    v_hat = state.v / (1.0 - b2**state.t)
    np.sqrt(v_hat, out=v_hat)
    v_hat += eps
    m_hat /= v_hat
    m_hat *= lr
    params -= m_hat


def shuffle_epoch(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform permutation of 0..n-1 from the fit's stream."""
    if n < 1:
        raise DomainError("cannot shuffle an empty dataset")
    return rng.permutation(n)


def least_squares_start(data: Dataset) -> tuple[np.ndarray, np.ndarray] | None:
    """(index direction, gamma start) from one least-squares solve.

    Uses the family's working response at the null model (the first
    IRLS/Fisher-scoring step), so the linear block starts near its optimum and
    the link level starts in gamma's intercept rather than migrating into the
    network; cox regresses -log(time), whose conditional mean is the
    log-hazard up to a constant under the exponential baseline.  Returns None
    when the solve is degenerate so the caller can fall back.
    """
    if data.family == "gaussian":
        r = data.y
    elif data.family == "binomial":
        pbar = min(max(float(data.y.mean()), 1e-6), 1.0 - 1e-6)
        r = math.log(pbar / (1.0 - pbar)) + (data.y - pbar) / (pbar * (1.0 - pbar))
    elif data.family == "poisson":
        ybar = max(float(data.y.mean()), 1e-12)
        r = math.log(ybar) + (data.y - ybar) / ybar
    else:  # cox: soak the level into a throwaway intercept column
        r = -np.log(data.time)
    cox = data.family == "cox"
    cols = [np.ones((data.n, 1))] if cox else []
    design = np.hstack(cols + [data.x, data.z])
    try:
        coef, *_ = np.linalg.lstsq(design, r, rcond=None)
    except np.linalg.LinAlgError:
        return None
    off = 1 if cox else 0
    direction = coef[off : off + data.p]
    gamma = coef[off + data.p :]
    norm = np.linalg.norm(direction)
    if not (np.isfinite(norm) and norm > 1e-12 and np.isfinite(gamma).all()):
        return None
    return project_identifiable(direction)[0], gamma


def _initialize(
    data: Dataset, config: FitConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """(beta, gamma) starting values per the configured init mode."""
    uniform = np.full(data.p, 1.0 / math.sqrt(data.p))
    zeros = np.zeros(data.q)
    if config.beta_init == "least_squares_direction":
        start = least_squares_start(data)
        return (uniform, zeros) if start is None else start
    if config.beta_init == "random_sphere":
        return project_identifiable(rng.standard_normal(data.p))[0], zeros
    return uniform, zeros


def _make_batch_loss(data: Dataset, family: str):
    """Per-batch loss closure: (row indices, eta) -> LossValue."""
    w = data.weights
    if family == "cox":
        time, event = data.time, data.event

        def batch_loss(idx, eta):
            return objectives.loss_cox(
                time[idx], event[idx], eta, None if w is None else w[idx]
            )

    else:
        y = data.y
        fn = {
            "gaussian": objectives.loss_gaussian,
            "binomial": objectives.loss_binomial,
            "poisson": objectives.loss_poisson,
        }[family]

        def batch_loss(idx, eta):
            return fn(y[idx], eta, None if w is None else w[idx])

    return batch_loss


def _exact_objective(
    data: Dataset,
    idx: np.ndarray,
    beta: np.ndarray,
    gamma: np.ndarray,
    theta: np.ndarray,
    config: FitConfig,
    batch_loss,
) -> float:
    """Loss + penalties on the given rows (used for validation tracking)."""
    s = data.x[idx] @ beta
    eta = neural_link.evaluate(theta, config.mlp, s) + data.z[idx] @ gamma
    total = batch_loss(idx, eta).total
    if config.anchoring_weight > 0:
        g0 = neural_link.evaluate(theta, config.mlp, np.zeros(1))[0]
        total += config.anchoring_weight * g0 * g0
    if config.index_centering_weight > 0:
        total += config.index_centering_weight * float(s @ s) / idx.size
    return float(total)


def fit(
    data: Dataset,
    config: FitConfig,
    init: ModelParams | None = None,
    callback=None,
) -> FitResult:
    """Run the training loop and return fitted parameters.

    ``init`` warm-starts all three parameter blocks (bootstrap refits);
    ``callback(epoch, train_loss, val_loss)`` feeds progress reporting.
    """
    config.validate()
    data.validate()
    if data.family != config.family:
        raise DataError(
            f"config family {config.family!r} does not match data family {data.family!r}"
        )
    n, p, q = data.n, data.p, data.q
    rng = substream(config.seed)

    # validation split (drawn first so the stream layout is fixed)
    val_idx = np.empty(0, dtype=np.intp)
    train_idx = np.arange(n)
    use_early_stop = config.early_stop_patience > 0 and config.validation_fraction > 0
    if use_early_stop:
        n_val = int(n * config.validation_fraction)
        if n_val >= 1:
            perm = rng.permutation(n)
            val_idx, train_idx = perm[:n_val], np.sort(perm[n_val:])
        else:
            use_early_stop = False
    if data.family == "cox":
        if data.event[train_idx].sum() < 1:
            raise DataError("training split has no observed events")
        if use_early_stop and data.event[val_idx].sum() < 1:
            # validation loss undefined without events; fall back to plain training
            use_early_stop = False
            train_idx = np.arange(n)
    n_train = train_idx.size

    batch_size = config.batch_size if config.batch_size is not None else min(64, n_train)
    if not 1 <= batch_size <= n:
        raise DomainError(f"batch size {batch_size} must lie in [1, {n}]")
    batch_size = min(batch_size, n_train)
    if data.family == "cox" and not config.cox_minibatch:
        batch_size = n_train

    # parameter vector [gamma | beta | theta] with block views; the optimizer
    # updates in place so the views stay valid for the whole fit
    n_theta = neural_link.n_params(config.mlp)
    flat = np.empty(q + p + n_theta)
    gamma, beta, theta = flat[:q], flat[q : q + p], flat[q + p :]
    if init is not None:
        if init.p != p or init.q != q or init.mlp != config.mlp:
            raise ShapeError("warm-start parameters do not match the data/config shapes")
        gamma[...] = init.gamma
        beta[...] = init.beta
        theta[...] = init.theta
    else:
        beta0, gamma0 = _initialize(data, config, rng)
        gamma[...] = gamma0
        beta[...] = beta0
        theta[...] = neural_link.he_init(rng, config.mlp)

    state = AdamState(m=np.zeros_like(flat), v=np.zeros_like(flat))
    grad = np.empty_like(flat)
    grad_theta = grad[q + p :]
    beta_m = state.m[q : q + p]
    layers = neural_link.unpack(theta, config.mlp)
    grad_views = neural_link.unpack(grad_theta, config.mlp)
    batch_loss = _make_batch_loss(data, config.family)
    anchor_w = config.anchoring_weight
    center_w = config.index_centering_weight

    x, z = data.x, data.z
    flips = 0
    loss_history = []
    val_history = [] if use_early_stop else None
    best_val = math.inf
    best_flat = None
    wait = 0
    epochs_run = 0

    for epoch in range(1, config.epochs + 1):
        perm = shuffle_epoch(rng, n_train)
        epoch_loss = 0.0
        for lo in range(0, n_train, batch_size):
            idx = train_idx[perm[lo : lo + batch_size]]
            nb = idx.size
            xb, zb = x[idx], z[idx]
            s = xb @ beta
            try:
                s_in = np.append(s, 0.0) if anchor_w > 0 else s
                g_all, tape = neural_link.forward(theta, config.mlp, s_in, layers=layers)
                eta = (g_all[:-1] if anchor_w > 0 else g_all) + zb @ gamma
                lv = batch_loss(idx, eta)
                total = lv.total
                if anchor_w > 0:
                    g0 = g_all[-1]
                    total += anchor_w * g0 * g0
                    upstream = np.append(lv.per_obs_grad, 2.0 * anchor_w * g0)
                else:
                    upstream = lv.per_obs_grad
                if not math.isfinite(total):
                    raise DivergenceError(epoch, config.learning_rate)
                _, grad_s = neural_link.backward(
                    tape, upstream, grad_out=grad_theta, grad_views=grad_views
                )
            except FloatingPointError as exc:
                raise DivergenceError(epoch, config.learning_rate) from exc
            if anchor_w > 0:
                grad_s = grad_s[:-1]
            grad[:q] = lv.per_obs_grad @ zb
            grad[q : q + p] = grad_s @ xb
            if center_w > 0:
                total += center_w * float(s @ s) / nb
                grad[q : q + p] += (2.0 * center_w / nb) * (s @ xb)
            epoch_loss += total * nb
            adam_step(
                state, flat, grad, config.learning_rate, config.adam_betas, config.adam_eps
            )
            if beta[0] < 0.0:
                beta *= -1.0
                flips += 1
                if config.flip_momentum:
                    beta_m *= -1.0
            norm = np.linalg.norm(beta)
            if norm == 0.0 or not np.isfinite(norm):
                raise DivergenceError(epoch, config.learning_rate)
            beta /= norm

        epochs_run = epoch
        train_loss = epoch_loss / n_train
        if not math.isfinite(train_loss):
            raise DivergenceError(epoch, config.learning_rate)
        loss_history.append(train_loss)
        val_loss = None
        if use_early_stop:
            val_loss = _exact_objective(data, val_idx, beta, gamma, theta, config, batch_loss)
            val_history.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_flat = flat.copy()
                wait = 0
            else:
                wait += 1
        if callback is not None:
            callback(epoch, train_loss, val_loss)
        if use_early_stop and wait >= config.early_stop_patience:
            break

    if use_early_stop and best_flat is not None:
        flat = best_flat
        gamma, beta, theta = flat[:q], flat[q : q + p], flat[q + p :]

    params = ModelParams(
        beta=beta.copy(), gamma=gamma.copy(), theta=theta.copy(), mlp=config.mlp
    )
    return FitResult(
        params=params,
        loss_history=np.asarray(loss_history),
        val_history=None if val_history is None else np.asarray(val_history),
        stopped_epoch=epochs_run,
        flips=flips,
        config=replace(config),
    )
