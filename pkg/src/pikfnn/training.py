"""Weight training: full-batch Adam and Levenberg-Marquardt on the
boundary/initial-data least-squares loss.

The loss is a sum of per-row-kind group means (one group for boundary-only
problems, boundary+initial for transient ones, boundary+interior for the
enhanced mode).  The residual is linear in the weights, so LM computes its
Jacobian (the group-scaled design matrix) once and each iteration solves
(J^T J + lambda I) delta = -J^T r with an SPD factorization.

Both trainers update model.weights in place, are deterministic for a fixed
seed/config, and record one log row per iteration for the loss-history CSV
(`iter,loss,lambda_or_lr,accepted`).
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import geometry as geo
from .errors import ConditioningError, ConfigurationError, DivergenceError

BOUNDARY_ONLY = "boundary_only"
BOUNDARY_PLUS_INITIAL = "boundary_plus_initial"
BOUNDARY_PLUS_INTERIOR = "boundary_plus_interior"
MODES = (BOUNDARY_ONLY, BOUNDARY_PLUS_INITIAL, BOUNDARY_PLUS_INTERIOR)

_LAMBDA_CEILING = 1e16


@dataclass
class TrainConfig:
    optimizer: str = "lm"
    tol: float = 1e-8
    max_iters: int = 500
    loss_goal: float = None
    loss_mode: str = BOUNDARY_ONLY
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    lm_marquardt_scaling: bool = False  # damp with lambda * diag(J^T J)
    seed: int = 0
    init: str = "uniform_pm1"

    def __post_init__(self):
        if self.optimizer not in ("adam", "lm"):
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")
        if self.loss_mode not in MODES:
            raise ConfigurationError(f"unknown loss mode {self.loss_mode!r}")
        if not self.tol > 0:
            raise ConfigurationError("tol must be > 0")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigurationError("need 0 < beta1, beta2 < 1")
        if not self.lr > 0:
            raise ConfigurationError("lr must be > 0")
        if not self.lambda0 > 0:
            raise ConfigurationError("lambda0 must be > 0")
        if self.init not in ("uniform_pm1", "zeros"):
            raise ConfigurationError(f"unknown init {self.init!r}")


@dataclass
class TrainReport:
    loss_history: list
    final_loss: float
    iters: int
    stop_reason: str
    wall_time: float
    log_rows: list = field(default_factory=list, repr=False)


def _groups(matrix, mode):
    """Row-index groups entering the loss, in a fixed order."""
    boundary = matrix.group_rows((geo.DIRICHLET, geo.NEUMANN))
    initial = matrix.group_rows((geo.INITIAL,))
    interior = matrix.group_rows((geo.INTERIOR_RESIDUAL,))
    if mode == BOUNDARY_ONLY:
        if len(initial) or len(interior):
            raise ConfigurationError(
                "boundary_only loss cannot see initial/interior rows")
        groups = [boundary]
    elif mode == BOUNDARY_PLUS_INITIAL:
        if len(interior):
            raise ConfigurationError("boundary_plus_initial cannot see interior rows")
        if not len(initial):
            raise ConfigurationError("boundary_plus_initial needs initial rows")
        groups = [boundary, initial]
    else:
        if len(initial):
            raise ConfigurationError("boundary_plus_interior cannot see initial rows")
        if not len(interior):
            raise ConfigurationError("boundary_plus_interior needs interior rows")
        groups = [boundary, interior]
    if not len(groups[0]):
        raise ConfigurationError("no boundary rows present")
    return groups


def loss(model, matrix, targets, mode=BOUNDARY_ONLY):
    """Sum over groups of mean squared residuals (Eqs.-17/18/41 style)."""
    res = np.asarray(matrix.entries @ model.weights - targets, dtype=float)
    return _loss_from_residual(res, _groups(matrix, mode))


def _loss_from_residual(res, groups):
    return sum(float(np.mean(res[g] ** 2)) for g in groups)


def grad_loss(model, matrix, targets, mode=BOUNDARY_ONLY):
    """exact gradient: sum_g (2/N_g) Phi_g^T (Phi_g p - g_g)."""
    groups = _groups(matrix, mode)
    res = matrix.entries @ model.weights - targets
    out = np.zeros(matrix.entries.shape[1])
    for g in groups:
        out += (2.0 / len(g)) * (matrix.entries[g].T @ res[g])
    return out


def _row_scale(matrix, groups):
    scale = np.zeros(matrix.entries.shape[0])
    for g in groups:
        scale[g] = 1.0 / math.sqrt(len(g))
    return scale


def init_weights(n, config):
    """Seeded uniform [-1, 1] draws, or zeros."""
    if n <= 0:
        raise ConfigurationError("weight count must be > 0")
    if config.init == "zeros":
        return np.zeros(n)
    rng = np.random.default_rng(config.seed)
    return rng.uniform(-1.0, 1.0, size=n)


def train_adam(model, matrix, targets, config):
    """Standard Adam with bias correction on the group-mean loss."""
    groups = _groups(matrix, config.loss_mode)
    targets = np.asarray(targets, dtype=float)
    p = init_weights(matrix.entries.shape[1], config)
    scale = _row_scale(matrix, groups)
    J = matrix.entries * scale[:, None]
    y = targets * scale
    A = J.T @ J          # loss = |Jp - y|^2;  grad = 2 (A p - b)
    b = J.T @ y

    def loss_of(pv):
        r = J @ pv - y   # direct residual: no quadratic-form cancellation
        return float(r @ r)

    t0 = time.perf_counter()
    cur = loss_of(p)
    history = [cur]
    log = [(0, cur, config.lr, 1)]
    if config.loss_goal is not None and cur <= config.loss_goal:
        model.weights = p
        return TrainReport(history, cur, 0, "loss_goal",
                           time.perf_counter() - t0, log)
    m = np.zeros_like(p)
    v = np.zeros_like(p)
    stop = "max_iters"
    it = 0
    for it in range(1, config.max_iters + 1):
        g = 2.0 * (A @ p - b)
        m = config.beta1 * m + (1.0 - config.beta1) * g
        v = config.beta2 * v + (1.0 - config.beta2) * g * g
        mhat = m / (1.0 - config.beta1 ** it)
        vhat = v / (1.0 - config.beta2 ** it)
        p = p - config.lr * mhat / (np.sqrt(vhat) + config.eps)
        cur = loss_of(p)
        if not math.isfinite(cur):
            raise DivergenceError(f"non-finite loss at iteration {it}", iteration=it)
        history.append(cur)
        log.append((it, cur, config.lr, 1))
        if config.loss_goal is not None and cur <= config.loss_goal:
            stop = "loss_goal"
            break
        if it >= 100 and abs(history[-1] - history[-101]) < config.tol:
            stop = "tol_loss"
            break
    model.weights = p
    return TrainReport(history, history[-1], it, stop,
                       time.perf_counter() - t0, log)


def train_lm(model, matrix, targets, config):
    """Levenberg-Marquardt on the linear residual.

    Stops when max|w_i - w_{i-1}| < tol or |loss_i - loss_{i-1}| < tol
    across accepted iterations (max_iters as the safety net); see module
    docstring for the damping schedule.
    """
    groups = _groups(matrix, config.loss_mode)
    targets = np.asarray(targets, dtype=float)
    p = init_weights(matrix.entries.shape[1], config)
    scale = _row_scale(matrix, groups)
    J = matrix.entries * scale[:, None]
    y = targets * scale
    A = J.T @ J
    b = J.T @ y
    if config.lm_marquardt_scaling:
        d = np.diag(A).copy()
        damping = np.diag(np.maximum(d, 1e-14 * max(float(np.max(d)), 1e-300)))
        lam_floor = 1e-16
    else:
        damping = np.eye(A.shape[0])
        # relative floor keeps A + lambda*I factorable as lambda decays
        lam_floor = 1e-16 * max(float(np.trace(A)) / A.shape[0], 1e-300)

    def loss_of(pv):
        r = J @ pv - y   # direct residual: no quadratic-form cancellation
        return float(r @ r)

    t0 = time.perf_counter()
    lam = config.lambda0
    cur = loss_of(p)
    history = [cur]
    log = [(0, cur, lam, 1)]
    stop = "max_iters"
    it = 0
    if config.loss_goal is not None and cur <= config.loss_goal:
        model.weights = p
        return TrainReport(history, cur, 0, "loss_goal",
                           time.perf_counter() - t0, log)
    for it in range(1, config.max_iters + 1):
        grad_half = A @ p - b  # = J^T r
        delta = _damped_solve(A, damping, lam, -grad_half)
        trial = p + delta
        trial_loss = loss_of(trial)
        if not math.isfinite(trial_loss):
            raise DivergenceError(f"non-finite loss at iteration {it}", iteration=it)
        accepted = trial_loss <= cur
        if accepted:
            prev = cur
            p = trial
            cur = trial_loss
            lam = max(lam * config.lambda_down, lam_floor)
            history.append(cur)
            log.append((it, cur, lam, 1))
            if config.loss_goal is not None and cur <= config.loss_goal:
                stop = "loss_goal"
                break
            if float(np.max(np.abs(delta))) < config.tol:
                stop = "tol_weights"
                break
            if abs(cur - prev) < config.tol:
                stop = "tol_loss"
                break
        else:
            lam *= config.lambda_up
            history.append(cur)
            log.append((it, cur, lam, 0))
            if lam > _LAMBDA_CEILING:
                raise DivergenceError(
                    f"damping exceeded {_LAMBDA_CEILING:g} at iteration {it}",
                    iteration=it)
    model.weights = p
    return TrainReport(history, history[-1], it, stop,
                       time.perf_counter() - t0, log)


def _damped_solve(A, damping, lam, rhs):
    """SPD solve of (A + lam * damping) x = rhs; retries with stiffer damping."""
    for attempt in range(6):
        try:
            factor = cho_factor(A + lam * damping, lower=True, check_finite=False)
            return cho_solve(factor, rhs, check_finite=False)
        except np.linalg.LinAlgError:
            lam *= 10.0
        except ValueError as exc:
            raise ConditioningError(f"damped solve failed: {exc}") from exc
    raise ConditioningError(
        f"J^T J + lambda*damping singular to working precision (lambda up to "
        f"{lam:g}); matrix rank is deficient")


def write_loss_csv(path, report):
    """Persist per-iteration history: iter,loss,lambda_or_lr,accepted."""
    with open(path, "w") as fh:
        fh.write("iter,loss,lambda_or_lr,accepted\n")
        for it, value, knob, ok in report.log_rows:
            fh.write(f"{it},{value:.17g},{knob:.17g},{ok}\n")
