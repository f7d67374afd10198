"""GqLM and the baseline optimizers (LM on squared error, SGD, heavy-ball momentum).

All four share the mini-batch loop of :func:`train`; they differ only in how a
batch's Jacobians are turned into a parameter change.
"""

import csv
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .core import DEFAULT_EPSILON, block_slices, forward, pack
from .errors import DivergenceError, InvalidParameterError, SolverError
from .gradients import build_batch

OPTIMIZERS = ("gqlm", "lm", "sgd", "momentum")
SYMMETRY_TOL = 1e-10
# Systems whose condition estimate from the Cholesky pivots exceeds this are rejected.
MAX_CONDITION = 1e14
# Widths are kept at least this large after each update.
MIN_WIDTH = 1e-6


@dataclass
class TrainConfig:
    batch_size: int = 32
    damping: float = 1e3
    eta: float = 1e-3
    beta: float = 0.9
    iterations: int = 100
    rules: int = 2
    optimizer: str = "gqlm"
    seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    learning_rate: float = 1e-2
    selection: bool = True
    init_logit: float = 2.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvalidParameterError("batch size must be >= 1")
        if self.damping < 0:
            raise InvalidParameterError("damping must be >= 0")
        if self.eta <= 0:
            raise InvalidParameterError("eta must be > 0")
        if not 0 <= self.beta < 1:
            raise InvalidParameterError("beta must lie in [0, 1)")
        if self.iterations < 0:
            raise InvalidParameterError("iterations must be >= 0")
        if self.rules < 1:
            raise InvalidParameterError("rule count must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise InvalidParameterError(
                f"unknown optimizer '{self.optimizer}', choose from {', '.join(OPTIMIZERS)}"
            )
        if self.learning_rate <= 0:
            raise InvalidParameterError("learning rate must be > 0")

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainHistory:
    optimizer: str
    loss: list = field(default_factory=list)
    train_accuracy: list = field(default_factory=list)
    test_accuracy: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def __len__(self):
        return len(self.loss)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "optimizer", "loss", "train_acc", "test_acc", "seconds"])
            for i in range(len(self)):
                test = self.test_accuracy[i] if self.test_accuracy else ""
                writer.writerow(
                    [i + 1, self.optimizer, repr(self.loss[i]), repr(self.train_accuracy[i]),
                     repr(test) if test != "" else "", f"{self.seconds[i]:.6f}"]
                )


def _solve_spd(A, b):
    asym = np.max(np.abs(A - A.T)) if A.size else 0.0
    if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(A))):
        raise SolverError(f"system matrix is not symmetric (max asymmetry {asym:.3e})")
    try:
        factor = linalg.cho_factor(A, lower=False, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"system matrix is not positive definite: {exc}") from exc
    diag = np.abs(np.diag(factor[0]))
    if diag.min() == 0 or (diag.max() / diag.min()) ** 2 > MAX_CONDITION:
        raise SolverError("system matrix is numerically singular; increase the damping")
    return linalg.cho_solve(factor, b)


def _columns(J, mask):
    return J if mask is None else J[:, :, mask]


def _expand(delta, mask, size):
    if mask is None:
        return delta
    out = np.zeros(size)
    out[mask] = delta
    return out


def cross_entropy_gradient(batch, mask=None):
    """Gradient of the summed batch cross-entropy, ``-sum_c J_c^T Xi_c P*_c``."""
    J = _columns(batch.J, mask)
    g = -np.einsum("ckp,ck->p", J, batch.xi * batch.targets)
    return _expand(g, mask, batch.J.shape[2])


def gqlm_delta(batch, damping, eta, mask=None):
    """GqLM parameter change for one mini-batch.

    Solves ``(sum_c (J_c^T J_c + damping I)) d = sum_c J_c^T Xi_c P*_c`` and
    returns ``d / eta``. The damping sits inside the class sum, so the
    effective diagonal shift is ``C * damping``. ``mask`` selects the
    trainable columns; frozen entries of the result are zero.
    """
    J = _columns(batch.J, mask)
    C, _, P = J.shape
    A = np.einsum("ckp,ckq->pq", J, J) + C * damping * np.eye(P)
    b = np.einsum("ckp,ck->p", J, batch.xi * batch.targets)
    if not np.any(b):
        return np.zeros(batch.J.shape[2])
    return _expand(_solve_spd(A, b) / eta, mask, batch.J.shape[2])


def lm_delta(J, residuals, damping, mask=None):
    """Classic Levenberg-Marquardt step on stacked residuals ``P* - p``.

    ``J`` is (C, N, n_pi) and ``residuals`` (C, N); returns
    ``(J^T J + damping I)^-1 J^T r``. There is no step scale: the squared-error
    baseline is the textbook update, only its damping is shared with GqLM.
    """
    full = J.shape[2]
    J = _columns(J, mask)
    P = J.shape[2]
    b = np.einsum("ckp,ck->p", J, residuals)
    if not np.any(b):
        return np.zeros(full)
    A = np.einsum("ckp,ckq->pq", J, J) + damping * np.eye(P)
    return _expand(_solve_spd(A, b), mask, full)


def sgd_step(vector, gradient, rate):
    return vector - rate * gradient


def momentum_step(vector, velocity, gradient, rate, beta):
    """Heavy-ball update; returns ``(new_vector, new_velocity)``."""
    velocity = beta * velocity + rate * gradient
    return vector - velocity, velocity


def cross_entropy(p, Y):
    """Mean cross-entropy of probabilities ``p`` against one-hot ``Y``."""
    picked = np.sum(p * Y, axis=1)
    with np.errstate(divide="ignore"):
        return float(-np.mean(np.log(picked)))


def accuracy_percent(p, Y):
    return float(np.mean(np.argmax(p, axis=1) == np.argmax(Y, axis=1)) * 100.0)


def _project(params, vector):
    sl = block_slices(params.R, params.n, params.C)["sigma"]
    vector[sl] = np.maximum(np.abs(vector[sl]), MIN_WIDTH)
    return vector


def train(X, Y, config, params, X_test=None, Y_test=None, callback=None):
    """Mini-batch training loop shared by all optimizers.

    Each iteration shuffles the training set, walks consecutive mini-batches of
    ``config.batch_size`` (the last one may be shorter) and updates the flat
    parameter vector once per batch. Returns ``(params, TrainHistory)``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    N = len(X)
    if N == 0:
        raise InvalidParameterError("training set is empty")
    rng = np.random.default_rng(config.seed)
    mask = params.trainable_mask()
    mask = None if mask.all() else mask
    vector = pack(params)
    accumulator = np.zeros_like(vector)
    history = TrainHistory(config.optimizer)
    M = config.batch_size

    for iteration in range(1, config.iterations + 1):
        started = time.perf_counter()
        order = rng.permutation(N)
        for start in range(0, N, M):
            idx = order[start:start + M]
            batch, trace = build_batch(params, X[idx], Y[idx])
            if config.optimizer == "gqlm":
                delta = gqlm_delta(batch, config.damping, config.eta, mask)
                accumulator = config.beta * accumulator + (1.0 - config.beta) * delta
                vector = vector + accumulator
            elif config.optimizer == "lm":
                residuals = batch.targets - trace.p.T
                delta = lm_delta(batch.J, residuals, config.damping, mask)
                accumulator = config.beta * accumulator + (1.0 - config.beta) * delta
                vector = vector + accumulator
            elif config.optimizer == "sgd":
                vector = sgd_step(vector, cross_entropy_gradient(batch, mask), config.learning_rate)
            else:
                vector, accumulator = momentum_step(
                    vector, accumulator, cross_entropy_gradient(batch, mask),
                    config.learning_rate, config.beta,
                )
            if not np.all(np.isfinite(vector)):
                raise DivergenceError(iteration)
            params = params.with_vector(_project(params, vector))
            vector = pack(params)

        p = forward(params, X).p
        loss = cross_entropy(p, Y)
        if not np.isfinite(loss):
            raise DivergenceError(iteration)
        history.loss.append(loss)
        history.train_accuracy.append(accuracy_percent(p, Y))
        if X_test is not None and len(X_test):
            history.test_accuracy.append(accuracy_percent(forward(params, X_test).p, Y_test))
        history.seconds.append(time.perf_counter() - started)
        if callback is not None:
            callback(iteration, params, history)
    return params, history


def gqlm_train(X, Y, config, params, **kwargs):
    return train(X, Y, _with_optimizer(config, "gqlm"), params, **kwargs)


def lm_train(X, Y, config, params, **kwargs):
    return train(X, Y, _with_optimizer(config, "lm"), params, **kwargs)


def _with_optimizer(config, name):
    if config.optimizer == name:
        return config
    return TrainConfig(**{**config.to_dict(), "optimizer": name})
