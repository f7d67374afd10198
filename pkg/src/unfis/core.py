"""Forward evaluation of the UNFIS network.

Shapes used throughout (k indexes samples):

    X            (N, n)          inputs
    centers      (R, n)          Gaussian centers
    widths       (R, n)          Gaussian widths, strictly positive
    logits       (R, n)          selection logits, gate = logistic(logit)
    consequents  (R, C, n + 1)   column 0 is the ungated bias
    thresholds   (C,)            per-class thresholds

The flat parameter vector is laid out as all centers (rule-major), all
widths, all logits, all consequents (rule, class, input index 0..n) and
finally the thresholds, giving ``(3 + C) R n + (R + 1) C`` entries.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .errors import DegenerateFiringError, InvalidParameterError, ShapeError

DEFAULT_EPSILON = 1e-12
# Memberships below this are clamped before the product so firings stay > 0.
MEMBERSHIP_FLOOR = 1e-300

BLOCKS = ("m", "sigma", "s", "alpha", "theta")


def logistic_gate(s):
    """Selection gate ``1 / (1 + exp(-s))``; accepts scalars or arrays."""
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)):
        raise InvalidParameterError("selection logit must be finite")
    out = expit(s)
    return float(out) if out.ndim == 0 else out


def gaussian_membership(x, center, width):
    width = np.asarray(width, dtype=float)
    if np.any(width <= 0):
        raise InvalidParameterError("Gaussian width must be strictly positive")
    d = np.asarray(x, dtype=float) - center
    out = np.exp(-(d * d) / (2.0 * width * width))
    return float(out) if np.ndim(out) == 0 else out


def selected_membership(mu, gate, epsilon=DEFAULT_EPSILON):
    """Gated membership ``(mu + eps) / ((1 - gate) mu + gate + eps)``.

    A gate of 0 turns the fuzzy set into the always-true set (value 1); a gate
    of 1 returns the raw membership up to the epsilon slack.
    """
    mu = np.asarray(mu, dtype=float)
    gate = np.asarray(gate, dtype=float)
    # mu + gate (1 - mu) equals (1 - gate) mu + gate and is exactly 1 at mu = 1
    out = (mu + epsilon) / (mu + gate * (1.0 - mu) + epsilon)
    return float(out) if out.ndim == 0 else out


def rule_firing(gated):
    """Product T-norm over the last axis."""
    return np.prod(np.asarray(gated, dtype=float), axis=-1)


def normalize_firings(f):
    """Normalize firings over the last axis (rules).

    Works on a single sample ``(R,)`` or a batch ``(N, R)``. Raises
    DegenerateFiringError naming the first sample whose firings sum to zero.
    """
    f = np.asarray(f, dtype=float)
    batch = np.atleast_2d(f)
    # rescale by the row max first so tiny-but-positive firings normalize fine
    peak = batch.max(axis=-1, keepdims=True)
    bad = np.flatnonzero(~(peak[:, 0] > 0))
    if bad.size:
        raise DegenerateFiringError(int(bad[0]))
    scaled = batch / peak
    phi = scaled / scaled.sum(axis=-1, keepdims=True)
    return phi.reshape(f.shape)


def rule_consequents(X, consequents, gates, phi):
    """Rule outputs ``y`` and their weighted form ``Y = phi * y``.

    ``X`` is (N, n), ``consequents`` (R, C, n+1), ``gates`` (R, n) and ``phi``
    (N, R). Both results have shape (N, C, R). The bias is not gated.
    """
    a = np.asarray(consequents, dtype=float)
    # y[k, c, i] = a[i, c, 0] + sum_j gate[i, j] a[i, c, j] x[k, j]
    y = a[:, :, 0].T[None, :, :] + np.einsum("ij,icj,kj->kci", gates, a[:, :, 1:], X)
    return y, np.asarray(phi, dtype=float)[:, None, :] * y


def softmax(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def class_probabilities(Y, thresholds):
    """Softmax over ``z_c = sum_i Y[c, i] - theta_c``.

    ``Y`` has shape ``(..., C, R)``. Returns ``(z, p)``.
    """
    z = np.asarray(Y, dtype=float).sum(axis=-1) - thresholds
    return z, softmax(z)


def parameter_count(R, n, C):
    return (3 + C) * R * n + (R + 1) * C


def block_slices(R, n, C):
    """Slices of each parameter block inside the flat vector."""
    rn = R * n
    a = R * C * (n + 1)
    edges = np.cumsum([0, rn, rn, rn, a, C])
    return {name: slice(int(edges[i]), int(edges[i + 1])) for i, name in enumerate(BLOCKS)}


@dataclass(frozen=True)
class ModelParams:
    centers: np.ndarray
    widths: np.ndarray
    logits: np.ndarray
    consequents: np.ndarray
    thresholds: np.ndarray
    selection: bool = True
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        R, n = np.shape(self.centers)
        C = len(self.thresholds)
        expected = {
            "centers": (R, n),
            "widths": (R, n),
            "logits": (R, n),
            "consequents": (R, C, n + 1),
            "thresholds": (C,),
        }
        for name, shape in expected.items():
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != shape:
                raise ShapeError(f"{name} has shape {value.shape}, expected {shape}")
            object.__setattr__(self, name, value)
        if np.any(self.widths <= 0):
            raise InvalidParameterError("all widths must be strictly positive")
        if not 0 < self.epsilon < 1:
            raise InvalidParameterError("epsilon must lie in (0, 1)")

    @property
    def R(self):
        return self.centers.shape[0]

    @property
    def n(self):
        return self.centers.shape[1]

    @property
    def C(self):
        return self.thresholds.shape[0]

    @property
    def size(self):
        return parameter_count(self.R, self.n, self.C)

    def gates(self):
        """Selection gates; all ones in FNN mode."""
        if not self.selection:
            return np.ones_like(self.logits)
        return expit(self.logits)

    def trainable_mask(self):
        """Boolean mask over the flat vector; the s block is frozen in FNN mode."""
        mask = np.ones(self.size, dtype=bool)
        if not self.selection:
            mask[block_slices(self.R, self.n, self.C)["s"]] = False
        return mask

    def with_vector(self, vector):
        return unpack(vector, self.R, self.n, self.C, selection=self.selection, epsilon=self.epsilon)


def pack(params):
    return np.concatenate(
        [
            params.centers.ravel(),
            params.widths.ravel(),
            params.logits.ravel(),
            params.consequents.ravel(),
            params.thresholds.ravel(),
        ]
    )


def unpack(vector, R, n, C, selection=True, epsilon=DEFAULT_EPSILON):
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.size != parameter_count(R, n, C):
        raise ShapeError(
            f"parameter vector of length {vector.size} does not match "
            f"R={R}, n={n}, C={C} (expected {parameter_count(R, n, C)})"
        )
    sl = block_slices(R, n, C)
    return ModelParams(
        centers=vector[sl["m"]].reshape(R, n).copy(),
        widths=vector[sl["sigma"]].reshape(R, n).copy(),
        logits=vector[sl["s"]].reshape(R, n).copy(),
        consequents=vector[sl["alpha"]].reshape(R, C, n + 1).copy(),
        thresholds=vector[sl["theta"]].copy(),
        selection=selection,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class ForwardTrace:
    """Intermediates of a forward pass.

    Batch layout: mu, gate_mu ``(N, R, n)``; firing, phi ``(N, R)``;
    local, weighted ``(N, C, R)``; z, p ``(N, C)``. ``gates`` is ``(R, n)``
    and shared by all samples. For a single-sample pass the leading axis is
    dropped.
    """

    mu: np.ndarray
    gates: np.ndarray
    gated: np.ndarray
    firing: np.ndarray
    phi: np.ndarray
    local: np.ndarray
    weighted: np.ndarray
    z: np.ndarray
    p: np.ndarray
    floored: np.ndarray = field(repr=False, default=None)

    def sample(self, k):
        return ForwardTrace(
            mu=self.mu[k], gates=self.gates, gated=self.gated[k], firing=self.firing[k],
            phi=self.phi[k], local=self.local[k], weighted=self.weighted[k],
            z=self.z[k], p=self.p[k],
            floored=None if self.floored is None else self.floored[k],
        )


def _as_batch(params, x):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != params.n:
        raise ShapeError(f"input has shape {np.shape(x)}, expected (..., {params.n})")
    return X, single


def forward(params, x):
    """Evaluate the seven-layer network on one sample ``(n,)`` or a batch ``(N, n)``."""
    X, single = _as_batch(params, x)
    d = X[:, None, :] - params.centers
    raw = np.exp(-(d * d) / (2.0 * params.widths**2))
    floored = raw < MEMBERSHIP_FLOOR
    mu = np.maximum(raw, MEMBERSHIP_FLOOR)
    gates = params.gates()
    gated = selected_membership(mu, gates, params.epsilon)
    firing = rule_firing(gated)
    phi = normalize_firings(firing)
    local, weighted = rule_consequents(X, params.consequents, gates, phi)
    z, p = class_probabilities(weighted, params.thresholds)
    trace = ForwardTrace(mu, gates, gated, firing, phi, local, weighted, z, p, floored)
    return trace.sample(0) if single else trace


def predict_proba(params, X):
    return forward(params, np.atleast_2d(X)).p


def predict(params, X):
    return np.argmax(predict_proba(params, X), axis=1)


def active_feature_count(params):
    """Per-rule number of active features, the row sums of the gates."""
    return params.gates().sum(axis=1)


def with_selection(params, enabled):
    return replace(params, selection=bool(enabled))
