"""Jacobians of the class probabilities with respect to the flat parameter vector.

The analytic rows are plain chain-rule backpropagation through the forward
pass in :mod:`unfis.core`; :func:`finite_diff_jacobian` is the independent
oracle they are checked against.
"""

from dataclasses import dataclass

import numpy as np

from .core import BLOCKS, ForwardTrace, block_slices, forward, pack
from .errors import GradientOverflowError

XI_CLAMP = 1e12


@dataclass(frozen=True)
class JacobianBatch:
    """Per-class Jacobians ``J`` of shape (C, N, n_pi), inverse probabilities
    ``xi`` (C, N) and one-hot targets (C, N)."""

    J: np.ndarray
    xi: np.ndarray
    targets: np.ndarray

    @property
    def n_classes(self):
        return self.J.shape[0]

    @property
    def n_samples(self):
        return self.J.shape[1]


def _softmax_jacobian(p):
    # S[k, c, g] = dp_c / dz_g = p_c (delta_cg - p_g)
    eye = np.eye(p.shape[1])
    return p[:, :, None] * (eye[None] - p[:, None, :])


def batch_jacobian(params, X, trace=None):
    """Analytic Jacobian for a batch ``X`` (N, n); returns array (C, N, n_pi).

    ``trace`` must come from ``forward(params, X)`` when given; otherwise it
    is computed here.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if trace is None:
        trace = forward(params, X)
    R, n, C = params.R, params.n, params.C
    N = X.shape[0]
    eps = params.epsilon
    p, phi, mu, gated, gates = trace.p, trace.phi, trace.mu, trace.gated, trace.gates
    local = trace.local  # (N, C, R)

    S = _softmax_jacobian(p)  # (N, C, G)

    # dz_g/d gated[i, j] = phi_i (y_ig - ybar_g) / gated_ij
    ybar = np.einsum("kr,kgr->kg", phi, local)
    A = phi[:, :, None] * (local.transpose(0, 2, 1) - ybar[:, None, :])  # (N, R, G)
    B = np.einsum("kcg,kig->kci", S, A)  # (N, C, R)
    back = B[:, :, :, None] / gated[:, None, :, :]  # dp_c / d gated, (N, C, R, n)

    denom = mu + gates * (1.0 - mu) + eps
    dg_dmu = gates * (1.0 + eps) / denom**2
    d = X[:, None, :] - params.centers
    w2 = params.widths**2
    live = ~trace.floored if trace.floored is not None else True
    dmu_dm = np.where(live, mu * d / w2, 0.0)
    dmu_dsigma = np.where(live, mu * d * d / (w2 * params.widths), 0.0)
    chain = (back * dg_dmu[:, None]).copy()
    J_m = chain * dmu_dm[:, None]
    J_sigma = chain * dmu_dsigma[:, None]

    if params.selection:
        dgate_ds = gates * (1.0 - gates)
        dg_dgate = -(mu + eps) * (1.0 - mu) / denom**2
        antecedent = back * (dg_dgate * dgate_ds)[:, None]
        # consequent path: dz_g / ds_ij = phi_i alpha[i, g, j] x_j gate(1 - gate)
        cons = np.einsum("kcg,ki,igj,kj->kcij", S, phi, params.consequents[:, :, 1:], X)
        J_s = antecedent + cons * dgate_ds[None, None]
    else:
        J_s = np.zeros((N, C, R, n))

    # dz_g / d alpha[i, g, j] = phi_i * xg_ij with xg = [1, gate_ij x_j]
    xg = np.concatenate([np.ones((N, R, 1)), gates[None] * X[:, None, :]], axis=2)
    J_alpha = np.einsum("kcg,ki,kij->kcigj", S, phi, xg)
    J_theta = -S

    blocks = {
        "m": J_m.reshape(N, C, R * n),
        "sigma": J_sigma.reshape(N, C, R * n),
        "s": J_s.reshape(N, C, R * n),
        "alpha": J_alpha.reshape(N, C, R * C * (n + 1)),
        "theta": J_theta,
    }
    for name in BLOCKS:
        if not np.all(np.isfinite(blocks[name])):
            raise GradientOverflowError(name)
    J = np.concatenate([blocks[name] for name in BLOCKS], axis=2)
    return J.transpose(1, 0, 2)


def jacobian_rows(params, x, trace=None):
    """Rows ``dp_c / dpi`` for one sample; shape (C, n_pi)."""
    x = np.asarray(x, dtype=float)
    if trace is not None and np.ndim(trace.p) == 1:
        trace = _lift(trace)
    return batch_jacobian(params, x[None, :], trace)[:, 0, :]


def _lift(trace):
    def up(v):
        return None if v is None else v[None]

    return ForwardTrace(
        mu=up(trace.mu), gates=trace.gates, gated=up(trace.gated), firing=up(trace.firing),
        phi=up(trace.phi), local=up(trace.local), weighted=up(trace.weighted),
        z=up(trace.z), p=up(trace.p), floored=up(trace.floored),
    )


def build_batch(params, X, Y):
    """JacobianBatch for inputs ``X`` (N, n) and one-hot targets ``Y`` (N, C).

    Inverse probabilities are clamped at ``XI_CLAMP``.
    """
    trace = forward(params, np.atleast_2d(X))
    J = batch_jacobian(params, X, trace)
    xi = (1.0 / np.maximum(trace.p, 1.0 / XI_CLAMP)).T
    return JacobianBatch(J=J, xi=xi, targets=np.asarray(Y, dtype=float).T), trace


def finite_diff_jacobian(params, x, h=1e-6):
    """Central-difference Jacobian; shape (C, n_pi) for ``x`` (n,) or (C, N, n_pi) for a batch."""
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    base = pack(params)
    out = np.empty((params.C, X.shape[0], base.size))
    for k in range(base.size):
        step = np.zeros_like(base)
        step[k] = h
        if h == 0:
            out[:, :, k] = 0.0
            continue
        up = forward(params.with_vector(base + step), X).p
        down = forward(params.with_vector(base - step), X).p
        out[:, :, k] = ((up - down) / (2.0 * h)).T
    return out[:, 0, :] if x.ndim == 1 else out


@dataclass
class BlockCheck:
    block: str
    max_abs: float
    max_rel: float
    passed: bool
    skipped: bool = False

    @property
    def verdict(self):
        if self.skipped:
            return "skipped"
        return "pass" if self.passed else "FAIL"


# Central differences at h = 1e-6 carry round-off near 1e-10 in absolute
# terms; entries smaller than this floor are judged against the floor.
REL_FLOOR = 1e-5


def compare_blocks(params, analytic, numeric, tol):
    """Per-block maximum absolute and relative discrepancy.

    Relative error is ``|a - f| / max(|a|, |f|)`` entrywise, with the
    denominator floored at ``REL_FLOOR`` so entries that are zero analytically
    do not turn finite-difference round-off into spurious failures.
    """
    sl = block_slices(params.R, params.n, params.C)
    report = []
    for name in BLOCKS:
        if name == "s" and not params.selection:
            report.append(BlockCheck(name, float("nan"), float("nan"), True, skipped=True))
            continue
        a = analytic[..., sl[name]]
        f = numeric[..., sl[name]]
        err = np.abs(a - f)
        scale = np.maximum(np.maximum(np.abs(a), np.abs(f)), REL_FLOOR)
        max_abs = float(err.max()) if err.size else 0.0
        max_rel = float((err / scale).max()) if err.size else 0.0
        report.append(BlockCheck(name, max_abs, max_rel, max_rel < tol))
    return report


def gradient_check(params, samples, h=1e-6, tol=1e-4, jacobian=batch_jacobian):
    """Compare analytic and finite-difference Jacobians block by block.

    ``jacobian`` can be swapped out to test the checker itself against a
    deliberately broken gradient.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    analytic = jacobian(params, X)
    numeric = finite_diff_jacobian(params, X, h)
    return compare_blocks(params, analytic, numeric, tol)


def format_report(report):
    lines = [f"{'block':<8}{'max abs err':>14}{'max rel err':>14}  verdict"]
    for row in report:
        if row.skipped:
            lines.append(f"{row.block:<8}{'-':>14}{'-':>14}  skipped")
        else:
            lines.append(f"{row.block:<8}{row.max_abs:>14.3e}{row.max_rel:>14.3e}  {row.verdict}")
    return "\n".join(lines)


def report_rows(report):
    """Machine-readable table rows: block, max_abs, max_rel, verdict."""
    return [
        {"block": r.block, "max_abs": r.max_abs, "max_rel": r.max_rel, "verdict": r.verdict}
        for r in report
    ]
