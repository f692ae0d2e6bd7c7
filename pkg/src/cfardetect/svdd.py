"""Kernel one-class hypersphere model (SVDD) with an RBF kernel.

The dual program

    max_a  sum_i a_i K_ii - sum_ij a_i a_j K_ij
    s.t.   sum_i a_i = 1,  0 <= a_i <= 1/(nu N)

is solved by pairwise coordinate ascent on the maximal KKT-violating pair.
The anomaly score of a point is its squared RKHS distance to the learned
center; detection thresholds come from empirical quantile calibration, not
from the sphere radius.

Model files are CSV, documented in :func:`save_model`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateDataError, DiagnosticUnavailableError

__all__ = [
    "SvddModel",
    "rbf_kernel",
    "kernel_width",
    "solve_dual",
    "fit",
    "svdd_score",
    "score_many",
    "svdd_radius",
    "save_model",
    "load_model",
]

_SUPPORT_EPS = 1e-8


@dataclass
class SvddModel:
    """Fitted hypersphere: retained support points and their multipliers."""

    support_points: np.ndarray  # (n_sv, m) complex
    alphas: np.ndarray          # (n_sv,) positive reals
    gamma: float
    nu: float
    n_train: int
    const_term: float           # sum_ij a_i a_j k(z_i, z_j)

    @property
    def box_bound(self):
        return 1.0 / (self.nu * self.n_train)


def _sq_dists(x, y):
    """Pairwise squared complex Euclidean distances, shape (len(x), len(y))."""
    x = np.atleast_2d(np.asarray(x))
    y = np.atleast_2d(np.asarray(y))
    xn = np.einsum("ij,ij->i", x.conj(), x).real
    yn = np.einsum("ij,ij->i", y.conj(), y).real
    cross = (x.conj() @ y.T).real
    d2 = xn[:, None] + yn[None, :] - 2.0 * cross
    np.maximum(d2, 0.0, out=d2)
    return d2


def rbf_kernel(x, y, gamma):
    """exp(-gamma ||x - y||^2) with the complex Euclidean norm."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if gamma <= 0:
        raise ValueError("kernel width gamma must be > 0")
    d2 = np.vdot(x - y, x - y).real
    return float(np.exp(-gamma * d2))


def kernel_width(train):
    """Inverse of the total variance of the training set.

    Variance here is the mean squared complex Euclidean deviation from the
    training mean, summed over coordinates.
    """
    x = np.asarray(train)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("kernel width needs at least two training points")
    centered = x - x.mean(axis=0)
    s2 = float(np.einsum("ij,ij->", centered.conj(), centered).real / x.shape[0])
    if s2 <= 0.0:
        raise DegenerateDataError("training data has zero variance")
    return 1.0 / s2


def solve_dual(gram, nu, tol=1e-6, max_updates=100_000):
    """Maximal-violating-pair coordinate ascent on the dual program.

    Returns the full multiplier vector. Terminates when the largest KKT
    violation (gradient gap between the best increasable and best
    decreasable coordinate) falls below ``tol``.
    """
    k = np.asarray(gram, dtype=float)
    n = k.shape[0]
    if k.shape != (n, n):
        raise ValueError("gram matrix must be square")
    if not 0.0 < nu <= 1.0:
        raise ValueError("nu must lie in (0, 1]")
    if nu * n < 1.0:
        raise ValueError(f"infeasible box: nu*N = {nu * n:g} < 1")
    c = 1.0 / (nu * n)

    alpha = np.full(n, 1.0 / n)
    ka = k @ alpha
    diag = np.diag(k).copy()
    slack = 1e-12
    violation = 0.0
    for _ in range(max_updates):
        g = diag - 2.0 * ka
        up = alpha < c - slack
        down = alpha > slack
        if not up.any() or not down.any():
            return alpha
        i = int(np.argmax(np.where(up, g, -np.inf)))
        j = int(np.argmin(np.where(down, g, np.inf)))
        violation = g[i] - g[j]
        if violation < tol:
            return alpha
        eta = 2.0 * (k[i, i] + k[j, j] - 2.0 * k[i, j])
        dmax = min(c - alpha[i], alpha[j])
        delta = dmax if eta <= 1e-15 else min(violation / eta, dmax)
        alpha[i] += delta
        alpha[j] -= delta
        ka += delta * (k[:, i] - k[:, j])
    raise ConvergenceError(
        f"dual solver hit {max_updates} pair updates (violation {violation:.3e})",
        residual=violation,
    )


def fit(train, nu=0.01, gamma=None, tol=1e-6, max_updates=100_000):
    """Fit an SVDD model on target-free cells (rows of ``train``)."""
    x = np.asarray(train)
    n = x.shape[0]
    if nu * n < 1.0:
        raise ValueError(f"infeasible: nu*N = {nu * n:g} < 1")
    if gamma is None:
        gamma = kernel_width(x)
    gram = np.exp(-gamma * _sq_dists(x, x))
    alpha = solve_dual(gram, nu, tol=tol, max_updates=max_updates)
    keep = alpha > _SUPPORT_EPS
    a = alpha[keep]
    const = float(a @ gram[np.ix_(keep, keep)] @ a)
    return SvddModel(
        support_points=x[keep].copy(),
        alphas=a,
        gamma=float(gamma),
        nu=float(nu),
        n_train=n,
        const_term=const,
    )


def score_many(z, model):
    """Squared RKHS distance to the center for each row of ``z``."""
    z = np.atleast_2d(np.asarray(z))
    if z.shape[1] != model.support_points.shape[1]:
        raise ValueError(
            f"dimension mismatch: model dim {model.support_points.shape[1]}, "
            f"input dim {z.shape[1]}"
        )
    kz = np.exp(-model.gamma * _sq_dists(z, model.support_points))
    return 1.0 - 2.0 * (kz @ model.alphas) + model.const_term


def svdd_score(z, model):
    return float(score_many(np.asarray(z)[None, :], model)[0])


def svdd_radius(model):
    """Squared sphere radius: mean score over unbounded support vectors.

    Diagnostic only; detection always uses a calibrated quantile threshold.
    """
    if len(model.alphas) == 1:
        # center coincides with the single support point
        return 0.0
    c = model.box_bound
    unbounded = (model.alphas > _SUPPORT_EPS) & (model.alphas < c - _SUPPORT_EPS)
    if not unbounded.any():
        raise DiagnosticUnavailableError("no unbounded support vector")
    scores = score_many(model.support_points[unbounded], model)
    return float(scores.mean())


_MODEL_VERSION = 1


def save_model(path, model):
    """Write the model as CSV.

    Row 1: ``version,1``. Rows 2-6: ``gamma``, ``nu``, ``n_train``,
    ``const_term``, ``dim`` key/value pairs. Then one row per support point:
    alpha followed by interleaved re/im coordinates, full precision.
    """
    dim = model.support_points.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"version,{_MODEL_VERSION}\n")
        fh.write(f"gamma,{model.gamma!r}\n")
        fh.write(f"nu,{model.nu!r}\n")
        fh.write(f"n_train,{model.n_train}\n")
        fh.write(f"const_term,{model.const_term!r}\n")
        fh.write(f"dim,{dim}\n")
        for a, sp in zip(model.alphas, model.support_points):
            parts = [repr(float(a))]
            for v in sp:
                parts.append(repr(float(v.real)))
                parts.append(repr(float(v.imag)))
            fh.write(",".join(parts) + "\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = dict(ln.split(",", 1) for ln in lines[:6])
    if int(header["version"]) != _MODEL_VERSION:
        raise ValueError(f"unsupported model version {header['version']}")
    dim = int(header["dim"])
    alphas, points = [], []
    for ln in lines[6:]:
        vals = [float(tok) for tok in ln.split(",")]
        alphas.append(vals[0])
        flat = np.array(vals[1:])
        points.append(flat[0::2] + 1j * flat[1::2])
    pts = np.array(points).reshape(len(points), dim)
    return SvddModel(
        support_points=pts,
        alphas=np.array(alphas),
        gamma=float(header["gamma"]),
        nu=float(header["nu"]),
        n_train=int(header["n_train"]),
        const_term=float(header["const_term"]),
    )
