"""Independent oracles and end-to-end self checks.

Everything here is deliberately implemented without reusing the code paths
it verifies: the quadratic-program reference is a long-run projected
gradient method (not the pairwise solver), the null-distribution checks use
closed-form quantiles, and gradients are validated by central finite
differences.
"""

import numpy as np

from . import dsvdd as dsvdd_mod
from . import svdd as svdd_mod
from .cfar import calibrate_threshold, classical_handle
from .detectors import tyler
from .nn import (
    BatchNormScale, Conv1d, GlobalAvgPool, LeakyReLU, Linear, MaxPool1d,
)
from .sim import Scenario, cal_split, make_splits, substream

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

__all__ = [
    "project_capped_simplex",
    "qp_reference",
    "dual_objective",
    "kkt_violation",
    "numeric_grad",
    "layer_gradient_checks",
    "random_qp_instance",
    "run_all_checks",
]


# ---------------------------------------------------------------------------
# quadratic-program reference solver (projected gradient, diminishing steps)


def project_capped_simplex(v, cap):
    """Euclidean projection onto {0 <= a <= cap, sum a = 1} by bisection."""
    lo = np.min(v) - 1.0
    hi = np.max(v)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        total = np.clip(v - mid, 0.0, cap).sum()
        if total > 1.0:
            lo = mid
        else:
            hi = mid
    return np.clip(v - 0.5 * (lo + hi), 0.0, cap)


def _qp_loop(k, alpha, cap, diag, step0, n_iter):
    for t in range(n_iter):
        g = diag - 2.0 * (k @ alpha)
        v = alpha + step0 / np.sqrt(t + 1.0) * g
        lo = np.min(v) - 1.0
        hi = np.max(v)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            total = np.minimum(np.maximum(v - mid, 0.0), cap).sum()
            if total > 1.0:
                lo = mid
            else:
                hi = mid
        alpha = np.minimum(np.maximum(v - 0.5 * (lo + hi), 0.0), cap)
    return alpha


if njit is not None:
    _qp_loop = njit(cache=True)(_qp_loop)


def qp_reference(gram, nu, n_iter=1_000_000):
    """Long-run projected-gradient solve of the hypersphere dual program."""
    k = np.asarray(gram, dtype=float)
    n = k.shape[0]
    cap = 1.0 / (nu * n)
    diag = np.diag(k).copy()
    lmax = float(np.linalg.eigvalsh(k)[-1])
    step0 = 1.0 / max(2.0 * lmax, 1e-12)
    alpha = np.full(n, 1.0 / n)
    return _qp_loop(k, alpha, cap, diag, step0, n_iter)


def dual_objective(gram, alpha):
    return float(alpha @ np.diag(gram) - alpha @ gram @ alpha)


def kkt_violation(gram, alpha, nu):
    """Largest gradient gap between an increasable and a decreasable coordinate."""
    n = len(alpha)
    cap = 1.0 / (nu * n)
    g = np.diag(gram) - 2.0 * (gram @ alpha)
    up = alpha < cap - 1e-10
    down = alpha > 1e-10
    if not up.any() or not down.any():
        return 0.0
    return float(np.max(g[up]) - np.min(g[down]))


def random_qp_instance(seed, n_max=20):
    """Seeded small RBF Gram instance for solver cross-checks."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, n_max + 1))
    m = 4
    x = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
    gamma = 1.0 / (2.0 * m)
    d2 = (np.abs(x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
    gram = np.exp(-gamma * d2)
    # keep the box feasible: sum(alpha) = 1 requires nu * n >= 1
    nu = float(rng.choice([v for v in (0.1, 0.25, 0.5) if v * n >= 1.0]))
    return gram, nu


# ---------------------------------------------------------------------------
# finite-difference gradient checks


def numeric_grad(fun, x, h=1e-5):
    """Central finite differences of a scalar function of an array."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    flat = x.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = fun(x)
        flat[i] = orig - h
        fm = fun(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return g


def _check_layer(layer, x, seed, training=True):
    """Compare analytic input/parameter grads of one layer to finite differences.

    The scalar readout is a fixed random linear functional of the output.
    """
    rng = np.random.default_rng(seed)
    y0 = layer.forward(x, training=training)
    w_out = rng.normal(size=y0.shape)

    def loss_of_input(xv):
        return float(np.sum(layer.forward(xv, training=training) * w_out))

    for p in layer.params():
        p.zero_grad()
    layer.forward(x, training=training)
    dx = layer.backward(w_out)

    errs = [_rel_err(numeric_grad(loss_of_input, x.copy()), dx)]
    for p in layer.params():
        analytic = p.grad.copy()
        value = p.value

        def loss_of_param(pv, _p=p, _value=value):
            _p.value = pv
            out = float(np.sum(layer.forward(x, training=training) * w_out))
            _p.value = _value
            return out

        errs.append(_rel_err(numeric_grad(loss_of_param, value.copy()), analytic))
    return max(errs)


def _rel_err(num, ana):
    scale = max(np.linalg.norm(num), np.linalg.norm(ana), 1e-10)
    return float(np.linalg.norm(num - ana) / scale)


def layer_gradient_checks(n_configs=20, seed0=1000):
    """Finite-difference checks for every layer type over randomized shapes.

    Returns a list of (name, max relative error) pairs.
    """
    results = []
    for idx in range(n_configs):
        rng = np.random.default_rng(seed0 + idx)
        b = int(rng.integers(2, 5))
        c_in = int(rng.integers(2, 5))
        c_out = int(rng.integers(2, 6))
        length = int(rng.choice([8, 12, 16]))
        x3 = rng.normal(size=(b, c_in, length))

        cases = [
            ("conv", Conv1d(c_in, c_out, kernel=3, pad=1, rng=rng), x3),
            ("batchnorm", BatchNormScale(c_in), x3),
            ("leaky_relu", LeakyReLU(0.01), x3 + 0.05),  # keep away from the kink
            ("maxpool", MaxPool1d(), x3),
            ("avgpool", GlobalAvgPool(), x3),
            ("linear", Linear(c_in * 2, c_out, rng=rng),
             rng.normal(size=(b, c_in * 2))),
        ]
        for name, layer, x in cases:
            results.append((f"{name}[{idx}]", _check_layer(layer, x, seed0 + idx)))

        # full objective: distance-to-center loss through a tiny network
        tiny = _tiny_network(rng)
        xt = rng.normal(size=(b, 2, 8))
        center = rng.normal(size=4)
        results.append((f"loss[{idx}]", _check_loss(tiny, xt, center)))
    return results


def _tiny_network(rng):
    from .nn import Sequential
    return Sequential([
        Conv1d(2, 3, kernel=3, pad=1, rng=rng),
        BatchNormScale(3),
        LeakyReLU(0.01),
        MaxPool1d(),
        GlobalAvgPool(),
        Linear(3, 4, rng=rng),
    ])


def _check_loss(net, x, center, beta=0.001):
    net.zero_grad()
    dsvdd_mod.dsvdd_loss(net, x, center, beta, training=True, backward=True)
    worst = 0.0
    for p in net.params():
        analytic = p.grad.copy()
        value = p.value

        def loss_of(pv, _p=p, _value=value):
            _p.value = pv
            out = dsvdd_mod.dsvdd_loss(net, x, center, beta, training=True)
            _p.value = _value
            return out

        worst = max(worst, _rel_err(numeric_grad(loss_of, value.copy()), analytic))
    return worst


# ---------------------------------------------------------------------------
# end-to-end verification suite (used by the CLI `verify` subcommand)


def run_all_checks(seed=20250824, tyler_denominator_power=1.0):
    """Run the analytic and oracle checks; returns (name, tol, value, ok) rows."""
    rows = []

    # MF/NMF null thresholds against closed-form Exp(1) / Beta(1, m-1) quantiles
    scn = Scenario(clutter_family="gaussian", n_cal=5000, master_seed=seed)
    cal = cal_split(scn)
    lam_mf = calibrate_threshold(
        classical_handle("mf_true", scn).score_block(cal), scn.pfa)
    target_mf = np.log(1.0 / scn.pfa)
    rows.append(("mf_null_threshold", "within 10% of ln(1/pfa)",
                 abs(lam_mf - target_mf) / target_mf,
                 abs(lam_mf - target_mf) <= 0.1 * target_mf))
    lam_nmf = calibrate_threshold(
        classical_handle("nmf_true", scn).score_block(cal), scn.pfa)
    target_nmf = 1.0 - scn.pfa ** (1.0 / (scn.m - 1))
    rows.append(("nmf_null_threshold", "within 10% of 1-pfa^(1/(m-1))",
                 abs(lam_nmf - target_nmf) / target_nmf,
                 abs(lam_nmf - target_nmf) <= 0.1 * target_nmf))

    # Tyler per-column scale invariance (fails under the fault-injection hook)
    rng = substream(seed, 9, 0)
    z = (rng.standard_normal((16, 32)) + 1j * rng.standard_normal((16, 32)))
    est = tyler(z, _denominator_power=tyler_denominator_power)
    scales = rng.uniform(0.1, 10.0, size=32)
    est2 = tyler(z * scales[None, :], _denominator_power=tyler_denominator_power)
    dev = float(np.linalg.norm(est.matrix - est2.matrix) / np.linalg.norm(est.matrix))
    rows.append(("tyler_scale_invariance", "relative change < 1e-6", dev, dev < 1e-6))

    # pairwise dual solver vs projected-gradient reference on small instances
    worst = 0.0
    for i in range(5):
        gram, nu = random_qp_instance(seed + i)
        a_fast = svdd_mod.solve_dual(gram, nu)
        a_ref = qp_reference(gram, nu, n_iter=200_000)
        worst = max(worst, abs(dual_objective(gram, a_fast) - dual_objective(gram, a_ref)))
    rows.append(("svdd_dual_vs_oracle", "objective gap < 1e-6", worst, worst < 1e-6))

    # layer gradients
    grad_worst = max(err for _, err in layer_gradient_checks(n_configs=3, seed0=seed))
    rows.append(("layer_gradients", "relative error < 1e-4", grad_worst,
                 grad_worst < 1e-4))

    return rows
