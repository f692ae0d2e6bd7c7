"""Classical detection statistics and covariance estimators.

The matched-filter family shares one quadratic form; the adaptive variants
(AMF, ANMF) are the same statistics with an estimated covariance plugged in.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .linalg import cho_factor, hermitize, solve_factored

__all__ = [
    "CovarianceEstimate",
    "mf_statistic",
    "nmf_statistic",
    "scm",
    "tyler",
]


@dataclass
class CovarianceEstimate:
    """A positive definite covariance/scatter estimate plus provenance."""

    matrix: np.ndarray
    estimator_tag: str  # one of: true_sigma, scm, tyler
    k_used: int
    iterations: int = 0
    residuals: list = field(default_factory=list, repr=False)


def _as_matrix(sigma):
    if isinstance(sigma, CovarianceEstimate):
        return sigma.matrix
    return np.asarray(sigma)


def mf_statistic(z, sigma, p):
    """Matched-filter statistic |p^H S^{-1} z|^2 / (p^H S^{-1} p).

    With an SCM estimate plugged in for S this is the AMF statistic.
    """
    z = np.asarray(z)
    p = np.asarray(p)
    f = cho_factor(_as_matrix(sigma))
    si_z = solve_factored(f, z)
    si_p = solve_factored(f, p)
    num = abs(np.vdot(p, si_z)) ** 2
    den = np.vdot(p, si_p).real
    return num / den


def nmf_statistic(z, sigma, p):
    """Normalized matched filter: MF divided by z^H S^{-1} z, in [0, 1].

    With a Tyler estimate plugged in for S this is the ANMF statistic.
    """
    z = np.asarray(z)
    p = np.asarray(p)
    if not np.any(z):
        raise ValueError("NMF statistic undefined for z = 0")
    f = cho_factor(_as_matrix(sigma))
    si_z = solve_factored(f, z)
    si_p = solve_factored(f, p)
    num = abs(np.vdot(p, si_z)) ** 2
    den = np.vdot(p, si_p).real * np.vdot(z, si_z).real
    return num / den


def scm(secondary, diagonal_loading=0.0):
    """Sample covariance matrix (1/K) sum_k z_k z_k^H of the secondary block.

    Raises when the estimate cannot be positive definite (K < m) unless a
    diagonal loading term is requested.
    """
    z = np.asarray(secondary)
    if z.ndim != 2 or z.shape[1] < 1:
        raise ValueError("secondary data must be a nonempty m x K matrix")
    m, k = z.shape
    if k < m and diagonal_loading <= 0.0:
        raise ValueError(
            f"SCM from K={k} < m={m} secondary vectors is singular; "
            "enable diagonal loading to proceed"
        )
    mat = (z @ z.conj().T) / k
    if diagonal_loading > 0.0:
        mat = mat + diagonal_loading * np.eye(m)
    return CovarianceEstimate(matrix=hermitize(mat), estimator_tag="scm", k_used=k)


def tyler(secondary, tol=1e-8, max_iter=100, _denominator_power=1.0):
    """Distribution-free fixed-point scatter estimate of the secondary block.

    Iterates M <- (m/K) sum_k z_k z_k^H / (z_k^H M^{-1} z_k) from M = I,
    renormalizing the trace to m after every iterate, until the relative
    Frobenius change drops below ``tol``. Invariant to positive per-column
    rescaling of the data.

    ``_denominator_power`` is a fault-injection hook used by the
    verification suite; leave at 1.0 for a correct estimate.
    """
    z = np.asarray(secondary)
    if z.ndim != 2:
        raise ValueError("secondary data must be an m x K matrix")
    m, k = z.shape
    if k <= m:
        raise ValueError(f"Tyler estimate needs K > m secondary vectors, got K={k}, m={m}")
    norms = np.einsum("ij,ij->j", z.conj(), z).real
    if np.any(norms <= 0.0):
        raise ValueError("secondary data contains a zero column")

    mat = np.eye(m, dtype=complex)
    residuals = []
    for it in range(1, max_iter + 1):
        f = cho_factor(mat)
        x = solve_factored(f, z)
        q = np.einsum("ij,ij->j", z.conj(), x).real
        q = q ** _denominator_power
        new = (m / k) * ((z / q) @ z.conj().T)
        new = 0.5 * (new + new.conj().T)
        new *= m / np.trace(new).real
        res = float(np.linalg.norm(new - mat) / np.linalg.norm(mat))
        residuals.append(res)
        mat = new
        if res < tol:
            return CovarianceEstimate(
                matrix=mat, estimator_tag="tyler", k_used=k,
                iterations=it, residuals=residuals,
            )
    raise ConvergenceError(
        f"Tyler fixed point did not reach {tol:g} in {max_iter} iterations",
        residual=residuals[-1],
    )
