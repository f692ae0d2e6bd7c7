"""Complex Hermitian dense linear algebra used by every detector.

All routines work in 64-bit (complex128) precision and solve through a
Cholesky factorization rather than forming explicit inverses.
"""

import numpy as np
import scipy.linalg as sla

from .errors import NotPositiveDefiniteError

__all__ = [
    "hermitize",
    "toeplitz",
    "cholesky",
    "cho_factor",
    "hermitian_solve",
    "solve_factored",
    "sesquilinear_form",
]


def hermitize(a, rtol=1e-12):
    """Validate that ``a`` is Hermitian to ``rtol`` and return (a + a^H)/2.

    Mirroring instead of trusting the input makes Hermitian symmetry a
    construction invariant downstream.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    dev = float(np.linalg.norm(a - a.conj().T))
    if dev > rtol * scale:
        raise ValueError(
            f"matrix is not Hermitian: relative asymmetry {dev / scale:.3e}"
        )
    return 0.5 * (a + a.conj().T)


def toeplitz(rho, m):
    """Unit-diagonal correlation matrix with entry (i, j) = rho^|i-j|.

    Positive definite for |rho| < 1; trace equals m by construction.
    """
    if not -1.0 < rho < 1.0:
        raise ValueError(f"correlation parameter must satisfy |rho| < 1, got {rho}")
    m = int(m)
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    col = rho ** np.arange(m, dtype=float)
    return sla.toeplitz(col)


def cholesky(a):
    """Lower Cholesky factor L with L @ L^H = a and real positive diagonal."""
    h = hermitize(a)
    try:
        return np.linalg.cholesky(h)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc


def cho_factor(a):
    """Opaque factorization handle for repeated solves against one matrix."""
    h = hermitize(a)
    try:
        return sla.cho_factor(h, lower=True)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc


def solve_factored(factor, b):
    """Solve A x = b given ``factor`` from :func:`cho_factor`."""
    b = np.asarray(b)
    n = factor[0].shape[0]
    if b.shape[0] != n:
        raise ValueError(f"dimension mismatch: matrix is {n}x{n}, rhs has {b.shape[0]} rows")
    return sla.cho_solve(factor, b)


def hermitian_solve(a, b):
    """Solve A x = b for Hermitian positive definite A."""
    return solve_factored(cho_factor(a), b)


def sesquilinear_form(a, u, v, factor=None):
    """Compute u^H A^{-1} v without forming A^{-1}.

    ``factor`` may carry a precomputed :func:`cho_factor` handle; ``a`` is
    then ignored. For u = v the result is real nonnegative (returned as
    complex; callers take the real part where appropriate).
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if factor is None:
        factor = cho_factor(a)
    x = solve_factored(factor, v)
    return complex(np.vdot(u, x))
