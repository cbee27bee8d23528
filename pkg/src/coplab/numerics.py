"""Complex linear algebra helpers used by the precoders.

Conventions
-----------
Matrices and vectors are numpy ``complex128`` arrays: a matrix has shape
``(rows, cols)`` and a vector has shape ``(n,)``.  Helpers in this module
validate finiteness at the boundary so that downstream code can assume
well-formed inputs.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.linalg import blas as _blas
from scipy.linalg import lapack as _lapack

from coplab.errors import SingularMatrix

# Reciprocal condition estimates below this are treated as singular.
RCOND_FLOOR = 1e-14

# Relative tolerance for the Hermitian precheck in hermitian_solve.
HERMITIAN_RTOL = 1e-10


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    m = np.ascontiguousarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(np.float64))):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_cvector(a, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D complex128 array."""
    v = np.ascontiguousarray(a, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v.view(np.float64))):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def norm_sq(v: np.ndarray) -> float:
    """Squared Euclidean norm of a complex vector, as a real float.

    Exact zero for the zero vector.
    """
    return float(np.vdot(v, v).real)


def gram(f: np.ndarray) -> np.ndarray:
    """Gram matrix F^H F, symmetrized so conjugate symmetry holds bit-wise.

    The raw product picks up rounding asymmetry; averaging with its own
    conjugate transpose restores G[i, j] == conj(G[j, i]) exactly.
    """
    f = np.asarray(f, dtype=np.complex128)
    k = f.conj().T @ f
    g = (k + k.conj().T) / 2.0
    return np.ascontiguousarray(g)


def quad_terms(u: np.ndarray, f: np.ndarray):
    """Coefficients (c, g, G) of |u + F p|^2 = c + 2 Re(p^H g) + p^H G p.

    Equivalent to (norm_sq(u), F^H u, gram(F)) but reads F in place, with
    no transposed copies: the rank-k update runs on the transpose view and
    only the stored triangle is mirrored afterwards.  G is exactly
    conjugate-symmetric by construction and c is exact zero for u == 0.
    Inputs must already be contiguous complex128 (see as_cvector and
    as_cmatrix); validation is the caller's job.
    """
    c0 = float(np.vdot(u, u).real)
    g = np.ascontiguousarray(np.conj(u.conj() @ f))
    # zherk on the Fortran-ordered view computes conj(F^H F) in the lower
    # triangle without copying F.
    low = _blas.zherk(1.0, f.T, lower=1)
    full = np.tril(low) + np.tril(low, -1).conj().T
    return c0, g, np.conj(full)


def hermitian_solve(g: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve G X = Y for Hermitian positive definite G via Cholesky.

    Raises
    ------
    SingularMatrix
        If the factorization hits a non-positive pivot or the reciprocal
        condition estimate falls below RCOND_FLOOR.
    ValueError
        If G is not Hermitian within HERMITIAN_RTOL (relative, Frobenius).
    """
    g = np.asarray(g, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    scale = np.linalg.norm(g)
    if scale > 0 and np.linalg.norm(g - g.conj().T) > HERMITIAN_RTOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    anorm = float(np.max(np.sum(np.abs(g), axis=0))) if g.size else 0.0
    try:
        c, low = cho_factor(g, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    except Exception as exc:  # scipy raises its own LinAlgError subclass
        if type(exc).__name__ == "LinAlgError":
            raise SingularMatrix(str(exc)) from exc
        raise
    rcond, info = _lapack.zpocon(c, anorm, uplo="L")
    if info != 0 or not np.isfinite(rcond) or rcond < RCOND_FLOOR:
        raise SingularMatrix(
            f"reciprocal condition estimate {rcond:.3e} below {RCOND_FLOOR:.0e}"
        )
    return cho_solve((c, low), y, check_finite=False)


def qfunc(x) -> np.ndarray:
    """Gaussian tail probability Q(x) = P[N(0,1) > x].

    Computed through the complementary error function, which stays accurate
    deep into the tail (values below ~1e-300 underflow to zero).
    """
    from scipy.special import erfc

    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))
