"""Perturbation precoders sharing one discrete quadratic search kernel.

Every scheme here minimizes ``norm_sq(u + F p)`` over a finite perturbation
grid; they differ only in how u and F are built:

* vector perturbation (VP): u = W s, F = alpha W, complex p per symbol;
* degree-K VP (DKVP): VP restricted to K symbols, best over all C(N, K)
  subsets;
* constellation-oriented perturbation (COP): one complex perturbation per
  distinct constellation point in the block, F = tau W A;
* widely linear COP (WL-COP): one real perturbation per surviving folded
  level, F = tau W A B.

The search cost therefore depends on the grid dimension, never on the
number of transmit antennas: g = F^H u and G = F^H F are precomputed once
and every candidate costs O(d).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from coplab import backend
from coplab.constellation import (
    Constellation,
    FoldMode,
    build_mapping,
    distinct_points,
)
from coplab.errors import DimensionCap
from coplab.numerics import (
    as_cmatrix,
    as_cvector,
    gram,
    hermitian_solve,
    norm_sq,
    quad_terms,
)

# Enumeration ceilings: 9**10 and 3**20 are the desk-scale limits.
COMPLEX_DIM_CAP = 10
REAL_DIM_CAP = 20

# Perturbation entries are complex (or real) integers with each axis in
# {-1, 0, 1}; zero first so the unperturbed candidate is visited first and
# wins all ties.
DEFAULT_COMPLEX_SET = (
    0j,
    1 + 0j,
    -1 + 0j,
    1j,
    -1j,
    1 + 1j,
    1 - 1j,
    -1 + 1j,
    -1 - 1j,
)
DEFAULT_REAL_SET = (0.0, 1.0, -1.0)


def _check_set(values, label: str):
    if len(values) == 0:
        raise ValueError(f"{label} must not be empty")
    if len(set(values)) != len(values):
        raise ValueError(f"{label} contains duplicates")
    if not any(v == 0 for v in values):
        raise ValueError(f"{label} must contain 0")
    pool = set(values)
    if any(-v not in pool for v in values):
        raise ValueError(f"{label} must be symmetric under negation")


@dataclass(frozen=True)
class PerturbAlphabet:
    """Ordered candidate values per search coordinate.

    The tuple order fixes the enumeration order and therefore the
    deterministic tie-break.
    """

    complex_set: tuple = DEFAULT_COMPLEX_SET
    real_set: tuple = DEFAULT_REAL_SET

    def __post_init__(self):
        _check_set(self.complex_set, "complex_set")
        _check_set(self.real_set, "real_set")


DEFAULT_ALPHABET = PerturbAlphabet()


@dataclass(frozen=True)
class SearchProblem:
    """Quadratic-over-grid instance: minimize norm_sq(u + F p)."""

    u: np.ndarray  # (M,)
    f: np.ndarray  # (M, d), already scaled by tau or alpha
    is_real: bool = False


class SearchResult(NamedTuple):
    perturbation: np.ndarray
    objective: float
    candidates: int


@dataclass(frozen=True)
class PrecodeResult:
    """Unnormalized transmit block with its chosen perturbation."""

    x_raw: np.ndarray
    perturbation: np.ndarray  # complex for VP/DKVP/COP, real for WL-COP, empty for ZF
    objective: float  # norm_sq(x_raw)
    candidates: int = 0


def search_min(
    problem: SearchProblem, alphabet: PerturbAlphabet = DEFAULT_ALPHABET
) -> SearchResult:
    """Exhaustive minimizer of norm_sq(u + F p) over the alphabet grid.

    Candidates are enumerated in mixed-radix reflected Gray order so each
    step changes a single coordinate and costs O(d); ties keep the first
    candidate found.  The returned objective is recomputed from the winning
    candidate as norm_sq(u + F p*), which is immune to the accumulation
    drift of the incremental updates (and exactly 0 on exact cancellation).
    """
    u = as_cvector(problem.u, "u")
    f = as_cmatrix(problem.f, "F")
    if f.shape[0] != u.shape[0]:
        raise ValueError("u and F row counts differ")
    d = f.shape[1]
    cap = REAL_DIM_CAP if problem.is_real else COMPLEX_DIM_CAP
    if d > cap:
        raise DimensionCap(d, cap, "real" if problem.is_real else "complex")
    if d < 1:
        raise ValueError("search needs at least one coordinate")
    c0, g, gm = quad_terms(u, f)
    kern = backend.kernel()
    if problem.is_real:
        values = np.array(alphabet.real_set, dtype=np.float64)
        digits, _, count = kern.gray_min_real(
            c0,
            np.ascontiguousarray(g.real),
            np.ascontiguousarray(gm.real),
            values,
        )
        p = values[digits]
    else:
        values = np.array(alphabet.complex_set, dtype=np.complex128)
        digits, _, count = kern.gray_min_complex(c0, g, gm, values)
        p = values[digits]
    objective = norm_sq(u + f @ p)
    return SearchResult(perturbation=p, objective=objective, candidates=int(count))


def zf_matrix(h: np.ndarray) -> np.ndarray:
    """Zero-forcing precoding matrix W = H^H (H H^H)^{-1}."""
    h = as_cmatrix(h, "H")
    n, m = h.shape
    if n > m:
        raise ValueError("channel must have at least as many columns as rows")
    g = gram(h.conj().T)  # H H^H, symmetrized
    # G is Hermitian, so solving G X = H and conjugate-transposing gives W
    x = hermitian_solve(g, h)
    return np.ascontiguousarray(x.conj().T)


def precode_zf(w: np.ndarray, s: np.ndarray) -> PrecodeResult:
    """Plain linear precoding: x = W s, no perturbation."""
    w = as_cmatrix(w, "W")
    s = as_cvector(s, "s")
    x_raw = w @ s
    return PrecodeResult(
        x_raw=x_raw,
        perturbation=np.zeros(0, dtype=np.complex128),
        objective=norm_sq(x_raw),
        candidates=0,
    )


def precode_vp(
    w: np.ndarray,
    s: np.ndarray,
    alpha: float,
    alphabet: PerturbAlphabet = DEFAULT_ALPHABET,
) -> PrecodeResult:
    """Full vector perturbation: x = W (s + alpha b*), b* over the full grid."""
    w = as_cmatrix(w, "W")
    s = as_cvector(s, "s")
    u = w @ s
    res = search_min(SearchProblem(u=u, f=alpha * w, is_real=False), alphabet)
    b = res.perturbation
    x_raw = w @ (s + alpha * b)
    return PrecodeResult(
        x_raw=x_raw,
        perturbation=b,
        objective=norm_sq(x_raw),
        candidates=res.candidates,
    )


def precode_dkvp(
    w: np.ndarray,
    s: np.ndarray,
    alpha: float,
    alphabet: PerturbAlphabet = DEFAULT_ALPHABET,
    k: int = 1,
) -> PrecodeResult:
    """Degree-K vector perturbation: perturb the best K of N symbols.

    All C(N, K) subsets are tried exhaustively; the per-subset Gram and
    linear terms are slices of the full ones, so the extra cost per subset
    is O(K^2) setup plus the grid search.
    """
    w = as_cmatrix(w, "W")
    s = as_cvector(s, "s")
    n = w.shape[1]
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")
    if k > COMPLEX_DIM_CAP:
        raise DimensionCap(k, COMPLEX_DIM_CAP, "complex")
    u = w @ s
    c0 = norm_sq(u)
    g_all = alpha * (w.conj().T @ u)
    g_mat = (alpha * alpha) * gram(w)
    values = np.array(alphabet.complex_set, dtype=np.complex128)
    kern = backend.kernel()
    subset, digits, _, count = kern.dkvp_min(c0, g_all, g_mat, k, values)
    b = np.zeros(n, dtype=np.complex128)
    b[subset] = values[digits]
    x_raw = w @ (s + alpha * b)
    return PrecodeResult(
        x_raw=x_raw,
        perturbation=b,
        objective=norm_sq(x_raw),
        candidates=int(count),
    )


def precode_cop(
    w: np.ndarray,
    s_indices,
    cons: Constellation,
    tau: float,
    alphabet: PerturbAlphabet = DEFAULT_ALPHABET,
) -> PrecodeResult:
    """Constellation-oriented perturbation: one offset per distinct point.

    Symbols sharing a constellation point share a perturbation, so the
    search dimension is the number of distinct points in the block, never
    the block length.
    """
    w = as_cmatrix(w, "W")
    pm = distinct_points(s_indices, cons)
    w_cop = w @ pm.select
    u = w_cop @ pm.values
    res = search_min(SearchProblem(u=u, f=tau * w_cop, is_real=False), alphabet)
    rho = res.perturbation
    x_raw = w_cop @ (pm.values + tau * rho)
    return PrecodeResult(
        x_raw=x_raw,
        perturbation=rho,
        objective=norm_sq(x_raw),
        candidates=res.candidates,
    )


def precode_wl_cop(
    w: np.ndarray,
    s_indices,
    cons: Constellation,
    tau: float,
    alphabet: PerturbAlphabet = DEFAULT_ALPHABET,
    mode: FoldMode = FoldMode.NONE,
) -> PrecodeResult:
    """Widely linear COP: real perturbation over folded axis levels.

    The block's points decompose as integer combinations of per-axis levels;
    a real offset per surviving level is searched over real_set.  The
    returned perturbation has one entry per level of the mode's full level
    set, with pruned (unused) levels fixed at zero.
    """
    w = as_cmatrix(w, "W")
    fm = build_mapping(s_indices, cons, mode)
    w_cop = (w @ fm.points.select) @ fm.coeffs
    levels_c = fm.levels.astype(np.complex128)
    u = w_cop @ levels_c
    res = search_min(SearchProblem(u=u, f=tau * w_cop, is_real=True), alphabet)
    rho_surv = res.perturbation  # real, over surviving levels
    x_raw = w_cop @ (levels_c + tau * rho_surv.astype(np.complex128))
    rho_full = np.zeros(fm.j_total, dtype=np.float64)
    rho_full[fm.level_index] = rho_surv
    return PrecodeResult(
        x_raw=x_raw,
        perturbation=rho_full,
        objective=norm_sq(x_raw),
        candidates=res.candidates,
    )
