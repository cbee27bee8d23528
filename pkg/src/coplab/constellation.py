"""Square QAM constellations, folding maps, and nearest-point demodulation.

A constellation is a flat list of complex points with unit average energy.
Points are enumerated from the all-positive corner with the real axis
outermost and both axes descending, so the smallest-index tie-break in
``nearest_point`` prefers the all-positive quadrant.

Folding compresses the per-axis level alphabet before perturbation:

* ``FoldMode.NONE`` keeps one coordinate per axis level (J = sqrt(L)),
* ``FoldMode.SIGN`` shares a coordinate between +l and -l (J = sqrt(L)/2),
* ``FoldMode.FULL`` collapses everything onto the unit scale (J = 1).

Every mapping reconstructs the original symbols entry-exactly: the selection
and coefficient matrices hold small integers, so their products reproduce the
same floating point values the constellation was built from.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from coplab.errors import UnsupportedModulation, ZeroBlock

SUPPORTED_ORDERS = (4, 16, 64, 256, 1024)


class FoldMode(enum.Enum):
    NONE = "none"
    SIGN = "sign"
    FULL = "full"


@dataclass(frozen=True)
class Constellation:
    """Square QAM constellation with unit average energy."""

    order: int
    scale: float  # per-axis spacing is 2 * scale
    axis_levels: np.ndarray  # (sqrt(L),) per-axis values, ascending
    points: np.ndarray  # (L,) complex points, both axes descending

    @property
    def side(self) -> int:
        return int(round(math.sqrt(self.order)))

    @property
    def max_axis(self) -> float:
        return float(self.axis_levels[-1])


def make_qam(order: int) -> Constellation:
    """Build a square QAM constellation normalized to unit average energy.

    The per-axis levels are the odd integers scaled by
    ``sqrt(3 / (2 (L - 1)))``, which makes the mean point energy exactly 1.
    """
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedModulation(
            f"order {order} not supported, choose one of {SUPPORTED_ORDERS}"
        )
    side = int(round(math.sqrt(order)))
    scale = math.sqrt(3.0 / (2.0 * (order - 1)))
    ints = np.arange(-(side - 1), side, 2, dtype=np.float64)  # odd, ascending
    axis_levels = ints * scale
    desc = axis_levels[::-1]
    re = np.repeat(desc, side)
    im = np.tile(desc, side)
    points = re + 1j * im
    return Constellation(
        order=order,
        scale=scale,
        axis_levels=np.ascontiguousarray(axis_levels),
        points=np.ascontiguousarray(points),
    )


def nearest_point(y, cons: Constellation):
    """Index of the constellation point closest to each entry of y.

    Ties resolve to the smallest index, hence toward the all-positive
    corner given the descending point enumeration.
    """
    arr = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    pr = cons.points.real[np.newaxis, :]
    pi = cons.points.imag[np.newaxis, :]
    dr = arr.real[:, np.newaxis] - pr
    di = arr.imag[:, np.newaxis] - pi
    idx = np.argmin(dr * dr + di * di, axis=1)
    if np.ndim(y) == 0:
        return int(idx[0])
    return idx


@dataclass(frozen=True)
class PointMap:
    """Distinct-point selection for one transmit block.

    ``select`` is the 0/1 matrix with one row per symbol and one column per
    distinct point (first-appearance order); ``select @ values`` reproduces
    the block entry-exactly.
    """

    select: np.ndarray  # (N, P) complex 0/1
    values: np.ndarray  # (P,) complex distinct point values
    point_index: np.ndarray  # (P,) int64 constellation indices


@dataclass(frozen=True)
class FoldMapping:
    """Level decomposition of a block's distinct points.

    ``coeffs`` holds one row per distinct point with integer coefficients
    (real part for the in-phase axis, imaginary for the quadrature axis), so
    ``coeffs @ levels`` reproduces the distinct point values entry-exactly
    and ``select @ coeffs @ levels`` reproduces the block.  Level columns no
    point references are pruned structurally, never by floating point tests.
    """

    points: PointMap
    mode: FoldMode
    coeffs: np.ndarray  # (P, J_surv) complex integer coefficients
    levels: np.ndarray  # (J_surv,) float64 level values
    level_index: np.ndarray  # (J_surv,) indices into the mode's full level set
    j_total: int

    @property
    def j_surviving(self) -> int:
        return int(self.levels.shape[0])


def fold_level_count(order: int, mode: FoldMode) -> int:
    """Number of level coordinates the mode exposes before pruning."""
    side = int(round(math.sqrt(order)))
    if mode is FoldMode.NONE:
        return side
    if mode is FoldMode.SIGN:
        if side % 2 != 0:
            raise UnsupportedModulation("sign folding needs an even level count")
        return side // 2
    return 1


def distinct_points(s_indices, cons: Constellation) -> PointMap:
    """Group a block onto its distinct constellation points.

    Distinct points keep first-appearance order, which makes the grouping
    deterministic for a given block.
    """
    idx = np.asarray(s_indices, dtype=np.int64)
    if idx.ndim != 1 or idx.shape[0] == 0:
        raise ZeroBlock("transmit block is empty")
    if np.any(idx < 0) or np.any(idx >= cons.order):
        raise ValueError("symbol index out of range")
    first, first_pos, inverse = np.unique(idx, return_index=True, return_inverse=True)
    # np.unique sorts by value; remap to first-appearance order
    order_seen = np.argsort(first_pos, kind="stable")
    point_index = first[order_seen]
    rank = np.empty_like(order_seen)
    rank[order_seen] = np.arange(order_seen.shape[0])
    cols = rank[inverse]
    n = idx.shape[0]
    p = point_index.shape[0]
    select = np.zeros((n, p), dtype=np.complex128)
    select[np.arange(n), cols] = 1.0
    return PointMap(
        select=select,
        values=np.ascontiguousarray(cons.points[point_index]),
        point_index=point_index,
    )


def build_mapping(s_indices, cons: Constellation, mode: FoldMode) -> FoldMapping:
    """Decompose a block's distinct points onto the mode's level coordinates."""
    pm = distinct_points(s_indices, cons)
    side = cons.side
    j_total = fold_level_count(cons.order, mode)
    p = pm.point_index.shape[0]
    # integer axis coordinates of each distinct point
    row = pm.point_index // side  # descending real index
    col = pm.point_index % side  # descending imag index
    re_lvl = side - 1 - row  # ascending level index on the real axis
    im_lvl = side - 1 - col
    coeffs_full = np.zeros((p, j_total), dtype=np.complex128)
    if mode is FoldMode.NONE:
        full_levels = cons.axis_levels
        for k in range(p):
            coeffs_full[k, re_lvl[k]] += 1.0
            coeffs_full[k, im_lvl[k]] += 1.0j
    elif mode is FoldMode.SIGN:
        if side % 2 != 0:
            raise UnsupportedModulation("sign folding needs an even level count")
        full_levels = cons.axis_levels[side // 2 :]
        half = side // 2
        for k in range(p):
            sr = 1.0 if re_lvl[k] >= half else -1.0
            si = 1.0 if im_lvl[k] >= half else -1.0
            mr = re_lvl[k] - half if re_lvl[k] >= half else half - 1 - re_lvl[k]
            mi = im_lvl[k] - half if im_lvl[k] >= half else half - 1 - im_lvl[k]
            coeffs_full[k, mr] += sr
            coeffs_full[k, mi] += 1.0j * si
    else:  # FULL
        full_levels = np.array([cons.scale], dtype=np.float64)
        odd = np.arange(-(side - 1), side, 2, dtype=np.float64)
        for k in range(p):
            coeffs_full[k, 0] = odd[re_lvl[k]] + 1.0j * odd[im_lvl[k]]
    used = np.where(np.any(coeffs_full != 0, axis=0))[0]
    if used.shape[0] == 0:
        raise ZeroBlock("no level coordinate survives pruning")
    return FoldMapping(
        points=pm,
        mode=mode,
        coeffs=np.ascontiguousarray(coeffs_full[:, used]),
        levels=np.ascontiguousarray(np.asarray(full_levels, dtype=np.float64)[used]),
        level_index=used.astype(np.int64),
        j_total=j_total,
    )
