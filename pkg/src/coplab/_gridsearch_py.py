"""Pure-Python search kernel over small discrete perturbation grids.

Minimizes ``c0 + 2 Re(p^H g) + p^H G p`` over vectors whose entries come
from a fixed alphabet, visiting candidates in mixed-radix reflected Gray
order (digit 0 fastest, all digits start at alphabet index 0).  Each step
changes one digit, so the objective updates in O(d) via

    delta_obj = 2 Re(conj(delta) (g_j + (G p)_j)) + |delta|^2 G_jj

with ``G p`` maintained incrementally.  Ties keep the first candidate found,
which is the lowest rank in enumeration order.

The compiled backend reproduces these loops operation for operation; keep
the arithmetic order in the two files aligned when editing either.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# enumeration sizes beyond this would overflow the candidate counter
_COUNT_LIMIT = 1 << 62


def _check_sizes(d: int, q: int) -> int:
    if d < 1:
        raise ValueError("search dimension must be at least 1")
    if q < 1:
        raise ValueError("alphabet must not be empty")
    total = 1
    for _ in range(d):
        total *= q
        if total > _COUNT_LIMIT:
            raise ValueError("candidate grid too large to enumerate")
    return total


def gray_min_complex(c0, g, G, values):
    """Minimum of the quadratic over the complex alphabet grid.

    Returns (digits, objective, candidates): alphabet indices of the
    minimizer, the incrementally tracked objective, and the number of
    candidates visited (always q**d).
    """
    gl = [complex(x) for x in np.asarray(g).tolist()]
    rows = [[complex(x) for x in r] for r in np.asarray(G).tolist()]
    vals = [complex(v) for v in np.asarray(values).tolist()]
    d = len(gl)
    q = len(vals)
    if len(rows) != d or any(len(r) != d for r in rows):
        raise ValueError("Gram matrix shape does not match g")
    _check_sizes(d, q)
    digits, obj, count = _core_complex(float(c0), gl, rows, vals)
    return np.array(digits, dtype=np.int64), obj, count


def gray_min_real(c0, g, G, values):
    """Real-alphabet variant of gray_min_complex."""
    gl = [float(x) for x in np.asarray(g).tolist()]
    rows = [[float(x) for x in r] for r in np.asarray(G).tolist()]
    vals = [float(v) for v in np.asarray(values).tolist()]
    d = len(gl)
    q = len(vals)
    if len(rows) != d or any(len(r) != d for r in rows):
        raise ValueError("Gram matrix shape does not match g")
    _check_sizes(d, q)
    digits, obj, count = _core_real(float(c0), gl, rows, vals)
    return np.array(digits, dtype=np.int64), obj, count


def dkvp_min(c0, g_all, G_all, k, values):
    """Best complex-grid perturbation over all size-k coordinate subsets.

    Subsets are enumerated lexicographically; within a subset the grid is
    searched exactly like gray_min_complex.  Ties keep the earliest subset
    and, within it, the first candidate found.  Returns
    (subset, digits, objective, candidates).
    """
    gl = [complex(x) for x in np.asarray(g_all).tolist()]
    rows = [[complex(x) for x in r] for r in np.asarray(G_all).tolist()]
    vals = [complex(v) for v in np.asarray(values).tolist()]
    n = len(gl)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError("Gram matrix shape does not match g")
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError("subset size must satisfy 1 <= k <= n")
    _check_sizes(k, len(vals))
    c0 = float(c0)

    best_obj = None
    best_subset = None
    best_digits = None
    count = 0
    idx = list(range(k))
    while True:
        g_sub = [gl[i] for i in idx]
        rows_sub = [[rows[i][j] for j in idx] for i in idx]
        digits, obj, c = _core_complex(c0, g_sub, rows_sub, vals)
        count += c
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_subset = list(idx)
            best_digits = digits
        # advance to the next combination
        i = k - 1
        while i >= 0 and idx[i] == n - k + i:
            i -= 1
        if i < 0:
            break
        idx[i] += 1
        for j in range(i + 1, k):
            idx[j] = idx[j - 1] + 1
    return (
        np.array(best_subset, dtype=np.int64),
        np.array(best_digits, dtype=np.int64),
        best_obj,
        count,
    )


def _core_complex(c0, g, rows, vals):
    # Digit 0 is the fastest coordinate: a full sweep of it costs O(1) per
    # candidate because only (G p)_0 is needed for the update, and the other
    # entries of G p are reconciled lazily (the net digit-0 move since the
    # last sync) each time a higher digit steps.  The visit order is the
    # same reflected Gray sequence as a plain odometer over all digits.
    d = len(g)
    q = len(vals)
    # conjugated rows: crows[j][i] == conj(G[j][i]) == G[i][j] for Hermitian G,
    # so the t update below reads one contiguous row per step
    crows = [[x.conjugate() for x in row] for row in rows]
    v0 = vals[0]
    t = [0j] * d
    obj = c0
    for i in range(d):
        ti = 0j
        crow = crows[i]
        for j in range(d):
            ti = ti + crow[j].conjugate() * v0
        t[i] = ti
    for i in range(d):
        obj = obj + 2.0 * (v0.conjugate() * g[i]).real + (v0.conjugate() * t[i]).real

    a = [0] * d
    best_obj = obj
    best = a.copy()
    count = 1
    if q == 1:
        return best, best_obj, count

    g0 = g[0]
    crow0 = crows[0]
    c00 = crow0[0]
    g00 = c00.real
    t0 = t[0]
    dir0 = 1
    a0_sync = 0
    dd = d - 1
    # odometer over digits 1..d-1 (shifted indices)
    o = [1] * dd
    f = list(range(dd + 1))
    while True:
        # full sweep of digit 0 from its current end to the other
        for _ in range(q - 1):
            old = vals[a[0]]
            a[0] += dir0
            delta = vals[a[0]] - old
            s = g0 + t0
            obj = (
                obj
                + 2.0 * (delta.conjugate() * s).real
                + (delta.real * delta.real + delta.imag * delta.imag) * g00
            )
            t0 = t0 + delta * c00
            count += 1
            if obj < best_obj:
                best_obj = obj
                best = a.copy()
        dir0 = -dir0
        if dd == 0:
            break
        # one step of a higher digit
        jj = f[0]
        f[0] = 0
        if jj == dd:
            break
        j = jj + 1
        old = vals[a[j]]
        a[j] += o[jj]
        aj = a[j]
        if aj == 0 or aj == q - 1:
            o[jj] = -o[jj]
            f[jj] = f[jj + 1]
            f[jj + 1] = jj + 1
        delta = vals[aj] - old
        # fold digit 0's net movement since the last sync into t[1:]
        net0 = vals[a[0]] - vals[a0_sync]
        for i in range(1, d):
            t[i] = t[i] + net0 * crow0[i]
        a0_sync = a[0]
        t[0] = t0
        crow = crows[j]
        s = g[j] + t[j]
        obj = (
            obj
            + 2.0 * (delta.conjugate() * s).real
            + (delta.real * delta.real + delta.imag * delta.imag) * crow[j].real
        )
        for i in range(d):
            t[i] = t[i] + delta * crow[i]
        t0 = t[0]
        count += 1
        if obj < best_obj:
            best_obj = obj
            best = a.copy()
    return best, best_obj, count


def _core_real(c0, g, rows, vals):
    d = len(g)
    q = len(vals)
    v0 = vals[0]
    t = [0.0] * d
    obj = c0
    for i in range(d):
        ti = 0.0
        row = rows[i]
        for j in range(d):
            ti = ti + row[j] * v0
        t[i] = ti
    for i in range(d):
        obj = obj + 2.0 * (v0 * g[i]) + v0 * t[i]

    a = [0] * d
    o = [1] * d
    f = list(range(d + 1))
    best_obj = obj
    best = a.copy()
    count = 1
    if q == 1:
        return best, best_obj, count
    while True:
        j = f[0]
        f[0] = 0
        if j == d:
            break
        old = vals[a[j]]
        a[j] += o[j]
        aj = a[j]
        if aj == 0 or aj == q - 1:
            o[j] = -o[j]
            f[j] = f[j + 1]
            f[j + 1] = j + 1
        delta = vals[aj] - old
        s = g[j] + t[j]
        obj = obj + 2.0 * delta * s + delta * delta * rows[j][j]
        row = rows[j]
        for i in range(d):
            t[i] = t[i] + delta * row[i]
        count += 1
        if obj < best_obj:
            best_obj = obj
            best = a.copy()
    return best, best_obj, count
