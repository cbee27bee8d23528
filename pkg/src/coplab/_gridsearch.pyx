# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled search kernel over small discrete perturbation grids.

Operation-for-operation mirror of _gridsearch_py: same reflected Gray
enumeration, same incremental objective update, same tie handling, and the
same floating point operation order, so both backends return identical
digits and bit-identical objectives.  Keep the two files aligned when
editing either.
"""

import numpy as np

BACKEND_NAME = "compiled"

_COUNT_LIMIT = 1 << 62


def _check_sizes(d, q):
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


cdef double _core_complex(double c0,
                          double complex[::1] g,
                          double complex[:, ::1] crows,
                          double complex[::1] vals,
                          long long[::1] a,
                          long long[::1] o,
                          long long[::1] f,
                          double complex[::1] t,
                          long long[::1] best,
                          long long* count_out) noexcept nogil:
    # Digit 0 is the fastest coordinate: a full sweep of it costs O(1) per
    # candidate because only (G p)_0 is needed for the update, and the other
    # entries of G p are reconciled lazily (the net digit-0 move since the
    # last sync) each time a higher digit steps.  The visit order is the
    # same reflected Gray sequence as a plain odometer over all digits.
    cdef Py_ssize_t d = g.shape[0]
    cdef Py_ssize_t q = vals.shape[0]
    cdef double complex v0 = vals[0]
    cdef double obj = c0
    cdef double best_obj
    cdef Py_ssize_t i, k, j, jj, aj, step
    cdef double complex ti, delta, s, old, net0
    cdef long long count
    for i in range(d):
        ti = 0
        for k in range(d):
            ti = ti + crows[i, k].conjugate() * v0
        t[i] = ti
    for i in range(d):
        obj = obj + 2.0 * (v0.conjugate() * g[i]).real + (v0.conjugate() * t[i]).real
    for i in range(d):
        a[i] = 0
        best[i] = 0
    best_obj = obj
    count = 1
    if q == 1:
        count_out[0] = count
        return best_obj

    cdef double complex g0 = g[0]
    cdef double complex c00 = crows[0, 0]
    cdef double g00 = c00.real
    cdef double complex t0 = t[0]
    cdef long long dir0 = 1
    cdef Py_ssize_t a0_sync = 0
    cdef Py_ssize_t dd = d - 1
    # odometer over digits 1..d-1 (shifted indices)
    for i in range(dd):
        o[i] = 1
        f[i] = i
    f[dd] = dd
    while True:
        # full sweep of digit 0 from its current end to the other
        for step in range(q - 1):
            old = vals[a[0]]
            a[0] = a[0] + dir0
            delta = vals[a[0]] - old
            s = g0 + t0
            obj = (
                obj
                + 2.0 * (delta.conjugate() * s).real
                + (delta.real * delta.real + delta.imag * delta.imag) * g00
            )
            t0 = t0 + delta * c00
            count = count + 1
            if obj < best_obj:
                best_obj = obj
                for i in range(d):
                    best[i] = a[i]
        dir0 = -dir0
        if dd == 0:
            break
        # one step of a higher digit
        jj = <Py_ssize_t> f[0]
        f[0] = 0
        if jj == dd:
            break
        j = jj + 1
        old = vals[a[j]]
        a[j] = a[j] + o[jj]
        aj = <Py_ssize_t> a[j]
        if aj == 0 or aj == q - 1:
            o[jj] = -o[jj]
            f[jj] = f[jj + 1]
            f[jj + 1] = jj + 1
        delta = vals[aj] - old
        # fold digit 0's net movement since the last sync into t[1:]
        net0 = vals[a[0]] - vals[a0_sync]
        for i in range(1, d):
            t[i] = t[i] + net0 * crows[0, i]
        a0_sync = <Py_ssize_t> a[0]
        t[0] = t0
        s = g[j] + t[j]
        obj = (
            obj
            + 2.0 * (delta.conjugate() * s).real
            + (delta.real * delta.real + delta.imag * delta.imag) * crows[j, j].real
        )
        for i in range(d):
            t[i] = t[i] + delta * crows[j, i]
        t0 = t[0]
        count = count + 1
        if obj < best_obj:
            best_obj = obj
            for i in range(d):
                best[i] = a[i]
    count_out[0] = count
    return best_obj


cdef double _core_real(double c0,
                       double[::1] g,
                       double[:, ::1] rows,
                       double[::1] vals,
                       long long[::1] a,
                       long long[::1] o,
                       long long[::1] f,
                       double[::1] t,
                       long long[::1] best,
                       long long* count_out) noexcept nogil:
    cdef Py_ssize_t d = g.shape[0]
    cdef Py_ssize_t q = vals.shape[0]
    cdef double v0 = vals[0]
    cdef double obj = c0
    cdef double best_obj
    cdef Py_ssize_t i, k, j, aj
    cdef double ti, delta, s, old
    cdef long long count
    for i in range(d):
        ti = 0.0
        for k in range(d):
            ti = ti + rows[i, k] * v0
        t[i] = ti
    for i in range(d):
        obj = obj + 2.0 * (v0 * g[i]) + v0 * t[i]
    for i in range(d):
        a[i] = 0
        o[i] = 1
        best[i] = 0
        f[i] = i
    f[d] = d
    best_obj = obj
    count = 1
    if q == 1:
        count_out[0] = count
        return best_obj
    while True:
        j = <Py_ssize_t> f[0]
        f[0] = 0
        if j == d:
            break
        old = vals[a[j]]
        a[j] = a[j] + o[j]
        aj = <Py_ssize_t> a[j]
        if aj == 0 or aj == q - 1:
            o[j] = -o[j]
            f[j] = f[j + 1]
            f[j + 1] = j + 1
        delta = vals[aj] - old
        s = g[j] + t[j]
        obj = obj + 2.0 * delta * s + delta * delta * rows[j, j]
        for i in range(d):
            t[i] = t[i] + delta * rows[j, i]
        count = count + 1
        if obj < best_obj:
            best_obj = obj
            for i in range(d):
                best[i] = a[i]
    count_out[0] = count
    return best_obj


def gray_min_complex(c0, g, G, values):
    """Minimum of the quadratic over the complex alphabet grid.

    Returns (digits, objective, candidates); see the pure-Python backend
    for the full contract.
    """
    g_arr = np.ascontiguousarray(g, dtype=np.complex128)
    G_arr = np.ascontiguousarray(G, dtype=np.complex128)
    v_arr = np.ascontiguousarray(values, dtype=np.complex128)
    cdef Py_ssize_t d = g_arr.shape[0]
    cdef Py_ssize_t q = v_arr.shape[0]
    if G_arr.shape != (d, d):
        raise ValueError("Gram matrix shape does not match g")
    _check_sizes(d, q)
    crows = np.conj(G_arr)
    a = np.zeros(d, dtype=np.int64)
    o = np.zeros(d, dtype=np.int64)
    f = np.zeros(d + 1, dtype=np.int64)
    t = np.zeros(d, dtype=np.complex128)
    best = np.zeros(d, dtype=np.int64)
    cdef long long count = 0
    obj = _core_complex(float(c0), g_arr, crows, v_arr, a, o, f, t, best, &count)
    return best, float(obj), int(count)


def gray_min_real(c0, g, G, values):
    """Real-alphabet variant of gray_min_complex."""
    g_arr = np.ascontiguousarray(g, dtype=np.float64)
    G_arr = np.ascontiguousarray(G, dtype=np.float64)
    v_arr = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t d = g_arr.shape[0]
    cdef Py_ssize_t q = v_arr.shape[0]
    if G_arr.shape != (d, d):
        raise ValueError("Gram matrix shape does not match g")
    _check_sizes(d, q)
    a = np.zeros(d, dtype=np.int64)
    o = np.zeros(d, dtype=np.int64)
    f = np.zeros(d + 1, dtype=np.int64)
    t = np.zeros(d, dtype=np.float64)
    best = np.zeros(d, dtype=np.int64)
    cdef long long count = 0
    obj = _core_real(float(c0), g_arr, G_arr, v_arr, a, o, f, t, best, &count)
    return best, float(obj), int(count)


def dkvp_min(c0, g_all, G_all, k, values):
    """Best complex-grid perturbation over all size-k coordinate subsets.

    Subsets are enumerated lexicographically; ties keep the earliest subset
    and, within it, the first candidate found.  Returns
    (subset, digits, objective, candidates).
    """
    g_arr = np.ascontiguousarray(g_all, dtype=np.complex128)
    G_arr = np.ascontiguousarray(G_all, dtype=np.complex128)
    v_arr = np.ascontiguousarray(values, dtype=np.complex128)
    cdef Py_ssize_t n = g_arr.shape[0]
    cdef Py_ssize_t kk = int(k)
    cdef Py_ssize_t q = v_arr.shape[0]
    if G_arr.shape != (n, n):
        raise ValueError("Gram matrix shape does not match g")
    if not 1 <= kk <= n:
        raise ValueError("subset size must satisfy 1 <= k <= n")
    _check_sizes(kk, q)
    crows_full = np.conj(G_arr)

    cdef double complex[::1] g_v = g_arr
    cdef double complex[:, ::1] cr_v = crows_full
    cdef double complex[::1] vals_v = v_arr
    g_sub = np.empty(kk, dtype=np.complex128)
    cr_sub = np.empty((kk, kk), dtype=np.complex128)
    cdef double complex[::1] gs_v = g_sub
    cdef double complex[:, ::1] crs_v = cr_sub
    idx = np.arange(kk, dtype=np.int64)
    best_subset = np.zeros(kk, dtype=np.int64)
    best_digits = np.zeros(kk, dtype=np.int64)
    cdef long long[::1] idx_v = idx
    cdef long long[::1] bs_v = best_subset
    cdef long long[::1] bd_v = best_digits
    a = np.zeros(kk, dtype=np.int64)
    o = np.zeros(kk, dtype=np.int64)
    f = np.zeros(kk + 1, dtype=np.int64)
    t = np.zeros(kk, dtype=np.complex128)
    digits = np.zeros(kk, dtype=np.int64)
    cdef long long[::1] a_v = a
    cdef long long[::1] o_v = o
    cdef long long[::1] f_v = f
    cdef double complex[::1] t_v = t
    cdef long long[::1] dg_v = digits

    cdef double c0_d = float(c0)
    cdef double best_obj = float("inf")
    cdef double obj
    cdef long long count_total = 0
    cdef long long sub_count = 0
    cdef Py_ssize_t ii, jj
    cdef Py_ssize_t adv
    with nogil:
        while True:
            for ii in range(kk):
                gs_v[ii] = g_v[idx_v[ii]]
                for jj in range(kk):
                    crs_v[ii, jj] = cr_v[idx_v[ii], idx_v[jj]]
            obj = _core_complex(c0_d, gs_v, crs_v, vals_v,
                                a_v, o_v, f_v, t_v, dg_v, &sub_count)
            count_total = count_total + sub_count
            if obj < best_obj:
                best_obj = obj
                for ii in range(kk):
                    bs_v[ii] = idx_v[ii]
                    bd_v[ii] = dg_v[ii]
            adv = kk - 1
            while adv >= 0 and idx_v[adv] == n - kk + adv:
                adv = adv - 1
            if adv < 0:
                break
            idx_v[adv] = idx_v[adv] + 1
            for jj in range(adv + 1, kk):
                idx_v[jj] = idx_v[jj - 1] + 1
    return best_subset, best_digits, float(best_obj), int(count_total)
