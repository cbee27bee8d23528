"""Unit tests for the discrete grid-search kernels.

Both kernel backends (pure Python, and the compiled extension when it
built) are exercised through the same parametrized fixtures; a dedicated
test asserts they agree bit for bit.
"""

import importlib
import itertools

import numpy as np
import pytest

import coplab._gridsearch_py as kpy

COMPLEX_VALS = np.array(
    [0, 1, -1, 1j, -1j, 1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=np.complex128
)
REAL_VALS = np.array([0.0, 1.0, -1.0])


def _backends():
    mods = [kpy]
    try:
        mods.insert(0, importlib.import_module("coplab._gridsearch"))
    except ImportError:
        pass
    return mods


@pytest.fixture(params=_backends(), ids=lambda m: m.BACKEND_NAME)
def kern(request):
    return request.param


def ref_sequence(q, d):
    """All q^d digit vectors in the kernel's enumeration order.

    Plain loopless reflected-Gray odometer; digit 0 moves fastest and every
    step changes exactly one digit by +-1.
    """
    a = [0] * d
    o = [1] * d
    f = list(range(d + 1))
    seq = [tuple(a)]
    if q == 1:
        return seq
    while True:
        j = f[0]
        f[0] = 0
        if j == d:
            break
        a[j] += o[j]
        if a[j] == 0 or a[j] == q - 1:
            o[j] = -o[j]
            f[j] = f[j + 1]
            f[j + 1] = j + 1
        seq.append(tuple(a))
    return seq


def gray_digits(rank, q, d):
    """Closed form for the digit vector visited at a given rank.

    Digit i sits at base-q digit b_i of the rank, reflected whenever the
    number of steps taken by the digits above it (rank // q**(i+1)) is odd.
    """
    out = []
    for i in range(d):
        b = (rank // q**i) % q
        hi = rank // q ** (i + 1)
        out.append(b if hi % 2 == 0 else q - 1 - b)
    return tuple(out)


_GRIDS = {}


def gray_grid(q, d):
    """(q**d, d) array of digit vectors in enumeration order, cached."""
    key = (q, d)
    if key not in _GRIDS:
        _GRIDS[key] = np.array(
            [gray_digits(r, q, d) for r in range(q**d)], dtype=np.int64
        )
    return _GRIDS[key]


@pytest.mark.parametrize("q,d", [(3, 3), (9, 2), (2, 5), (3, 1), (5, 2)])
def test_gray_rank_formula_matches_reference_enumeration(q, d):
    seq = ref_sequence(q, d)
    assert len(seq) == q**d
    assert len(set(seq)) == q**d
    for rank, digits in enumerate(seq):
        assert gray_digits(rank, q, d) == digits
    # adjacent candidates differ in exactly one digit by one step
    for prev, cur in zip(seq, seq[1:]):
        diffs = [abs(a - b) for a, b in zip(prev, cur)]
        assert sorted(diffs)[-1] == 1 and sum(d_ != 0 for d_ in diffs) == 1


def _rand_complex_instance(rng, d, m=None):
    m = m or d + 2
    f = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    u = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    g = f.conj().T @ u
    k = f.conj().T @ f
    gm = (k + k.conj().T) / 2.0
    c0 = float(np.real(np.vdot(u, u)))
    return u, f, c0, g, gm


def _naive_min_complex(u, f, vals, d):
    grid = gray_grid(len(vals), d)
    cand = u[:, None] + f @ vals[grid].T
    objs = np.sum(cand.real**2 + cand.imag**2, axis=0)
    best = int(np.argmin(objs))
    return grid[best], float(objs[best])


def test_complex_kernel_matches_naive_oracle(kern):
    rng = np.random.default_rng(2024)
    for _ in range(200):
        d = int(rng.integers(1, 5))
        u, f, c0, g, gm = _rand_complex_instance(rng, d)
        digits, obj, count = kern.gray_min_complex(c0, g, gm, COMPLEX_VALS)
        want_digits, want_obj = _naive_min_complex(u, f, COMPLEX_VALS, d)
        assert count == 9**d
        assert np.array_equal(digits, want_digits)
        assert obj == pytest.approx(want_obj, rel=1e-8, abs=1e-10)


def test_real_kernel_matches_naive_oracle(kern):
    rng = np.random.default_rng(2025)
    for _ in range(200):
        d = int(rng.integers(1, 9))
        m = d + 2
        f = rng.standard_normal((m, d))
        u = rng.standard_normal(m)
        g = f.T @ u
        k = f.T @ f
        gm = (k + k.T) / 2.0
        c0 = float(np.dot(u, u))
        digits, obj, count = kern.gray_min_real(c0, g, gm, REAL_VALS)
        grid = gray_grid(3, d)
        cand = u[:, None] + f @ REAL_VALS[grid].T
        objs = np.sum(cand**2, axis=0)
        best = int(np.argmin(objs))
        assert count == 3**d
        assert np.array_equal(digits, grid[best])
        assert obj == pytest.approx(float(objs[best]), rel=1e-8, abs=1e-10)


def test_all_tied_candidates_keep_the_first(kern):
    z = np.zeros(4, dtype=np.complex128)
    digits, obj, count = kern.gray_min_complex(5.0, z, np.zeros((4, 4), np.complex128), COMPLEX_VALS)
    assert digits.tolist() == [0, 0, 0, 0]
    assert obj == 5.0
    assert count == 9**4


@pytest.mark.parametrize("target_digit", [0, 1, 2])
def test_first_found_tie_break_matches_enumeration_order(kern, target_digit):
    # integer-valued data keeps every update exact, so candidates that agree
    # on the live digit tie bit-exactly and the earliest visited must win
    d, q = 3, 9
    k_star = 5  # value 1+1j
    f = np.zeros((2, d), dtype=np.complex128)
    f[:, target_digit] = [1.0, 1.0j]
    u = -(f[:, target_digit] * COMPLEX_VALS[k_star])
    g = f.conj().T @ u
    gm = f.conj().T @ f
    c0 = float(np.real(np.vdot(u, u)))
    digits, obj, _ = kern.gray_min_complex(c0, g, gm, COMPLEX_VALS)
    first_rank = next(
        r for r in range(q**d) if gray_digits(r, q, d)[target_digit] == k_star
    )
    assert tuple(digits) == gray_digits(first_rank, q, d)
    assert obj == 0.0


@pytest.mark.parametrize("target_digit", [0, 1, 3])
def test_first_found_tie_break_real(kern, target_digit):
    d, q = 4, 3
    k_star = 2  # value -1
    f = np.zeros((2, d))
    f[:, target_digit] = [1.0, 2.0]
    u = -(f[:, target_digit] * REAL_VALS[k_star])
    g = f.T @ u
    gm = f.T @ f
    c0 = float(np.dot(u, u))
    digits, obj, _ = kern.gray_min_real(c0, g, gm, REAL_VALS)
    first_rank = next(
        r for r in range(q**d) if gray_digits(r, q, d)[target_digit] == k_star
    )
    assert tuple(digits) == gray_digits(first_rank, q, d)
    assert obj == 0.0


def test_single_value_alphabet_visits_one_candidate(kern):
    one = np.array([0j])
    digits, obj, count = kern.gray_min_complex(
        3.0, np.zeros(5, np.complex128), np.zeros((5, 5), np.complex128), one
    )
    assert count == 1
    assert digits.tolist() == [0] * 5
    assert obj == 3.0


def test_incremental_objective_close_to_recomputed(kern):
    rng = np.random.default_rng(77)
    for _ in range(30):
        d = 6
        u, f, c0, g, gm = _rand_complex_instance(rng, d, m=10)
        digits, obj, _ = kern.gray_min_complex(c0, g, gm, COMPLEX_VALS)
        p = COMPLEX_VALS[np.asarray(digits)]
        full = float(np.real(np.vdot(u + f @ p, u + f @ p)))
        assert obj == pytest.approx(full, rel=1e-9, abs=1e-9)


def test_size_guards(kern):
    z1 = np.zeros(1, np.complex128)
    with pytest.raises(ValueError):
        kern.gray_min_complex(0.0, np.zeros(0, np.complex128), np.zeros((0, 0), np.complex128), COMPLEX_VALS)
    with pytest.raises(ValueError):
        kern.gray_min_complex(0.0, z1, np.zeros((1, 1), np.complex128), np.zeros(0, np.complex128))
    d = 40  # 3**40 exceeds the enumeration budget
    with pytest.raises(ValueError):
        kern.gray_min_real(0.0, np.zeros(d), np.zeros((d, d)), REAL_VALS)
    with pytest.raises(ValueError):
        kern.gray_min_complex(0.0, z1, np.zeros((2, 2), np.complex128), COMPLEX_VALS)


def _naive_dkvp(u, f, k, vals):
    """Global minimum plus every subset whose own minimum ties it.

    When the optimizer zeroes one of its k digits the same objective is
    reachable from several subsets, so callers must accept any member of
    the tied set rather than a single canonical subset.
    """
    n = f.shape[1]
    per_subset = {}
    for subset in itertools.combinations(range(n), k):
        fs = f[:, subset]
        best = None
        for combo in itertools.product(range(len(vals)), repeat=k):
            p = vals[list(combo)]
            r = u + fs @ p
            obj = float(np.real(np.vdot(r, r)))
            if best is None or obj < best:
                best = obj
        per_subset[subset] = best
    global_min = min(per_subset.values())
    tol = 1e-9 * (1.0 + abs(global_min))
    tied = {s for s, v in per_subset.items() if v <= global_min + tol}
    return global_min, tied


def test_dkvp_matches_naive_subset_oracle(kern):
    rng = np.random.default_rng(31)
    for _ in range(25):
        n, k = 6, 2
        u, f, c0, g, gm = _rand_complex_instance(rng, n, m=8)
        subset, digits, obj, count = kern.dkvp_min(c0, g, gm, k, COMPLEX_VALS)
        want_obj, tied = _naive_dkvp(u, f, k, COMPLEX_VALS)
        assert count == 15 * 81
        assert tuple(subset.tolist()) in tied
        assert obj == pytest.approx(want_obj, rel=1e-8, abs=1e-10)


def test_dkvp_duplicate_columns_keep_earliest_subset(kern):
    # integer data keeps the arithmetic exact, so a subset using the clone
    # column ties bit for bit with its earlier twin and must never win
    rng = np.random.default_rng(32)
    for _ in range(20):
        f = (rng.integers(-3, 4, (6, 4)) + 1j * rng.integers(-3, 4, (6, 4))).astype(
            np.complex128
        )
        f[:, 3] = f[:, 1]
        u = (rng.integers(-4, 5, 6) + 1j * rng.integers(-4, 5, 6)).astype(
            np.complex128
        )
        g = np.array([np.vdot(f[:, i], u) for i in range(4)])
        gm = np.array(
            [[np.vdot(f[:, i], f[:, j]) for j in range(4)] for i in range(4)]
        )
        c0 = float(np.real(np.vdot(u, u)))
        subset, digits, obj, _ = kern.dkvp_min(c0, g, gm, 2, COMPLEX_VALS)
        sub = set(subset.tolist())
        # (0,1) precedes (0,3) and (1,2) precedes (2,3) lexicographically
        assert not (3 in sub and 1 not in sub)
        want_obj, _ = _naive_dkvp(u, f, 2, COMPLEX_VALS)
        assert obj == pytest.approx(want_obj, rel=1e-9, abs=1e-9)


def test_dkvp_k_bounds(kern):
    z = np.zeros(3, np.complex128)
    gm = np.zeros((3, 3), np.complex128)
    with pytest.raises(ValueError):
        kern.dkvp_min(0.0, z, gm, 0, COMPLEX_VALS)
    with pytest.raises(ValueError):
        kern.dkvp_min(0.0, z, gm, 4, COMPLEX_VALS)


def test_backends_agree_bit_for_bit():
    mods = _backends()
    if len(mods) < 2:
        pytest.skip("compiled backend not built")
    kc, kp = mods[0], mods[1]
    rng = np.random.default_rng(555)
    for _ in range(150):
        d = int(rng.integers(1, 6))
        _, _, c0, g, gm = _rand_complex_instance(rng, d)
        b1, o1, n1 = kc.gray_min_complex(c0, g, gm, COMPLEX_VALS)
        b2, o2, n2 = kp.gray_min_complex(c0, g, gm, COMPLEX_VALS)
        assert np.array_equal(b1, b2)
        assert o1 == o2
        assert n1 == n2
    for _ in range(150):
        d = int(rng.integers(1, 9))
        m = d + 2
        f = rng.standard_normal((m, d))
        u = rng.standard_normal(m)
        g = f.T @ u
        k = f.T @ f
        gm = (k + k.T) / 2.0
        c0 = float(np.dot(u, u))
        b1, o1, n1 = kc.gray_min_real(c0, g, gm, REAL_VALS)
        b2, o2, n2 = kp.gray_min_real(c0, g, gm, REAL_VALS)
        assert np.array_equal(b1, b2)
        assert o1 == o2
        assert n1 == n2
    for _ in range(60):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, min(n, 3) + 1))
        _, _, c0, g, gm = _rand_complex_instance(rng, n)
        r1 = kc.dkvp_min(c0, g, gm, k, COMPLEX_VALS)
        r2 = kp.dkvp_min(c0, g, gm, k, COMPLEX_VALS)
        assert np.array_equal(r1[0], r2[0])
        assert np.array_equal(r1[1], r2[1])
        assert r1[2] == r2[2]
        assert r1[3] == r2[3]
