"""Index-heavy inner loops, with a numba backend and a pure-numpy fallback.

Set ``MOYALKIT_DISABLE_NUMBA=1`` to force the numpy path.  Both paths are
kept importable (``numpy_impl`` / ``numba_impl``) so the benchmark and the
tests can compare them directly.

All arrays in the "mixed" representation are indexed ``[j, m + n//2]`` with
``m`` in ``[-n/2, n/2)``; entry ``(j, m)`` holds the two-point value at
nodes ``(j + m, j - m)``.  Out-of-range nodes read as zero (no wrap-around).
"""
import os
import types

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _disabled_by_env() -> bool:
    return os.environ.get("MOYALKIT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

_index_cache: dict = {}


def _mid_index(n):
    # (rows j+m, rows j-m, valid mask) for the even sublattice
    hit = _index_cache.get(n)
    if hit is None:
        j = np.arange(n)[:, None]
        m = np.arange(n)[None, :] - n // 2
        a, b = j + m, j - m
        ok = (a >= 0) & (a < n) & (b >= 0) & (b < n)
        hit = (np.where(ok, a, 0), np.where(ok, b, 0), ok)
        _index_cache[n] = hit
    return hit


def _np_pair_to_mixed(f, g):
    n = f.shape[0]
    a, b, ok = _mid_index(n)
    return np.where(ok, f[a] * np.conj(g[b]), 0.0)


def _np_kernel_to_mixed(K):
    n = K.shape[0]
    a, b, ok = _mid_index(n)
    return np.where(ok, K[a, b], 0.0)


def _np_mixed_to_kernel(R_even, R_odd):
    # R_odd[j, m] sits at nodes (j + m + 1, j - m)
    n = R_even.shape[0]
    a, b, ok = _mid_index(n)
    K = np.zeros((n, n), dtype=np.complex128)
    K[a[ok], b[ok]] = R_even[ok]
    j = np.arange(n)[:, None]
    m = np.arange(n)[None, :] - n // 2
    a1, b1 = j + m + 1, j - m
    ok1 = (a1 >= 0) & (a1 < n) & (b1 >= 0) & (b1 < n)
    K[a1[ok1], b1[ok1]] = R_odd[ok1]
    return K


def _np_twisted_sum(A, B):
    """C[j, m] = sum_m1 A[j - m1 + m, m1] * B[j - m1, m - m1] (zero padded)."""
    n = A.shape[0]
    h = n // 2
    J = np.arange(n)[:, None]
    M = np.arange(n)[None, :] - h
    C = np.zeros((n, n), dtype=np.complex128)
    # B padded by n on every side so shifted reads never go out of range
    Bp = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    Bp[n:2 * n, n:2 * n] = B
    Ap = np.zeros(3 * n, dtype=np.complex128)
    rows = J + M
    for c1 in range(n):
        m1 = c1 - h
        Ap[n:2 * n] = A[:, c1]
        a_part = Ap[rows - m1 + n]
        b_part = Bp[n - m1:2 * n - m1, n - m1:2 * n - m1]
        C += a_part * b_part
    return C


numpy_impl = types.SimpleNamespace(
    name="numpy",
    pair_to_mixed=_np_pair_to_mixed,
    kernel_to_mixed=_np_kernel_to_mixed,
    mixed_to_kernel=_np_mixed_to_kernel,
    twisted_sum=_np_twisted_sum,
)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_pair_to_mixed(f, g):
        n = f.shape[0]
        h = n // 2
        R = np.zeros((n, n), dtype=np.complex128)
        for j in range(n):
            for c in range(n):
                m = c - h
                a = j + m
                b = j - m
                if a >= 0 and a < n and b >= 0 and b < n:
                    R[j, c] = f[a] * np.conj(g[b])
        return R

    @njit(cache=True)
    def _nb_kernel_to_mixed(K):
        n = K.shape[0]
        h = n // 2
        R = np.zeros((n, n), dtype=np.complex128)
        for j in range(n):
            for c in range(n):
                a = j + c - h
                b = j - c + h
                if a >= 0 and a < n and b >= 0 and b < n:
                    R[j, c] = K[a, b]
        return R

    @njit(cache=True)
    def _nb_mixed_to_kernel(R_even, R_odd):
        n = R_even.shape[0]
        h = n // 2
        K = np.zeros((n, n), dtype=np.complex128)
        for j in range(n):
            for c in range(n):
                a = j + c - h
                b = j - c + h
                if b < 0 or b >= n:
                    continue
                if a >= 0 and a < n:
                    K[a, b] = R_even[j, c]
                if a + 1 >= 0 and a + 1 < n:
                    K[a + 1, b] = R_odd[j, c]
        return K

    @njit(cache=True)
    def _nb_twisted_sum(A, B):
        n = A.shape[0]
        h = n // 2
        C = np.zeros((n, n), dtype=np.complex128)
        for j in range(n):
            for c in range(n):
                m = c - h
                s = 0j
                for c1 in range(n):
                    m1 = c1 - h
                    ra = j - m1 + m
                    rb = j - m1
                    cb = m - m1 + h
                    if ra >= 0 and ra < n and rb >= 0 and rb < n and cb >= 0 and cb < n:
                        s += A[ra, c1] * B[rb, cb]
                C[j, c] = s
        return C

    numba_impl = types.SimpleNamespace(
        name="numba",
        pair_to_mixed=_nb_pair_to_mixed,
        kernel_to_mixed=_nb_kernel_to_mixed,
        mixed_to_kernel=_nb_mixed_to_kernel,
        twisted_sum=_nb_twisted_sum,
    )
else:  # pragma: no cover
    numba_impl = None


def active():
    """The implementation namespace selected by the environment."""
    if numba_impl is None or _disabled_by_env():
        return numpy_impl
    return numba_impl


def backend_name() -> str:
    return active().name


def _c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def pair_to_mixed(f, g):
    return active().pair_to_mixed(_c128(f), _c128(g))


def kernel_to_mixed(K):
    return active().kernel_to_mixed(_c128(K))


def mixed_to_kernel(R_even, R_odd):
    return active().mixed_to_kernel(_c128(R_even), _c128(R_odd))


def twisted_sum(A, B):
    return active().twisted_sum(_c128(A), _c128(B))
