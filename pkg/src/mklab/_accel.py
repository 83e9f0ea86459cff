"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Every kernel exists twice: a loop-style version compiled with ``numba.njit``
and a vectorized numpy version. The public names in this module resolve to
one of the two at import time:

* ``MKLAB_DISABLE_NUMBA=1`` (or ``NUMBA_DISABLE_JIT=1``, or numba missing)
  selects the numpy path;
* otherwise the numba path is used.

Both implementations stay importable as ``NUMBA_KERNELS`` / ``NUMPY_KERNELS``
so tests and the benchmark can compare them side by side.

Permutations are passed as int64 arrays of 0-based images, one permutation
per row.
"""
import os

import numpy as np

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not (
    _env_flag("MKLAB_DISABLE_NUMBA") or _env_flag("NUMBA_DISABLE_JIT")
)


def _jit(func):
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------------------
# permutation kernels

def _cycle_counts_loop(perms):
    m, k = perms.shape
    out = np.zeros(m, dtype=np.int64)
    seen = np.zeros(k, dtype=np.bool_)
    for r in range(m):
        seen[:] = False
        c = 0
        for i in range(k):
            if not seen[i]:
                c += 1
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = perms[r, j]
        out[r] = c
    return out


def _cycle_counts_np(perms):
    m, k = perms.shape
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    rows = np.arange(m)[:, None]
    start = np.broadcast_to(np.arange(k), (m, k))
    cur = perms.copy()
    low = np.minimum(start, cur)
    for _ in range(k - 2):
        cur = perms[rows, cur]
        np.minimum(low, cur, out=low)
    # i opens a cycle iff it is the smallest element of its orbit
    return (low == start).sum(axis=1).astype(np.int64)


def _cycle_length_counts_loop(perms):
    m, k = perms.shape
    out = np.zeros((m, k + 1), dtype=np.int64)
    seen = np.zeros(k, dtype=np.bool_)
    for r in range(m):
        seen[:] = False
        for i in range(k):
            if not seen[i]:
                length = 0
                j = i
                while not seen[j]:
                    seen[j] = True
                    j = perms[r, j]
                    length += 1
                out[r, length] += 1
    return out


def _cycle_length_counts_np(perms):
    m, k = perms.shape
    out = np.zeros((m, k + 1), dtype=np.int64)
    if m == 0:
        return out
    rows = np.arange(m)[:, None]
    start = np.broadcast_to(np.arange(k), (m, k))
    cur = perms.copy()
    low = np.minimum(start, cur)
    # orbit length of i = first t >= 1 with perm^t(i) == i
    length = np.where(cur == start, 1, 0)
    for t in range(2, k + 1):
        cur = perms[rows, cur]
        np.minimum(low, cur, out=low)
        hit = (cur == start) & (length == 0)
        length[hit] = t
    leaders = low == start
    r_idx = np.repeat(np.arange(m), k).reshape(m, k)[leaders]
    np.add.at(out, (r_idx, length[leaders]), 1)
    return out


# ---------------------------------------------------------------------------
# partition refinement

def _refines_mask_loop(firsts, coarse_first):
    # firsts: (M, k) block minima of candidate partitions; row r refines the
    # coarse partition iff every point shares a coarse block with its minimum
    m, k = firsts.shape
    out = np.ones(m, dtype=np.bool_)
    for r in range(m):
        for i in range(k):
            if coarse_first[firsts[r, i]] != coarse_first[i]:
                out[r] = False
                break
    return out


def _refines_mask_np(firsts, coarse_first):
    return np.all(coarse_first[firsts] == coarse_first, axis=1)


# ---------------------------------------------------------------------------
# spectral kernels

def _power_sums_loop(x, kmax):
    out = np.zeros(kmax, dtype=np.float64)
    for i in range(x.shape[0]):
        p = 1.0
        for k in range(kmax):
            p *= x[i]
            out[k] += p
    return out


def _power_sums_np(x, kmax):
    if kmax == 0:
        return np.zeros(0)
    pw = np.cumprod(np.broadcast_to(x, (kmax, x.shape[0])), axis=0)
    return pw.sum(axis=1)


def _tridiagonalize_loop(a):
    """Householder reduction of a Hermitian matrix; returns (diag, |offdiag|)."""
    a = a.copy()
    n = a.shape[0]
    v = np.zeros(n, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    for j in range(n - 2):
        s = 0.0
        for i in range(j + 1, n):
            s += a[i, j].real ** 2 + a[i, j].imag ** 2
        norm = np.sqrt(s)
        if norm == 0.0:
            continue
        x0 = a[j + 1, j]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -phase * norm
        vn = 0.0
        for i in range(j + 1, n):
            v[i] = a[i, j]
        v[j + 1] -= alpha
        for i in range(j + 1, n):
            vn += v[i].real ** 2 + v[i].imag ** 2
        vn = np.sqrt(vn)
        for i in range(j + 1, n):
            v[i] /= vn
        # p = S v on the trailing block, K = v^* p
        kk = 0.0 + 0.0j
        for i in range(j + 1, n):
            acc = 0.0 + 0.0j
            for l in range(j + 1, n):
                acc += a[i, l] * v[l]
            p[i] = acc
            kk += np.conj(v[i]) * acc
        kr = kk.real
        for i in range(j + 1, n):
            p[i] -= kr * v[i]
        for i in range(j + 1, n):
            vi2 = 2.0 * v[i]
            pi2 = 2.0 * p[i]
            for l in range(j + 1, n):
                a[i, l] -= vi2 * np.conj(p[l]) + pi2 * np.conj(v[l])
        a[j + 1, j] = alpha
        a[j, j + 1] = np.conj(alpha)
        for i in range(j + 2, n):
            a[i, j] = 0.0
            a[j, i] = 0.0
    d = np.zeros(n, dtype=np.float64)
    e = np.zeros(n, dtype=np.float64)
    for i in range(n):
        d[i] = a[i, i].real
    for i in range(n - 1):
        e[i] = abs(a[i + 1, i])
    return d, e


def _tridiagonalize_np(a):
    a = np.array(a, dtype=np.complex128)
    n = a.shape[0]
    for j in range(n - 2):
        x = a[j + 1:, j]
        norm = np.linalg.norm(x)
        if norm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -phase * norm
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        s = a[j + 1:, j + 1:]
        p = s @ v
        p -= np.vdot(v, p).real * v
        s -= 2.0 * (np.outer(v, p.conj()) + np.outer(p, v.conj()))
        a[j + 1:, j] = 0.0
        a[j, j + 1:] = 0.0
        a[j + 1, j] = alpha
        a[j, j + 1] = np.conj(alpha)
    d = np.real(np.diag(a)).copy()
    e = np.zeros(n)
    e[:n - 1] = np.abs(np.diag(a, -1))
    return d, e


def _tridiag_eigvals_loop(d, e, max_iter):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``e[i]`` couples ``d[i]`` and ``d[i+1]``; ``e[n-1]`` is ignored.
    Returns (sorted eigenvalues, converged flag).
    """
    d = d.copy()
    e = e.copy()
    n = d.shape[0]
    if n > 0:
        e[n - 1] = 0.0
    eps = np.finfo(np.float64).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return np.sort(d), False
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(d), True


def _tridiag_eigvals_np(d, e, max_iter):
    n = d.shape[0]
    t = np.diag(d)
    if n > 1:
        off = e[:n - 1]
        t += np.diag(off, 1) + np.diag(off, -1)
    return np.linalg.eigvalsh(t), True


NUMPY_KERNELS = {
    "cycle_counts": _cycle_counts_np,
    "cycle_length_counts": _cycle_length_counts_np,
    "refines_mask": _refines_mask_np,
    "power_sums": _power_sums_np,
    "tridiagonalize": _tridiagonalize_np,
    "tridiag_eigvals": _tridiag_eigvals_np,
}

_LOOP_KERNELS = {
    "cycle_counts": _cycle_counts_loop,
    "cycle_length_counts": _cycle_length_counts_loop,
    "refines_mask": _refines_mask_loop,
    "power_sums": _power_sums_loop,
    "tridiagonalize": _tridiagonalize_loop,
    "tridiag_eigvals": _tridiag_eigvals_loop,
}

NUMBA_KERNELS = {name: _jit(f) for name, f in _LOOP_KERNELS.items()} if HAVE_NUMBA else {}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

cycle_counts = _ACTIVE["cycle_counts"]
cycle_length_counts = _ACTIVE["cycle_length_counts"]
refines_mask = _ACTIVE["refines_mask"]
power_sums = _ACTIVE["power_sums"]
tridiagonalize = _ACTIVE["tridiagonalize"]
tridiag_eigvals = _ACTIVE["tridiag_eigvals"]


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
