# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for PMF evolution and explicit scheme stepping.

Both loops must produce bit-identical results to the numpy versions in
``_fallback.py``: the accumulation order per cell is fixed (base term first,
then step contributions in ascending step order) and the extension is built
with ``-ffp-contract=off``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _horner(const double[::1] c, Py_ssize_t nc, double x) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(nc - 1, -1, -1):
        acc = acc * x + c[i]
    return acc


def evolve(w_in, long offset, shifts_in, coefs_in, long n, bint fomo, double threshold):
    """Run ``n`` steps of the hipster (or fomo) recurrence.

    Returns ``(weights, offset, dropped_mass, min_weight)``.
    """
    cdef const double[::1] w0 = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef const long[::1] shifts = np.ascontiguousarray(shifts_in, dtype=np.int64)
    cdef const double[::1] coefs = np.ascontiguousarray(coefs_in, dtype=np.float64)
    cdef Py_ssize_t ns = shifts.shape[0]
    cdef long smin = 0, smax = 0
    cdef Py_ssize_t i, k, step
    for i in range(ns):
        if shifts[i] < smin:
            smin = shifts[i]
        if shifts[i] > smax:
            smax = shifts[i]

    cdef Py_ssize_t length = w0.shape[0]
    cdef Py_ssize_t cap = 4 * length + 64 * (smax - smin + 1) + 64
    cdef double[::1] a = np.zeros(cap)
    cdef double[::1] b = np.zeros(cap)
    cdef double[::1] g = np.zeros(cap)
    cdef double[::1] tmp
    cdef Py_ssize_t lo = (cap - length) // 2
    cdef Py_ssize_t hi = lo + length
    cdef long off = offset - lo          # value of buffer index 0
    for k in range(length):
        a[lo + k] = w0[k]

    cdef double dropped = 0.0
    cdef double min_w = 1.0
    cdef double p, acc
    cdef Py_ssize_t nlo, nhi, src, new_cap, new_lo, width

    for step in range(n):
        nlo = lo + smin
        nhi = hi + smax
        if nlo < 0 or nhi > cap:
            width = hi - lo
            new_cap = 4 * width + 64 * (smax - smin + 1) + 64
            new_lo = (new_cap - width) // 2
            b = np.zeros(new_cap)
            g = np.zeros(new_cap)
            for k in range(width):
                b[new_lo + k] = a[lo + k]
            off = off + lo - new_lo
            a = b
            b = np.zeros(new_cap)
            cap = new_cap
            lo = new_lo
            hi = new_lo + width
            nlo = lo + smin
            nhi = hi + smax
        with nogil:
            for k in range(lo, hi):
                p = a[k]
                if fomo:
                    g[k] = p * (1.0 - p)
                else:
                    g[k] = p * p
            for k in range(nlo, nhi):
                if k >= lo and k < hi:
                    p = a[k]
                    if fomo:
                        acc = p * p
                    else:
                        acc = p * (1.0 - p)
                else:
                    acc = 0.0
                for i in range(ns):
                    src = k - shifts[i]
                    if src >= lo and src < hi:
                        acc = acc + coefs[i] * g[src]
                b[k] = acc
                if acc < min_w:
                    min_w = acc
            while nlo < nhi and b[nlo] < threshold:
                dropped += b[nlo]
                nlo += 1
            while nhi > nlo and b[nhi - 1] < threshold:
                dropped += b[nhi - 1]
                nhi -= 1
        if nlo >= nhi:
            raise ValueError("every atom fell below the trimming threshold")
        tmp = a
        a = b
        b = tmp
        # stale values outside the live window are never read
        lo = nlo
        hi = nhi

    out = np.asarray(a[lo:hi]).copy()
    return out, off + lo, dropped, min_w


def scheme_run(u_in, long offset, f_in, k_in, double lam1, double lam2, long n):
    """``n`` explicit steps of
    ``U_j - lam1 (f(U_j) - f(U_{j-1})) + lam2 (K(U_{j+1}) - 2 K(U_j) + K(U_{j-1}))``.

    The window grows by one cell per side per step and exact zeros at the ends
    are stripped. Returns ``(cells, offset)``.
    """
    cdef const double[::1] u0 = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef const double[::1] fc = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef const double[::1] kc = np.ascontiguousarray(k_in, dtype=np.float64)
    cdef Py_ssize_t nf = fc.shape[0], nk = kc.shape[0]
    cdef Py_ssize_t length = u0.shape[0]
    cdef Py_ssize_t cap = 2 * length + 2 * 64 + 8
    cdef double[::1] a = np.zeros(cap)
    cdef double[::1] b = np.zeros(cap)
    cdef double[::1] fv = np.zeros(cap)
    cdef double[::1] kv = np.zeros(cap)
    cdef double[::1] tmp
    cdef Py_ssize_t lo = (cap - length) // 2
    cdef Py_ssize_t hi = lo + length
    cdef long off = offset - lo
    cdef Py_ssize_t k, step, width, new_cap, new_lo, nlo, nhi, start
    cdef double f0 = _horner(fc, nf, 0.0)
    cdef double k0 = _horner(kc, nk, 0.0)
    cdef double um, uc, up, fm, fcur, km, kcur, kp
    for k in range(length):
        a[lo + k] = u0[k]

    for step in range(n):
        if lo - 2 < 0 or hi + 2 > cap:
            width = hi - lo
            new_cap = 2 * width + 2 * 64 + 8
            new_lo = (new_cap - width) // 2
            b = np.zeros(new_cap)
            for k in range(width):
                b[new_lo + k] = a[lo + k]
            off = off + lo - new_lo
            a = b
            b = np.zeros(new_cap)
            fv = np.zeros(new_cap)
            kv = np.zeros(new_cap)
            cap = new_cap
            lo = new_lo
            hi = new_lo + width
        nlo = lo - 1
        nhi = hi + 1
        start = nlo
        with nogil:
            for k in range(lo, hi):
                fv[k] = _horner(fc, nf, a[k])
                kv[k] = _horner(kc, nk, a[k])
            for k in range(nlo, nhi):
                uc = a[k] if (k >= lo and k < hi) else 0.0
                fcur = fv[k] if (k >= lo and k < hi) else f0
                kcur = kv[k] if (k >= lo and k < hi) else k0
                fm = fv[k - 1] if (k - 1 >= lo and k - 1 < hi) else f0
                km = kv[k - 1] if (k - 1 >= lo and k - 1 < hi) else k0
                kp = kv[k + 1] if (k + 1 >= lo and k + 1 < hi) else k0
                b[k] = uc - lam1 * (fcur - fm) + lam2 * (kp - 2.0 * kcur + km)
            while nlo < nhi and b[nlo] == 0.0:
                nlo += 1
            while nhi > nlo and b[nhi - 1] == 0.0:
                nhi -= 1
        if nlo >= nhi:
            nlo = start
            nhi = start + 1
        tmp = a
        a = b
        b = tmp
        lo = nlo
        hi = nhi

    return np.asarray(a[lo:hi]).copy(), off + lo


cdef inline Py_ssize_t _pick(const double[::1] cum, Py_ssize_t nc, double v) noexcept nogil:
    # first index with cum[i] > v, clamped to the last index
    cdef Py_ssize_t i
    for i in range(nc):
        if cum[i] > v:
            return i
    return nc - 1


def tree_reduce(x_in, u_in, bint fomo, shifts_in, cum_in):
    """Reduce ``count x 2**n`` integer leaves to ``count`` roots.

    One uniform per internal node, consumed level by level (row-major within
    a level). Hipster: equal children step by ``shifts[pick(u)]``, unequal
    children keep the left one iff ``u < 1/2``. Fomo: equal children stay,
    otherwise the coin ``u < 1/2`` picks a child and ``2u`` (or ``2u - 1``)
    selects the step.
    """
    cdef long[:, ::1] x = np.array(x_in, dtype=np.int64, order="C", copy=True)
    cdef const double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef const long[::1] shifts = np.ascontiguousarray(shifts_in, dtype=np.int64)
    cdef const double[::1] cum = np.ascontiguousarray(cum_in, dtype=np.float64)
    cdef Py_ssize_t nc = cum.shape[0]
    cdef Py_ssize_t count = x.shape[0], w = x.shape[1], half, r, i, pos = 0
    cdef double total = cum[nc - 1], v, uu
    cdef long a, b, s
    if u.shape[0] != count * (w - 1):
        raise ValueError("need one uniform per internal node")
    with nogil:
        while w > 1:
            half = w // 2
            for r in range(count):
                for i in range(half):
                    a = x[r, 2 * i]
                    b = x[r, 2 * i + 1]
                    uu = u[pos + r * half + i]
                    if fomo:
                        if uu >= 0.5:
                            a, b = b, a
                            v = 2.0 * uu - 1.0
                        else:
                            v = 2.0 * uu
                        if a != b:
                            a = a + shifts[_pick(cum, nc, v * total)]
                        x[r, i] = a
                    else:
                        s = a + shifts[_pick(cum, nc, uu * total)]
                        x[r, i] = s if a == b else (a if uu < 0.5 else b)
            pos += count * half
            w = half
    return np.asarray(x[:, 0]).copy()
