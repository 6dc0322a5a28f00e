"""Pure numpy versions of the compiled loops in ``_kernels.pyx``.

Same call signatures and the same floating-point operation order, so the
two back ends agree bit for bit.
"""
import numpy as np
from numpy.polynomial import polynomial as P


def evolve(w_in, offset, shifts_in, coefs_in, n, fomo, threshold):
    w = np.ascontiguousarray(w_in, dtype=np.float64).copy()
    shifts = np.asarray(shifts_in, dtype=np.int64)
    coefs = np.asarray(coefs_in, dtype=np.float64)
    smin = min(0, int(shifts.min()))
    smax = max(0, int(shifts.max()))
    dropped = 0.0
    min_w = 1.0
    off = int(offset)
    for _ in range(int(n)):
        L = w.size
        if fomo:
            base = w * w
            g = w * (1.0 - w)
        else:
            base = w * (1.0 - w)
            g = w * w
        out = np.zeros(L + smax - smin)
        out[-smin: -smin + L] = base
        for s, c in zip(shifts, coefs):
            start = int(s) - smin
            out[start: start + L] += c * g
        min_w = min(min_w, float(out.min()))
        above = np.flatnonzero(out >= threshold)
        if above.size == 0:
            raise ValueError("every atom fell below the trimming threshold")
        a, b = above[0], above[-1] + 1
        # left-to-right / right-to-left accumulation as in the compiled loop
        for x in out[:a]:
            dropped += float(x)
        for x in out[b:][::-1]:
            dropped += float(x)
        w = out[a:b]
        off = off + smin + int(a)
    return w.copy(), off, dropped, min_w


def scheme_run(u_in, offset, f_in, k_in, lam1, lam2, n):
    u = np.ascontiguousarray(u_in, dtype=np.float64).copy()
    fc = np.asarray(f_in, dtype=np.float64)
    kc = np.asarray(k_in, dtype=np.float64)
    f0 = _horner(fc, 0.0)
    k0 = _horner(kc, 0.0)
    off = int(offset)
    for _ in range(int(n)):
        L = u.size
        fv = np.full(L + 4, f0)
        kv = np.full(L + 4, k0)
        uu = np.zeros(L + 2)
        # fv[i] = f(u[i-2]), kv[i] = K(u[i-2]); new cell m sits on old index m-1
        fv[2: L + 2] = _horner(fc, u)
        kv[2: L + 2] = _horner(kc, u)
        uu[1: L + 1] = u
        fcur = fv[1: L + 3]
        fm = fv[0: L + 2]
        kcur = kv[1: L + 3]
        km = kv[0: L + 2]
        kp = kv[2: L + 4]
        new = uu - lam1 * (fcur - fm) + lam2 * (kp - 2.0 * kcur + km)
        nz = np.flatnonzero(new != 0.0)
        off -= 1
        if nz.size == 0:
            u = np.zeros(1)
            continue
        u = new[nz[0]: nz[-1] + 1]
        off += int(nz[0])
    return u.copy(), off


def _horner(c, x):
    acc = np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    for ci in c[::-1]:
        acc = acc * x + ci
    return acc


polyval = P.polyval


def tree_reduce(x_in, u_in, fomo, shifts_in, cum_in):
    x = np.array(x_in, dtype=np.int64)
    u = np.asarray(u_in, dtype=np.float64)
    shifts = np.asarray(shifts_in, dtype=np.int64)
    cum = np.asarray(cum_in, dtype=np.float64)
    count, w = x.shape
    if u.size != count * (w - 1):
        raise ValueError("need one uniform per internal node")
    pos = 0
    while w > 1:
        half = w // 2
        uu = u[pos: pos + count * half].reshape(count, half)
        a, b = x[:, 0::2], x[:, 1::2]
        eq = a == b
        if fomo:
            left = uu < 0.5
            v = np.where(left, 2.0 * uu, 2.0 * uu - 1.0)
            step = shifts[_pick(cum, v * cum[-1])]
            x = np.where(eq, a, np.where(left, a, b) + step)
        else:
            step = shifts[_pick(cum, uu * cum[-1])]
            x = np.where(eq, a + step, np.where(uu < 0.5, a, b))
        pos += count * half
        w = half
    return x[:, 0].copy()


def _pick(cum, v):
    return np.minimum(np.searchsorted(cum, v, side="right"), cum.size - 1)
