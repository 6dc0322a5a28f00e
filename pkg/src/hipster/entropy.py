"""Closed-form entropy solutions, the entropy-inequality residual and L1 errors.

The two reference solutions (``tau = t + eps``)::

    Burgers  u_t + (q u^2)_x = 0:    u = x / (2 q tau)            on [0, sqrt(4 q tau)]
    PME      v_t = (v^2 / 2)_xx:     v = 3/4 ((2/(9 tau))^(1/3) - 2 x^2 / (9 tau))_+

Both integrate to one in ``x`` at every time. For a constant ``c`` and a
nonnegative test function ``phi`` vanishing at ``t = T`` the residual is::

    int int sgn(u - c) [(u - c) phi_t + (f(u) - f(c) - d_x K(u)) phi_x] dx dt
        + int |u(x, 0) - c| phi(x, 0) dx

which is nonnegative for an entropy solution.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .densities import PiecewisePolynomial, burgers_profile, pme_profile
from .schemes import SchemeState, init_scheme, scheme_run


@dataclass(frozen=True)
class EntropySolution:
    family: str
    eps: float = 0.25
    T: float = 1.0
    q: float = 0.5

    def __post_init__(self):
        if self.family not in ("burgers", "pme"):
            raise ValueError("family must be burgers or pme")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.family == "burgers" and not self.q > 0:
            raise ValueError("q must be positive")

    # fluxes
    def f(self, u):
        return self.q * np.asarray(u) ** 2 if self.family == "burgers" else np.zeros_like(np.asarray(u, dtype=float))

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.T):
            raise ValueError(f"t outside the horizon [0, {self.T}]")
        return t

    def support(self, t: float) -> tuple[float, float]:
        tau = float(t) + self.eps
        if self.family == "burgers":
            return 0.0, math.sqrt(4.0 * self.q * tau)
        e = (4.5 * tau) ** (1.0 / 3.0)
        return -e, e

    def sup(self, t: float = 0.0) -> float:
        """``max_x u(x, t)`` (decreasing in ``t``)."""
        tau = float(t) + self.eps
        if self.family == "burgers":
            return 1.0 / math.sqrt(self.q * tau)
        return 0.75 * (2.0 / (9.0 * tau)) ** (1.0 / 3.0)

    def profile(self, t: float) -> PiecewisePolynomial:
        tau = float(self._check_t(t)) + self.eps
        return burgers_profile(self.q, tau) if self.family == "burgers" else pme_profile(tau)

    def crossings(self, t: float, c: float) -> list[float]:
        """Points where ``u(., t) = c`` inside the support."""
        tau = float(t) + self.eps
        lo, hi = self.support(t)
        if self.family == "burgers":
            x = 2.0 * self.q * tau * c
            return [x] if lo < x < hi else []
        a = (2.0 / (9.0 * tau)) ** (1.0 / 3.0)
        r = (a - 4.0 * c / 3.0) * 4.5 * tau
        if c <= 0 or r <= 0:
            return []
        x = math.sqrt(r)
        return [-x, x] if x < hi else []


def eval_solution(sol: EntropySolution, x, t):
    """``u(x, t)`` and, as a second value, ``d_x u(x, t)`` (one-sided at kinks)."""
    t = sol._check_t(t)
    x = np.asarray(x, dtype=float)
    tau = t + sol.eps
    if sol.family == "burgers":
        edge = np.sqrt(4.0 * sol.q * tau)
        inside = (x >= 0) & (x < edge)
        u = np.where(inside, x / (2.0 * sol.q * tau), 0.0)
        ux = np.where(inside, 1.0 / (2.0 * sol.q * tau), 0.0)
    else:
        raw = 0.75 * ((2.0 / (9.0 * tau)) ** (1.0 / 3.0) - 2.0 * x * x / (9.0 * tau))
        inside = raw > 0
        u = np.where(inside, raw, 0.0)
        ux = np.where(inside, -x / (3.0 * tau), 0.0)
    return u, ux


def solution_value(sol: EntropySolution, x, t):
    return eval_solution(sol, x, t)[0]


# test functions ---------------------------------------------------------------

def _bump(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    d = np.where(inside, 1.0 - s * s, 1.0)
    b = np.where(inside, np.exp(-1.0 / d), 0.0)
    db = np.where(inside, b * (-2.0 * s / (d * d)), 0.0)
    return b, db


@dataclass(frozen=True)
class TestFunction:
    """``amp * b((x - x0)/rx) * b((t - t0)/rt)`` with ``b(s) = exp(-1/(1 - s^2))``."""

    x0: float
    t0: float
    rx: float
    rt: float
    amp: float = 1.0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not (self.rx > 0 and self.rt > 0 and self.amp > 0):
            raise ValueError("radii and amplitude must be positive")

    def fits(self, T: float) -> bool:
        """Compact support inside ``R x [0, T)`` (vanishing at ``t = T``)."""
        return self.t0 + self.rt <= T

    def __call__(self, x, t):
        bx, _ = _bump((np.asarray(x) - self.x0) / self.rx)
        bt, _ = _bump((np.asarray(t) - self.t0) / self.rt)
        return self.amp * bx * bt

    def grad(self, x, t):
        """``(phi_x, phi_t)``."""
        bx, dbx = _bump((np.asarray(x) - self.x0) / self.rx)
        bt, dbt = _bump((np.asarray(t) - self.t0) / self.rt)
        return self.amp * dbx * bt / self.rx, self.amp * bx * dbt / self.rt


# residual -------------------------------------------------------------------------

def _x_nodes(sol, phi, t, c, quad_n):
    """Midpoint nodes and weights on the bump's x-range, split at the support
    edges and the ``u = c`` crossings so that every piece is smooth."""
    a, b = phi.x0 - phi.rx, phi.x0 + phi.rx
    cuts = [a, b] + [x for x in (*sol.support(t), *sol.crossings(t, c)) if a < x < b]
    cuts = np.unique(cuts)
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        h = (hi - lo) / quad_n
        xs.append(lo + (np.arange(quad_n) + 0.5) * h)
        ws.append(np.full(quad_n, h))
    return np.concatenate(xs), np.concatenate(ws)


def _dxK(sol, u, ux):
    return u * ux if sol.family == "pme" else np.zeros_like(u)


def entropy_residual(sol: EntropySolution, phi: TestFunction, c: float, quad_n: int = 512) -> float:
    """Left side of the entropy inequality by composite midpoint quadrature.

    ``quad_n`` midpoints per axis on each smooth piece of the integrand (the
    x-axis is split at support edges and ``u = c`` crossings).
    """
    if not phi.fits(sol.T):
        raise ValueError("test function must vanish at t = T")
    t_lo, t_hi = max(0.0, phi.t0 - phi.rt), min(sol.T, phi.t0 + phi.rt)
    ht = (t_hi - t_lo) / quad_n
    fc = float(sol.f(c))
    total = 0.0
    for t in t_lo + (np.arange(quad_n) + 0.5) * ht:
        x, w = _x_nodes(sol, phi, t, c, quad_n)
        u, ux = eval_solution(sol, x, t)
        px, pt = phi.grad(x, t)
        s = np.sign(u - c)
        integrand = s * ((u - c) * pt + (sol.f(u) - fc - _dxK(sol, u, ux)) * px)
        total += ht * float(np.dot(w, integrand))
    if t_lo == 0.0:
        x, w = _x_nodes(sol, phi, 0.0, c, quad_n)
        u0, _ = eval_solution(sol, x, 0.0)
        total += float(np.dot(w, np.abs(u0 - c) * phi(x, 0.0)))
    return total


def residual_battery(sol: EntropySolution, count: int = 60, quad_n: int = 512, seed: int = 0) -> list[dict]:
    """Residuals for ``count`` (c, phi) pairs.

    The levels ``c`` cycle through 0, a value above ``sup u``, a negative value
    and interior values; the bumps are centred on random points of the
    solution's space-time region, some touching ``t = 0`` and, for Burgers,
    some straddling the moving shock.
    """
    rng = np.random.default_rng(seed)
    top = sol.sup(0.0)
    rows = []
    for i in range(count):
        kind = i % 5
        c = {0: 0.0, 1: top * (1.0 + rng.uniform(0.0, 0.5)), 2: -rng.uniform(0.0, top)}.get(
            kind, rng.uniform(0.05, 0.95) * top)
        rt = rng.uniform(0.05, 0.3) * sol.T
        t0 = rng.uniform(0.0, sol.T - rt)
        lo, hi = sol.support(t0)
        if sol.family == "burgers" and i % 2:
            x0 = hi + rng.uniform(-0.1, 0.1)          # near the shock
        else:
            x0 = rng.uniform(lo - 0.2, hi + 0.2)
        rx = rng.uniform(0.1, 0.6) * (hi - lo)
        phi = TestFunction(x0, t0, rx, rt)
        rows.append({"family": sol.family, "c": c, "x0": x0, "t0": t0, "rx": rx, "rt": rt,
                     "kind": ("zero", "above", "below", "interior", "interior")[kind],
                     "residual": entropy_residual(sol, phi, c, quad_n)})
    return rows


def battery_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "c", "x0", "t0", "residual"])
    for r in rows:
        w.writerow([r["family"], repr(r["c"]), repr(r["x0"]), repr(r["t0"]), repr(r["residual"])])
    return buf.getvalue()


def calibrate_tolerance(sol: EntropySolution, phi: TestFunction, quad_n: int = 64) -> float:
    """Constant ``A`` of the model ``tol(n) = A / n`` from the ``c = 0`` identity case."""
    return abs(entropy_residual(sol, phi, 0.0, quad_n)) * quad_n


# L1 errors --------------------------------------------------------------------------

def _quad_roots(c0, c1, c2, lo, hi):
    """Real roots of ``c0 + c1 x + c2 x^2`` strictly inside ``(lo, hi)`` (NaN if absent)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = c1 * c1 - 4.0 * c2 * c0
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        quad = c2 != 0
        r1 = np.where(quad, (-c1 - sq) / (2.0 * c2), np.where(c1 != 0, -c0 / c1, np.nan))
        r2 = np.where(quad, (-c1 + sq) / (2.0 * c2), np.nan)
    r = np.sort(np.stack([r1, r2]), axis=0)
    r = np.where((r > lo) & (r < hi), r, np.nan)
    return r


def l1_constant_vs_poly(edges, values, rho: PiecewisePolynomial, window) -> float:
    """``int_window |U - rho|`` where ``U = values[i]`` on ``[edges[i], edges[i+1])``
    and zero outside; exact for ``rho`` of degree <= 2."""
    xa, xb = map(float, window)
    edges = np.asarray(edges, dtype=float)
    values = np.asarray(values, dtype=float)
    pts = np.concatenate([edges, rho.breaks, [xa, xb]])
    pts = np.unique(np.clip(pts, xa, xb))
    lo, hi = pts[:-1], pts[1:]
    mid = 0.5 * (lo + hi)
    cell = np.searchsorted(edges, mid, side="right") - 1
    inside = (cell >= 0) & (cell < len(values))
    U = np.where(inside, values[np.clip(cell, 0, len(values) - 1)], 0.0)
    coef = np.zeros((3, mid.size))
    piece = np.searchsorted(np.asarray(rho.breaks), mid, side="right") - 1
    for k, cf in enumerate(rho.pieces):
        if len(cf) > 3:
            raise ValueError("density pieces must have degree <= 2")
        m = piece == k
        for d, v in enumerate(cf):
            coef[d, m] = v
    coef[0] -= U
    roots = _quad_roots(coef[0], coef[1], coef[2], lo, hi)
    G = lambda x: coef[0] * x + coef[1] * x * x / 2.0 + coef[2] * x ** 3 / 3.0
    # missing roots collapse to zero-length pieces
    b1 = np.where(np.isnan(roots[0]), lo, roots[0])
    b2 = np.where(np.isnan(roots[1]), b1, roots[1])
    bounds = [lo, b1, b2, hi]
    total = 0.0
    for s, e in zip(bounds[:-1], bounds[1:]):
        total += float(np.abs(G(e) - G(s)).sum())
    return total


def scheme_l1_at(state: SchemeState, sol: EntropySolution, t: float, window) -> float:
    edges = (np.arange(state.offset, state.offset + len(state.cells) + 1)) * state.dx
    return l1_constant_vs_poly(edges, state.cells, sol.profile(t), window)


def cell_average_l1(sol: EntropySolution, t: float, M: int, window) -> float:
    """``int |P_M u - u|`` for the cell-average projection ``P_M`` at mesh ``1/M``."""
    j0, masses = sol.profile(t).cell_integrals(M)
    edges = np.arange(j0, j0 + len(masses) + 1) / M
    return l1_constant_vs_poly(edges, masses * M, sol.profile(t), window)


def l1_error(sol: EntropySolution, M: int, window, t_window, t_nodes: int = 32) -> float:
    """``int_{t_window} int_{window} |u^M - u| dx dt``.

    ``u^M`` is the preset scheme at mesh ``1/M`` started from the cell
    averages of ``u(., 0)``, read as piecewise constant in ``x`` and in ``t``.
    The x-integral is exact; the t-integral uses ``t_nodes`` midpoints.
    """
    ta, tb = map(float, t_window)
    if not 0.0 <= ta < tb <= sol.T:
        raise ValueError("time window must lie within the horizon")
    state, flux = init_scheme(sol.profile(0.0), M, sol.family, sol.q)
    h = (tb - ta) / t_nodes
    total = 0.0
    for t in ta + (np.arange(t_nodes) + 0.5) * h:
        n = int(math.floor(t / state.dt))
        state = scheme_run(state, flux, n - state.n)
        total += h * scheme_l1_at(state, sol, t, window)
    return total


def convergence_table(sol: EntropySolution, Ms, window, t_window, t_nodes: int = 32) -> list[tuple]:
    return [(M, l1_error(sol, M, window, t_window, t_nodes)) for M in Ms]
