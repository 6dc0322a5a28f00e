"""Explicit finite-difference schemes for 1-d convection-diffusion equations.

For ``u_t + f(u)_x = K(u)_xx`` the scheme is::

    U'_j = U_j - (dt/dx) (f(U_j) - f(U_{j-1}))
               + (dt/dx^2) (K(U_{j+1}) - 2 K(U_j) + K(U_{j-1}))

Fluxes are polynomials given by power-basis coefficients. With ``dx = 1/M``
the Burgers preset (``f = q u^2``, ``dt = 1/M^2``) and the porous-medium
preset (``K = u^2/2``, ``dt = 1/M^3``) reproduce, after dividing by ``M``, the
distribution recurrences of the lazy and symmetric hipster walks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as P

from . import kernels
from .densities import PiecewisePolynomial
from .dist import Pmf, pmf_from_density
from .evolution import evolve_sym, evolve_tal


@dataclass(frozen=True)
class FluxPair:
    """Convection flux ``f`` and diffusion flux ``K`` as coefficient tuples."""

    f: tuple = (0.0,)
    K: tuple = (0.0,)
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(float(c) for c in self.f) or (0.0,))
        object.__setattr__(self, "K", tuple(float(c) for c in self.K) or (0.0,))

    @classmethod
    def burgers(cls, q: float) -> "FluxPair":
        if not q > 0:
            raise ValueError("q must be positive")
        return cls((0.0, 0.0, q), (0.0,), "burgers", {"q": q})

    @classmethod
    def pme(cls) -> "FluxPair":
        return cls((0.0,), (0.0, 0.0, 0.5), "pme", {})

    def f_at(self, u):
        return P.polyval(u, self.f)

    def K_at(self, u):
        return P.polyval(u, self.K)

    def K_nonnegative_on(self, lo: float, hi: float) -> bool:
        return _poly_min(np.array(self.K), lo, hi)[0] >= 0.0


@dataclass(frozen=True)
class SchemeState:
    dx: float
    dt: float
    offset: int
    cells: np.ndarray
    n: int = 0

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError("dx and dt must be positive")
        c = np.array(self.cells, dtype=float, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @property
    def lam1(self) -> float:
        return self.dt / self.dx

    @property
    def lam2(self) -> float:
        return self.dt / (self.dx * self.dx)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.cells))

    def mass(self) -> float:
        """Discrete mass ``sum_j U_j dx``."""
        return float(self.cells.sum()) * self.dx

    def dense(self, lo: int, hi: int) -> np.ndarray:
        out = np.zeros(hi - lo + 1)
        a, b = self.offset, self.offset + len(self.cells) - 1
        s, e = max(a, lo), min(b, hi)
        if s <= e:
            out[s - lo: e - lo + 1] = self.cells[s - a: e - a + 1]
        return out

    def to_csv(self) -> str:
        lines = ["j,u"] + [f"{int(j)},{float(u)!r}" for j, u in zip(self.indices, self.cells)]
        return "\n".join(lines) + "\n"


# presets -------------------------------------------------------------------

def preset_mesh(preset: str, M: int) -> tuple[Fraction, Fraction]:
    """``(dx, dt)`` of a preset as exact fractions."""
    if M <= 0:
        raise ValueError("M must be positive")
    if preset == "burgers":
        return Fraction(1, M), Fraction(1, M * M)
    if preset == "pme":
        return Fraction(1, M), Fraction(1, M ** 3)
    raise ValueError(f"unknown preset {preset!r}")


def assert_preset_matches_recurrence(flux: FluxPair, M: int):
    """Check, in exact arithmetic, that the preset scheme for ``U = M p`` is the
    walk recurrence: Burgers needs ``(dt/dx) q M = q``, PME ``(dt/dx^2) M / 2 = 1/2``."""
    dx, dt = preset_mesh(flux.name, M)
    if flux.name == "burgers":
        q = Fraction(flux.params["q"])
        ok = flux.K == (0.0,) and len(flux.f) == 3 and flux.f[:2] == (0.0, 0.0) \
            and Fraction(flux.f[2]) == q and (dt / dx) * q * M == q
    else:
        ok = flux.f == (0.0,) and flux.K == (0.0, 0.0, 0.5) \
            and (dt / dx ** 2) * Fraction(1, 2) * M == Fraction(1, 2)
    if not ok:
        raise AssertionError(f"{flux.name} preset does not reproduce the walk recurrence at M={M}")


def init_scheme(u0: PiecewisePolynomial, M: int, preset: str, q: float = 0.5) -> tuple[SchemeState, FluxPair]:
    """Cell averages of ``u0`` on the preset mesh, plus the preset flux pair."""
    dx, dt = preset_mesh(preset, M)
    flux = FluxPair.burgers(q) if preset == "burgers" else FluxPair.pme()
    assert_preset_matches_recurrence(flux, M)
    j0, masses = u0.cell_integrals(M)
    state = SchemeState(float(dx), float(dt), j0, masses * M)
    return state, flux


# stepping --------------------------------------------------------------------

def scheme_run(s: SchemeState, flux: FluxPair, n: int) -> SchemeState:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return s
    cells, off = kernels.scheme_run(s.cells, s.offset, np.array(flux.f), np.array(flux.K),
                                    s.lam1, s.lam2, int(n))
    return replace(s, offset=int(off), cells=cells, n=s.n + n)


def scheme_step(s: SchemeState, flux: FluxPair) -> SchemeState:
    return scheme_run(s, flux, 1)


# monotonicity ----------------------------------------------------------------

@dataclass
class MonotonicityReport:
    lo: float
    hi: float
    verdict: bool
    witness: tuple | None = None
    closed_form_threshold: float | None = None
    within_threshold: bool | None = None
    minima: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"interval": [self.lo, self.hi], "verdict": self.verdict,
                "witness": list(self.witness) if self.witness else None,
                "closed_form_threshold": self.closed_form_threshold,
                "within_threshold": self.within_threshold, "minima": self.minima}


def _poly_min(c: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    """Exact minimum of a polynomial on ``[lo, hi]``: ``(value, argmin)``."""
    cand = [lo, hi]
    d = P.polyder(c) if len(c) > 1 else np.zeros(1)
    if np.any(d != 0):
        for r in P.polyroots(d) if len(d) > 1 else []:
            if abs(r.imag) < 1e-12 and lo <= r.real <= hi:
                cand.append(float(r.real))
    vals = [float(P.polyval(x, c)) for x in cand]
    i = int(np.argmin(vals))
    return vals[i], cand[i]


def closed_form_threshold(flux: FluxPair, dx: float, dt: float) -> float | None:
    """Largest ``h`` with the scheme monotone on ``[0, h]``, for ``f = a u^2``,
    ``K = b u^2`` (``a, b >= 0``): the only binding partial is
    ``dS/du = 1 - 2 a u dt/dx - 4 b u dt/dx^2``."""
    f = list(flux.f) + [0.0] * (3 - len(flux.f))
    K = list(flux.K) + [0.0] * (3 - len(flux.K))
    if len(f) > 3 or len(K) > 3 or any(f[:2]) or any(K[:2]) or f[2] < 0 or K[2] < 0:
        return None
    rate = 2.0 * f[2] * dt / dx + 4.0 * K[2] * dt / dx ** 2
    return float("inf") if rate == 0 else 1.0 / rate


def monotone_check(flux: FluxPair, dx: float, dt: float, interval, grid: int | None = None,
                   tol: float = 0.0) -> MonotonicityReport:
    """Is ``S(u-, u, u+)`` nondecreasing in each argument on ``interval**3``?

    For polynomial fluxes each partial derivative depends on one argument
    only, so its minimum over the interval is found exactly. ``grid`` switches
    to the sampled check (finite differences on a ``grid**3`` lattice).
    """
    lo, hi = map(float, interval)
    if not lo <= hi:
        raise ValueError("empty interval")
    if grid is not None:
        S = lambda a, b, c: b - dt / dx * (flux.f_at(b) - flux.f_at(a)) \
            + dt / dx ** 2 * (flux.K_at(c) - 2 * flux.K_at(b) + flux.K_at(a))
        report = monotone_check_sampled(S, (lo, hi), grid, tol)
    else:
        l1, l2 = dt / dx, dt / dx ** 2
        fp = P.polyder(np.array(flux.f)) if len(flux.f) > 1 else np.zeros(1)
        kp = P.polyder(np.array(flux.K)) if len(flux.K) > 1 else np.zeros(1)
        d_minus = P.polyadd(l1 * fp, l2 * kp)
        d_center = P.polysub(np.array([1.0]), P.polyadd(l1 * fp, 2.0 * l2 * kp))
        d_plus = l2 * kp
        minima, witness = {}, None
        for name, c in (("u_minus", d_minus), ("u", d_center), ("u_plus", d_plus)):
            v, x = _poly_min(np.atleast_1d(c), lo, hi)
            minima[name] = v
            if v < -tol and witness is None:
                witness = {"u_minus": (x, lo, lo), "u": (lo, x, lo), "u_plus": (lo, lo, x)}[name]
        report = MonotonicityReport(lo, hi, witness is None, witness, minima=minima)
    h = closed_form_threshold(flux, dx, dt)
    if h is not None:
        report.closed_form_threshold = h
        report.within_threshold = lo >= 0.0 and hi <= h
    return report


def monotone_check_sampled(S, interval, grid: int = 21, tol: float = 0.0) -> MonotonicityReport:
    """Sampled check for any callable ``S``: forward differences along each axis."""
    lo, hi = map(float, interval)
    xs = np.linspace(lo, hi, grid)
    a, b, c = np.meshgrid(xs, xs, xs, indexing="ij")
    vals = S(a, b, c)
    minima, witness = {}, None
    for axis, name in enumerate(("u_minus", "u", "u_plus")):
        d = np.diff(vals, axis=axis)
        minima[name] = float(d.min())
        if minima[name] < -tol and witness is None:
            idx = np.unravel_index(int(np.argmin(d)), d.shape)
            witness = (float(a[idx]), float(b[idx]), float(c[idx]))
    return MonotonicityReport(lo, hi, witness is None, witness, minima=minima)


# identity with the walk laws ---------------------------------------------------

def verify_scheme_pmf_identity(flavor: str, rho: PiecewisePolynomial, M: int, n_max: int,
                               q: float = 0.5, stride: int = 1) -> float:
    """``max_{n <= n_max, j} |U^n_j - M p^n_j|`` for the matching preset.

    ``flavor`` is ``tal`` (Burgers preset, lazy walk) or ``sym`` (PME preset,
    symmetric walk). Depths are compared every ``stride`` steps and at ``n_max``.
    """
    if flavor not in ("tal", "sym"):
        raise ValueError("flavor must be tal or sym")
    state, flux = init_scheme(rho, M, "burgers" if flavor == "tal" else "pme", q)
    law = pmf_from_density(rho, M)
    dev = _deviation(state, law, M)
    done = 0
    while done < n_max:
        k = min(stride, n_max - done)
        state = scheme_run(state, flux, k)
        law = evolve_tal(law, q, k) if flavor == "tal" else evolve_sym(law, k)
        done += k
        dev = max(dev, _deviation(state, law, M))
    return dev


def _deviation(state: SchemeState, law: Pmf, M: int) -> float:
    lo = min(state.offset, law.offset)
    hi = max(state.offset + len(state.cells), law.offset + len(law.weights)) - 1
    return float(np.max(np.abs(state.dense(lo, hi) - M * law.dense(lo, hi))))


def run_manifest(flux: FluxPair, M: int, start: SchemeState, end: SchemeState) -> dict:
    return {"preset": flux.name, "params": flux.params, "M": M, "n": end.n,
            "dx": end.dx, "dt": end.dt, "mass_start": start.mass(), "mass_end": end.mass(),
            "mass_drift": abs(end.mass() - start.mass())}


def write_state(path: str, state: SchemeState, manifest: dict | None = None):
    with open(path, "w") as fh:
        fh.write(state.to_csv())
    if manifest is not None:
        with open(path.rsplit(".", 1)[0] + ".json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
