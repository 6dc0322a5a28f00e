"""Piecewise-polynomial densities with closed-form cell integrals.

Every density used in the package (uniform blocks, the Beta(2,1)/Beta(2,2)
laws and the Burgers / porous-medium profiles) is a polynomial on finitely
many intervals, so integrals over cells are evaluated from antiderivatives
rather than by quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Function equal to ``pieces[i]`` (power-basis coefficients in ``x``) on
    ``[breaks[i], breaks[i+1])`` and zero outside ``[breaks[0], breaks[-1])``."""

    breaks: tuple
    pieces: tuple
    name: str = "piecewise"

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        pieces = tuple(np.asarray(c, dtype=float) for c in self.pieces)
        if len(breaks) != len(pieces) + 1:
            raise ValueError("need len(breaks) == len(pieces) + 1")
        if not all(math.isfinite(b) for b in breaks):
            raise ValueError("density must have bounded support")
        if any(b1 <= b0 for b0, b1 in zip(breaks, breaks[1:])):
            raise ValueError("breaks must be strictly increasing")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "_anti", tuple(P.polyint(c) for c in pieces))

    @property
    def support(self) -> tuple[float, float]:
        return self.breaks[0], self.breaks[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for (a, b), c in zip(zip(self.breaks, self.breaks[1:]), self.pieces):
            m = (x >= a) & (x < b)
            out[m] = P.polyval(x[m], c)
        return out

    def integral(self, a, b):
        """Exact integral over ``[a, b]`` (vectorised over ``a`` and ``b``)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        total = np.zeros(np.broadcast(a, b).shape)
        for (lo, hi), F in zip(zip(self.breaks, self.breaks[1:]), self._anti):
            x0 = np.clip(a, lo, hi)
            x1 = np.clip(b, lo, hi)
            total = total + np.where(x1 > x0, P.polyval(x1, F) - P.polyval(x0, F), 0.0)
        return total

    def total_mass(self) -> float:
        return float(self.integral(*self.support))

    def cell_integrals(self, M: float):
        """Return ``(j0, masses)`` with ``masses[i] = ∫_{(j0+i)/M}^{(j0+i+1)/M}``."""
        if not M > 0:
            raise ValueError("mesh M must be positive")
        lo, hi = self.support
        j0 = math.floor(lo * M)
        j1 = math.ceil(hi * M)
        j = np.arange(j0, max(j1, j0 + 1))
        masses = self.integral(j / M, (j + 1) / M)
        return j0, np.maximum(masses, 0.0)

    def derivative(self) -> "PiecewisePolynomial":
        return PiecewisePolynomial(
            self.breaks, tuple(P.polyder(c) if len(c) > 1 else np.zeros(1) for c in self.pieces),
            name=f"d/dx {self.name}",
        )


def uniform(a: float = 0.0, b: float = 1.0) -> PiecewisePolynomial:
    return PiecewisePolynomial((a, b), ([1.0 / (b - a)],), name=f"uniform[{a},{b})")


def beta21() -> PiecewisePolynomial:
    return PiecewisePolynomial((0.0, 1.0), ([0.0, 2.0],), name="beta(2,1)")


def beta22() -> PiecewisePolynomial:
    return PiecewisePolynomial((0.0, 1.0), ([0.0, 6.0, -6.0],), name="beta(2,2)")


def burgers_profile(q: float, tau: float) -> PiecewisePolynomial:
    """``x / (2 q tau)`` on ``[0, sqrt(4 q tau)]``: the Burgers rarefaction at time ``tau``."""
    if not (q > 0 and tau > 0):
        raise ValueError("q and tau must be positive")
    edge = math.sqrt(4.0 * q * tau)
    return PiecewisePolynomial((0.0, edge), ([0.0, 1.0 / (2.0 * q * tau)],),
                               name=f"burgers(q={q},tau={tau})")


def pme_profile(tau: float) -> PiecewisePolynomial:
    """Barenblatt profile ``3/4 ((2/(9 tau))^(1/3) - 2 x^2 / (9 tau))`` on its support."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    edge = (4.5 * tau) ** (1.0 / 3.0)
    height = 0.75 * (2.0 / (9.0 * tau)) ** (1.0 / 3.0)
    return PiecewisePolynomial((-edge, edge), ([height, 0.0, -0.75 * 2.0 / (9.0 * tau)],),
                               name=f"pme(tau={tau})")
