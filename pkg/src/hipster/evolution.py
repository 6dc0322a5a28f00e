"""Exact evolution of the root law of hipster / fomo tree recursions.

Under i.i.d. leaf inputs the two children of the root are independent copies
of the depth-``n`` output, so the law after ``n + 1`` levels is a quadratic
function of the law after ``n``. For a hipster walk with step law ``c``::

    r'_k = r_k (1 - r_k) + sum_i c_i r_{k-i}^2

(unequal children: a fair coin picks one of them; equal children: the common
value takes a step). For the fomo walk the roles are swapped::

    r'_k = r_k^2 + sum_i c_i r_{k-i} (1 - r_{k-i})

These product forms are used instead of the rearranged difference forms so
that nonnegativity holds exactly in floating point.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dist import TRIM_THRESHOLD, AffineMap, ContinuousLaw, Pmf, kolmogorov_distance, \
    mixture_kolmogorov_distance

MAX_STEP = 64


@dataclass(frozen=True)
class StepDistribution:
    """Law of the integer step taken by a walker."""

    atoms: dict

    def __post_init__(self):
        atoms = {int(i): float(c) for i, c in self.atoms.items() if float(c) != 0.0}
        if not atoms:
            raise ValueError("step distribution has no atoms")
        if any(c < 0 for c in atoms.values()):
            raise ValueError("step probabilities must be nonnegative")
        if abs(sum(atoms.values()) - 1.0) > 1e-12:
            raise ValueError("step probabilities must sum to 1")
        if any(abs(i) > MAX_STEP for i in atoms):
            raise ValueError(f"steps are limited to |i| <= {MAX_STEP}")
        object.__setattr__(self, "atoms", dict(sorted(atoms.items())))

    @classmethod
    def lazy(cls, q: float) -> "StepDistribution":
        """Bernoulli(q) steps of the totally asymmetric q-lazy walk."""
        if not 0.0 < q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        return cls({0: 1.0 - q, 1: q})

    @classmethod
    def symmetric(cls) -> "StepDistribution":
        return cls({-1: 0.5, 1: 0.5})

    @property
    def shifts(self) -> np.ndarray:
        return np.fromiter(self.atoms.keys(), dtype=np.int64)

    @property
    def coefs(self) -> np.ndarray:
        return np.fromiter(self.atoms.values(), dtype=float)

    def mean(self) -> float:
        return sum(i * c for i, c in self.atoms.items())


FLAVORS = ("tal", "sym", "general", "fomo")


@dataclass(frozen=True)
class EvolutionConfig:
    flavor: str
    n: int = 0
    q: float = 0.5
    steps: StepDistribution | None = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.flavor == "tal" and not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if self.flavor == "general" and self.steps is None:
            raise ValueError("general flavor needs a step distribution")

    @property
    def step_distribution(self) -> StepDistribution:
        if self.flavor == "tal":
            return StepDistribution.lazy(self.q)
        if self.flavor == "sym":
            return StepDistribution.symmetric()
        return self.steps or StepDistribution.symmetric()

    @property
    def fomo(self) -> bool:
        return self.flavor == "fomo"

    @classmethod
    def from_json(cls, text: str) -> "EvolutionConfig":
        d = json.loads(text) if isinstance(text, str) else dict(text)
        steps = d.get("steps")
        if steps is not None:
            steps = StepDistribution({int(k): v for k, v in steps.items()})
        return cls(d["flavor"], int(d.get("n", 0)), float(d.get("q", 0.5)), steps)


def _run(p: Pmf, steps: StepDistribution, n: int, fomo: bool, threshold: float) -> Pmf:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return p
    # a single atom summed from rounded parts can exceed 1 by an ulp,
    # which would make p (1 - p) negative
    w0 = np.minimum(p.weights, 1.0)
    w, off, dropped, min_w = kernels.evolve(
        w0, p.offset, steps.shifts, steps.coefs, int(n), bool(fomo), float(threshold))
    if min_w < 0.0:
        raise ArithmeticError(f"negative weight {min_w} produced during evolution")
    return Pmf(off, w, p.truncated_mass + dropped)


def evolve_general(p: Pmf, steps: StepDistribution, n: int, threshold: float = TRIM_THRESHOLD) -> Pmf:
    """Law of the depth-``n`` hipster walk with step law ``steps`` on i.i.d. ``p`` inputs."""
    return _run(p, steps, n, False, threshold)


def evolve_tal(p: Pmf, q: float, n: int, threshold: float = TRIM_THRESHOLD) -> Pmf:
    return evolve_general(p, StepDistribution.lazy(q), n, threshold)


def evolve_sym(p: Pmf, n: int, threshold: float = TRIM_THRESHOLD) -> Pmf:
    return evolve_general(p, StepDistribution.symmetric(), n, threshold)


def evolve_fomo(p: Pmf, n: int, steps: StepDistribution | None = None,
                threshold: float = TRIM_THRESHOLD) -> Pmf:
    """Fomo walk: equal children stay, unequal children pick one and step."""
    return _run(p, steps or StepDistribution.symmetric(), n, True, threshold)


def evolve(p: Pmf, config: EvolutionConfig, threshold: float = TRIM_THRESHOLD) -> Pmf:
    return _run(p, config.step_distribution, config.n, config.fomo, threshold)


def evolve_checkpoints(p: Pmf, config: EvolutionConfig, checkpoints, threshold: float = TRIM_THRESHOLD):
    """Yield ``(n, law)`` at each checkpoint depth (sorted ascending)."""
    current, depth = p, 0
    for n in sorted(set(int(c) for c in checkpoints)):
        current = _run(current, config.step_distribution, n - depth, config.fomo, threshold)
        depth = n
        yield n, current


def mass_defect(p: Pmf) -> float:
    """``|sum(weights) + truncated_mass - 1|``."""
    return abs(p.mass + p.truncated_mass - 1.0)


# scaling limits ---------------------------------------------------------------

def limit_scaling(flavor: str, n: int, q: float = 0.5) -> tuple[AffineMap, ContinuousLaw]:
    """Position map and limit law for the depth-``n`` output.

    ``tal``: ``B_n / sqrt(4 q n)`` against Beta(2,1);
    ``sym``: ``(36 n)^(-1/3) G_n + 1/2`` against Beta(2,2).
    """
    if n <= 0:
        raise ValueError("scaling needs n >= 1")
    if flavor == "tal":
        return AffineMap(1.0 / math.sqrt(4.0 * q * n), 0.0), ContinuousLaw.beta21()
    if flavor == "sym":
        return AffineMap((36.0 * n) ** (-1.0 / 3.0), 0.5), ContinuousLaw.beta22()
    raise ValueError("limit theorems are stated for the tal and sym flavors only")


def ks_to_limit(p: Pmf, flavor: str, n: int, q: float = 0.5) -> float:
    pos, law = limit_scaling(flavor, n, q)
    return kolmogorov_distance(p, pos, law)


def ks_trajectory(p: Pmf, config: EvolutionConfig, checkpoints, threshold: float = TRIM_THRESHOLD):
    """Rows ``(n, ks, scale)`` of the rescaled law against its Beta limit."""
    rows = []
    for n, law in evolve_checkpoints(p, config, [c for c in checkpoints if c > 0], threshold):
        pos, limit = limit_scaling(config.flavor, n, config.q)
        rows.append((n, kolmogorov_distance(law, pos, limit), pos.scale))
    return rows, law if rows else p


def dyadic_checkpoints(n: int, start: int = 16) -> list[int]:
    out, c = [], start
    while c < n:
        out.append(c)
        c *= 2
    out.append(n)
    return out


# time averaging ---------------------------------------------------------------

@dataclass
class TimeAveragedLaw:
    """Law of the depth-``floor(W M^k)`` output for ``W ~ Uniform[lo, hi]``.

    ``components`` holds ``(depth, weight, law, t_lo, t_hi)`` where
    ``[t_lo, t_hi]`` is the set of ``W`` values mapped to ``depth``.
    """

    flavor: str
    M: int
    exponent: int
    lo: float
    hi: float
    components: list = field(default_factory=list)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c[1] for c in self.components])

    @property
    def depths(self) -> list[int]:
        return [c[0] for c in self.components]


def time_averaged_law(p0: Pmf, flavor: str, M: int, lo: float, hi: float, q: float = 0.5,
                      threshold: float = TRIM_THRESHOLD) -> TimeAveragedLaw:
    if not 0.0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    if M < 1:
        raise ValueError("M must be >= 1")
    if flavor == "tal":
        k, steps = 2, StepDistribution.lazy(q)
    elif flavor == "sym":
        k, steps = 3, StepDistribution.symmetric()
    else:
        raise ValueError("time averaging is defined for tal and sym")
    scale = float(M) ** k
    first, last = math.floor(lo * scale), math.floor(hi * scale)
    pieces = []
    for n in range(first, last + 1):
        t_lo = max(lo, n / scale)
        t_hi = min(hi, (n + 1) / scale)
        if t_hi > t_lo:
            pieces.append((n, (t_hi - t_lo) / (hi - lo), t_lo, t_hi))
    if not pieces:
        raise ValueError("empty depth range")
    out = TimeAveragedLaw(flavor, M, k, lo, hi)
    law, depth = p0, 0
    for n, weight, t_lo, t_hi in pieces:
        law = _run(law, steps, n - depth, False, threshold)
        depth = n
        out.components.append((n, weight, law, t_lo, t_hi))
    return out


def time_averaged_ks(mix: TimeAveragedLaw, eps: float, q: float = 0.5, subdivisions: int = 32) -> float:
    """KS distance of the time-averaged, time-dependently rescaled output to its Beta limit.

    TAL: ``B / (sqrt(4 q (W + eps)) M)`` vs Beta(2,1); symmetric:
    ``G / ((36 (W + eps))^(1/3) M) + 1/2`` vs Beta(2,2). The ``W`` integral within
    each depth block uses a midpoint rule with ``subdivisions`` nodes.
    """
    comps = []
    for _, weight, law, t_lo, t_hi in mix.components:
        ts = t_lo + (np.arange(subdivisions) + 0.5) * (t_hi - t_lo) / subdivisions
        for t in ts:
            if mix.flavor == "tal":
                pos = AffineMap(1.0 / (math.sqrt(4.0 * q * (t + eps)) * mix.M), 0.0)
            else:
                pos = AffineMap(1.0 / ((36.0 * (t + eps)) ** (1.0 / 3.0) * mix.M), 0.5)
            comps.append((weight / subdivisions, law, pos))
    limit = ContinuousLaw.beta21() if mix.flavor == "tal" else ContinuousLaw.beta22()
    return mixture_kolmogorov_distance(comps, limit)
