"""Integer-supported distributions and distances to continuous laws."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .densities import PiecewisePolynomial, beta21, beta22, burgers_profile, pme_profile

MASS_TOL = 1e-9
TRIM_THRESHOLD = 1e-30


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on ``offset, offset+1, ...``.

    Stored as a dense weight array. Zero weights at either end are stripped
    on construction, so the first and last stored weights are positive.
    Mass removed by tail trimming is kept in ``truncated_mass``.
    """

    offset: int
    weights: np.ndarray
    truncated_mass: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True).ravel()
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        nz = np.flatnonzero(w)
        if nz.size == 0:
            raise ValueError("empty Pmf")
        offset = int(self.offset) + int(nz[0])
        w = w[nz[0]: nz[-1] + 1]
        w.setflags(write=False)
        total = float(w.sum()) + float(self.truncated_mass)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"mass {total!r} is not 1")
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "truncated_mass", float(self.truncated_mass))

    @classmethod
    def delta(cls, j: int = 0) -> "Pmf":
        return cls(j, [1.0])

    @classmethod
    def from_dict(cls, atoms: dict) -> "Pmf":
        if not atoms:
            raise ValueError("empty Pmf")
        lo, hi = min(atoms), max(atoms)
        w = np.zeros(hi - lo + 1)
        for j, p in atoms.items():
            w[j - lo] += p
        return cls(lo, w)

    @property
    def support(self) -> tuple[int, int]:
        """Inclusive index range of stored atoms."""
        return self.offset, self.offset + len(self.weights) - 1

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.weights))

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __getitem__(self, j: int) -> float:
        i = j - self.offset
        if 0 <= i < len(self.weights):
            return float(self.weights[i])
        return 0.0

    def to_dict(self) -> dict:
        return {int(j): float(w) for j, w in zip(self.values, self.weights) if w != 0.0}

    def mean(self) -> float:
        return float(np.dot(self.values, self.weights) / self.mass)

    def shifted(self, k: int) -> "Pmf":
        return Pmf(self.offset + k, self.weights, self.truncated_mass)

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Weights on ``lo..hi`` inclusive, zero-filled."""
        out = np.zeros(hi - lo + 1)
        a, b = self.support
        s, e = max(a, lo), min(b, hi)
        if s <= e:
            out[s - lo: e - lo + 1] = self.weights[s - a: e - a + 1]
        return out

    # serialization -------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps({
            "offset": self.offset,
            "weights": [float(x) for x in self.weights],
            "truncated_mass": self.truncated_mass,
        })

    @classmethod
    def from_json(cls, text: str) -> "Pmf":
        d = json.loads(text)
        return cls(int(d["offset"]), d["weights"], float(d.get("truncated_mass", 0.0)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["j", "weight"])
        for j, w in zip(self.values, self.weights):
            writer.writerow([int(j), repr(float(w))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, truncated_mass: float = 0.0) -> "Pmf":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty Pmf")
        return _from_rows(rows, truncated_mass)


def _from_rows(rows, truncated_mass):
    js = [int(r["j"]) for r in rows]
    lo = min(js)
    w = np.zeros(max(js) - lo + 1)
    for r, j in zip(rows, js):
        w[j - lo] = float(r["weight"])
    return Pmf(lo, w, truncated_mass)


def trim(weights: np.ndarray, offset: int, threshold: float = TRIM_THRESHOLD):
    """Drop end atoms below ``threshold``; return ``(weights, offset, dropped_mass)``."""
    above = np.flatnonzero(weights >= threshold)
    if above.size == 0:
        raise ValueError("every atom is below the trimming threshold")
    a, b = above[0], above[-1] + 1
    dropped = float(weights[:a].sum() + weights[b:].sum())
    return weights[a:b], offset + int(a), dropped


# continuous laws ------------------------------------------------------------

@dataclass(frozen=True)
class AffineMap:
    """``x -> scale * x + shift``."""

    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def __call__(self, x):
        return self.scale * np.asarray(x, dtype=float) + self.shift

    def inverse(self, y):
        return (np.asarray(y, dtype=float) - self.shift) / self.scale


@dataclass(frozen=True)
class ContinuousLaw:
    """One of the four built-in laws, pushed through an affine map."""

    family: str
    params: dict = field(default_factory=dict)
    map: AffineMap = field(default_factory=AffineMap)

    FAMILIES = ("beta21", "beta22", "burgers", "pme")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    @classmethod
    def beta21(cls, scale: float = 1.0, shift: float = 0.0) -> "ContinuousLaw":
        return cls("beta21", {}, AffineMap(scale, shift))

    @classmethod
    def beta22(cls, scale: float = 1.0, shift: float = 0.0) -> "ContinuousLaw":
        return cls("beta22", {}, AffineMap(scale, shift))

    @classmethod
    def burgers(cls, q: float, tau: float, scale: float = 1.0, shift: float = 0.0):
        return cls("burgers", {"q": q, "tau": tau}, AffineMap(scale, shift))

    @classmethod
    def pme(cls, tau: float, scale: float = 1.0, shift: float = 0.0):
        return cls("pme", {"tau": tau}, AffineMap(scale, shift))

    def density(self) -> PiecewisePolynomial:
        """Density of the canonical (un-mapped) variable."""
        if self.family == "beta21":
            return beta21()
        if self.family == "beta22":
            return beta22()
        if self.family == "burgers":
            return burgers_profile(self.params["q"], self.params["tau"])
        return pme_profile(self.params["tau"])


def cdf(law: ContinuousLaw, x):
    z = law.map.inverse(x)
    if law.family == "beta21":
        c = np.clip(z, 0.0, 1.0)
        out = c * c
    elif law.family == "beta22":
        c = np.clip(z, 0.0, 1.0)
        out = 3.0 * c * c - 2.0 * c ** 3
    else:
        dens = law.density()
        out = dens.integral(np.full_like(z, dens.support[0]), z)
        out = np.clip(out, 0.0, 1.0)
    return out if np.ndim(out) else float(out)


def pmf_from_density(rho: PiecewisePolynomial, M: float) -> Pmf:
    """Discretize ``rho`` at mesh ``1/M``: atom ``j`` gets ``∫_{j/M}^{(j+1)/M} rho``."""
    if not M > 0:
        raise ValueError("mesh M must be positive")
    total = rho.total_mass()
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"density integrates to {total}, not 1")
    j0, masses = rho.cell_integrals(M)
    return Pmf(j0, masses)


def kolmogorov_distance(p: Pmf, pos: AffineMap, law: ContinuousLaw) -> float:
    """Sup distance between the CDF of ``pos(J)``, ``J ~ p``, and ``law``'s CDF.

    The continuous CDF is compared with both one-sided limits of the step
    CDF at every atom, which is where the supremum is attained.
    """
    if len(p.weights) == 0:
        raise ValueError("empty Pmf")
    x = pos(p.values)
    F = np.asarray(cdf(law, x), dtype=float)
    right = np.cumsum(p.weights)
    left = right - p.weights
    d = max(float(np.max(np.abs(F - left))), float(np.max(np.abs(F - right))))
    return min(max(d, 0.0), 1.0)


def total_variation(p: Pmf, r: Pmf) -> float:
    lo = min(p.support[0], r.support[0])
    hi = max(p.support[1], r.support[1])
    return 0.5 * float(np.abs(p.dense(lo, hi) - r.dense(lo, hi)).sum())


def empirical_pmf(values) -> Pmf:
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        raise ValueError("no samples")
    lo = int(values.min())
    counts = np.bincount(values - lo)
    return Pmf(lo, counts / values.size)


def empirical_ks(sample, law: ContinuousLaw) -> float:
    """KS statistic of a real-valued sample against ``law``."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    F = np.asarray(cdf(law, x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))


def mixture_kolmogorov_distance(components, law: ContinuousLaw) -> float:
    """KS distance for a mixture of rescaled Pmfs.

    ``components`` is an iterable of ``(weight, pmf, position_map)``; the
    mixture puts mass ``weight * pmf[j]`` at ``position_map(j)``.
    """
    xs, ms = [], []
    for weight, p, pos in components:
        xs.append(pos(p.values))
        ms.append(weight * p.weights)
    if not xs:
        raise ValueError("empty mixture")
    x = np.concatenate(xs)
    m = np.concatenate(ms)
    order = np.argsort(x, kind="stable")
    x, m = x[order], m[order]
    ux, start = np.unique(x, return_index=True)
    right = np.cumsum(m)[np.r_[start[1:] - 1, x.size - 1]]
    left = np.r_[0.0, right[:-1]]
    F = np.asarray(cdf(law, ux), dtype=float)
    return float(min(1.0, max(np.max(np.abs(F - left)), np.max(np.abs(F - right)))))
