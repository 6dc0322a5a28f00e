"""Report-only studies of two related tree models.

* Min-plus tree: each node returns ``x + y`` with probability ``p`` and
  ``min(x, y)`` otherwise. At ``p = 1/2`` the rescaled
  ``ln M_n / sqrt(pi^2 n / 3)`` is compared with Beta(2,1).
* Hierarchical resistor lattice: series ``x + y`` with probability ``p``,
  parallel ``xy / (x + y)`` otherwise. At ``p = 1/2`` the rescaled
  ``ln R_n / (c n)^(1/3) + 1/2`` is compared with Beta(2,2) for a fitted
  ``c``, and ``P(R_n <= 1)`` is tracked.

Nothing here is asserted beyond exact identities; the numbers are reports.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import skew

from .dist import ContinuousLaw, Pmf, empirical_ks
from .rde import CombinationRule, RngStream, combine_arrays, sample_exact_tree

LN2 = math.log(2.0)


@dataclass
class ConjectureReport:
    model: str
    p: float
    depths: list
    ks: list
    p_below: list
    fit_c: list
    medians: list = field(default_factory=list)
    pool_size: int = 0
    seed: int = 0
    notes: str = ""

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.depths, self.depths[1:])):
            raise ValueError("depths must be strictly increasing")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "ks", "p_below", "fit_c"])
        for row in zip(self.depths, self.ks, self.p_below, self.fit_c):
            w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
        return buf.getvalue()


def _pool_trajectory(rule: CombinationRule, depths, pool_size: int, seed: int):
    """Yield ``(n, pool)`` at each requested depth of a pool run from all-one inputs."""
    wanted = sorted(set(int(d) for d in depths))
    pool = np.zeros(pool_size)          # log2 of the all-one input
    n = 0
    for target in wanted:
        while n < target:
            n += 1
            rng = RngStream(seed, n).generator()
            i = rng.integers(0, pool_size, pool_size)
            j = rng.integers(0, pool_size, pool_size)
            pool = combine_arrays(rule, pool[i], pool[j], rng.random(pool_size))
        yield n, pool


def minplus_study(p: float = 0.5, depths=(64, 128, 256), pool_size: int = 1 << 16, seed: int = 0) -> ConjectureReport:
    """KS distance of ``ln M_n / sqrt(pi^2 n / 3)`` to Beta(2,1), and
    ``P(rescaled value <= 1/2)`` (1/4 under the limit law)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    rule = CombinationRule.minplus(p)
    law = ContinuousLaw.beta21()
    depths_out, ks, below, medians = [], [], [], []
    for n, pool in _pool_trajectory(rule, depths, pool_size, seed):
        scaled = pool * LN2 / math.sqrt(math.pi ** 2 * n / 3.0)
        depths_out.append(n)
        ks.append(empirical_ks(scaled, law))
        below.append(float(np.mean(scaled <= 0.5)))
        medians.append(float(np.median(pool)))
    return ConjectureReport("minplus", p, depths_out, ks, below, [math.pi ** 2 / 3.0] * len(ks),
                            medians, pool_size, seed, "fit_c is the fixed constant pi^2/3")


def fit_lattice_constant(log_r: np.ndarray, n: int, bounds=(1e-3, 1e3)) -> tuple[float, float]:
    """``c`` minimising the KS distance of ``ln R / (c n)^(1/3) + 1/2`` to Beta(2,2)."""
    law = ContinuousLaw.beta22()
    ln_r = log_r * LN2

    def ks_of(logc):
        return empirical_ks(ln_r / (math.exp(logc) * n) ** (1.0 / 3.0) + 0.5, law)

    res = minimize_scalar(ks_of, bounds=tuple(math.log(b) for b in bounds), method="bounded")
    return math.exp(res.x), float(res.fun)


def lattice_study(p: float = 0.5, depths=(64, 128, 256, 512, 1024), pool_size: int = 1 << 16,
                  seed: int = 0) -> ConjectureReport:
    """``P(R_n <= 1)`` per depth and the best-fit ``c`` with its KS distance."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    rule = CombinationRule.series_parallel(p)
    depths_out, ks, below, cs, medians = [], [], [], [], []
    for n, pool in _pool_trajectory(rule, depths, pool_size, seed):
        c, d = fit_lattice_constant(pool, n)
        depths_out.append(n)
        ks.append(d)
        cs.append(c)
        below.append(float(np.mean(pool <= 0.0)))
        medians.append(float(np.median(pool)))
    return ConjectureReport("lattice", p, depths_out, ks, below, cs, medians, pool_size, seed,
                            "c fitted per depth; pool bias is not controlled")


def skewness_check(n: int = 10, N: int = 20_000, seed: int = 0) -> dict:
    """Sample skewness of ``log2 R_n`` for the p = 1/2 lattice from exact trees,
    with its standard error under a symmetric law."""
    s = sample_exact_tree(CombinationRule.series_parallel(0.5), Pmf.delta(0), n, N, seed)
    g = float(skew(s.values, bias=False))
    se = math.sqrt(6.0 * N * (N - 1) / ((N - 2) * (N + 1) * (N + 3)))
    return {"n": n, "N": N, "skewness": g, "stderr": se, "z": g / se}
