"""One-step couplings of two hipster walks and their k-step composition.

Two independent pairs ``(A, B)``, ``(C, D)`` are drawn from a base coupling
of ``mu`` and ``nu``. ``X'`` is one hipster output on children ``(A, C)`` and
``Y'`` one on ``(B, D)``. Each process has a *low* and a *high* outcome:
the smaller/larger child when the children differ, the down/up step when
they agree. The outcomes are paired through shared uniforms:

* children differ on both sides (subcase ii): one coin picks the left
  child in both processes;
* ``A <= B, C <= D`` (E1): comonotone, low with low;
* exactly one pair out of order (E2, E3): antitone, low with high;
* ``A > B, C > D`` (E4): independent choices, or comonotone (``ordered``).

With fair steps and coins this is exactly the case table that gives
``P(X' > Y') = 0`` on E1 and ``1/2`` on E2 and E3.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dist import Pmf
from .evolution import evolve_sym, evolve_tal
from .rde import RngStream

FLAVORS = ("sym", "tal")
E4_MODES = ("independent", "ordered")


def classify(A, B, C, D) -> tuple[int, str]:
    """Event index ``1..4`` and subcase ``i..iv`` of a quadruple."""
    e = {(True, True): 1, (True, False): 2, (False, True): 3, (False, False): 4}[(A <= B, C <= D)]
    sub = {(True, False): "i", (False, False): "ii", (False, True): "iii", (True, True): "iv"}[(A == C, B == D)]
    return e, sub


def _sides(a, c, flavor, q):
    """``(low, high, p_low)`` of one process with children ``a, c`` (arrays)."""
    same = a == c
    if flavor == "sym":
        lo_step, hi_step, p_step = a - 1, a + 1, 0.5
    else:
        lo_step, hi_step, p_step = a, a + 1, 1.0 - q
    low = np.where(same, lo_step, np.minimum(a, c))
    high = np.where(same, hi_step, np.maximum(a, c))
    p_low = np.where(same, p_step, 0.5)
    return low, high, p_low


def couple_step(A, B, C, D, u, v, flavor: str = "sym", q: float = 0.5, e4: str = "independent"):
    """Coupled outputs ``(X', Y')`` driven by uniforms ``u`` and ``v``.

    Works elementwise on arrays. ``v`` is only used on E4 with independent
    choices.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}")
    if e4 not in E4_MODES:
        raise ValueError(f"e4 must be one of {E4_MODES}")
    A, B, C, D = (np.asarray(z, dtype=np.int64) for z in (A, B, C, D))
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    xl, xh, px = _sides(A, C, flavor, q)
    yl, yh, py = _sides(B, D, flavor, q)
    x = np.where(u < px, xl, xh)
    y_co = np.where(u < py, yl, yh)
    y_anti = np.where(u < 1.0 - py, yh, yl)
    y_ind = np.where(v < py, yl, yh)
    ab, cd = A <= B, C <= D
    if e4 == "ordered":
        y = np.where(ab == cd, y_co, y_anti)
    else:
        y = np.where(ab & cd, y_co, np.where(ab | cd, y_anti, y_ind))
    # both processes choose between distinct children: shared coin
    coin = (A != C) & (B != D)
    left = u < 0.5
    x = np.where(coin, np.where(left, A, C), x)
    y = np.where(coin, np.where(left, B, D), y)
    return x, y


def couple_sym_step(A, B, C, D, rng: np.random.Generator, e4: str = "independent"):
    x, y = couple_step(A, B, C, D, rng.random(), rng.random(), "sym", 0.5, e4)
    return int(x), int(y)


def couple_tal_step(A, B, C, D, rng: np.random.Generator, q: float = 0.5, e4: str = "ordered"):
    x, y = couple_step(A, B, C, D, rng.random(), rng.random(), "tal", q, e4)
    return int(x), int(y)


def default_e4(flavor: str) -> str:
    """Independent E4 choices for the symmetric walk; ordered for the lazy walk,
    where the equality ``P(X' > Y') = alpha`` needs ``X' > Y'`` on E4."""
    return "ordered" if flavor == "tal" else "independent"


def _uniform_cells(q: float):
    """Midpoints and lengths of the cells cut out of [0, 1) by every threshold
    the step can compare a uniform against."""
    cuts = sorted({0.0, 0.5, q, 1.0 - q, 1.0})
    cuts = [c for c in cuts if 0.0 <= c <= 1.0]
    mids = [(a + b) / 2 for a, b in zip(cuts, cuts[1:]) if b > a]
    lens = [b - a for a, b in zip(cuts, cuts[1:]) if b > a]
    return mids, lens


def step_law(A, B, C, D, flavor: str = "sym", q: float = 0.5, e4: str | None = None) -> dict:
    """Exact joint law of ``(X', Y')`` given the four inputs."""
    e4 = e4 or default_e4(flavor)
    mids, lens = _uniform_cells(q if flavor == "tal" else 0.5)
    out: dict = {}
    for (u, lu), (v, lv) in itertools.product(zip(mids, lens), repeat=2):
        x, y = couple_step(A, B, C, D, u, v, flavor, q, e4)
        key = (int(x), int(y))
        out[key] = out.get(key, 0.0) + lu * lv
    return out


# reports ------------------------------------------------------------------------

@dataclass
class CouplingReport:
    alpha: float
    k: int
    p_exceed: float
    mode: str
    flavor: str
    marginal_check: float
    stderr: float = 0.0
    N: int | None = None
    seed: int | None = None
    q: float = 0.5
    e4: str = "independent"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def bound_holds(self, tol: float = 1e-12, sigmas: float = 3.0) -> bool:
        """``P(X' > Y') <= alpha`` (exactly, or within ``sigmas`` standard errors)."""
        slack = tol if self.mode == "exact" else sigmas * self.stderr + tol
        return self.p_exceed <= self.alpha + slack

    def equality_holds(self, tol: float = 1e-12, sigmas: float = 3.0) -> bool:
        slack = tol if self.mode == "exact" else sigmas * self.stderr + tol
        return abs(self.p_exceed - self.alpha) <= slack


def _normalise_base(base) -> dict:
    items = base.items() if isinstance(base, dict) else base
    out = {}
    for (a, b), p in items:
        if p < 0:
            raise ValueError("negative base probability")
        if p > 0:
            out[(int(a), int(b))] = out.get((int(a), int(b)), 0.0) + float(p)
    if abs(sum(out.values()) - 1.0) > 1e-9:
        raise ValueError("base coupling must have total mass 1")
    return out


def base_marginals(base: dict) -> tuple[Pmf, Pmf]:
    mu, nu = {}, {}
    for (a, b), p in base.items():
        mu[a] = mu.get(a, 0.0) + p
        nu[b] = nu.get(b, 0.0) + p
    return Pmf.from_dict(mu), Pmf.from_dict(nu)


def _check_marginals(mu: Pmf, nu: Pmf, base: dict, tol: float = 1e-12):
    m, n = base_marginals(base)
    for want, got in ((mu, m), (nu, n)):
        lo = min(want.support[0], got.support[0])
        hi = max(want.support[1], got.support[1])
        if np.max(np.abs(want.dense(lo, hi) - got.dense(lo, hi))) > tol:
            raise ValueError("base coupling marginals do not match mu and nu")


def _evolve(p: Pmf, flavor, q, k):
    return evolve_sym(p, k) if flavor == "sym" else evolve_tal(p, q, k)


def _max_dev(p: Pmf, law: dict) -> float:
    r = Pmf.from_dict(law) if law else None
    lo = min(p.support[0], r.support[0])
    hi = max(p.support[1], r.support[1])
    return float(np.max(np.abs(p.dense(lo, hi) - r.dense(lo, hi))))


def exact_coupling_law(mu: Pmf, nu: Pmf, base, flavor: str = "sym", q: float = 0.5,
                       e4: str | None = None) -> CouplingReport:
    """One coupled step by enumerating both base draws and all internal randomness."""
    e4 = e4 or default_e4(flavor)
    base = _normalise_base(base)
    _check_marginals(mu, nu, base)
    alpha = sum(p for (a, b), p in base.items() if a > b)
    xm, ym = {}, {}
    p_exceed = 0.0
    for ((A, B), p1), ((C, D), p2) in itertools.product(base.items(), repeat=2):
        w = p1 * p2
        for (x, y), c in step_law(A, B, C, D, flavor, q, e4).items():
            xm[x] = xm.get(x, 0.0) + w * c
            ym[y] = ym.get(y, 0.0) + w * c
            if x > y:
                p_exceed += w * c
    check = max(_max_dev(_evolve(mu, flavor, q, 1), xm), _max_dev(_evolve(nu, flavor, q, 1), ym))
    return CouplingReport(alpha, 1, p_exceed, "exact", flavor, check, q=q, e4=e4)


def _coupled_tree(pairs, probs, flavor, q, e4, k, count, stream):
    rng = stream.generator()
    cum = np.cumsum(probs)
    idx = np.searchsorted(cum, rng.random((count, 2 ** k)) * cum[-1], side="right")
    idx = np.minimum(idx, len(cum) - 1)
    x, y = pairs[idx, 0], pairs[idx, 1]
    while x.shape[1] > 1:
        u = rng.random((count, x.shape[1] // 2))
        v = rng.random((count, x.shape[1] // 2))
        x, y = couple_step(x[:, 0::2], y[:, 0::2], x[:, 1::2], y[:, 1::2], u, v, flavor, q, e4)
    return x[:, 0], y[:, 0]


def empirical_coupling_law(mu: Pmf, nu: Pmf, base, flavor: str = "sym", k: int = 1, N: int = 100_000,
                           seed: int = 0, q: float = 0.5, e4: str | None = None) -> CouplingReport:
    """Monte Carlo estimate of ``P(X' > Y')`` after ``k`` coupled levels.

    Leaves of the two depth-``k`` trees are drawn jointly from ``base``; every
    internal node applies :func:`couple_step`. Samples come in fixed blocks
    with streams ``(seed, block)``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    e4 = e4 or default_e4(flavor)
    base = _normalise_base(base)
    _check_marginals(mu, nu, base)
    alpha = sum(p for (a, b), p in base.items() if a > b)
    pairs = np.array(list(base.keys()), dtype=np.int64)
    probs = np.array(list(base.values()))
    per_block = max(1, (1 << 20) >> k)
    xs, ys = [], []
    for b, s in enumerate(range(0, N, per_block)):
        x, y = _coupled_tree(pairs, probs, flavor, q, e4, k, min(per_block, N - s), RngStream(seed, b))
        xs.append(x)
        ys.append(y)
    x, y = np.concatenate(xs), np.concatenate(ys)
    p = float(np.mean(x > y))
    stderr = math.sqrt(max(p * (1 - p), 1.0 / N) / N)
    from .dist import empirical_pmf
    check = max(_max_dev(_evolve(mu, flavor, q, k), empirical_pmf(x).to_dict()),
                _max_dev(_evolve(nu, flavor, q, k), empirical_pmf(y).to_dict()))
    return CouplingReport(alpha, k, p, "empirical", flavor, check, stderr, N, seed, q, e4)


# batteries ----------------------------------------------------------------------------

def random_base(rng: np.random.Generator, max_support: int = 4, span: int = 6) -> dict:
    """Random joint law on at most ``max_support`` values per coordinate."""
    na, nb = rng.integers(1, max_support + 1, size=2)
    a_vals = np.sort(rng.choice(span, na, replace=False)) - span // 2
    b_vals = np.sort(rng.choice(span, nb, replace=False)) - span // 2
    w = rng.random((na, nb)) * (rng.random((na, nb)) < 0.7)
    if w.sum() == 0:
        w[0, 0] = 1.0
    w /= w.sum()
    return {(int(a), int(b)): float(w[i, j]) for i, a in enumerate(a_vals)
            for j, b in enumerate(b_vals) if w[i, j] > 0}


def exact_battery(trials: int = 200, seed: int = 0, q: float = 0.5) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for t in range(trials):
        base = random_base(rng)
        mu, nu = base_marginals(base)
        sym = exact_coupling_law(mu, nu, base, "sym")
        tal = exact_coupling_law(mu, nu, base, "tal", q)
        rows.append({"trial": t, "alpha": sym.alpha, "p_exceed_sym": sym.p_exceed,
                     "p_exceed_tal": tal.p_exceed, "marginal_check": max(sym.marginal_check, tal.marginal_check)})
    return rows


def battery_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "alpha", "p_exceed", "mode"])
    for r in rows:
        w.writerow([r["trial"], repr(r["alpha"]), repr(r["p_exceed_sym"]), "exact-sym"])
        w.writerow([r["trial"], repr(r["alpha"]), repr(r["p_exceed_tal"]), "exact-tal"])
    return buf.getvalue()
