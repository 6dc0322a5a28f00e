"""Direct simulation of binary tree recursions.

A depth-``n`` tree has ``2**n`` i.i.d. leaves; every internal node combines
its two children with a random binary function. Integer rules (hipster,
fomo) act on integers. The two real-valued rules (min-plus tree,
series/parallel resistor lattice) store values as base-2 logarithms so that
depth-40 trees neither overflow nor lose all precision.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dist import Pmf
from .evolution import StepDistribution

KINDS = ("hipster", "fomo", "minplus", "series_parallel")
MAX_TREE_DEPTH = 24
MAX_BRANCHES = 10 ** 8
# leaves drawn per RNG block; block size depends on n only so that output
# does not depend on the number of worker threads
BLOCK_LEAVES = 1 << 20


@dataclass(frozen=True)
class CombinationRule:
    kind: str
    steps: StepDistribution | None = None
    p: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind in ("hipster", "fomo"):
            if self.steps is None:
                object.__setattr__(self, "steps", StepDistribution.symmetric())
        else:
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("real-valued rules need p in [0, 1]")

    @property
    def domain(self) -> str:
        return "integer" if self.kind in ("hipster", "fomo") else "log2"

    @classmethod
    def hipster(cls, steps: StepDistribution | None = None) -> "CombinationRule":
        return cls("hipster", steps or StepDistribution.symmetric())

    @classmethod
    def tal(cls, q: float) -> "CombinationRule":
        return cls("hipster", StepDistribution.lazy(q))

    @classmethod
    def fomo(cls, steps: StepDistribution | None = None) -> "CombinationRule":
        return cls("fomo", steps or StepDistribution.symmetric())

    @classmethod
    def minplus(cls, p: float) -> "CombinationRule":
        return cls("minplus", p=p)

    @classmethod
    def series_parallel(cls, p: float) -> "CombinationRule":
        return cls("series_parallel", p=p)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.steps is not None:
            d["steps"] = {str(k): v for k, v in self.steps.atoms.items()}
        if self.p is not None:
            d["p"] = self.p
        return d


@dataclass(frozen=True)
class RngStream:
    """Counter-based (Philox) stream keyed by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.seed) & (2 ** 64 - 1), int(self.stream_id) & (2 ** 64 - 1)])
        return np.random.Generator(np.random.Philox(ss))


# log2-domain arithmetic ---------------------------------------------------

def log2_add(a, b):
    """``log2(2**a + 2**b)`` without overflow."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    hi = np.maximum(a, b)
    return hi + np.log2(1.0 + np.exp2(-np.abs(a - b)))


def log2_parallel(a, b):
    """``log2(xy / (x + y))`` for ``x = 2**a``, ``y = 2**b``."""
    return np.asarray(a, dtype=float) + np.asarray(b, dtype=float) - log2_add(a, b)


# combining ----------------------------------------------------------------

def outcomes(rule: CombinationRule, x, y) -> list:
    """All ``(value, probability)`` outcomes of one node with children ``x, y``."""
    if rule.kind == "hipster":
        if x == y:
            return [(x + i, c) for i, c in rule.steps.atoms.items()]
        return [(x, 0.5), (y, 0.5)]
    if rule.kind == "fomo":
        if x == y:
            return [(x, 1.0)]
        return [(v + i, 0.5 * c) for v in (x, y) for i, c in rule.steps.atoms.items()]
    if rule.kind == "minplus":
        return [(float(log2_add(x, y)), rule.p), (min(x, y), 1.0 - rule.p)]
    return [(float(log2_add(x, y)), rule.p), (float(log2_parallel(x, y)), 1.0 - rule.p)]


def _check_domain(rule, x, y):
    if rule.domain == "integer":
        for v in (x, y):
            if isinstance(v, float) and not float(v).is_integer():
                raise TypeError(f"{rule.kind} acts on integers, got {v!r}")


def combine(rule: CombinationRule, x, y, rng: np.random.Generator):
    """One random application of the node function."""
    _check_domain(rule, x, y)
    outs = outcomes(rule, x, y)
    probs = np.array([p for _, p in outs])
    i = int(np.searchsorted(np.cumsum(probs), rng.random() * probs.sum(), side="right"))
    value = outs[min(i, len(outs) - 1)][0]
    return int(value) if rule.domain == "integer" else float(value)


def _pick_step(steps: StepDistribution, v):
    cum = np.cumsum(steps.coefs)
    idx = np.searchsorted(cum, v * cum[-1], side="right")
    return steps.shifts[np.minimum(idx, len(cum) - 1)]


def combine_arrays(rule: CombinationRule, x: np.ndarray, y: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorised node function driven by one uniform ``u`` per node.

    The same conventions as the compiled tree kernel: for hipster nodes ``u``
    picks the step when the children agree and the child otherwise; for fomo
    nodes ``u < 1/2`` picks the child and the rescaled remainder the step.
    """
    if rule.kind == "hipster":
        return np.where(x == y, x + _pick_step(rule.steps, u), np.where(u < 0.5, x, y))
    if rule.kind == "fomo":
        left = u < 0.5
        v = np.where(left, 2.0 * u, 2.0 * u - 1.0)
        return np.where(x == y, x, np.where(left, x, y) + _pick_step(rule.steps, v))
    series = log2_add(x, y)
    if rule.kind == "minplus":
        return np.where(u < rule.p, series, np.minimum(x, y))
    return np.where(u < rule.p, series, x + y - series)


def draw_inputs(law: Pmf, size, rng, domain: str = "integer") -> np.ndarray:
    """i.i.d. draws from ``law`` (renormalised if mass was trimmed)."""
    cum = np.cumsum(law.weights)
    idx = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
    vals = law.values[np.minimum(idx, len(cum) - 1)]
    return vals.astype(np.int64) if domain == "integer" else vals.astype(float)


# sample sets ----------------------------------------------------------------

@dataclass
class SampleSet:
    values: np.ndarray
    n: int
    rule: CombinationRule
    input_law: Pmf
    seed: int
    method: str = "exact_tree"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("empty sample set")

    @property
    def N(self) -> int:
        return len(self.values)

    def metadata(self) -> dict:
        return {"rule": self.rule.describe(), "n": self.n, "seed": self.seed, "N": self.N,
                "method": self.method, "input_law": self.input_law.to_dict(), **self.extra}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("value\n")
        if self.rule.domain == "integer":
            buf.writelines(f"{int(v)}\n" for v in self.values)
        else:
            buf.writelines(f"{float(v)!r}\n" for v in self.values)
        return buf.getvalue()

    def save(self, stem: str):
        """Write ``stem.csv`` and the JSON sidecar ``stem.json``."""
        with open(f"{stem}.csv", "w") as fh:
            fh.write(self.to_csv())
        with open(f"{stem}.json", "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)

    def empirical_pmf(self) -> Pmf:
        if self.rule.domain != "integer":
            raise TypeError("empirical PMF needs integer values")
        from .dist import empirical_pmf
        return empirical_pmf(self.values)


def read_samples_csv(text: str) -> np.ndarray:
    rows = list(csv.DictReader(io.StringIO(text)))
    return np.array([float(r["value"]) for r in rows])


def _tree_block(rule, law, n, count, stream):
    rng = stream.generator()
    if len(law.weights) == 1:
        x = np.full((count, 2 ** n), law.offset, dtype=np.int64)
        if rule.domain != "integer":
            x = x.astype(float)
    else:
        x = draw_inputs(law, (count, 2 ** n), rng, rule.domain)
    u = rng.random(count * (2 ** n - 1))
    if rule.domain == "integer":
        return kernels.tree_reduce(x, u, rule.kind == "fomo", rule.steps.shifts, np.cumsum(rule.steps.coefs))
    pos = 0
    while x.shape[1] > 1:
        half = x.shape[1] // 2
        uu = u[pos: pos + count * half].reshape(count, half)
        x = combine_arrays(rule, x[:, 0::2], x[:, 1::2], uu)
        pos += count * half
    return x[:, 0]


def sample_exact_tree(rule: CombinationRule, input_law: Pmf, n: int, N: int, seed: int,
                      threads: int = 1) -> SampleSet:
    """``N`` independent exact samples of the depth-``n`` root value.

    Samples are produced in fixed-size blocks, block ``b`` using stream
    ``(seed, b)``, so the result does not depend on ``threads``.
    """
    if n < 0 or N < 1:
        raise ValueError("need n >= 0 and N >= 1")
    if n > MAX_TREE_DEPTH:
        raise ValueError(f"depth {n} exceeds guard {MAX_TREE_DEPTH}: "
                         f"would need {N * (2 ** n - 1):.3g} combine calls")
    per_block = max(1, BLOCK_LEAVES >> n)
    starts = list(range(0, N, per_block))
    jobs = [(b, min(per_block, N - s)) for b, s in enumerate(starts)]

    def run(job):
        b, count = job
        return _tree_block(rule, input_law, n, count, RngStream(seed, b))

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return SampleSet(np.concatenate(parts), n, rule, input_law, seed, "exact_tree")


def sample_pool(rule: CombinationRule, input_law: Pmf, n: int, pool_size: int, seed: int,
                threads: int = 1) -> SampleSet:
    """Particle approximation: each round replaces the pool by combinations of
    ``pool_size`` pairs drawn with replacement from the previous pool."""
    if pool_size < 2:
        raise ValueError("pool_size must be >= 2")
    pool = draw_inputs(input_law, pool_size, RngStream(seed, 0).generator(), rule.domain)
    chunk = BLOCK_LEAVES
    for r in range(1, n + 1):
        bounds = [(s, min(s + chunk, pool_size)) for s in range(0, pool_size, chunk)]

        def run(ic, prev=pool, bounds=bounds, r=r):
            c, (a, b) = ic
            rng = RngStream(seed, (r << 32) + c).generator()
            i = rng.integers(0, pool_size, b - a)
            j = rng.integers(0, pool_size, b - a)
            return combine_arrays(rule, prev[i], prev[j], rng.random(b - a))

        if threads > 1 and len(bounds) > 1:
            with ThreadPoolExecutor(threads) as ex:
                parts = list(ex.map(run, enumerate(bounds)))
        else:
            parts = [run(ic) for ic in enumerate(bounds)]
        pool = np.concatenate(parts)
    return SampleSet(pool, n, rule, input_law, seed, "pool", {"pool_size": pool_size})


# exhaustive oracle ----------------------------------------------------------

def _node_law(rule, left: dict, right: dict) -> dict:
    out: dict = {}
    for x, px in left.items():
        for y, py in right.items():
            for v, c in outcomes(rule, x, y):
                out[v] = out.get(v, 0.0) + px * py * c
    return out


def _branch_count(rule, atoms: int, n: int) -> int:
    k = max(len(rule.steps.atoms) if rule.steps else 2, 2)
    return atoms ** (2 ** n) * k ** (2 ** n - 1)


def brute_force_law(rule: CombinationRule, input_law: Pmf, n: int, mode: str = "auto") -> Pmf:
    """Exact root law by exhaustive enumeration.

    ``full`` enumerates every leaf assignment and, for each, every node coin
    and step; ``pairwise`` enumerates child-value pairs and node outcomes one
    level at a time (valid because sibling subtrees are independent).
    ``auto`` uses ``full`` when it needs at most 10**6 branches.
    """
    if rule.domain != "integer":
        raise TypeError("brute force is defined for integer rules")
    if n < 0 or n > 4:
        raise ValueError("brute force is limited to n <= 4")
    leaf = {int(j): float(w) for j, w in input_law.to_dict().items()}
    if mode == "auto":
        mode = "full" if _branch_count(rule, len(leaf), n) <= 10 ** 6 else "pairwise"
    if mode == "full":
        branches = _branch_count(rule, len(leaf), n)
        if branches > MAX_BRANCHES:
            raise ValueError(f"enumeration needs {branches:.3g} branches (limit {MAX_BRANCHES:.0e})")
    if mode == "pairwise":
        law = leaf
        for _ in range(n):
            law = _node_law(rule, law, law)
    elif mode == "full":
        law = {}
        vals = list(leaf)
        for assign in itertools.product(vals, repeat=2 ** n):
            weight = math.prod(leaf[v] for v in assign)
            level = [{v: 1.0} for v in assign]
            while len(level) > 1:
                level = [_node_law(rule, level[i], level[i + 1]) for i in range(0, len(level), 2)]
            for v, c in level[0].items():
                law[v] = law.get(v, 0.0) + weight * c
    else:
        raise ValueError("mode must be auto, full or pairwise")
    law = {v: w for v, w in law.items() if w > 0.0}
    return Pmf.from_dict(law)
