"""Overlap of k independent uniform spanning trees versus Po(k(k-1)).

``M = k(n-1) - |T_1 u ... u T_k|`` counts repeated edges. Monte Carlo draws
are keyed by global trial index, so the aggregated law does not depend on
how trials are split across shards.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._rng import MASK64, _derive, derive_seed
from .graph import Graph, union_size
from .tree_count import enumerate_spanning_trees
from .tree_sample import _check_connected, _wilson, sample_k_trees

TV_TAIL = 1e-12
ALPHA_MAX = 1.0 / 11.0


class OutOfRegimeError(ValueError):
    """Parameters fall outside the range where a bound is stated."""


@dataclass(frozen=True)
class EmpiricalDist:
    """Integer-valued empirical law: outcome -> count, plus the trial total."""

    counts: dict
    trials: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.trials:
            raise ValueError("counts do not sum to trials")

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDist":
        samples = np.asarray(samples, dtype=np.int64)
        vals, cnt = np.unique(samples, return_counts=True)
        return cls(dict(zip(vals.tolist(), cnt.tolist())), int(samples.size))

    def pmf(self, a: int) -> float:
        return self.counts.get(a, 0) / self.trials

    def se(self, a: int) -> float:
        p = self.pmf(a)
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def max_outcome(self) -> int:
        return max(self.counts) if self.counts else 0

    def mean(self) -> float:
        return sum(a * c for a, c in self.counts.items()) / self.trials

    def mean_se(self) -> float:
        mu = self.mean()
        var = sum(c * (a - mu) ** 2 for a, c in self.counts.items()) / self.trials
        return math.sqrt(var / self.trials)

    def merge(self, other: "EmpiricalDist") -> "EmpiricalDist":
        counts = Counter(self.counts)
        counts.update(other.counts)
        return EmpiricalDist(dict(sorted(counts.items())), self.trials + other.trials)


@dataclass(frozen=True)
class PoissonParams:
    lam: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("Poisson parameter must be >= 0")

    @classmethod
    def for_trees(cls, k: int) -> "PoissonParams":
        return cls(float(k * (k - 1)))


@dataclass(frozen=True)
class AlphaRegime:
    """Growth regime ``k = O(n^alpha)``, ``alpha < 1/11``, for the sharp bound."""

    alpha: float
    n: int
    k: int
    slack_constant: float = field(default=1.0)

    def __post_init__(self):
        if not 0.0 < self.alpha < ALPHA_MAX:
            raise OutOfRegimeError(f"alpha={self.alpha} outside (0, 1/11)")

    @property
    def a_threshold(self) -> float:
        return self.n ** (3 * self.alpha)

    @property
    def degree_threshold(self) -> float:
        return self.n ** (4 * self.alpha)

    @property
    def k_within(self) -> bool:
        # k = O(n^alpha) is asymptotic; this flags k <= n^alpha literally
        return self.k <= self.n ** self.alpha

    def default_slack(self) -> float:
        return self.slack_constant * self.n ** (11 * self.alpha - 1)

    def accepts(self, a: int) -> bool:
        return a <= self.a_threshold


@njit(cache=True, nogil=True)
def _mn_batch(indptr, indices, n, k, seed, start, stop, out):
    parent = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    in_tree = np.empty(n, dtype=np.bool_)
    codes = np.empty(k * (n - 1), dtype=np.int64)
    state = np.empty(1, dtype=np.uint64)
    for t in range(start, stop):
        tseed = _derive(seed, np.uint64(t))
        pos = 0
        for j in range(k):
            state[0] = _derive(tseed, np.uint64(j))
            _wilson(indptr, indices, n, state, parent, nxt, in_tree)
            for v in range(1, n):
                u = parent[v]
                if u < v:
                    codes[pos] = u * n + v
                else:
                    codes[pos] = v * n + u
                pos += 1
        codes.sort()
        distinct = 1 if pos > 0 else 0
        for i in range(1, pos):
            if codes[i] != codes[i - 1]:
                distinct += 1
        out[t - start] = k * (n - 1) - distinct


def sample_mn(g: Graph, k: int, seed: int) -> int:
    """One draw of ``k(n-1) - |union of k uniform trees|``."""
    trees = sample_k_trees(g, k, seed)
    return k * (g.n - 1) - union_size(t.edges for t in trees)


def shard_bounds(trials: int, shards: int) -> list[tuple[int, int]]:
    if shards < 1:
        raise ValueError("shards must be >= 1")
    edges = np.linspace(0, trials, min(shards, max(trials, 1)) + 1).round().astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:])]


def mn_samples(g: Graph, k: int, trials: int, seed: int, shards: int = 1) -> np.ndarray:
    """Raw M draws; trial ``t`` equals ``sample_mn(g, k, derive_seed(seed, t))``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_connected(g)
    indptr, indices = g.csr
    s = np.uint64(seed & MASK64)
    bounds = shard_bounds(trials, shards)

    def run(bound):
        lo, hi = bound
        out = np.empty(hi - lo, dtype=np.int64)
        _mn_batch(indptr, indices, g.n, k, s, lo, hi, out)
        return out

    if len(bounds) == 1:
        return run(bounds[0])
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        parts = list(pool.map(run, bounds))  # map preserves shard order
    return np.concatenate(parts)


def mn_distribution(g: Graph, k: int, trials: int, seed: int, shards: int = 1) -> EmpiricalDist:
    return EmpiricalDist.from_samples(mn_samples(g, k, trials, seed, shards))


def exact_mn_law(g: Graph, k: int) -> EmpiricalDist:
    """Exact law of M by enumerating all ordered k-tuples of spanning trees.

    Counts are tuple counts, so ``trials`` is ``|tau(g)|**k``.
    """
    trees = enumerate_spanning_trees(g)
    counts: Counter = Counter()
    for combo in itertools.product(trees, repeat=k):
        counts[k * (g.n - 1) - len(frozenset().union(*combo))] += 1
    return EmpiricalDist(dict(sorted(counts.items())), len(trees) ** k)


def poisson_pmf(params: PoissonParams, t: int) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    lam = params.lam
    if lam == 0:
        return 1.0 if t == 0 else 0.0
    return math.exp(-lam + t * math.log(lam) - math.lgamma(t + 1))


def poisson_truncation(params: PoissonParams, tail: float = TV_TAIL) -> int:
    """Smallest ``A`` with ``P[Po > A] < tail``, from a small-to-large pmf sum."""
    lam = params.lam
    hi = int(lam + 40 * math.sqrt(lam) + 60)
    pmf = np.array([poisson_pmf(params, t) for t in range(hi + 1)])
    # upper[A] = sum_{a > A} pmf[a], accumulated from the far tail inward
    upper = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
    return int(np.flatnonzero(upper < tail)[0])


def l1_distance(emp: EmpiricalDist, params: PoissonParams) -> float:
    if emp.trials < 1:
        raise ValueError("empty empirical distribution")
    big_a = poisson_truncation(params)
    total = 0.0
    for a in range(big_a + 1):
        total += abs(emp.pmf(a) - poisson_pmf(params, a))
    q_head = sum(poisson_pmf(params, a) for a in range(big_a + 1))
    total += max(0.0, 1.0 - q_head)
    total += sum(c for a, c in emp.counts.items() if a > big_a) / emp.trials
    return total


def tv_distance(emp: EmpiricalDist, params: PoissonParams) -> float:
    return 0.5 * l1_distance(emp, params)


def tv_noise_floor(emp: EmpiricalDist) -> float:
    """Half the summed per-outcome standard errors: a scale for TV sampling noise."""
    return 0.5 * sum(emp.se(a) for a in emp.counts)


def claim1_bound(k: int, a: int) -> float:
    """``(k(k-1))**a / a!``; not a pmf, may exceed 1."""
    if a < 0:
        raise ValueError("a must be >= 0")
    lam = k * (k - 1)
    if a == 0:
        return 1.0
    if lam == 0:
        return 0.0
    return math.exp(a * math.log(lam) - math.lgamma(a + 1))


def claim2_bound(regime: AlphaRegime, a: int, slack: float | None = None) -> float:
    """``(1 + slack) * P[Po(k(k-1)) = a]`` for ``a <= n^(3 alpha)``."""
    if not regime.accepts(a):
        raise OutOfRegimeError(f"a={a} exceeds n^(3 alpha)={regime.a_threshold:.4g}")
    if slack is None:
        slack = regime.default_slack()
    if slack < 0:
        raise ValueError("slack must be >= 0")
    return (1.0 + slack) * poisson_pmf(PoissonParams.for_trees(regime.k), a)


def report_rows(emp: EmpiricalDist, k: int, regime: AlphaRegime | None = None,
                slack: float | None = None) -> list[dict]:
    """Per-outcome rows: count, pmf, Poisson pmf and both bounds."""
    params = PoissonParams.for_trees(k)
    rows = []
    top = max(emp.max_outcome, poisson_truncation(params))
    for a in range(top + 1):
        if regime is None:
            c2 = "out-of-regime"
        else:
            try:
                c2 = claim2_bound(regime, a, slack)
            except OutOfRegimeError:
                c2 = "out-of-regime"
        rows.append({
            "a": a,
            "count": emp.counts.get(a, 0),
            "pmf": emp.pmf(a),
            "se": emp.se(a),
            "poisson": poisson_pmf(params, a),
            "claim1": claim1_bound(k, a),
            "claim2": c2,
        })
    return rows


__all__ = [
    "AlphaRegime", "EmpiricalDist", "OutOfRegimeError", "PoissonParams",
    "claim1_bound", "claim2_bound", "derive_seed", "exact_mn_law", "l1_distance",
    "mn_distribution", "mn_samples", "poisson_pmf", "poisson_truncation",
    "report_rows", "sample_mn", "shard_bounds", "tv_distance", "tv_noise_floor",
]
