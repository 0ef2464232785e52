"""Quick oracle suites behind ``treeunion selftest``."""
from __future__ import annotations

import itertools
import math
from collections import Counter

from scipy.stats import chisquare

from ._rng import derive_seed
from .electrical import edge_inclusion_probability, two_path_inclusion_bound
from .graph import Graph, make_complete, make_cycle, pair_count
from .tail_moments import falling_factorial_estimate, falling_factorial_log
from .tree_count import enumerate_spanning_trees, matrix_tree_log_count
from .tree_sample import wilson_sample


def _all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, [pairs[i] for i in range(len(pairs)) if mask >> i & 1])


def _counting(max_n=4):
    worst = 0
    for n in range(1, max_n + 1):
        for g in _all_graphs(n):
            lc = matrix_tree_log_count(g)
            got = 0 if lc.is_zero else round(math.exp(lc.log))
            worst = max(worst, abs(got - len(enumerate_spanning_trees(g))))
    return worst == 0, worst


def _kirchhoff():
    worst = 0.0
    for g in (make_complete(4), make_cycle(5), make_complete(4).without_edge(0, 1)):
        trees = enumerate_spanning_trees(g)
        for e in g.edges:
            frac = sum(e in t for t in trees) / len(trees)
            worst = max(worst, abs(edge_inclusion_probability(g, e) - frac) / frac)
            if two_path_inclusion_bound(g, e) < frac - 1e-12:
                return False, math.inf
    return worst < 1e-9, worst


def _negative_correlation():
    worst = -math.inf
    g = make_complete(4).without_edge(0, 1)
    trees = enumerate_spanning_trees(g)
    single = {e: sum(e in t for t in trees) / len(trees) for e in g.edges}
    for e1, e2 in itertools.combinations(sorted(g.edges), 2):
        both = sum(e1 in t and e2 in t for t in trees) / len(trees)
        worst = max(worst, both - single[e1] * single[e2])
    return worst <= 1e-12, worst


def _uniformity(seed):
    g = make_complete(3)
    counts = Counter(wilson_sample(g, derive_seed(seed, t)).edges for t in range(3000))
    res = chisquare([counts[t] for t in map(frozenset, itertools.combinations(sorted(g.edges), 2))])
    return res.pvalue > 1e-3, float(res.pvalue)


def _falling_factorial():
    worst = 0.0
    for big_n in (10 ** 4, 10 ** 5):
        for ell in (10, 100):
            err = abs(falling_factorial_log(big_n, ell).log - falling_factorial_estimate(big_n, ell).log)
            worst = max(worst, err / (2 * ell ** 3 / big_n ** 2))
    return worst <= 1.0, worst


def run_selftest(seed: int = 0) -> list[dict]:
    suites = {
        "counting_oracle_n<=4": _counting,
        "kirchhoff_small": _kirchhoff,
        "negative_correlation_k4_minus_e": _negative_correlation,
        "wilson_uniform_k3": lambda: _uniformity(seed),
        "falling_factorial_error": _falling_factorial,
    }
    out = []
    for name, fn in suites.items():
        passed, value = fn()
        out.append({"name": name, "passed": bool(passed), "value": value})
    return out
