"""Spanning-tree counting in the log domain.

Counts such as ``n**(n-2)`` overflow doubles long before the graph sizes we
care about, so everything is carried as natural logs with ``-inf`` standing
for a count of zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import Graph, norm_edge

PIVOT_FLOOR = 1e-12
ENUMERATION_MAX_N = 9


@dataclass(frozen=True, order=True)
class LogValue:
    """A nonnegative number stored as its natural log; ``-inf`` means zero."""

    log: float

    @classmethod
    def of(cls, x: float) -> "LogValue":
        if x < 0:
            raise ValueError("LogValue holds nonnegative quantities only")
        return cls(math.log(x) if x > 0 else -math.inf)

    @property
    def is_zero(self) -> bool:
        return self.log == -math.inf

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.is_zero or other.is_zero:
            return ZERO
        return LogValue(self.log + other.log)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogValue")
        return ZERO if self.is_zero else LogValue(self.log - other.log)

    def __add__(self, other: "LogValue") -> "LogValue":
        return LogValue(float(np.logaddexp(self.log, other.log)))

    def __pow__(self, k: int) -> "LogValue":
        if self.is_zero:
            return ZERO if k > 0 else ONE
        return LogValue(k * self.log)

    def value(self) -> float:
        """Plain float; raises ``OverflowError`` when out of range."""
        return 0.0 if self.is_zero else math.exp(self.log)


ZERO = LogValue(-math.inf)
ONE = LogValue(0.0)


def cayley_log_count(n: int) -> LogValue:
    if n < 1:
        raise ValueError("n must be >= 1")
    return LogValue((n - 2) * math.log(n)) if n > 2 else ONE


@njit(cache=True, nogil=True)
def cholesky_logdet(a, floor):
    """Log-determinant of SPD ``a`` via an in-place lower Cholesky sweep.

    Returns ``-inf`` when a pivot drops below ``floor`` times the largest
    diagonal entry. ``a`` is overwritten.
    """
    d = a.shape[0]
    if d == 0:
        return 0.0
    big = 0.0
    for i in range(d):
        if a[i, i] > big:
            big = a[i, i]
    tol = floor * big
    total = 0.0
    for j in range(d):
        s = a[j, j]
        for t in range(j):
            s -= a[j, t] * a[j, t]
        if s <= tol:
            return -np.inf
        piv = np.sqrt(s)
        a[j, j] = piv
        total += np.log(s)
        for i in range(j + 1, d):
            s2 = a[i, j]
            for t in range(j):
                s2 -= a[i, t] * a[j, t]
            a[i, j] = s2 / piv
    return total


def laplacian_minor(g: Graph, drop: int = 0) -> np.ndarray:
    keep = np.arange(g.n) != drop
    return np.ascontiguousarray(g.laplacian()[np.ix_(keep, keep)])


def matrix_tree_log_count(g: Graph) -> LogValue:
    """Log of the number of spanning trees; ``ZERO`` iff ``g`` is disconnected."""
    if g.n < 1:
        raise ValueError("graph has no vertices")
    if g.n == 1:
        return ONE
    if not g.is_connected():
        return ZERO
    minor = laplacian_minor(g)
    try:
        chol = np.linalg.cholesky(minor)
    except np.linalg.LinAlgError:
        return ZERO
    piv = np.diag(chol) ** 2
    if piv.min() <= PIVOT_FLOOR * minor.diagonal().max():
        return ZERO
    return LogValue(float(np.log(piv).sum()))


class _RollbackDSU:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n
        self.history = []

    def find(self, x):
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.history.append(rb)
        return True

    def undo(self):
        rb = self.history.pop()
        ra = self.parent[rb]
        self.size[ra] -= self.size[rb]
        self.parent[rb] = rb


def _still_connectable(n, chosen_dsu_edges, rest):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for a, b in list(chosen_dsu_edges) + list(rest):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
            if comps == 1:
                return True
    return comps == 1


def enumerate_spanning_trees(g: Graph) -> list[frozenset]:
    """Every spanning tree of ``g`` as a frozenset of edges (``n <= 9``).

    Branches on each edge in order (take / skip), rejecting cycles with a
    rollback union-find and pruning skips that would disconnect the rest.
    """
    n = g.n
    if n > ENUMERATION_MAX_N:
        raise ValueError(f"enumeration refused for n={n} > {ENUMERATION_MAX_N}")
    if n < 1:
        raise ValueError("graph has no vertices")
    if n == 1:
        return [frozenset()]
    edges = [tuple(e) for e in g.edge_array.tolist()]
    m = len(edges)
    need = n - 1
    dsu = _RollbackDSU(n)
    chosen: list = []
    out: list[frozenset] = []

    def rec(i):
        if len(chosen) == need:
            out.append(frozenset(chosen))
            return
        if m - i < need - len(chosen):
            return
        a, b = edges[i]
        if dsu.union(a, b):
            chosen.append(edges[i])
            rec(i + 1)
            chosen.pop()
            dsu.undo()
        if _still_connectable(n, chosen, edges[i + 1:]):
            rec(i + 1)

    if g.is_connected():
        rec(0)
    return out


def grimmett_log_bound(n: int, m: int) -> LogValue:
    """Log of ``(1/n) * (2m/(n-1))**(n-1)``, an upper bound on the tree count."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return ZERO
    return LogValue(-math.log(n) + (n - 1) * math.log(2 * m / (n - 1)))


def edge_tree_fraction(trees: list[frozenset], a: int, b: int) -> float:
    e = norm_edge(a, b)
    return sum(e in t for t in trees) / len(trees)
