"""Simple undirected graphs on vertices ``0..n-1`` and random generators.

Edges are kept as a lexicographically sorted ``(m, 2)`` int array with
``a < b`` in every row; adjacency structures are derived lazily.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from numba import njit

from ._rng import MASK64, _below, _pair_uniform, _uniform, new_state

Edge = tuple[int, int]
EdgeSet = frozenset  # frozenset[tuple[int, int]] with a < b


def norm_edge(a: int, b: int) -> Edge:
    a, b = int(a), int(b)
    return (a, b) if a < b else (b, a)


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


@njit(cache=True)
def _pairs(n):
    c = n * (n - 1) // 2
    out = np.empty((c, 2), dtype=np.int64)
    t = 0
    for i in range(n):
        for j in range(i + 1, n):
            out[t, 0] = i
            out[t, 1] = j
            t += 1
    return out


class Graph:
    """Immutable simple undirected graph.

    Construct with :meth:`from_edges`; self-loops, out-of-range vertices and
    duplicate edges raise ``ValueError``.
    """

    def __init__(self, n: int, edge_array: np.ndarray):
        # trusted constructor: edge_array sorted, unique, a < b
        self.n = int(n)
        arr = np.ascontiguousarray(edge_array, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        self.edge_array = arr

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "Graph":
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        arr = np.array([tuple(e) for e in edges], dtype=np.int64).reshape(-1, 2)
        if len(arr):
            if (arr[:, 0] == arr[:, 1]).any():
                raise ValueError("self-loop")
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError("vertex out of range")
            arr = np.sort(arr, axis=1)
            arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
            if (np.diff(arr, axis=0) == 0).all(axis=1).any():
                raise ValueError("duplicate edge")
        return cls(n, arr)

    @classmethod
    def from_mask(cls, n: int, mask: np.ndarray) -> "Graph":
        """Graph whose edges are the lexicographic pairs selected by ``mask``."""
        return cls(n, _pairs(n)[np.asarray(mask, dtype=bool)])

    @property
    def m(self) -> int:
        return len(self.edge_array)

    @cached_property
    def edges(self) -> EdgeSet:
        return frozenset(map(tuple, self.edge_array.tolist()))

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        a[self.edge_array[:, 0], self.edge_array[:, 1]] = True
        a[self.edge_array[:, 1], self.edge_array[:, 0]] = True
        a.setflags(write=False)
        return a

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` neighbor lists, neighbors ascending."""
        both = np.concatenate([self.edge_array, self.edge_array[:, ::-1]])
        both = both[np.lexsort((both[:, 1], both[:, 0]))]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=self.n), out=indptr[1:])
        return indptr, np.ascontiguousarray(both[:, 1])

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        indptr, indices = self.csr
        return tuple(tuple(indices[indptr[v]:indptr[v + 1]].tolist()) for v in range(self.n))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edge_array.ravel(), minlength=self.n)

    def has_edge(self, a: int, b: int) -> bool:
        return a != b and 0 <= a < self.n and 0 <= b < self.n and bool(self.adjacency_matrix[a, b])

    def laplacian(self) -> np.ndarray:
        lap = -self.adjacency_matrix.astype(np.float64)
        lap[np.diag_indices(self.n)] = self.degrees
        return lap

    def components(self) -> np.ndarray:
        """Component label per vertex (labels are smallest member ids)."""
        label = np.full(self.n, -1, dtype=np.int64)
        indptr, indices = self.csr
        for s in range(self.n):
            if label[s] >= 0:
                continue
            label[s] = s
            stack = [s]
            while stack:
                u = stack.pop()
                for w in indices[indptr[u]:indptr[u + 1]]:
                    if label[w] < 0:
                        label[w] = s
                        stack.append(int(w))
        return label

    def is_connected(self) -> bool:
        return self.n <= 1 or bool((self.components() == 0).all())

    def induced(self, n: int) -> "Graph":
        """Subgraph induced on vertices ``0..n-1``."""
        keep = (self.edge_array[:, 1] < n)
        return Graph(n, self.edge_array[keep])

    def without_edge(self, a: int, b: int) -> "Graph":
        e = norm_edge(a, b)
        if e not in self.edges:
            raise ValueError(f"edge {e} not in graph")
        keep = ~((self.edge_array[:, 0] == e[0]) & (self.edge_array[:, 1] == e[1]))
        return Graph(self.n, self.edge_array[keep])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edge_array, other.edge_array)

    def __hash__(self):
        return hash((self.n, self.edge_array.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def dumps(self) -> str:
        """Text dump: header ``"n m"`` then one sorted ``"a b"`` line per edge."""
        lines = [f"{self.n} {self.m}"]
        lines += [f"{a} {b}" for a, b in self.edge_array.tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 2:
            raise ValueError("missing 'n m' header")
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
        if len(edges) != m:
            raise ValueError(f"header says {m} edges, found {len(edges)}")
        return cls.from_edges(n, edges)


@dataclass(frozen=True)
class CoupledGraphSource:
    """Seeded handle on the infinite graph G(N, p).

    Edge ``{i, j}`` is present iff a hash of ``(seed, min, max)`` mapped to
    ``[0, 1)`` falls below ``p``, so every finite restriction is consistent.
    """

    seed: int
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


def make_complete(n: int) -> Graph:
    if n < 1:
        raise ValueError("n must be >= 1")
    return Graph(n, _pairs(n))


def make_path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def make_cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def make_star(n: int) -> Graph:
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


@njit(cache=True, nogil=True)
def _gnp_mask(n, p, state):
    c = n * (n - 1) // 2
    mask = np.zeros(c, dtype=np.bool_)
    for t in range(c):
        mask[t] = _uniform(state) < p
    return mask


@njit(cache=True, nogil=True)
def _gnm_choice(c, m, state, scratch):
    # partial Fisher-Yates on pair indices; first m entries form the sample
    for t in range(c):
        scratch[t] = t
    for t in range(m):
        r = t + _below(state, c - t)
        tmp = scratch[t]
        scratch[t] = scratch[r]
        scratch[r] = tmp
    return scratch[:m]


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return Graph.from_mask(n, _gnp_mask(n, float(p), new_state(seed)))


def gen_gnm(n: int, m: int, seed: int) -> Graph:
    if n < 1:
        raise ValueError("n must be >= 1")
    c = pair_count(n)
    if not 0 <= m <= c:
        raise ValueError(f"m must lie in [0, {c}], got {m}")
    chosen = _gnm_choice(c, m, new_state(seed), np.empty(c, dtype=np.int64))
    mask = np.zeros(c, dtype=bool)
    mask[chosen] = True
    return Graph.from_mask(n, mask)


@njit(cache=True, nogil=True)
def _coupled_mask(seed, n, p):
    c = n * (n - 1) // 2
    mask = np.zeros(c, dtype=np.bool_)
    t = 0
    for i in range(n):
        for j in range(i + 1, n):
            mask[t] = _pair_uniform(seed, i, j) < p
            t += 1
    return mask


def coupled_restrict(source: CoupledGraphSource, n: int) -> Graph:
    """Restriction of the coupled infinite graph to ``0..n-1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    mask = _coupled_mask(np.uint64(source.seed & MASK64), n, float(source.p))
    return Graph.from_mask(n, mask)


def union_size(trees: Iterable[Iterable[Edge]]) -> int:
    union: set = set()
    for t in trees:
        union.update(norm_edge(a, b) for a, b in t)
    return len(union)


def degree_stats(g: Graph) -> tuple[int, int]:
    if g.n == 0:
        raise ValueError("graph has no vertices")
    d = g.degrees
    return int(d.min()), int(d.max())
