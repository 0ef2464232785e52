"""Uniform spanning trees by loop-erased random walk (Wilson's algorithm)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._rng import MASK64, _below, _derive, _uniform, derive_seed, new_state
from .graph import Graph, norm_edge


@dataclass(frozen=True)
class UniformTree:
    """Spanning tree rooted at vertex 0; ``parent[0] == -1``."""

    parent: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def edges(self) -> frozenset:
        return frozenset(norm_edge(v, p) for v, p in enumerate(self.parent) if p >= 0)

    def degrees(self) -> np.ndarray:
        par = np.asarray(self.parent)
        child = np.flatnonzero(par >= 0)
        return np.bincount(np.concatenate([child, par[child]]), minlength=self.n)


@njit(cache=True, nogil=True)
def _wilson(indptr, indices, n, state, parent, nxt, in_tree):
    for v in range(n):
        in_tree[v] = False
        parent[v] = -1
    in_tree[0] = True
    for start in range(1, n):
        u = start
        while not in_tree[u]:
            lo = indptr[u]
            nxt[u] = indices[lo + _below(state, indptr[u + 1] - lo)]
            u = nxt[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            parent[u] = nxt[u]
            u = nxt[u]


@njit(cache=True, nogil=True)
def _wilson_dense(w, rowsum, n, state, parent, nxt, in_tree):
    """Wilson's walk with step ``u -> v`` taken with probability ``w[u, v] / rowsum[u]``.

    The resulting tree has probability proportional to the product of its
    edge weights.
    """
    for v in range(n):
        in_tree[v] = False
        parent[v] = -1
    in_tree[0] = True
    for start in range(1, n):
        u = start
        while not in_tree[u]:
            x = _uniform(state) * rowsum[u]
            acc = 0.0
            pick = -1
            for v in range(n):
                if w[u, v] > 0.0:
                    acc += w[u, v]
                    pick = v
                    if x < acc:
                        break
            nxt[u] = pick
            u = pick
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            parent[u] = nxt[u]
            u = nxt[u]


def weighted_wilson_sample(weights: np.ndarray, seed: int) -> UniformTree:
    """Spanning tree drawn with probability proportional to the product of edge weights.

    ``weights`` is a symmetric nonnegative ``(n, n)`` matrix; zero entries are
    absent edges.
    """
    w = np.array(weights, dtype=np.float64)
    n = w.shape[0]
    if w.shape != (n, n) or not np.allclose(w, w.T) or (w < 0).any():
        raise ValueError("weights must be a symmetric nonnegative square matrix")
    np.fill_diagonal(w, 0.0)
    rows, cols = np.nonzero(np.triu(w))
    _check_connected(Graph.from_edges(n, zip(rows.tolist(), cols.tolist())))
    parent = np.empty(n, dtype=np.int64)
    _wilson_dense(w, w.sum(axis=1), n, new_state(seed), parent,
                  np.empty(n, dtype=np.int64), np.empty(n, dtype=np.bool_))
    return UniformTree(tuple(parent.tolist()))


def _check_connected(g: Graph) -> None:
    if g.n < 1:
        raise ValueError("graph has no vertices")
    if not g.is_connected():
        raise ValueError("graph is disconnected; no spanning tree exists")


def wilson_sample(g: Graph, seed: int) -> UniformTree:
    _check_connected(g)
    indptr, indices = g.csr
    parent = np.empty(g.n, dtype=np.int64)
    _wilson(indptr, indices, g.n, new_state(seed), parent,
            np.empty(g.n, dtype=np.int64), np.empty(g.n, dtype=np.bool_))
    return UniformTree(tuple(parent.tolist()))


def sample_k_trees(g: Graph, k: int, seed: int) -> list[UniformTree]:
    """``k`` independent uniform trees; tree ``j`` uses stream ``derive_seed(seed, j)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return [wilson_sample(g, derive_seed(seed, j)) for j in range(k)]


def tree_max_degree(t: UniformTree) -> int:
    return int(t.degrees().max()) if t.n > 1 else 0


def moon_tail_bound(n: int, d: int) -> float:
    """``min(1, n / d!)`` with the factorial handled through ``lgamma``."""
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    return min(1.0, math.exp(math.log(n) - math.lgamma(d + 1)))


@njit(cache=True, nogil=True)
def _max_degree_batch(indptr, indices, n, seed, start, stop, out):
    """Max tree degree for trials ``start..stop`` (stream ``derive(seed, t)``)."""
    parent = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    in_tree = np.empty(n, dtype=np.bool_)
    deg = np.empty(n, dtype=np.int64)
    state = np.empty(1, dtype=np.uint64)
    for t in range(start, stop):
        state[0] = _derive(seed, np.uint64(t))
        _wilson(indptr, indices, n, state, parent, nxt, in_tree)
        deg[:] = 0
        for v in range(1, n):
            deg[v] += 1
            deg[parent[v]] += 1
        out[t - start] = deg.max()


def max_degree_samples(g: Graph, trials: int, seed: int) -> np.ndarray:
    """Max degree of ``trials`` independent uniform trees of ``g``."""
    _check_connected(g)
    indptr, indices = g.csr
    out = np.empty(trials, dtype=np.int64)
    _max_degree_batch(indptr, indices, g.n, np.uint64(seed & MASK64), 0, trials, out)
    return out


@njit(cache=True, nogil=True)
def _parent_batch(indptr, indices, n, seed, start, stop, out):
    nxt = np.empty(n, dtype=np.int64)
    in_tree = np.empty(n, dtype=np.bool_)
    state = np.empty(1, dtype=np.uint64)
    for t in range(start, stop):
        state[0] = _derive(seed, np.uint64(t))
        _wilson(indptr, indices, n, state, out[t - start], nxt, in_tree)


def sample_parents(g: Graph, trials: int, seed: int) -> np.ndarray:
    """``(trials, n)`` parent arrays; row ``t`` is ``wilson_sample(g, derive_seed(seed, t))``."""
    _check_connected(g)
    indptr, indices = g.csr
    out = np.empty((trials, g.n), dtype=np.int64)
    _parent_batch(indptr, indices, g.n, np.uint64(seed & MASK64), 0, trials, out)
    return out


def parents_to_edge_masks(parents: np.ndarray, g: Graph) -> np.ndarray:
    """Encode each sampled tree as a bitmask over ``g``'s sorted edge list."""
    index = {e: i for i, e in enumerate(map(tuple, g.edge_array.tolist()))}
    if len(index) > 62:
        raise ValueError("bitmask encoding limited to 62 edges")
    bit = np.zeros((g.n, g.n), dtype=np.int64)
    for (a, b), i in index.items():
        bit[a, b] = bit[b, a] = 1 << i
    child = np.arange(1, g.n)
    return bit[child, parents[:, 1:]].sum(axis=1)
