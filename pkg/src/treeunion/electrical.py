"""Unit-resistance electrical networks on graphs.

Current is injected at ``a`` and extracted at ``b`` with ``v(b) = 0``; the
grounded Laplacian minor is factored densely (Cholesky).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .graph import Graph, norm_edge

PIVOT_FLOOR = 1e-12
RESIDUAL_TOL = 1e-9


class NoPathError(ValueError):
    """Source and sink lie in different components."""


@dataclass(frozen=True)
class ElectricalSolution:
    a: int
    b: int
    voltages: np.ndarray
    currents: dict  # (u, w) -> current from u to w, both orientations present

    def current(self, u: int, w: int) -> float:
        return self.currents[(u, w)]

    def net_outflow(self, v: int, g: Graph) -> float:
        return sum(self.currents[(v, int(w))] for w in g.adjacency[v])


def _check_pair(g: Graph, a: int, b: int) -> None:
    if a == b:
        raise ValueError("source and sink must differ")
    if not (0 <= a < g.n and 0 <= b < g.n):
        raise ValueError("vertex out of range")
    comp = g.components()
    if comp[a] != comp[b]:
        raise NoPathError(f"no path between {a} and {b}")


def _voltages(g: Graph, a: int, b: int) -> np.ndarray:
    _check_pair(g, a, b)
    # restrict to the component so the grounded minor is nonsingular
    comp = g.components()
    verts = np.flatnonzero(comp == comp[a])
    lap = g.laplacian()[np.ix_(verts, verts)]
    keep = verts != b
    minor = lap[np.ix_(keep, keep)]
    diag = minor.diagonal()
    rhs = (verts[keep] == a).astype(np.float64)
    factor = cho_factor(minor, lower=True, check_finite=False)
    piv = np.diag(factor[0]) ** 2
    if piv.min() <= PIVOT_FLOOR * diag.max():
        raise NoPathError("numerically disconnected")
    sol = cho_solve(factor, rhs, check_finite=False)
    resid = np.abs(minor @ sol - rhs).max()
    if resid > RESIDUAL_TOL * g.n:
        raise ArithmeticError(f"solver residual {resid:.3g} above tolerance")
    v = np.zeros(g.n)
    v[verts[keep]] = sol
    return v


def solve_unit_current(g: Graph, a: int, b: int) -> ElectricalSolution:
    v = _voltages(g, a, b)
    currents = {}
    for u, w in g.edge_array.tolist():
        i = float(v[u] - v[w])
        currents[(u, w)] = i
        currents[(w, u)] = -i
    return ElectricalSolution(a=a, b=b, voltages=v, currents=currents)


def effective_resistance(g: Graph, a: int, b: int) -> float:
    return float(_voltages(g, a, b)[a])


def edge_inclusion_probability(g: Graph, e: Sequence[int]) -> float:
    """Probability that a uniform spanning tree of ``g`` contains ``e``.

    By Kirchhoff this is the current through ``e`` under a unit injection
    across its endpoints, i.e. ``v(a) - v(b)`` for unit resistance.
    """
    a, b = norm_edge(*e)
    if not g.has_edge(a, b):
        raise ValueError(f"edge {(a, b)} not in graph")
    if not g.is_connected():
        raise NoPathError("graph is disconnected")
    return float(_voltages(g, a, b)[a])


def combine_series(rs: Sequence[float]) -> float:
    if len(rs) == 0:
        raise ValueError("need at least one resistance")
    return float(sum(rs))


def combine_parallel(rs: Sequence[float]) -> float:
    if len(rs) == 0:
        raise ValueError("need at least one resistance")
    if any(r <= 0 for r in rs):
        raise ValueError("resistances must be positive")
    return 1.0 / sum(1.0 / r for r in rs)


def common_neighbors(g: Graph, a: int, b: int) -> int:
    adj = g.adjacency_matrix
    return int(np.count_nonzero(adj[a] & adj[b]))


def two_path_inclusion_bound(g: Graph, e: Sequence[int]) -> float:
    """``2/(c+2)`` where ``c`` counts common neighbours of the endpoints.

    The edge in parallel with ``c`` two-edge paths is a subnetwork of ``g``;
    its current through ``e`` is ``2/(c+2)`` and can only drop when the rest
    of ``g`` is added back.
    """
    a, b = norm_edge(*e)
    if not g.has_edge(a, b):
        raise ValueError(f"edge {(a, b)} not in graph")
    c = common_neighbors(g, a, b)
    return combine_parallel([1.0] + [combine_series([1.0, 1.0])] * c)
