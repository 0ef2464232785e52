import itertools

import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from treeunion.graph import Graph

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES = []


def all_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, [pairs[i] for i in range(len(pairs)) if mask >> i & 1])


def canonical_form(g):
    """Lexicographically smallest relabelled edge list (brute force, n <= 6)."""
    best = None
    for perm in itertools.permutations(range(g.n)):
        key = tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in g.edges))
        if best is None or key < best:
            best = key
    return best


def connected_classes(n):
    """One representative per isomorphism class of connected graphs on n vertices."""
    seen = {}
    for g in all_graphs(n):
        if g.is_connected():
            seen.setdefault(canonical_form(g), g)
    return list(seen.values())


@st.composite
def connected_graphs(draw, min_n=2, max_n=7):
    """Random connected graph: a random spanning tree plus random extra edges."""
    n = draw(st.integers(min_n, max_n))
    order = draw(st.permutations(range(n)))
    edges = set()
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.add(tuple(sorted((order[i], order[j]))))
    extra = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n * 2))
    edges |= {tuple(sorted(e)) for e in extra if e[0] != e[1]}
    return Graph.from_edges(n, edges)


def random_connected(rng: np.random.Generator, n: int, p: float = 0.5) -> Graph:
    while True:
        pairs = np.array(list(itertools.combinations(range(n), 2)))
        g = Graph.from_edges(n, pairs[rng.random(len(pairs)) < p])
        if g.is_connected():
            return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
