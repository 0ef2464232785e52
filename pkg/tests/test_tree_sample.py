import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from conftest import connected_graphs
from treeunion.electrical import edge_inclusion_probability
from treeunion.graph import Graph, make_complete, make_cycle, make_path, make_star
from treeunion.tree_count import enumerate_spanning_trees
from treeunion.tree_sample import (UniformTree, max_degree_samples, moon_tail_bound, weighted_wilson_sample,
                                   parents_to_edge_masks, sample_k_trees, sample_parents,
                                   tree_max_degree, wilson_sample)

SIG = 1e-3


def assert_spanning_tree(t: UniformTree, g: Graph):
    assert t.parent[0] == -1
    assert len(t.edges) == g.n - 1
    assert t.edges <= g.edges
    assert Graph.from_edges(g.n, t.edges).is_connected()


def uniformity_pvalue(g, trials, seed):
    trees = enumerate_spanning_trees(g)
    index = {t: i for i, t in enumerate(trees)}
    masks = parents_to_edge_masks(sample_parents(g, trials, seed), g)
    order = sorted(g.edges)
    tree_masks = [sum(1 << order.index(e) for e in t) for t in trees]
    lookup = {m: i for i, m in enumerate(tree_masks)}
    counts = np.bincount([lookup[int(m)] for m in masks], minlength=len(trees))
    assert len(index) == len(trees)
    return chisquare(counts).pvalue


def test_tree_input_returns_itself():
    for g in (make_path(6), make_star(7), Graph.from_edges(5, [(0, 3), (3, 1), (1, 4), (4, 2)])):
        for s in range(5):
            assert wilson_sample(g, s).edges == g.edges


def test_single_vertex_and_disconnected():
    assert wilson_sample(make_complete(1), 0).edges == frozenset()
    with pytest.raises(ValueError):
        wilson_sample(Graph.from_edges(3, [(0, 1)]), 0)
    with pytest.raises(ValueError):
        sample_k_trees(make_complete(3), 0, 0)


@given(connected_graphs(max_n=9), st.integers(0, 2 ** 64 - 1))
def test_samples_are_spanning_trees(g, seed):
    assert_spanning_tree(wilson_sample(g, seed), g)


def test_determinism():
    g = make_complete(12)
    assert wilson_sample(g, 99) == wilson_sample(g, 99)
    assert sample_k_trees(g, 4, 3) == sample_k_trees(g, 4, 3)
    assert len({wilson_sample(g, s).edges for s in range(20)}) > 1


def test_batch_matches_single():
    g = make_cycle(7)
    par = sample_parents(g, 30, 5)
    from treeunion._rng import derive_seed
    for t in range(30):
        assert tuple(par[t]) == wilson_sample(g, derive_seed(5, t)).parent


def test_k3_uniform():
    assert uniformity_pvalue(make_complete(3), 30000, 1) > SIG


def test_k3_pairs_uniform():
    g = make_complete(3)
    counts = Counter(tuple(tuple(sorted(t.edges)) for t in sample_k_trees(g, 2, s)) for s in range(9000))
    assert len(counts) == 9
    assert chisquare(list(counts.values())).pvalue > SIG
    assert len(sample_k_trees(g, 1, 0)) == 1


def test_each_of_k_trees_uniform_on_k4():
    g = make_complete(4)
    trees = enumerate_spanning_trees(g)
    for j in range(3):
        counts = Counter(sample_k_trees(g, 3, s)[j].edges for s in range(8000))
        assert chisquare([counts[t] for t in trees]).pvalue > SIG


@settings(max_examples=25)
@given(connected_graphs(min_n=3, max_n=6), st.integers(0, 1000))
def test_uniform_on_small_tree_families(g, seed):
    trees = enumerate_spanning_trees(g)
    if len(trees) < 2 or len(trees) > 16:
        return
    assert uniformity_pvalue(g, 400 * len(trees), seed) > SIG


@pytest.mark.parametrize("g", [make_complete(5), make_cycle(5), make_complete(4).without_edge(2, 3)],
                         ids=["K5", "C5", "K4-e"])
def test_edge_marginals_match_kirchhoff(g):
    trials = 100_000
    masks = parents_to_edge_masks(sample_parents(g, trials, 17), g)
    for i, e in enumerate(sorted(g.edges)):
        p = edge_inclusion_probability(g, e)
        freq = float(np.mean((masks >> i) & 1))
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(freq - p) <= 4 * se + 1e-12


def test_max_degree_examples():
    assert tree_max_degree(wilson_sample(make_path(5), 0)) == 2
    assert tree_max_degree(wilson_sample(make_star(9), 0)) == 8
    assert tree_max_degree(wilson_sample(make_complete(2), 0)) == 1


def test_moon_bound_examples():
    assert moon_tail_bound(16, 4) == pytest.approx(2 / 3)
    assert moon_tail_bound(50, 1) == 1.0
    assert moon_tail_bound(100, 10) == pytest.approx(100 / 3628800)
    with pytest.raises(ValueError):
        moon_tail_bound(1, 3)
    with pytest.raises(ValueError):
        moon_tail_bound(5, 0)


@pytest.mark.slow
def test_moon_bound_holds_on_k100():
    trials = 1_000_000
    bound = moon_tail_bound(100, 10)
    freq = float(np.mean(max_degree_samples(make_complete(100), trials, 23) > 10))
    assert freq <= bound + 3 * math.sqrt(bound * (1 - bound) / trials)


def test_batch_degrees_match_trees():
    g = make_complete(10)
    par = sample_parents(g, 50, 4)
    degs = max_degree_samples(g, 50, 4)
    for t in range(50):
        assert degs[t] == tree_max_degree(UniformTree(tuple(int(x) for x in par[t])))


def test_weighted_sampler_follows_weight_product():
    g = make_complete(4)
    w = np.ones((4, 4)) - np.eye(4)
    w[0, 1] = w[1, 0] = 3.0
    w[2, 3] = w[3, 2] = 0.5
    trees = enumerate_spanning_trees(g)
    weight = np.array([np.prod([w[a, b] for a, b in t]) for t in trees])
    counts = Counter(weighted_wilson_sample(w, s).edges for s in range(30_000))
    obs = np.array([counts[t] for t in trees])
    assert chisquare(obs, weight / weight.sum() * obs.sum()).pvalue > SIG


def test_weighted_sampler_zero_weights_are_absent_edges():
    w = make_cycle(5).adjacency_matrix.astype(float)
    for s in range(20):
        assert weighted_wilson_sample(w, s).edges <= make_cycle(5).edges
    with pytest.raises(ValueError):
        weighted_wilson_sample(np.array([[0, 1.0], [2.0, 0]]), 0)
    with pytest.raises(ValueError):
        weighted_wilson_sample(np.zeros((3, 3)), 0)
