from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim_consensus.errors import BudgetExceededError
from selfsim_consensus.graphs import (
    Family,
    Graph,
    GraphSpec,
    bfs_diameter,
    build_graph,
    build_hierarchical,
    build_sierpinski,
    degree_histogram,
    hierarchical_degree_counts,
    is_connected,
    laplacian_dense,
    read_edgelist,
    read_json,
    write_edgelist,
    write_json,
)

H, S = Family.HIERARCHICAL, Family.SIERPINSKI

small_specs = st.builds(
    GraphSpec,
    st.sampled_from([H, S]),
    st.integers(1, 5),
    st.integers(3, 5),
).filter(lambda s: s.num_vertices <= 700)


def sierpinski_adjacent(p: tuple, q: tuple) -> bool:
    """Adjacency predicate on tuples, written independently of the builder."""
    n = len(p)
    for h in range(n):
        if p[:h] == q[:h] and p[h] != q[h]:
            return all(p[i] == q[h] and q[i] == p[h] for i in range(h + 1, n))
    return False


# -- examples ------------------------------------------------------------------------


def test_hierarchical_base_is_triangle():
    g = build_hierarchical(GraphSpec(H, 1, 3))
    assert (g.num_vertices, g.num_edges) == (3, 3)
    assert g.degrees.tolist() == [2, 2, 2]


def test_hierarchical_counts_and_histogram():
    g = build_hierarchical(GraphSpec(H, 2, 3))
    assert (g.num_vertices, g.num_edges) == (9, 12)
    assert degree_histogram(g) == {2: 6, 4: 3}
    g3 = build_hierarchical(GraphSpec(H, 3, 3))
    assert degree_histogram(g3) == {2: 18, 4: 6, 6: 3}


def test_hierarchical_hubs_are_first_clique():
    g = build_hierarchical(GraphSpec(H, 4, 3))
    assert g.degrees[:3].tolist() == [8, 8, 8]
    assert g.degrees[3:].max() < 8


def test_sierpinski_base_is_triangle():
    g = build_sierpinski(GraphSpec(S, 1, 3))
    assert g.edges.tolist() == [[0, 1], [0, 2], [1, 2]]


def test_sierpinski_extreme_vertices():
    g = build_sierpinski(GraphSpec(S, 2, 3))
    assert (g.num_vertices, g.num_edges) == (9, 12)
    labels = [tuple(r) for r in g.labels.tolist()]
    low = sorted(labels[v] for v in np.flatnonzero(g.degrees == 2))
    assert low == [(1, 1), (2, 2), (3, 3)]
    assert int(np.sum(g.degrees == 3)) == 6


def test_sierpinski_predicate_enumeration_s23():
    g = build_sierpinski(GraphSpec(S, 2, 3))
    labels = [tuple(r) for r in g.labels.tolist()]
    expected = {
        (min(a, b), max(a, b))
        for a, b in itertools.combinations(range(9), 2)
        if sierpinski_adjacent(labels[a], labels[b])
    }
    assert len(expected) == 12
    assert {tuple(e) for e in g.edges.tolist()} == expected
    idx = {lab: i for i, lab in enumerate(labels)}
    nb = {labels[v] for v in g.neighbors()[idx[(1, 2)]].tolist()}
    assert nb == {(2, 1), (1, 1), (1, 3)}


@pytest.mark.parametrize("n,k", [(3, 3), (2, 4), (3, 4), (2, 5)])
def test_sierpinski_predicate_enumeration(n, k):
    g = build_sierpinski(GraphSpec(S, n, k))
    labels = [tuple(r) for r in g.labels.tolist()]
    expected = {
        (a, b)
        for a, b in itertools.combinations(range(g.num_vertices), 2)
        if sierpinski_adjacent(labels[a], labels[b])
    }
    assert {tuple(e) for e in g.edges.tolist()} == expected


def test_degree_histograms():
    assert degree_histogram(build_graph(GraphSpec(S, 3, 3))) == {2: 3, 3: 24}
    for k in (3, 4, 5):
        assert degree_histogram(build_graph(GraphSpec(S, 1, k))) == {k - 1: k}


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_sierpinski_diameter(n):
    assert bfs_diameter(build_graph(GraphSpec(S, n, 3))) == 2**n - 1


def test_hierarchical_diameter_logarithmic():
    for n in (1, 2, 3, 4):
        assert bfs_diameter(build_graph(GraphSpec(H, n, 3))) <= 2 * n


def test_laplacian_k3():
    lap = laplacian_dense(build_graph(GraphSpec(H, 1, 3)))
    assert lap.tolist() == [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]


# -- invariants ------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(small_specs)
def test_structural_invariants(spec):
    g = build_graph(spec)
    g.validate()
    assert g.num_vertices == spec.k**spec.n
    assert g.num_edges == (spec.k ** (spec.n + 1) - spec.k) // 2
    assert int(g.degrees.sum()) == 2 * g.num_edges
    assert is_connected(g)
    e = g.edges
    assert np.all(e[:, 0] < e[:, 1])
    assert np.all(np.lexsort((e[:, 1], e[:, 0])) == np.arange(len(e)))


@settings(max_examples=40, deadline=None)
@given(small_specs)
def test_laplacian_properties(spec):
    lap = laplacian_dense(build_graph(spec))
    assert np.array_equal(lap, lap.T)
    assert np.all(lap.sum(axis=1) == 0)
    assert np.trace(lap) == 2 * spec.num_edges


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("k", [3, 4, 5])
def test_degree_sequences(n, k):
    if k**n > 20_000:
        pytest.skip("large")
    assert degree_histogram(build_graph(GraphSpec(H, n, k))) == hierarchical_degree_counts(n, k)
    if n >= 2:
        assert degree_histogram(build_graph(GraphSpec(S, n, k))) == {k - 1: k, k: k**n - k}


def test_deterministic_build():
    a = build_graph(GraphSpec(S, 5, 4))
    b = build_graph(GraphSpec(S, 5, 4))
    assert np.array_equal(a.edges, b.edges)
    assert a.edges.tobytes() == b.edges.tobytes()


# -- errors and I/O --------------------------------------------------------------------


@pytest.mark.parametrize("n,k", [(0, 3), (2, 2), (-1, 4)])
def test_invalid_spec(n, k):
    with pytest.raises(ValueError):
        GraphSpec(H, n, k)


def test_budget_enforced_at_build():
    spec = GraphSpec(S, 10, 5)
    with pytest.raises(BudgetExceededError):
        build_graph(spec)
    with pytest.raises(BudgetExceededError):
        build_graph(GraphSpec(H, 4, 3), budget=80)


def test_wrong_family_rejected():
    with pytest.raises(ValueError):
        build_hierarchical(GraphSpec(S, 2, 3))
    with pytest.raises(ValueError):
        build_sierpinski(GraphSpec(H, 2, 3))


def test_family_parse():
    assert Family.parse("hier") is H
    assert Family.parse("Sierpinski") is S
    with pytest.raises(ValueError):
        Family.parse("tree")


def test_roundtrip(tmp_path):
    g = build_graph(GraphSpec(H, 3, 4))
    write_edgelist(g, tmp_path / "g.txt")
    write_json(g, tmp_path / "g.json")
    for back in (read_edgelist(tmp_path / "g.txt"), read_json(tmp_path / "g.json")):
        assert back.spec == g.spec
        assert np.array_equal(back.edges, g.edges)
    head = (tmp_path / "g.txt").read_text().splitlines()[0]
    assert head.startswith("#") and "n=3" in head and "k=4" in head


def test_validate_catches_corruption():
    g = build_graph(GraphSpec(S, 2, 3))
    dup = Graph.from_edges(g.spec, 9, np.vstack([g.edges, g.edges[:1]]))
    with pytest.raises(ValueError):
        dup.validate()
    cut = Graph.from_edges(g.spec, 9, g.edges[:-1])
    with pytest.raises(ValueError):
        cut.validate()
