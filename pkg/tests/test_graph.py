import json

import pytest
from hypothesis import given, settings, strategies as st

from stabmetro.graph import (
    Graph,
    GraphError,
    complete,
    complete_bipartite,
    cycle,
    empty,
    is_connected,
    load_graph,
    local_complement,
    mask_of,
    members,
    neighborhood,
    path,
    standard_graph,
    star,
    twins_structure,
)


def names(g, mask):
    return {g.name(v) for v in members(mask)}


def test_neighborhood_examples(fig1a):
    assert neighborhood(fig1a, fig1a.vertex("A")) == {fig1a.vertex("C")}
    assert neighborhood(star(6), 0) == {1, 2, 3, 4, 5}
    assert neighborhood(path(3), 1) == {0, 2}


def test_fig1a_structure(fig1a):
    ts = twins_structure(fig1a)
    twins = [names(fig1a, c) for c in ts.twins_classes if c.bit_count() > 1]
    true_twins = [names(fig1a, c) for c in ts.true_twins_classes if c.bit_count() > 1]
    assert twins == [{"A", "B", "D"}]
    assert true_twins == [{"F", "G"}]
    assert names(fig1a, ts.leaves) == {"A", "B", "D", "J"}
    assert names(fig1a, ts.roots) == {"C", "I"}
    assert names(fig1a, ts.u_bar) == {"F", "G"}
    assert ts.u_set | ts.u_bar == fig1a.vertex_mask


@pytest.mark.parametrize("n", [3, 5, 8])
def test_complete_graph_single_true_twin_class(n):
    ts = twins_structure(complete(n))
    assert ts.true_twins_classes == ((1 << n) - 1,)
    assert all(c.bit_count() == 1 for c in ts.twins_classes)


def test_cycle_has_only_singletons():
    ts = twins_structure(cycle(6))
    assert all(c.bit_count() == 1 for c in ts.twins_classes + ts.true_twins_classes)
    assert ts.leaves == 0 and ts.roots == 0


def test_local_complement_examples():
    assert set(local_complement(star(5), 0).edges()) == set(complete(5).edges())
    assert set(local_complement(path(3), 1).edges()) == set(complete(3).edges())


def test_connectivity_examples(fig1a):
    assert is_connected(Graph.from_edges(2, [(0, 1)]))
    assert not is_connected(Graph.from_edges(4, [(0, 1), (2, 3)]))
    assert is_connected(fig1a)


def test_standard_graphs():
    assert star(5).degree(0) == 4
    assert all(cycle(6).degree(v) == 2 for v in range(6))
    kb = complete_bipartite(2, 3)
    assert len(kb.edges()) == 6 and not kb.has_edge(0, 1) and not kb.has_edge(2, 3)
    assert empty(4).edges() == []
    assert standard_graph("cycle", 5).edges() == cycle(5).edges()


def test_rejects_bad_edges():
    with pytest.raises(GraphError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(GraphError):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        Graph.from_edges(3, [(0, 3)])


def test_json_round_trip(fig1a, tmp_path):
    data = fig1a.to_json()
    assert Graph.from_json(json.loads(json.dumps(data))) == fig1a
    f = tmp_path / "g.json"
    f.write_text(json.dumps(data))
    assert load_graph(f) == fig1a


def test_load_graph_reports_line(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"n": 3,\n "edges": [[0, 1],]\n}')
    with pytest.raises(GraphError, match="line 2"):
        load_graph(f)


def test_mask_helpers():
    assert mask_of([0, 3]) == 0b1001
    assert members(0b1001) == [0, 3]


graphs = st.integers(2, 8).flatmap(
    lambda n: st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=20).map(
        lambda es: Graph.from_edges(n, sorted({(min(a, b), max(a, b)) for a, b in es if a != b}))
    )
)


@settings(max_examples=80, deadline=None)
@given(graphs, st.data())
def test_local_complement_is_involution(g, data):
    v = data.draw(st.integers(0, g.n - 1))
    assert local_complement(local_complement(g, v), v) == g


@settings(max_examples=80, deadline=None)
@given(graphs)
def test_twin_classes_partition_vertices(g):
    ts = twins_structure(g)
    for classes in (ts.twins_classes, ts.true_twins_classes):
        total = 0
        for c in classes:
            assert total & c == 0
            total |= c
        assert total == g.vertex_mask
    for c in ts.twins_classes:
        vs = members(c)
        assert all(g.adjacency[v] == g.adjacency[vs[0]] for v in vs)
    for c in ts.true_twins_classes:
        vs = members(c)
        assert all(g.adjacency[v] | 1 << v == g.adjacency[vs[0]] | 1 << vs[0] for v in vs)
