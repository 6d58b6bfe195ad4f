import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hampower.gadgets import LowerBoundSpec, lower_bound_graph
from hampower.graph import (
    GraphError,
    blow_up,
    complete_graph,
    difference,
    dumps_edge_list,
    empty_graph,
    from_adjacency,
    joint_neighborhood,
    loads_edge_list,
    loads_labels,
    make_graph,
    members,
    min_degree,
    power_cycle,
    power_cycle_edge_count,
    power_path,
    power_path_edge_count,
    union,
    vertex_set,
    worst_joint_neighborhoods,
)


def cycle(n):
    return make_graph(n, [(i, (i + 1) % n) for i in range(n)])


def test_make_graph_dedups():
    g = make_graph(3, [(0, 1), (1, 2), (0, 1)])
    assert g.edge_count == 2
    assert make_graph(1, []).edge_count == 0
    assert make_graph(4, itertools.combinations(range(4), 2)).edge_count == 6


@pytest.mark.parametrize("edges", [[(0, 3)], [(1, 1)], [(-1, 0)]])
def test_make_graph_rejects(edges):
    with pytest.raises(GraphError):
        make_graph(3, edges)


def test_union_examples():
    k4_minus = make_graph(4, [e for e in itertools.combinations(range(4), 2) if e != (0, 1)])
    assert union(k4_minus, make_graph(4, [(0, 1)])) == complete_graph(4)
    g = cycle(6)
    assert union(g, empty_graph(6)) == g
    # rotating the labels of C_5 by one maps the edge set onto itself
    c5 = cycle(5)
    rotated = make_graph(5, [((u + 1) % 5, (v + 1) % 5) for u, v in c5.edges()])
    oracle = {frozenset(e) for e in c5.edges()} | {frozenset(e) for e in rotated.edges()}
    assert union(c5, rotated).edge_count == len(oracle) == 5
    with pytest.raises(GraphError):
        union(cycle(5), cycle(6))


def graphs_on(n):
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])
    return st.lists(pairs, max_size=20).map(lambda es: make_graph(n, es))


graphs = st.integers(2, 9).flatmap(graphs_on)


@given(st.integers(2, 9).flatmap(lambda n: st.tuples(graphs_on(n), graphs_on(n), graphs_on(n))))
@settings(max_examples=60, deadline=None)
def test_union_laws(triple):
    g, h, k = triple
    assert union(g, h) == union(h, g)
    assert union(g, g) == g
    assert union(union(g, h), k) == union(g, union(h, k))
    assert difference(union(g, h), h).is_subgraph_of(g)


def test_power_examples():
    assert power_cycle(5, 2) == complete_graph(5)
    assert power_path(27, 8).edge_count == 180
    assert power_path(4, 1).edge_count == 3


def test_power_path_edge_formula_grid():
    for m in range(1, 9):
        for s in range(m + 1, 31):
            # forward-neighbour oracle: vertex i sees min(m, s-1-i) later vertices
            oracle = sum(min(m, s - 1 - i) for i in range(s))
            assert power_path(s, m).edge_count == oracle == m * s - m * (m + 1) // 2
            assert power_path_edge_count(s, m) == oracle


def test_power_cycle_edges_and_windows():
    for m in range(1, 6):
        for n in range(3, 25):
            g = power_cycle(n, m)
            assert g.edge_count == power_cycle_edge_count(n, m)
            if n <= 2 * m + 1:
                assert g == complete_graph(n)
            else:
                assert g.edge_count == n * m
            for start in range(n):
                window = [(start + i) % n for i in range(min(m + 1, n))]
                assert all(g.has_edge(a, b) for a, b in itertools.combinations(window, 2))


def test_blow_up():
    edge = make_graph(2, [(0, 1)])
    k22 = blow_up(edge, [2, 2])
    assert k22.graph.edge_count == 4
    assert k22.graph == make_graph(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
    assert blow_up(edge, [1, 1]).graph == edge
    big = blow_up(power_path(9, 2), [3] * 9)
    assert big.n == 27
    assert big.graph.edge_count == 9 * power_path(9, 2).edge_count
    assert big.vertices_with(segment=4) == [12, 13, 14]
    assert blow_up(edge, [0, 3]).graph.edge_count == 0
    with pytest.raises(GraphError):
        blow_up(edge, [1])


@given(graphs)
@settings(max_examples=40, deadline=None)
def test_blow_up_identity(g):
    assert blow_up(g, [1] * g.n).graph == g


def test_joint_neighborhood():
    k5 = complete_graph(5)
    assert set(members(joint_neighborhood(k5, 0b11))) == {2, 3, 4}
    assert set(members(joint_neighborhood(cycle(6), vertex_set([0, 2])))) == {1}
    assert joint_neighborhood(empty_graph(4), 0b101) == 0
    with pytest.raises(GraphError):
        joint_neighborhood(k5, 0)


@given(graphs, st.data())
@settings(max_examples=40, deadline=None)
def test_joint_neighborhood_antitone(g, data):
    v = data.draw(st.integers(0, g.n - 1))
    assert joint_neighborhood(g, 1 << v) == g.rows[v]
    small = data.draw(st.integers(1, g.full_mask))
    extra = data.draw(st.integers(0, g.full_mask))
    big = small | extra
    assert joint_neighborhood(g, big) & ~joint_neighborhood(g, small) == 0


def test_min_degree():
    assert min_degree(complete_graph(4)) == 3
    assert min_degree(make_graph(5, [(0, i) for i in range(1, 5)])) == 1
    g = lower_bound_graph(LowerBoundSpec(12, 1, Fraction(1, 16)))
    degs = [sum(g.has_edge(v, u) for u in range(12)) for v in range(12)]
    assert min_degree(g) == min(degs) == 7


def test_worst_joint_neighborhoods():
    g = lower_bound_graph(LowerBoundSpec(12, 1, Fraction(1, 16)))
    worst = worst_joint_neighborhoods(g, 2)
    assert worst[1][0] == 7
    brute = min(len([u for u in range(12) if g.has_edge(a, u) and g.has_edge(b, u)]) for a, b in itertools.combinations(range(12), 2))
    assert worst[2][0] == brute


def test_from_adjacency_roundtrip():
    rng = np.random.default_rng(0)
    a = np.triu(rng.random((70, 70)) < 0.3, 1)
    a = a | a.T
    g = from_adjacency(a)
    assert np.array_equal(g.adjacency_matrix(), a)
    with pytest.raises(GraphError):
        from_adjacency(np.eye(3, dtype=bool))


def test_edge_list_io():
    g = power_cycle(7, 2)
    assert loads_edge_list(dumps_edge_list(g)) == g
    with pytest.raises(GraphError):
        loads_edge_list("3 2\n0 1\n1 0\n")
    with pytest.raises(GraphError):
        loads_edge_list("3 1\n1 1\n")
    with pytest.raises(GraphError):
        loads_edge_list("3 2\n0 1\n")
    with pytest.raises(GraphError):
        loads_edge_list("3 1\n0 x\n")
    assert loads_edge_list("3 2\n0 1\n1 0\n2 2\n", strict=False).edge_count == 1


def test_labels_roundtrip():
    g = blow_up(power_path(3, 1), [2, 1, 2])
    assert loads_labels(g.dumps_labels()) == g.labels


def test_induced_and_shift():
    g = power_path(6, 2)
    h = g.induced([1, 2, 3])
    assert h == complete_graph(3)
    s = complete_graph(3).shifted(2, 6)
    assert s.is_subgraph_of(g)
    with pytest.raises(GraphError):
        complete_graph(3).shifted(5, 6)
