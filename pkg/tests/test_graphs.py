import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homgibbs.graphs import (ActivityVector, Board,
                             GraphFormatError, WeightVector, bipartite_double,
                             complete_board, complete_graph, cycle_graph,
                             export_dot, graph_from_json_dict,
                             graph_to_json_dict, grid_box, hard_core, hinge,
                             is_bipartite, load_graph, path_board, path_graph,
                             proportional, save_graph, single_looped_node,
                             standard_board, standard_graph, tree_board,
                             weak_square, weak_square_projections)
from homgibbs.rng import spawn_generator
from homgibbs.smallgraphs import random_connected_graph


def test_hard_core_shape():
    h = hard_core()
    assert h.q == 2
    assert h.edges == ((0, 1), (1, 1))
    assert not h.is_looped(0)
    assert h.is_looped(1)
    assert h.labels == ("occupied", "empty")


def test_hinge_shape():
    h = hinge()
    assert h.q == 3
    assert h.loops == (0, 1, 2)
    assert h.adjacent(0, 1) and h.adjacent(1, 2)
    assert not h.adjacent(0, 2)  # green-red is the one missing edge
    assert h.labels == ("green", "yellow", "red")


def test_complete_graph():
    k3 = complete_graph(3)
    assert k3.q == 3
    assert k3.edges == ((0, 1), (0, 2), (1, 2))
    assert not k3.loops
    k2l = complete_graph(2, looped=True)
    assert k2l.loops == (0, 1)


def test_cycle_and_path():
    c5 = cycle_graph(5)
    assert len(c5.edges) == 5
    p4 = path_graph(4, looped=True)
    assert len(p4.edges) == 3 + 4
    assert single_looped_node().edges == ((0, 0),)
    with pytest.raises(ValueError):
        cycle_graph(2)
    with pytest.raises(ValueError):
        path_graph(0)


def test_standard_graph_dispatch():
    assert standard_graph("hinge").q == 3
    assert standard_graph("complete", 4).q == 4
    assert standard_graph("K", 3).edges == complete_graph(3).edges
    with pytest.raises(ValueError):
        standard_graph("nope")


def test_grid_box_counts():
    b = grid_box(1, 2)
    assert b.n_sites == 9
    assert len(b.edges) == 12
    assert grid_box(0, 3).n_sites == 1
    b3 = grid_box(1, 3)
    assert b3.n_sites == 27
    assert len(b3.edges) == 3 * 9 * 2  # 2 bonds per axis per line of 3


def test_grid_box_adjacency_is_l1():
    b = grid_box(2, 2)
    idx = {c: k for k, c in enumerate(b.coords)}
    assert b.adjacent(idx[(0, 0)], idx[(0, 1)])
    assert not b.adjacent(idx[(0, 0)], idx[(1, 1)])


def test_site_cap():
    with pytest.raises(ValueError, match="cap"):
        grid_box(3000, 2, cap=10**6)
    with pytest.raises(ValueError, match="cap"):
        tree_board(3, 20, cap=10**5)


def test_tree_board_counts():
    assert tree_board(2, 2).n_sites == 10  # 1 + 3 + 6
    assert tree_board(2, 0).n_sites == 1
    for k in range(4):
        assert tree_board(1, k).n_sites == 2 * k + 1  # r=1 is the path


@pytest.mark.parametrize("r", [2, 3])
@pytest.mark.parametrize("depth", [0, 1, 2, 3, 4])
def test_tree_board_closed_form(r, depth):
    expect = 1 + (r + 1) * (r**depth - 1) // (r - 1)
    b = tree_board(r, depth)
    assert b.n_sites == expect
    assert len(b.edges) == b.n_sites - 1
    assert b.is_tree()


def test_tree_prefix_property():
    deep = tree_board(2, 4)
    shallow = tree_board(2, 2)
    assert deep.parents[:shallow.n_sites] == shallow.parents


def test_weak_square_hard_core():
    b = weak_square(hard_core())
    # sites are pairs (i1, i2) indexed i1*q + i2; only (1,1) could loop and is dropped
    assert b.n_sites == 4
    assert b.edges == ((0, 3), (1, 2), (1, 3), (2, 3))


def test_weak_square_k2():
    b = weak_square(complete_graph(2))
    assert b.n_sites == 4
    assert b.edges == ((0, 3), (1, 2))


def test_weak_square_projections_are_homomorphisms():
    rng = spawn_generator(41, "ws")
    for _ in range(50):
        h = random_connected_graph(rng, int(rng.integers(1, 6)))
        b = weak_square(h)
        assert b.n_sites == h.q * h.q
        pi1, pi2 = weak_square_projections(h)
        for u, v in b.edges:
            assert h.adjacent(pi1[u], pi1[v])
            assert h.adjacent(pi2[u], pi2[v])


def test_double_of_looped_node_is_k2():
    d = bipartite_double(single_looped_node())
    assert d.q == 2
    assert d.edges == ((0, 1),)
    assert not d.loops


def test_double_k3_is_k33_minus_matching():
    d = bipartite_double(complete_graph(3))
    assert d.q == 6
    expect = {(i, 3 + j) for i in range(3) for j in range(3) if i != j}
    assert set(d.edges) == expect


def test_double_hinge():
    d = bipartite_double(hinge())
    assert d.q == 6
    assert is_bipartite(d)[0]
    # each loop becomes a +i/-i edge
    for i in range(3):
        assert d.adjacent(i, 3 + i)


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=25, deadline=None)
def test_double_always_bipartite(seed):
    rng = spawn_generator(seed, "double")
    h = random_connected_graph(rng, int(rng.integers(1, 7)))
    d = bipartite_double(h)
    assert d.q == 2 * h.q
    ok, parts = is_bipartite(d)
    assert ok
    assert not d.loops


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=25, deadline=None)
def test_adjacency_symmetric(seed):
    rng = spawn_generator(seed, "sym")
    h = random_connected_graph(rng, int(rng.integers(1, 8)))
    for i in range(h.q):
        for j in range(h.q):
            assert h.adjacent(i, j) == h.adjacent(j, i)


def test_is_bipartite_cases():
    assert is_bipartite(complete_graph(2))[0]
    assert not is_bipartite(hinge())[0]  # loops force false
    assert not is_bipartite(cycle_graph(5))[0]
    ok, parts = is_bipartite(cycle_graph(4))
    assert ok and sorted(map(len, parts)) == [2, 2]
    assert is_bipartite(grid_box(2, 2))[0]


def test_board_parity_matches_coordinates():
    b = grid_box(2, 2)
    for u, c in enumerate(b.coords):
        assert b.site_parity[u] == sum(c) % 2
    assert tree_board(2, 3).site_parity == tuple(d % 2 for d in tree_board(2, 3).site_depths)


def test_board_rejects_loops():
    with pytest.raises(GraphFormatError):
        Board(3, [(0, 0)])


def test_roundtrip_constraint(tmp_path):
    h = hinge()
    p = tmp_path / "hinge.json"
    save_graph(h, p)
    assert load_graph(p) == h


def test_roundtrip_board(tmp_path):
    b = tree_board(2, 3)
    p = tmp_path / "tree.json"
    save_graph(b, p)
    b2 = load_graph(p)
    assert b2 == b
    assert b2.parents == b.parents
    g = grid_box(2, 2)
    save_graph(g, tmp_path / "grid.json")
    assert load_graph(tmp_path / "grid.json").coords == g.coords


def test_asymmetric_adjacency_rejected():
    mat = [[0, 1], [0, 0]]  # 0->1 without 1->0
    with pytest.raises(GraphFormatError, match="asymmetric"):
        graph_from_json_dict({"type": "constraint", "adjacency": mat})


def test_adjacency_matrix_accepted():
    mat = [[1, 1], [1, 0]]
    h = graph_from_json_dict({"type": "constraint", "adjacency": mat})
    assert h.edges == ((0, 0), (0, 1))


def test_loops_illegal_on_board_json():
    with pytest.raises(GraphFormatError, match="constraint"):
        graph_from_json_dict({"type": "board", "q": 2, "edges": [[0, 1]], "loops": [0]})


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(GraphFormatError):
        load_graph(p)
    with pytest.raises(GraphFormatError):
        graph_from_json_dict({"type": "constraint", "q": 2, "edges": [[0, 5]]})
    with pytest.raises(GraphFormatError):
        graph_from_json_dict({"q": 2})


def test_labels_roundtrip():
    d = graph_to_json_dict(hinge())
    assert d["labels"]["0"] == "green"
    h2 = graph_from_json_dict(json.loads(json.dumps(d)))
    assert h2.labels == ("green", "yellow", "red")


def test_export_dot():
    dot = export_dot(complete_graph(3))
    assert dot.count(" -- ") == 3
    assert "0 -- 0" not in dot
    hdot = export_dot(hinge())
    assert "0 -- 0;" in hdot  # loops render as self-edges
    assert "green" in hdot
    bdot = export_dot(path_board(3))
    assert bdot.count(" -- ") == 2


def test_positive_vectors():
    with pytest.raises(ValueError):
        WeightVector((1, 0, 2))
    with pytest.raises(ValueError):
        ActivityVector(())
    w = WeightVector((2, 4))
    assert w.normalized().values == (pytest.approx(1 / 3), pytest.approx(2 / 3))


def test_activity_integer_normalization():
    from fractions import Fraction
    a = ActivityVector((Fraction(1, 9), Fraction(2, 49), Fraction(1, 9)))
    assert a.as_integers() == (49, 18, 49)
    assert ActivityVector((Fraction(2), Fraction(4))).as_integers() == (1, 2)
    with pytest.raises(ValueError):
        ActivityVector((0.5, 1.0)).as_integers()


def test_proportional():
    from fractions import Fraction
    assert proportional((1, 2, 3), (2, 4, 6))
    assert not proportional((1, 2, 3), (2, 4, 7))
    assert proportional((Fraction(1, 3), Fraction(1, 6)), (2, 1))
    assert proportional((1.0, 2.0), (1.0 + 1e-12, 2.0), rel_tol=1e-9)


def test_standard_board_dispatch(tmp_path):
    assert standard_board("grid_box", 1, 2).n_sites == 9
    assert standard_board("tree", 2, 1).n_sites == 4
    assert standard_board("path", 5).n_sites == 5
    assert standard_board("complete", 4).n_sites == 4
    p = tmp_path / "b.json"
    save_graph(path_board(3), p)
    assert standard_board("from_file", str(p)).n_sites == 3
    with pytest.raises(ValueError):
        standard_board("nope")


def test_relabel():
    h = hinge()
    g = h.relabel((2, 1, 0))
    assert g.labels == ("red", "yellow", "green")
    assert not g.adjacent(0, 2)
    assert g.adjacent(0, 1)


def test_complete_board():
    b = complete_board(4)
    assert len(b.edges) == 6
    assert b.is_connected()
