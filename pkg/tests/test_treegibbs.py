from fractions import Fraction

import pytest

from homgibbs.graphs import (ConstraintGraph, complete_graph, hard_core,
                             hinge, single_looped_node, tree_board)
from homgibbs.homspace import count_tree_extensions
from homgibbs.rng import spawn_generator
from homgibbs.smallgraphs import random_connected_graph
from homgibbs.treegibbs import (BranchingWalk, TreeConfig,
                                conditional_spin_distributions,
                                frozen_coloring, long_range_action_probe,
                                sample_walk_config, semi_invariant_from_double,
                                weights_to_activities)


def test_hinge_activities_exact():
    act = weights_to_activities(hinge(), 2, (4, 2, 1))
    assert act.values == (Fraction(1, 9), Fraction(2, 49), Fraction(1, 9))
    assert act.as_integers() == (49, 18, 49)


def test_reversed_weights_same_activities():
    a = weights_to_activities(hinge(), 2, (4, 2, 1))
    b = weights_to_activities(hinge(), 2, (1, 2, 4))
    assert a.as_integers() == b.as_integers() == (49, 18, 49)


def test_single_looped_node_activity():
    for r in (1, 2, 5):
        assert weights_to_activities(single_looped_node(), r, (1,)).values == (Fraction(1),)


def test_hard_core_activity_ratio():
    # z_occupied = w_empty, z_empty = w_empty + w_occupied
    for r in (1, 2, 3):
        for w_occ in (Fraction(1, 2), Fraction(3), Fraction(7, 5)):
            act = weights_to_activities(hard_core(), r, (w_occ, 1))
            assert act[0] / act[1] == w_occ * (1 + w_occ) ** r


def test_isolated_node_error():
    h = ConstraintGraph(2, [(0, 0)])  # node 1 has no neighbors
    with pytest.raises(ValueError, match="[Ii]solated"):
        weights_to_activities(h, 2, (1, 1))


def test_walk_transition_rows_are_stochastic():
    rng = spawn_generator(11, "walk")
    for _ in range(10):
        q = int(rng.integers(2, 6))
        h = random_connected_graph(rng, q)
        w = tuple(Fraction(int(rng.integers(1, 30)), int(rng.integers(1, 9)))
                  for _ in range(q))
        bw = BranchingWalk(h, 2, w)
        for i in range(q):
            assert sum(bw.transition[i]) == 1
            for j in range(q):
                assert (bw.transition[i][j] > 0) == h.adjacent(i, j)


def test_detailed_balance_and_stationarity_exact():
    rng = spawn_generator(12, "db")
    for _ in range(15):
        q = int(rng.integers(2, 6))
        h = random_connected_graph(rng, q)
        w = tuple(Fraction(int(rng.integers(1, 50)), int(rng.integers(1, 11)))
                  for _ in range(q))
        bw = BranchingWalk(h, 2, w)
        pi, P = bw.stationary, bw.transition
        for i in range(q):
            for j in range(q):
                assert pi[i] * P[i][j] == pi[j] * P[j][i]
        for j in range(q):
            assert sum(pi[i] * P[i][j] for i in range(q)) == pi[j]


def test_hinge_stationary_fractions():
    assert BranchingWalk(hinge(), 2, (4, 2, 1)).stationary[0] == Fraction(24, 41)
    assert BranchingWalk(hinge(), 2, (1, 2, 4)).stationary[0] == Fraction(3, 41)


def test_sampling_is_reproducible_and_valid():
    bw = BranchingWalk(hinge(), 2, (4, 2, 1))
    a = sample_walk_config(bw, 4, seed=321)
    b = sample_walk_config(bw, 4, seed=321)
    c = sample_walk_config(bw, 4, seed=322)
    assert a.spins == b.spins
    assert a.spins != c.spins
    a.validate(hinge())


def test_sampling_rejects_bipartite():
    bw = BranchingWalk(complete_graph(2), 2, (1, 1))
    with pytest.raises(ValueError, match="2H"):
        sample_walk_config(bw, 2, seed=0)


def test_root_spin_frequencies_match_stationary():
    bw = BranchingWalk(hinge(), 2, (4, 2, 1))
    pi = [float(p) for p in bw.stationary]
    n = 20000
    counts = [0, 0, 0]
    for k in range(n):
        counts[sample_walk_config(bw, 0, seed=k).spins[0]] += 1
    for s in range(3):
        sd = (n * pi[s] * (1 - pi[s])) ** 0.5
        assert abs(counts[s] - n * pi[s]) < 3.5 * sd


def test_conditional_symmetry_all_yellow():
    bw = BranchingWalk(hinge(), 2, (4, 2, 1))
    walk_d, gibbs_d = conditional_spin_distributions(bw, (1, 1, 1))
    assert walk_d == gibbs_d
    assert walk_d[0] == walk_d[2] == Fraction(49, 116)
    # the displayed identity behind it
    assert Fraction(4, 7) * Fraction(2, 6) ** 2 == Fraction(1, 7) * Fraction(2, 3) ** 2


def test_conditional_parent_choice_irrelevant():
    bw = BranchingWalk(hinge(), 2, (4, 2, 1))
    a, _ = conditional_spin_distributions(bw, (0, 1, 1))
    b, _ = conditional_spin_distributions(bw, (1, 0, 1))
    assert a == b


def test_conditional_hard_core_coin():
    # with every neighbor empty, occupation probability is lam/(1+lam) for the
    # induced activity ratio lam = w_occ (1 + w_occ)^r
    for r in (1, 2, 3):
        bw = BranchingWalk(hard_core(), r, (Fraction(3, 2), 1))
        lam = weights_to_activities(hard_core(), r, (Fraction(3, 2), 1))
        walk_d, gibbs_d = conditional_spin_distributions(bw, (1,) * (r + 1))
        assert walk_d == gibbs_d
        assert gibbs_d[0] == lam[0] / (lam[0] + lam[1])  # occupation odds


def test_conditional_forced_spin():
    bw = BranchingWalk(complete_graph(3), 2, (1, 1, 1))
    walk_d, gibbs_d = conditional_spin_distributions(bw, (1, 2, 2))
    assert walk_d == gibbs_d == (1, 0, 0)


def test_conditional_impossible_context():
    bw = BranchingWalk(complete_graph(3), 2, (1, 1, 1))
    with pytest.raises(ValueError, match="probability zero"):
        conditional_spin_distributions(bw, (0, 1, 2))  # no color avoids all three


def test_frozen_coloring_structure():
    cfg = frozen_coloring(2, 3, seed=7)
    k3 = complete_graph(3)
    cfg.validate(k3)
    board = cfg.board
    children = [[] for _ in range(board.n_sites)]
    for u, p in enumerate(board.parents):
        if p >= 0:
            children[p].append(u)
    for u in range(board.n_sites):
        if not children[u]:
            continue
        shown = {cfg.spins[c] for c in children[u]}
        assert shown == {c for c in range(3) if c != cfg.spins[u]}


def test_frozen_coloring_determinism_and_q_check():
    assert frozen_coloring(2, 3, seed=5).spins == frozen_coloring(2, 3, seed=5).spins
    with pytest.raises(ValueError):
        frozen_coloring(2, 3, q=4)


def test_frozen_coloring_rigid():
    cfg = frozen_coloring(2, 3, seed=9)
    depths = cfg.board.site_depths
    pinned = {u: cfg.spins[u] for u in range(cfg.board.n_sites) if depths[u] == 3}
    assert count_tree_extensions(cfg.board, complete_graph(3), pinned) == 1


def test_probe_k3_frozen():
    rep = long_range_action_probe(complete_graph(3), 2, 4)
    assert rep.has_long_range_action
    assert all(len(row) == 2 for row in rep.excluded)
    # the achievable spin is exactly the frozen root spin at every depth
    assert all(len(row) == 1 for row in rep.achievable)


def test_probe_dismantlable_no_action():
    board = tree_board(2, 3)
    cfg = TreeConfig(board=board, r=2, spins=(1,) * board.n_sites,
                     root_source="conditioned")
    rep = long_range_action_probe(hard_core(), 2, 3, config=cfg)
    assert not rep.has_long_range_action
    assert all(not row for row in rep.excluded)


def test_probe_bipartite_parity_forcing():
    # 2-colorings of the doubly-infinite path: the sphere pins the root's part
    rep = long_range_action_probe(complete_graph(2), 1, 5)
    assert rep.has_long_range_action
    assert all(len(row) == 1 for row in rep.excluded)


def test_probe_requires_config_for_general_graphs():
    with pytest.raises(ValueError, match="configuration"):
        long_range_action_probe(hinge(), 2, 3)


def test_double_projection_proportional_weights():
    rep = semi_invariant_from_double(hinge(), 2, (4, 2, 1, 4, 2, 1))
    assert rep.activity_proportional
    assert rep.weight_proportional
    assert rep.h_activities.as_integers() == (49, 18, 49)


def test_double_projection_generic_weights_invalid():
    rep = semi_invariant_from_double(hinge(), 2, (4, 2, 1, 1, 5, 2))
    assert not rep.activity_proportional
    assert not rep.weight_proportional
    assert rep.h_activities is None


def test_double_projection_from_chiral_solution():
    from homgibbs.treegibbs import solve_fundamental
    k3 = complete_graph(3)
    sols = solve_fundamental(k3, 3, (1, 1, 1), starts=120, seed=0)
    chiral = [s for s in sols if not s.invariant]
    assert chiral  # uniform 3-colorings of the 3-branching tree split
    s = chiral[0]
    rep = semi_invariant_from_double(k3, 3, s.even_weights + s.odd_weights,
                                     rel_tol=1e-7)
    assert rep.activity_proportional
    assert not rep.weight_proportional
