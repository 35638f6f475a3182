from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homgibbs import mcmc
from homgibbs.graphs import (Board, complete_graph, grid_box, hard_core,
                             hinge, path_board, tree_board)
from homgibbs.homspace import enumerate_homs, lambda_measure
from homgibbs.mcmc import (ChainState, bimodality_report, constant_config,
                           parity_config, parity_ratio_series, random_config,
                           render_ppm, run_chain, run_replicas, wr_dominance)
from homgibbs.rng import spawn_generator
from homgibbs.smallgraphs import random_connected_graph


def _valid(board, h, spins):
    return all(h.adjacent(int(spins[u]), int(spins[v])) for u, v in board.edges)


def test_constant_config():
    assert constant_config(grid_box(1, 2), hinge(), 1).tolist() == [1] * 9
    with pytest.raises(ValueError):
        constant_config(path_board(2), hard_core(), 0)  # occupied spin unlooped


def test_parity_config():
    board = grid_box(1, 2)
    h = hard_core()
    even = parity_config(board, h, 0, 1, even=True)
    assert _valid(board, h, even)
    assert sum(1 for s in even if s == 0) == 5  # 5 even sites in a 3x3 box
    odd = parity_config(board, h, 0, 1, even=False)
    assert sum(1 for s in odd if s == 0) == 4


def test_random_config_valid_and_deterministic():
    board = grid_box(2, 2)
    h = complete_graph(3)
    a = random_config(board, h, seed=5)
    b = random_config(board, h, seed=5)
    c = random_config(board, h, seed=6)
    assert _valid(board, h, a)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_single_site_update_is_activity_coin():
    # on the two-spin graph the refresh rule collapses to an occupation coin
    # with probability lam/(1+lam) when the neighborhood is free
    lam = 3.0
    cum = mcmc._legal_weight_tables(hard_core(), (lam, 1.0))
    free_mask = 0b11
    blocked_mask = 0b10  # a neighbor is occupied: only 'empty' is legal
    for coin in np.linspace(0.0, 0.999999, 101):
        pick = int(np.searchsorted(cum[free_mask], coin * cum[free_mask][-1], "right"))
        assert (pick == 0) == (coin < lam / (1 + lam))
        pick = int(np.searchsorted(cum[blocked_mask], coin * cum[blocked_mask][-1], "right"))
        assert pick == 1


def test_isolated_site_occupation_frequency():
    board = Board(1, [])
    h = hard_core()
    stats = run_chain(board, h, (1.0, 1.0), constant_config(board, h, 1),
                      sweeps=20000, seed=17, engine="python")
    occ = stats.color_counts[:, 0].mean()
    assert abs(occ - 0.5) < 0.02  # lam/(1+lam) = 1/2


def test_engines_agree_exactly():
    board = grid_box(1, 2)
    h = hinge()
    lam = (2.0, 1.0, 2.0)
    init = constant_config(board, h, 1)
    runs = {e: run_chain(board, h, lam, init, 40, seed=23, engine=e)
            for e in ("python", "numpy", "vector")}
    for e in ("numpy", "vector"):
        assert np.array_equal(runs["python"].final_spins, runs[e].final_spins)
        assert np.array_equal(runs["python"].color_counts, runs[e].color_counts)
        assert np.array_equal(runs["python"].changed, runs[e].changed)


def test_seed_determinism_and_replica_streams():
    board = grid_box(1, 2)
    h = hard_core()
    init = parity_config(board, h, 0, 1)
    a, b = (run_replicas(board, h, (2.0, 1.0), [init, init], 50, seed=9)
            for _ in range(2))
    for x, y in zip(a, b):
        assert np.array_equal(x.final_spins, y.final_spins)
    assert not np.array_equal(a[0].final_spins, a[1].final_spins)  # distinct substreams


def test_replica_ids_make_sharding_transparent():
    board = grid_box(1, 2)
    h = hard_core()
    init = parity_config(board, h, 0, 1)
    whole = run_replicas(board, h, (2.0, 1.0), [init] * 4, 30, seed=3)
    shard = run_replicas(board, h, (2.0, 1.0), [init] * 2, 30, seed=3,
                         replica_ids=[1, 3])
    assert np.array_equal(whole[1].final_spins, shard[0].final_spins)
    assert np.array_equal(whole[3].final_spins, shard[1].final_spins)


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=20, deadline=None)
def test_chain_preserves_homomorphism(seed):
    rng = spawn_generator(seed, "mcprop")
    q = int(rng.integers(2, 5))
    h = random_connected_graph(rng, q)
    n = int(rng.integers(2, 7))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
    board = Board(n, edges)
    try:
        init = random_config(board, h, seed=seed)
    except ValueError:
        return  # empty homomorphism space
    chain = ChainState(board, h, tuple(rng.uniform(0.5, 2.0, size=q)), init, seed)
    for _ in range(60):
        chain.step()
        assert _valid(board, h, chain.spins)


def test_micro_stationarity_chi_squared():
    from scipy.stats import chisquare
    board = path_board(2)
    h = hinge()
    lam = (2.0, 1.0, 1.0)
    hs = enumerate_homs(board, h)
    mu = [float(x) for x in lambda_measure(hs, (Fraction(2), 1, 1))]
    chain = ChainState(board, h, lam, constant_config(board, h, 1), seed=41)
    counts = Counter()
    for k in range(120000):
        chain.sweep()
        if k % 4 == 0:
            counts[tuple(int(s) for s in chain.spins)] += 1
    observed = np.array([counts.get(m, 0) for m in hs.maps], float)
    expected = np.array(mu) * observed.sum()
    _, p = chisquare(observed, expected)
    assert p > 0.001


def test_pinned_sites_never_move():
    board = grid_box(1, 2)
    h = hinge()
    init = constant_config(board, h, 1)
    stats = run_chain(board, h, (5.0, 1.0, 5.0), init, 200, seed=13,
                      pinned={0, 4}, engine="vector")
    assert stats.final_spins[0] == 1 and stats.final_spins[4] == 1


def test_parity_ratio_series_and_window():
    board = grid_box(2, 2)
    h = hard_core()
    stats = mcmc.hardcore_parity_runs(board, h, 1.0, replicas=4, sweeps=100,
                                      seed=31, record_every=10)
    rho = parity_ratio_series(stats[0], [0])
    assert rho.shape == (10,)
    assert np.all((0 <= rho) & (rho <= 1))
    rep = bimodality_report(stats, [0])
    assert 0.0 <= rep["dip_fraction"] <= 1.0
    assert rep["histogram"].sum() == 4


def test_parity_ratio_needs_bipartite_board():
    board = Board(3, [(0, 1), (1, 2), (0, 2)])
    h = hinge()
    stats = run_chain(board, h, (1.0, 1.0, 1.0), constant_config(board, h, 1),
                      10, seed=1, engine="python")
    with pytest.raises(ValueError):
        parity_ratio_series(stats, [0])


def test_init_parity_symmetry_on_path():
    # the reversal automorphism of an even path swaps the parity classes, so
    # even-started and odd-started runs have mirrored occupation statistics
    board = path_board(6)
    h = hard_core()
    lam = (2.0, 1.0)
    n_runs = 60
    even_final = []
    odd_final = []
    for k in range(n_runs):
        for even, sink in ((True, even_final), (False, odd_final)):
            init = parity_config(board, h, 0, 1, even=even)
            stats = run_chain(board, h, lam, init, 60, seed=1000 + k,
                              replica=int(even), engine="python")
            sink.append(float(parity_ratio_series(stats, [0])[-1]))
    gap = abs(np.mean(even_final) + np.mean(odd_final) - 1.0)
    assert gap < 0.12  # equal in distribution; finite-sample tolerance


def test_wr_dominance_desk_scale():
    board = grid_box(3, 2)
    rep = wr_dominance(board, [0.2, 8.0], replicas=10, sweeps=600, seed=7,
                       record_every=100)
    low, high = rep["rows"]
    assert low["mean_abs"] < 0.5
    assert high["mean_abs"] > 0.6
    assert high["broken_fraction"] > 0.7


def test_debug_validation_mode():
    board = grid_box(1, 2)
    h = hinge()
    stats = run_replicas(board, h, (1.0, 2.0, 1.0),
                         [constant_config(board, h, 1)] * 2, 20, seed=5,
                         record_every=5, debug_validate=True)
    assert all(_valid(board, h, s.final_spins) for s in stats)


def test_burn_in_and_mean_fractions():
    board = grid_box(1, 2)
    h = hinge()
    stats = run_chain(board, h, (1.0, 1.0, 1.0), constant_config(board, h, 1),
                      100, seed=6, engine="python")
    sl = mcmc.equilibrium_records(stats)
    assert sl == slice(20, 100)  # default burn-in discards the first 20%
    assert mcmc.equilibrium_records(stats, burn_in=0.5) == slice(50, 100)
    with pytest.raises(ValueError):
        mcmc.equilibrium_records(stats, burn_in=1.0)
    fracs = mcmc.mean_color_fractions(stats)
    assert fracs.shape == (3,)
    assert fracs.sum() == pytest.approx(1.0)


def test_large_q_guard():
    h17 = complete_graph(17)
    with pytest.raises(ValueError, match="q <= 16"):
        mcmc._legal_weight_tables(h17, (1.0,) * 17)


def test_changed_bookkeeping():
    board = path_board(4)
    h = hinge()
    stats = run_chain(board, h, (1.0, 1.0, 1.0), constant_config(board, h, 1),
                      50, seed=2, engine="numpy")
    assert stats.changed.sum() > 0
    assert stats.changed.sum() <= 50 * 4


def test_render_ppm(tmp_path):
    board = grid_box(1, 2)
    h = hard_core()
    spins = parity_config(board, h, 0, 1, even=True)
    path = tmp_path / "state.ppm"
    render_ppm(board, spins, path, cell=2, parity_spin=0, blank_spins=(1,))
    data = path.read_bytes()
    assert data.startswith(b"P6\n6 6\n255\n")
    img = np.frombuffer(data.split(b"255\n", 1)[1], dtype=np.uint8).reshape(6, 6, 3)
    # empty sites are white; occupied cells are not
    assert (img == 255).all(axis=2).sum() == 4 * 4  # 4 odd sites x 2x2 cells
    # parity shading makes all occupied cells one (darkened) color here
    occ_colors = {tuple(px) for row in img for px in row if tuple(px) != (255, 255, 255)}
    assert len(occ_colors) == 1


def test_render_blank_spins(tmp_path):
    board = grid_box(1, 2)
    h = hinge()
    spins = constant_config(board, h, 1)
    path = tmp_path / "yellow.ppm"
    render_ppm(board, spins, path, cell=1, blank_spins=(1,))
    img = np.frombuffer(path.read_bytes().split(b"255\n", 1)[1], np.uint8)
    assert (img == 255).all()  # unoccupied sites left uncolored


def test_render_requires_grid(tmp_path):
    with pytest.raises(ValueError):
        render_ppm(tree_board(2, 2), [0] * 10, tmp_path / "x.ppm")
