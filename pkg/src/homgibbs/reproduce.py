"""Packaged experiments with pinned expectations.

Each experiment re-derives one of the library's headline results and checks it
against its expected outcome, returning (ok, report).  The CLI exposes them as
``homgibbs reproduce <id>``; the acceptance test suite runs the same functions
so there is a single source of truth for the expectations.
"""

from __future__ import annotations

import time
from collections import Counter
from fractions import Fraction

import numpy as np

from . import classify, mcmc
from .graphs import (complete_graph, grid_box, hard_core, hinge, is_bipartite,
                     path_board, weak_square, weak_square_projections)
from .homspace import (count_tree_extensions, enumerate_homs, is_isolated_map,
                       lambda_measure)
from .rng import spawn_generator
from .smallgraphs import graph_classes, random_connected_graph
from .treegibbs import (BranchingWalk, conditional_spin_distributions,
                        frozen_coloring, long_range_action_probe,
                        semi_invariant_measures, solve_fundamental,
                        solve_invariant_weights, weights_to_activities)

# the symmetric hinge weighting that shares the (49,18,49) activity vector with
# (4,2,1) and (1,2,4); computed by the solver and pinned here as regression
# data (it matches the positive root of 72 x^3 + 23 x^2 - 80 x - 49 to 2e-16,
# with weights (x, 1, x) normalized)
HINGE_SYMMETRIC_PROFILE = (0.34886560535714767, 0.3022687892857046, 0.34886560535714767)


def hinge_activities():
    """Weights (4,2,1) on the hinge at r=2 give activities exactly (49,18,49)."""
    t0 = time.perf_counter()
    act = weights_to_activities(hinge(), 2, (4, 2, 1))
    ints = act.as_integers()
    elapsed = time.perf_counter() - t0
    ok = ints == (49, 18, 49) and elapsed < 1e-3
    return ok, {"activities": [str(x) for x in act.values],
                "integer_normalized": list(ints), "elapsed_s": elapsed}


def hinge_multiplicity():
    """At least three invariant solutions at activities (49,18,49), r=2, with
    the two known weightings recovered to 1e-8 and one green-red symmetric."""
    t0 = time.perf_counter()
    sols = solve_fundamental(hinge(), 2, (49, 18, 49), starts=200, seed=0)
    elapsed = time.perf_counter() - t0
    inv = [s for s in sols if s.invariant]

    def matches(profile, target):
        t = np.array(target, dtype=float)
        t /= t.sum()
        return max(abs(a - b) for a, b in zip(profile, t)) < 1e-8

    found_421 = any(matches(s.weight_profile, (4, 2, 1)) for s in inv)
    found_124 = any(matches(s.weight_profile, (1, 2, 4)) for s in inv)
    symmetric = [s for s in inv
                 if abs(s.weight_profile[0] - s.weight_profile[2]) < 1e-8]
    ok = (len(inv) >= 3 and found_421 and found_124 and bool(symmetric)
          and elapsed < 10.0)
    return ok, {
        "invariant_count": len(inv),
        "total_count": len(sols),
        "profiles": [list(s.weight_profile) for s in inv],
        "found_421": found_421,
        "found_124": found_124,
        "symmetric_profile": list(symmetric[0].weight_profile) if symmetric else None,
        "elapsed_s": elapsed,
    }


def conditional_symmetry():
    """Surrounded by yellow, green and red are conditionally equiprobable under
    weights (4,2,1): exact rational identity."""
    bw = BranchingWalk(hinge(), 2, (4, 2, 1))
    walk_d, gibbs_d = conditional_spin_distributions(bw, (1, 1, 1))
    hand = Fraction(4, 7) * Fraction(2, 6)**2, Fraction(1, 7) * Fraction(2, 3)**2
    ok = (walk_d[0] == walk_d[2] and walk_d == gibbs_d and hand[0] == hand[1])
    return ok, {"walk_conditional": [str(x) for x in walk_d],
                "gibbs_conditional": [str(x) for x in gibbs_d]}


def stationary_fractions():
    """A priori green fractions for the three hinge weightings: about
    0.59, 0.30 (symmetric, solver-derived) and 0.07."""
    targets = [
        ((4, 2, 1), 0.59),
        (HINGE_SYMMETRIC_PROFILE, 0.30),
        ((1, 2, 4), 0.07),
    ]
    got = []
    ok = True
    for w, target in targets:
        pi = BranchingWalk(hinge(), 2, w).stationary
        green = float(pi[0])
        got.append(green)
        ok = ok and abs(green - target) <= 0.02
    # the pinned symmetric profile must itself still solve the equations
    sols = solve_fundamental(hinge(), 2, (49, 18, 49), starts=50, seed=1)
    sym = [s for s in sols if s.invariant
           and abs(s.weight_profile[0] - s.weight_profile[2]) < 1e-8]
    ok = ok and sym and max(abs(a - b) for a, b in
                            zip(sym[0].weight_profile, HINGE_SYMMETRIC_PROFILE)) < 1e-6
    return bool(ok), {"green_fractions": got, "targets": [t for _, t in targets]}


def dichotomy_crosscheck(max_nodes=5):
    """dismantle() succeeds exactly when the game solver says cop-win, over all
    connected graphs with an edge on <= max_nodes nodes, all loop patterns."""
    t0 = time.perf_counter()
    n_checked = 0
    mismatches = []
    for h in graph_classes(max_nodes):
        n_checked += 1
        d = classify.dismantle(h) is not None
        c = classify.cop_win(h)
        if d != c:
            mismatches.append((h.q, h.edges, d, c))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 300.0
    return ok, {"classes_checked": n_checked, "mismatches": mismatches,
                "elapsed_s": elapsed}


def _sterile_classes(max_nodes=4):
    out = []
    for h in graph_classes(max_nodes):
        if not classify.is_fertile(h)[0]:
            out.append(h)
    return out


def sterile_uniqueness(lambdas_per_case=20):
    """Every sterile graph on <= 4 nodes has exactly one invariant solution
    class at every tested activity vector (multi-start non-discovery of a
    second one; evidence, not proof).

    Bipartite sterile graphs are solved on the invariant subsystem directly,
    since the full solver routes them through the double.
    """
    rng = spawn_generator(2024, "sterile")
    failures = []
    cases = 0
    for h in _sterile_classes(4):
        bip = is_bipartite(h)[0]
        for r in (2, 3):
            for _ in range(lambdas_per_case):
                lam = tuple(float(x) for x in rng.uniform(0.2, 5.0, size=h.q))
                cases += 1
                if bip:
                    n_inv = len(solve_invariant_weights(h, r, lam, starts=60))
                else:
                    sols = solve_fundamental(h, r, lam, starts=60)
                    n_inv = sum(1 for s in sols if s.invariant)
                if n_inv != 1:
                    failures.append((h.q, h.edges, r, lam, n_inv))
    ok = not failures
    return ok, {"sterile_classes": len(_sterile_classes(4)), "cases": cases,
                "failures": failures[:5]}


def r1_uniqueness(n_graphs=100):
    """On the doubly-infinite path (r=1) every activity vector has exactly one
    solution class; checked over random connected non-bipartite graphs."""
    rng = spawn_generator(77, "r1")
    failures = []
    for _ in range(n_graphs):
        q = int(rng.integers(2, 7))
        h = random_connected_graph(rng, q, force_loop=True)
        lam = tuple(float(x) for x in rng.uniform(0.2, 4.0, size=q))
        sols = solve_fundamental(h, 1, lam, starts=60)
        if len(sols) != 1:
            failures.append((q, h.edges, lam, len(sols)))
    return not failures, {"graphs": n_graphs, "failures": failures[:5]}


def coloring_threshold():
    """Proper q-colorings of the r=2 tree: q=2 (via the double) multiple at
    uniform activities, q=3 unique at uniform but multiple off-uniform, q=4
    unique at uniform."""
    k2 = semi_invariant_measures(complete_graph(2), 2, (1, 1), starts=60)
    k3_uni = solve_fundamental(complete_graph(3), 2, (1, 1, 1), starts=120, seed=0)
    k3_skew = solve_fundamental(complete_graph(3), 2, (2, 1, 1), starts=120, seed=0)
    k4_uni = solve_fundamental(complete_graph(4), 2, (1, 1, 1, 1), starts=120, seed=0)
    ok = (k2.bipartite and k2.multiple
          and len(k3_uni) == 1
          and len(k3_skew) > 1
          and len(k4_uni) == 1)
    return ok, {
        "k2_count": k2.count, "k2_multiple": k2.multiple,
        "k3_uniform_count": len(k3_uni),
        "k3_skew_count": len(k3_skew),
        "k4_uniform_count": len(k4_uni),
    }


def weak_square_isolation(max_nodes=4):
    """For connected non-dismantlable graphs without any fold pair, the first
    projection is an isolated point of hom(weak_square(H), H)."""
    t0 = time.perf_counter()
    checked = []
    failures = []
    for h in graph_classes(max_nodes):
        if classify.find_fold(h) is not None or classify.dismantle(h) is not None:
            continue
        board = weak_square(h)
        pi1, _ = weak_square_projections(h)
        checked.append((h.q, h.edges))
        if not is_isolated_map(board, h, pi1):
            failures.append((h.q, h.edges))
    elapsed = time.perf_counter() - t0
    ok = not failures and bool(checked) and elapsed < 60.0
    return ok, {"graphs_checked": len(checked), "failures": failures,
                "elapsed_s": elapsed}


def frozen_rigidity():
    """The frozen 3-coloring of the depth-4 binary-ish tree is the unique
    extension of its own boundary, and the long range action probe pins the
    root spin at every depth <= 6."""
    k3 = complete_graph(3)
    cfg = frozen_coloring(2, 4, seed=5)
    cfg.validate(k3)
    depths = cfg.board.site_depths
    pinned = {u: cfg.spins[u] for u in range(cfg.board.n_sites) if depths[u] == 4}
    n_ext = count_tree_extensions(cfg.board, k3, pinned)
    probe = long_range_action_probe(k3, 2, 6, config=frozen_coloring(2, 6, seed=5))
    excluded_counts = [len(row) for row in probe.excluded]
    ok = (n_ext == 1 and probe.has_long_range_action
          and all(c == 2 for c in excluded_counts))
    return ok, {"extensions": n_ext,
                "excluded_per_depth": excluded_counts,
                "always_excluded": list(probe.always_excluded)}


def mcmc_exactness(sweeps=1_000_000):
    """Long-run state frequencies of the chain on the two-site board match the
    exact activity measure 1:2:2 (chi-squared, p > 0.001)."""
    from scipy.stats import chisquare

    board = path_board(2)
    h = hard_core()
    hs = enumerate_homs(board, h)
    mu = lambda_measure(hs, (2, 1))
    chain = mcmc.ChainState(board, h, (2.0, 1.0), mcmc.constant_config(board, h, 1),
                            seed=2718)
    counts = Counter()
    thin = 5  # a few sweeps decorrelate this two-site chain
    for k in range(sweeps):
        chain.sweep()
        if k % thin == 0:
            counts[tuple(int(s) for s in chain.spins)] += 1
    observed = np.array([counts.get(m, 0) for m in hs.maps], dtype=float)
    expected = np.array([float(p) for p in mu]) * observed.sum()
    stat, p = chisquare(observed, expected)
    ok = bool(p > 0.001)
    return ok, {"states": [list(m) for m in hs.maps],
                "expected_fractions": [str(x) for x in mu],
                "observed_fractions": list(observed / observed.sum()),
                "chi2": float(stat), "p_value": float(p), "sweeps": sweeps}


def hardcore_bimodality(replicas=200, sweeps=10_000):
    """Parity symmetry on the 31x31 box: retained at activity 0.5, broken at
    5.0 (final even-fraction histogram leaves the central window)."""
    t0 = time.perf_counter()
    board = grid_box(15, 2)
    h = hard_core()
    out = {}
    for lam, key in ((0.5, "low"), (5.0, "high")):
        stats = mcmc.hardcore_parity_runs(board, h, lam, replicas, sweeps, seed=90125)
        rep = mcmc.bimodality_report(stats, occupied_spins=[0])
        out[key] = {"lambda": lam, "dip_fraction": rep["dip_fraction"]}
    elapsed = time.perf_counter() - t0
    ok = (out["low"]["dip_fraction"] > 0.9 and out["high"]["dip_fraction"] < 0.1
          and elapsed < 600.0)
    out["elapsed_s"] = elapsed
    return ok, out


def scaling_gauge(cases=40):
    """weights_to_activities(c*w) equals c^(1-r) * weights_to_activities(w)
    exactly, over random rational weights and r in {1,2,3}."""
    rng = spawn_generator(5, "gauge")
    failures = 0
    for _ in range(cases):
        q = int(rng.integers(2, 6))
        h = random_connected_graph(rng, q)
        w = tuple(Fraction(int(rng.integers(1, 60)), int(rng.integers(1, 12)))
                  for _ in range(q))
        c = Fraction(int(rng.integers(1, 30)), int(rng.integers(1, 10)))
        for r in (1, 2, 3):
            base = weights_to_activities(h, r, w).values
            scaled = weights_to_activities(h, r, tuple(c * x for x in w)).values
            if any(scaled[i] != c**(1 - r) * base[i] for i in range(q)):
                failures += 1
    return failures == 0, {"cases": cases, "failures": failures}


def detailed_balance(cases=100):
    """pi_i p_ij == pi_j p_ji exactly for random rational node weightings."""
    rng = spawn_generator(6, "balance")
    failures = 0
    for _ in range(cases):
        q = int(rng.integers(2, 7))
        h = random_connected_graph(rng, q)
        w = tuple(Fraction(int(rng.integers(1, 90)), int(rng.integers(1, 15)))
                  for _ in range(q))
        bw = BranchingWalk(h, 2, w)
        pi = bw.stationary
        P = bw.transition
        for i in range(q):
            for j in range(q):
                if pi[i] * P[i][j] != pi[j] * P[j][i]:
                    failures += 1
    return failures == 0, {"cases": cases, "failures": failures}


EXPERIMENTS = {
    "hinge-activities": hinge_activities,
    "hinge-multiplicity": hinge_multiplicity,
    "conditional-symmetry": conditional_symmetry,
    "stationary-fractions": stationary_fractions,
    "dichotomy-crosscheck": dichotomy_crosscheck,
    "sterile-uniqueness": sterile_uniqueness,
    "r1-uniqueness": r1_uniqueness,
    "coloring-threshold": coloring_threshold,
    "weak-square-isolation": weak_square_isolation,
    "frozen-rigidity": frozen_rigidity,
    "mcmc-exactness": mcmc_exactness,
    "hardcore-bimodality": hardcore_bimodality,
    "scaling-gauge": scaling_gauge,
    "detailed-balance": detailed_balance,
}


def run_experiment(name):
    try:
        fn = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; "
                         f"known: {sorted(EXPERIMENTS)}") from None
    return fn()
