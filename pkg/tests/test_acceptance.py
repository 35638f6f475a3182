"""Acceptance gate: one numbered check per headline result, each at a pinned tolerance.

Every test prints a PASS/FAIL line (run with ``pytest tests/test_acceptance.py
-v -s`` to watch them).  The checks live in ``homgibbs.reproduce`` so the CLI
``reproduce`` subcommand and this gate share a single source of truth.
"""

import pytest

from homgibbs import reproduce


def _check(name, fn):
    ok, report = fn()
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, report
    return report


def test_01_hinge_activities_exact_and_fast():
    rep = _check("01 hinge-activities", reproduce.hinge_activities)
    assert rep["integer_normalized"] == [49, 18, 49]
    assert rep["elapsed_s"] < 1e-3


def test_02_hinge_multiplicity():
    rep = _check("02 hinge-multiplicity", reproduce.hinge_multiplicity)
    assert rep["invariant_count"] >= 3
    assert rep["found_421"] and rep["found_124"]
    assert rep["symmetric_profile"] is not None
    assert rep["elapsed_s"] < 10.0


def test_03_conditional_symmetry_exact():
    _check("03 conditional-symmetry", reproduce.conditional_symmetry)


def test_04_stationary_fractions():
    rep = _check("04 stationary-fractions", reproduce.stationary_fractions)
    for got, want in zip(rep["green_fractions"], rep["targets"]):
        assert abs(got - want) <= 0.02


def test_05_dichotomy_crosscheck_all_graphs_up_to_5_nodes():
    rep = _check("05 dichotomy-crosscheck", reproduce.dichotomy_crosscheck)
    assert rep["mismatches"] == []
    assert rep["classes_checked"] > 400
    assert rep["elapsed_s"] < 300.0


def test_06_sterile_uniqueness():
    rep = _check("06 sterile-uniqueness", reproduce.sterile_uniqueness)
    assert rep["failures"] == []
    assert rep["cases"] == rep["sterile_classes"] * 2 * 20


def test_07_r1_uniqueness():
    rep = _check("07 r1-uniqueness", reproduce.r1_uniqueness)
    assert rep["failures"] == []
    assert rep["graphs"] == 100


def test_08_coloring_threshold():
    rep = _check("08 coloring-threshold", reproduce.coloring_threshold)
    assert rep["k2_multiple"]
    assert rep["k3_uniform_count"] == 1
    assert rep["k3_skew_count"] > 1
    assert rep["k4_uniform_count"] == 1


def test_09_weak_square_isolation():
    rep = _check("09 weak-square-isolation", reproduce.weak_square_isolation)
    assert rep["failures"] == []
    assert rep["graphs_checked"] > 0
    assert rep["elapsed_s"] < 60.0


def test_10_frozen_rigidity_and_long_range_action():
    rep = _check("10 frozen-rigidity", reproduce.frozen_rigidity)
    assert rep["extensions"] == 1
    assert rep["excluded_per_depth"] == [2] * 6


def test_11_mcmc_exactness():
    rep = _check("11 mcmc-exactness", reproduce.mcmc_exactness)
    assert rep["p_value"] > 0.001


@pytest.mark.slow
def test_12_hardcore_bimodality():
    rep = _check("12 hardcore-bimodality", reproduce.hardcore_bimodality)
    assert rep["low"]["dip_fraction"] > 0.9
    assert rep["high"]["dip_fraction"] < 0.1
    assert rep["elapsed_s"] < 600.0


def test_13_scaling_gauge_exact():
    _check("13 scaling-gauge", reproduce.scaling_gauge)


def test_14_detailed_balance_exact():
    rep = _check("14 detailed-balance", reproduce.detailed_balance)
    assert rep["cases"] == 100
