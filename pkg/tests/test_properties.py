"""Randomized invariant suites (1,000+ cases each)."""

import property_checks as pc

N = 1000


def test_skew_statistic_antisymmetry():
    pc.check_skew_antisymmetry(N)


def test_skew_statistic_scale_invariance():
    pc.check_skew_scale_invariance(N)


def test_skew_statistic_bounds():
    pc.check_skew_bounds(N)


def test_conjunction_monotonicity():
    pc.check_conjunction_monotonicity(N)


def test_tertile_boundary_rules():
    pc.check_tertile_rules(N)


def test_spend_skew_antisymmetry():
    pc.check_spend_skew_antisymmetry(N)


def test_spend_skew_scale_invariance():
    pc.check_spend_skew_scale_invariance(N)


def test_tertile_perturbation_stability():
    pc.check_tertile_perturbation_stability(N)


def test_pearson_symmetry_and_affine_invariance():
    pc.check_pearson_invariances(N)
