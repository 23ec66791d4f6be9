"""Randomized property checks shared by the property and acceptance suites.

Each check runs a seeded loop of independent random cases and raises
AssertionError on the first violation; callers choose the case count
(the acceptance gate requires at least 1,000 per property).
"""

from __future__ import annotations

import random

from proxyaudit.audiences import AudienceSpec
from proxyaudit.reach import NoiseModel, SyntheticBackend
from proxyaudit.skew import (Leaning, SkewScore, SkewThresholds,
                             classify_tertile, compute_skew)
from proxyaudit.synthworld import Member, Population


def random_counts(rng):
    n_a = rng.randint(1, 10 ** 6)
    n_b = rng.randint(1, 10 ** 6)
    return rng.randint(0, n_a), n_a, rng.randint(0, n_b), n_b


def check_skew_antisymmetry(n_cases, seed=101):
    rng = random.Random(seed)
    for _ in range(n_cases):
        n_a_i, n_a, n_b_i, n_b = random_counts(rng)
        forward = compute_skew(n_a_i, n_a, n_b_i, n_b)
        backward = compute_skew(n_b_i, n_b, n_a_i, n_a)
        if forward.value is None:
            assert backward.value is None
        else:
            assert forward.value == -backward.value


def check_skew_scale_invariance(n_cases, seed=102):
    rng = random.Random(seed)
    for _ in range(n_cases):
        n_a_i, n_a, n_b_i, n_b = random_counts(rng)
        k = rng.randint(1, 1000)
        base = compute_skew(n_a_i, n_a, n_b_i, n_b)
        scaled_a = compute_skew(n_a_i * k, n_a * k, n_b_i, n_b)
        scaled_b = compute_skew(n_a_i, n_a, n_b_i * k, n_b * k)
        assert scaled_a.value == base.value
        assert scaled_b.value == base.value


def check_skew_bounds(n_cases, seed=103):
    rng = random.Random(seed)
    for _ in range(n_cases):
        score = compute_skew(*random_counts(rng))
        if score.value is not None:
            assert -1.0 <= score.value <= 1.0


def _monotonicity_world(rng):
    interests = ["int%d" % i for i in range(8)]
    members = []
    for i in range(300):
        held = frozenset(x for x in interests if rng.random() < 0.4)
        members.append(Member("m%03d" % i, "REP", "WHITE",
                              rng.random() < 0.8, held))
    return Population(tuple(members), tuple(interests)), interests


def check_conjunction_monotonicity(n_cases, seed=104):
    rng = random.Random(seed)
    population, interests = _monotonicity_world(rng)
    ids = [m.id for m in population.members]
    cases = 0
    while cases < n_cases:
        mode = rng.choice(["off", "round2", "gaussian"])
        noise = NoiseModel(mode=mode,
                           sigma=rng.uniform(0.0, 0.4) if mode == "gaussian" else 0.0,
                           seed=rng.randrange(10 ** 6))
        backend = SyntheticBackend(population, noise)
        for _ in range(20):
            size = rng.randint(1, len(ids))
            label = "AUD%d" % rng.randrange(10 ** 6)
            audience = AudienceSpec(label, set(rng.sample(ids, size)), 0, size)
            interest = rng.choice(interests)
            assert backend.estimate(audience, interest) <= backend.estimate(audience)
            cases += 1


def check_tertile_rules(n_cases, seed=105):
    thresholds = SkewThresholds(-0.073, 0.063)
    rng = random.Random(seed)
    for _ in range(n_cases):
        # Cluster draws near the cut points to stress the boundaries.
        value = rng.choice([
            rng.uniform(-1, 1),
            -0.073 + rng.uniform(-0.01, 0.01),
            0.063 + rng.uniform(-0.01, 0.01),
            -0.073, 0.063,
        ])
        score = SkewScore(value, "RD", 1000, 10000, 1000, 10000)
        leaning = classify_tertile(score, thresholds)
        if value < -0.073:
            assert leaning is Leaning.DEMOCRATIC_SKEW
        elif value >= 0.063:
            assert leaning is Leaning.REPUBLICAN_SKEW
        else:
            assert leaning is Leaning.NEUTRAL


def check_tertile_perturbation_stability(n_cases, seed=108):
    """Moving a value by less than its distance to the nearest cut point
    never changes the class."""
    thresholds = SkewThresholds(-0.073, 0.063)
    rng = random.Random(seed)
    for _ in range(n_cases):
        value = rng.uniform(-1, 1)
        gap = min(abs(value - thresholds.democratic_below),
                  abs(value - thresholds.republican_at_or_above))
        if gap == 0:
            continue
        delta = rng.uniform(-0.99, 0.99) * gap
        before = classify_tertile(SkewScore(value, "RD", 100, 1000, 100, 1000),
                                  thresholds)
        after = classify_tertile(SkewScore(value + delta, "RD", 100, 1000, 100, 1000),
                                 thresholds)
        assert before is after, (value, delta)


def check_pearson_invariances(n_cases, seed=109):
    """Pearson r is symmetric in its arguments and invariant under
    positive affine transforms of either axis."""
    from scipy import stats as scipy_stats

    rng = random.Random(seed)
    cases = 0
    while cases < n_cases:
        n = rng.randint(3, 12)
        xs = [rng.uniform(-5, 5) for _ in range(n)]
        ys = [rng.uniform(-5, 5) for _ in range(n)]
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            continue
        r = scipy_stats.pearsonr(xs, ys).statistic
        assert scipy_stats.pearsonr(ys, xs).statistic == approx_equal(r)
        a, b = rng.uniform(0.1, 10), rng.uniform(-100, 100)
        transformed = scipy_stats.pearsonr([a * x + b for x in xs], ys).statistic
        assert transformed == approx_equal(r)
        cases += 1


def approx_equal(value, tolerance=1e-9):
    import pytest
    return pytest.approx(value, abs=tolerance)


def spend_skew(spend_r, spend_d):
    return (spend_r - spend_d) / (spend_r + spend_d)


def check_spend_skew_antisymmetry(n_cases, seed=106):
    rng = random.Random(seed)
    for _ in range(n_cases):
        r = rng.randint(0, 10 ** 9)
        d = rng.randint(0, 10 ** 9)
        if r + d == 0:
            continue
        assert spend_skew(r, d) == -spend_skew(d, r)


def check_spend_skew_scale_invariance(n_cases, seed=107):
    rng = random.Random(seed)
    for _ in range(n_cases):
        r = rng.randint(0, 10 ** 6)
        d = rng.randint(0, 10 ** 6)
        if r + d == 0:
            continue
        k = rng.randint(1, 10 ** 3)
        assert spend_skew(r * k, d * k) == spend_skew(r, d)
