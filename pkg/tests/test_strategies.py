import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phaseconj.phase_space import GaussianPrior, conjugate, quadratures
from phaseconj.strategies import (
    ScenarioConfig,
    correspondence_gap,
    local_estimate,
    local_fidelity_bound,
    nonlocal_estimate,
    nonlocal_fidelity_bound,
    nonlocal_gain,
    run_local_mc,
    run_nonlocal_mc,
)

SAMPLES = 10**6


@pytest.mark.parametrize(
    "n, lam, expected",
    [(2, 0, Fraction(2, 3)), (1, 0, Fraction(1, 2)), (2, 1, Fraction(3, 4))],
)
def test_local_bound(n, lam, expected):
    assert local_fidelity_bound(n, lam) == pytest.approx(float(expected), abs=1e-15)


@pytest.mark.parametrize(
    "n, lam, expected",
    [(2, 0, Fraction(4, 5)), (2, 1, Fraction(5, 6)), (4, 0, Fraction(8, 9))],
)
def test_nonlocal_bound(n, lam, expected):
    assert nonlocal_fidelity_bound(n, lam) == pytest.approx(float(expected), abs=1e-15)


def test_nonlocal_bound_rejects_odd_n():
    with pytest.raises(ValueError):
        nonlocal_fidelity_bound(3, 0)


@pytest.mark.parametrize("n, lam", [(2, 0), (2, 0.7), (6, 3)])
def test_correspondence_gap_zero(n, lam):
    assert abs(correspondence_gap(n, lam)) <= 1e-15


@given(st.integers(1, 200).map(lambda k: 2 * k), st.floats(0, 1e3))
def test_bound_properties(n, lam):
    fl, fn = local_fidelity_bound(n, lam), nonlocal_fidelity_bound(n, lam)
    assert fn > fl
    assert abs(correspondence_gap(n, lam)) <= 1e-15
    assert local_fidelity_bound(n + 2, lam) > fl
    assert nonlocal_fidelity_bound(n + 2, lam) > fn
    assert local_fidelity_bound(n, lam + 0.5) > fl
    assert fl < 1 and fn < 1


def test_local_estimate_examples():
    b = 0.3 - 0.4j
    assert local_estimate([b, b], [False, False], 0) == pytest.approx(b)
    b1, b2 = 1 + 2j, -0.5 + 0.25j
    assert local_estimate([b1, b2], [False, True], 0) == pytest.approx((b1 + conjugate(b2)) / 2)
    assert local_estimate([2 + 0j], [False], 1) == pytest.approx(1 + 0j)
    with pytest.raises(ValueError):
        local_estimate([], [], 0)
    with pytest.raises(ValueError):
        local_estimate([1], [False, True], 0)


def test_nonlocal_estimate_unity_gain():
    alpha = 0.7 - 1.3j
    x_a, p_a = quadratures(alpha)
    est = nonlocal_estimate(2 * x_a, 2 * p_a, 2, 0)
    assert abs(est - alpha) < 1e-15
    assert nonlocal_estimate(0, 0, 2, 0) == 0
    assert nonlocal_gain(2, 1) == pytest.approx(2 * math.sqrt(2) / 5)
    # n = 4: two pairs concentrate to |sqrt2 a>|sqrt2 a*>, u = 2 sqrt2 x_a
    est = nonlocal_estimate(2 * math.sqrt(2) * x_a, 2 * math.sqrt(2) * p_a, 4, 0)
    assert abs(est - alpha) < 1e-14
    with pytest.raises(ValueError):
        nonlocal_estimate(1, 1, 3, 0)


def test_scenario_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(2, GaussianPrior(0.0))  # flat prior needs fixed-alpha
    with pytest.raises(ValueError):
        ScenarioConfig(0, GaussianPrior(1.0))
    with pytest.raises(ValueError):
        ScenarioConfig(2, GaussianPrior(1.0), mode="fixed-alpha")
    cfg = ScenarioConfig(3, GaussianPrior(1.0))
    assert cfg.conjugation_flags() == [False, True, False]
    with pytest.raises(ValueError):
        run_nonlocal_mc(cfg, 2000, 0)
    with pytest.raises(ValueError):
        run_local_mc(cfg, 10, 0)


def _within(est, target, k=3.0):
    assert 0 <= est.mean <= 1 and est.stderr > 0
    assert abs(est.mean - target) < k * est.stderr, (est, target)


@pytest.mark.parametrize(
    "cfg, target",
    [
        (ScenarioConfig(2, GaussianPrior(0.01)), 2.01 / 3.01),
        (ScenarioConfig(2, GaussianPrior(0.0), "fixed-alpha", 1.3 - 0.4j), 2 / 3),
        (ScenarioConfig(1, GaussianPrior(1.0)), 2 / 3),
    ],
)
def test_local_mc(cfg, target):
    _within(run_local_mc(cfg, SAMPLES, 42), target)


@pytest.mark.parametrize(
    "cfg, target",
    [
        (ScenarioConfig(2, GaussianPrior(0.0), "fixed-alpha", 0.5 + 0.5j), 4 / 5),
        (ScenarioConfig(2, GaussianPrior(0.01)), 4.01 / 5.01),
        (ScenarioConfig(4, GaussianPrior(0.0), "fixed-alpha", -1.0j), 8 / 9),
    ],
)
def test_nonlocal_mc(cfg, target):
    _within(run_nonlocal_mc(cfg, SAMPLES, 42), target)


def test_fixed_alpha_flat_prior_is_translation_invariant():
    a = run_local_mc(ScenarioConfig(2, GaussianPrior(0.0), "fixed-alpha", 0j), 10**5, 5)
    b = run_local_mc(ScenarioConfig(2, GaussianPrior(0.0), "fixed-alpha", 3 + 4j), 10**5, 5)
    assert abs(a.mean - b.mean) < 1e-12


def test_locc_symmetry():
    # Identical copies vs the phase-conjugate pair: same local fidelity.
    prior = GaussianPrior(0.5)
    same = run_local_mc(ScenarioConfig(2, prior, conjugate_pairs=False), SAMPLES, 8)
    conj = run_local_mc(ScenarioConfig(2, prior, conjugate_pairs=True), SAMPLES, 8)
    assert abs(same.mean - conj.mean) < 3 * math.hypot(same.stderr, conj.stderr)


def test_mc_never_beats_bound():
    for lam in (0.2, 2.0):
        cfg = ScenarioConfig(2, GaussianPrior(lam))
        loc = run_local_mc(cfg, 10**5, 3)
        assert loc.mean < local_fidelity_bound(2, lam) + 3 * loc.stderr
        nl = run_nonlocal_mc(cfg, 10**5, 3)
        assert nl.mean < nonlocal_fidelity_bound(2, lam) + 3 * nl.stderr


def test_mc_reproducible_across_workers():
    cfg = ScenarioConfig(2, GaussianPrior(1.0))
    one = run_nonlocal_mc(cfg, 300_000, 77, workers=1)
    four = run_nonlocal_mc(cfg, 300_000, 77, workers=4)
    assert one == four
    assert run_local_mc(cfg, 300_000, 77, workers=3) == run_local_mc(cfg, 300_000, 77)
