import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phaseconj import fock_oracle as fo
from phaseconj.phase_space import (
    GaussianPrior,
    amplitude_from_quadratures,
    beamsplitter,
    concentrate,
    conjugate,
    overlap2,
    quadratures,
    sample_prior,
)

finite = st.floats(-50, 50, allow_nan=False)
amplitudes = st.builds(complex, finite, finite)


def test_conjugate():
    assert conjugate(1 + 2j) == 1 - 2j
    assert conjugate(0j) == 0j
    assert conjugate(conjugate(0.3 - 1.7j)) == 0.3 - 1.7j


def test_quadratures():
    q = quadratures(3 / math.sqrt(2) + 4j / math.sqrt(2))
    assert q.x == pytest.approx(3.0, abs=1e-15)
    assert q.p == pytest.approx(4.0, abs=1e-15)
    assert tuple(quadratures(0j)) == (0.0, 0.0)
    a = 0.123 - 0.456j
    assert abs(amplitude_from_quadratures(*quadratures(a)) - a) < 1e-12


@given(amplitudes)
def test_quadrature_round_trip(a):
    assert abs(amplitude_from_quadratures(*quadratures(a)) - a) < 1e-12 * max(1, abs(a))


def test_beamsplitter_conjugate_pair():
    alpha = (1 + 1j) / math.sqrt(2)
    x_a, p_a = quadratures(alpha)
    out1, out2 = beamsplitter(alpha, conjugate(alpha))
    assert out1 == pytest.approx(x_a, abs=1e-15)
    assert out2 == pytest.approx(1j * p_a, abs=1e-15)
    assert out1 == pytest.approx(1.0) and out2 == pytest.approx(1j)


def test_beamsplitter_trivial_cases():
    assert beamsplitter(0, 0) == (0, 0)
    a = 0.7 - 0.2j
    o1, o2 = beamsplitter(a, a)
    assert o1 == pytest.approx(math.sqrt(2) * a) and abs(o2) < 1e-15


def test_beamsplitter_energy_and_unitarity():
    rng = np.random.default_rng(7)
    a1 = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    a2 = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    o1, o2 = beamsplitter(a1, a2)
    assert np.max(np.abs(abs(o1) ** 2 + abs(o2) ** 2 - abs(a1) ** 2 - abs(a2) ** 2)) < 1e-12
    # The balanced splitter is its own inverse.
    b1, b2 = beamsplitter(o1, o2)
    assert np.max(np.abs(b1 - a1)) < 1e-12 and np.max(np.abs(b2 - a2)) < 1e-12


def test_concentrate():
    assert concentrate([1, 1, 1, 1]) == pytest.approx(2.0, abs=1e-12)
    assert concentrate([0.4 + 0.1j]) == 0.4 + 0.1j
    assert concentrate([0] * 8) == 0
    assert concentrate([0.3j] * 5) == pytest.approx(math.sqrt(5) * 0.3j, abs=1e-12)


def test_concentrate_matches_pairwise_50_50_chain():
    # |a>^4 -> |sqrt2 a>^2 (two 50:50 splitters) -> |2a> (one more)
    a = 0.8 - 0.6j
    m1, v1 = beamsplitter(a, a)
    m2, v2 = beamsplitter(a, a)
    top, v3 = beamsplitter(m1, m2)
    assert max(abs(v1), abs(v2), abs(v3)) < 1e-12
    assert abs(top - concentrate([a] * 4)) < 1e-12


def test_concentrate_rejects_bad_input():
    with pytest.raises(ValueError):
        concentrate([])
    with pytest.raises(ValueError):
        concentrate([1, 1 + 1e-9])


def test_prior_validation():
    with pytest.raises(ValueError):
        GaussianPrior(-0.1)
    with pytest.raises(ValueError):
        sample_prior(GaussianPrior(0.0), np.random.default_rng(0))


def test_sample_prior_moments():
    rng = np.random.default_rng(11)
    a = sample_prior(GaussianPrior(1.0), rng, 10**6)
    assert abs(np.mean(abs(a) ** 2) - 1.0) < 0.01

    lam = 4.0
    a = sample_prior(GaussianPrior(lam), rng, 10**6)
    n = a.size
    for comp in (a.real, a.imag):
        var = 1 / (2 * lam)
        assert abs(np.var(comp) - 0.125) < 0.002
        assert abs(comp.mean()) < 5 * math.sqrt(var / n)
        # 2nd moment s.e. = sqrt((3 - 1) var^2 / n); 4th moment s.e. from E[z^8] = 105 var^4
        assert abs(np.mean(comp**2) - var) < 5 * math.sqrt(2 * var**2 / n)
        m4 = 3 * var**2
        assert abs(np.mean(comp**4) - m4) < 5 * math.sqrt((105 - 9) * var**4 / n)
    assert m4 == pytest.approx(3 / (4 * lam**2))


def test_sample_prior_scalar_and_deterministic():
    x = sample_prior(GaussianPrior(2.0), np.random.default_rng(3))
    y = sample_prior(GaussianPrior(2.0), np.random.default_rng(3))
    assert isinstance(x, complex) and x == y


def test_overlap2_values():
    assert overlap2(0.3 + 0.2j, 0.3 + 0.2j) == 1.0
    assert overlap2(0, 1) == pytest.approx(math.exp(-1), abs=1e-15)
    assert overlap2(0, 1) == pytest.approx(0.367879, abs=1e-6)


def test_overlap2_against_fock_series():
    a, b = 0.5, 1.2
    va, vb = fo.coherent_fock(a, 60), fo.coherent_fock(b, 60)
    assert abs(abs(np.vdot(va, vb)) ** 2 - overlap2(a, b)) < 1e-10


@given(amplitudes, amplitudes)
def test_overlap2_symmetric_and_bounded(a, b):
    assert overlap2(a, b) == overlap2(b, a)
    assert 0 <= overlap2(a, b) <= 1
    if a != b and abs(a - b) > 1e-7:
        assert overlap2(a, b) < 1
