"""Closed-form physics against independent exact-arithmetic oracles."""

from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetsim.hardware import (entanglement_fidelity, memory_efficiency, period_ps,
                              transmittance)
from qnetsim.protocols.purification import (purification_fidelity,
                                            purification_success_probability)
from qnetsim.protocols.swapping import swap_fidelity


def oracle_generation_fidelity(C, g, gs, dw=0):
    # rational re-derivation; written independently of the package
    C, g, gs, dw = Fr(C), Fr(g), Fr(gs), Fr(dw)
    a = (C + 1) * g
    return (1 + a * a / ((a + 2 * gs) ** 2 + dw * dw)) / 2


def oracle_purify(F):
    F = Fr(F)
    e = (1 - F) / 3  # weight of each of the three other Bell states
    p = F * F + 2 * F * e + 5 * e * e
    return (F * F + e * e) / p, p


# frozen from the exact oracles above
FROZEN = {
    "F(500)": 0.9909987775181183,
    "F(50)": 0.9211213248656829,
    "e(0.8,500)": 0.7984031936127745,
    "F'(0.8)": 0.838150289017341,
    "p(0.8)": 0.7688888888888889,
}


def test_frozen_values_match_oracles():
    assert float(oracle_generation_fidelity(500, 14, 32)) == pytest.approx(FROZEN["F(500)"], abs=1e-15)
    assert float(oracle_generation_fidelity(50, 14, 32)) == pytest.approx(FROZEN["F(50)"], abs=1e-15)
    assert float(Fr(8, 10) * 500 / 501) == pytest.approx(FROZEN["e(0.8,500)"], abs=1e-15)
    fp, p = oracle_purify(Fr(8, 10))
    assert float(fp) == pytest.approx(FROZEN["F'(0.8)"], abs=1e-15)
    assert float(p) == pytest.approx(FROZEN["p(0.8)"], abs=1e-15)


def test_generation_fidelity_values():
    assert entanglement_fidelity(500, 14, 32) == pytest.approx(0.9910, abs=1e-4)
    assert entanglement_fidelity(500, 14, 32) == pytest.approx(FROZEN["F(500)"], rel=1e-12)
    assert entanglement_fidelity(50, 14, 32) == pytest.approx(FROZEN["F(50)"], rel=1e-12)
    # no dephasing and no detuning: perfect pair
    assert entanglement_fidelity(10, 14, 0) == 1.0
    # detuning only lowers fidelity
    assert entanglement_fidelity(500, 14, 32, 1e3) < entanglement_fidelity(500, 14, 32)


def test_generation_fidelity_monotone_in_cooperativity():
    vals = [entanglement_fidelity(c, 14, 32) for c in range(50, 501)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("bad", [(0, 14, 32), (500, 0, 32), (500, 14, -1)])
def test_generation_fidelity_rejects(bad):
    with pytest.raises(ValueError):
        entanglement_fidelity(*bad)


def test_memory_efficiency():
    assert memory_efficiency(0.8, 500) == pytest.approx(0.7984, abs=1e-4)
    assert memory_efficiency(0.8, 500) == pytest.approx(FROZEN["e(0.8,500)"], rel=1e-12)
    with pytest.raises(ValueError):
        memory_efficiency(1.2, 500)


def test_transmittance_and_period():
    assert transmittance(0, 0.2) == 1.0
    assert transmittance(10, 0.2) == pytest.approx(10 ** -0.2)
    assert transmittance(50, 0.2) == pytest.approx(0.1)
    assert period_ps(20e3) == 50_000_000
    assert period_ps(2e3) == 500_000_000


def test_purification_fixed_points_exact():
    assert purification_fidelity(1.0) == 1.0
    assert purification_fidelity(0.25) == 0.25
    assert purification_success_probability(0.25) == 0.5
    assert purification_success_probability(1.0) == 1.0


def test_purification_improves_above_half():
    grid = [0.5 + 0.5 * (k + 1) / 101 for k in range(100)]
    assert all(purification_fidelity(f) > f for f in grid)


def test_purification_values():
    assert purification_fidelity(0.8) == pytest.approx(FROZEN["F'(0.8)"], rel=1e-12)
    assert purification_success_probability(0.8) == pytest.approx(FROZEN["p(0.8)"], rel=1e-12)
    for bad in (0.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            purification_success_probability(bad)


def test_swap_fidelity_triple_product():
    assert swap_fidelity(0.9, 0.9, 0.99) == 0.9 * 0.9 * 0.99
    assert swap_fidelity(1.0, 1.0, 1.0) == 1.0


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=Fr(1, 100), max_value=1, max_denominator=10**6))
def test_purification_matches_oracle(f):
    fp, p = oracle_purify(f)
    assert purification_fidelity(float(f)) == pytest.approx(float(fp), rel=1e-12)
    assert purification_success_probability(float(f)) == pytest.approx(float(p), rel=1e-12)
    assert 0 < purification_success_probability(float(f)) <= 1


@settings(max_examples=200, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(0.1, 100), st.floats(0, 100))
def test_generation_matches_oracle(C, g, gs):
    exact = oracle_generation_fidelity(C, g, gs)
    val = entanglement_fidelity(C, g, gs)
    assert val == pytest.approx(float(exact), rel=1e-12)
    assert 0.5 < val <= 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_swap_bounded_by_inputs(a, b, d):
    f = swap_fidelity(a, b, d)
    assert 0 <= f <= min(a, b, d) + 1e-15
