import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carleman.errors import OrderBudgetExceeded
from carleman.wavelet import (FREQ_HI, FREQ_LO, FREQ_MID, BellFunction, MassTable, MotherWavelet,
                              bell_eval, bounds_DA, child_eval, child_sup_norm, gram_matrix,
                              order_bound, scale_bound, smooth_step)

# Im u^(i)(s) from scipy.integrate.quad (adaptive, epsrel 1e-13) on the
# frequency-side integral; independent of the composite Gauss-Legendre rule.
QUAD_VALUES = [
    (0.0, 0, 0.6544429782819244),
    (-0.808, 0, -1.0811121010342568),
    (1.3, 0, 0.010947560644538386),
    (7.25, 0, -0.002602242259715155),
    (0.7, 1, 1.88801352213932),
    (-2.1, 2, 1.1652255515881964),
]
# max |u^(i)| from bounded scalar minimisation of -|u^(i)| on quad values
SUP_NORMS = {0: 1.0811131083077894, 1: 5.570560933301535, 2: 27.014972440034054}


def test_bell_landmarks():
    assert bell_eval(FREQ_LO) == 0.0
    assert bell_eval(FREQ_MID) == pytest.approx(1.0, abs=1e-15)
    assert bell_eval(math.pi) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert bell_eval(FREQ_HI) == pytest.approx(0.0, abs=1e-15)
    assert bell_eval(1.0) == 0.0 and bell_eval(9.0) == 0.0


@given(st.floats(min_value=FREQ_LO, max_value=FREQ_MID))
def test_bell_admissibility(xi):
    assert bell_eval(xi) ** 2 + bell_eval(2 * xi) ** 2 == pytest.approx(1.0, abs=1e-14)


@given(st.floats(min_value=-2.0, max_value=3.0))
def test_smooth_step_symmetry(x):
    assert smooth_step(x) + smooth_step(1 - x) == pytest.approx(1.0, abs=1e-15)


def test_bell_sharpness_validated():
    with pytest.raises(ValueError):
        BellFunction(0.0)


@pytest.mark.parametrize("s, order, expected", QUAD_VALUES)
def test_values_against_adaptive_quadrature(mother, s, order, expected):
    v = mother.eval(s, order)
    assert v.real == 0.0
    assert v.imag == pytest.approx(expected, abs=1e-12)


def test_large_argument_accuracy(mother):
    # the fixed 256-node rule alone would be off by ~1e-10 here
    assert abs(mother.eval(200.0)) < 1e-13


def test_purely_imaginary(mother):
    s = np.linspace(-30, 30, 601)
    for i in range(3):
        assert np.all(mother.eval(s, i).real == 0.0)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_sup_norms(mother, order):
    assert mother.sup_norm(order) == pytest.approx(SUP_NORMS[order], rel=1e-9)


def test_unit_l2_norm(mother):
    s = np.linspace(-60, 60, 24001)
    assert np.trapezoid(np.abs(mother.eval(s)) ** 2, s) == pytest.approx(1.0, abs=1e-9)


def test_decay(mother):
    s = np.concatenate([np.linspace(-80, -40, 801), np.linspace(40, 80, 801)])
    assert np.max(np.abs(mother.eval(s))) < 1e-6


def test_derivative_consistency(mother):
    s = np.linspace(-6, 6, 121)
    h = 1e-4
    for i in range(2):
        fd = (mother.eval(s + h, i) - mother.eval(s - h, i)) / (2 * h)
        ref = mother.eval(s, i + 1)
        assert np.max(np.abs(fd - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_child_formulas(mother):
    assert child_eval(mother, (1, 0), 0.0) == pytest.approx(math.sqrt(2) * mother.eval(0.0))
    s = np.array([2.5, 3.0, 4.1])
    assert np.allclose(child_eval(mother, (0, 3), s, 1), mother.eval(s - 3, 1), rtol=0, atol=1e-15)
    assert np.allclose(child_eval(mother, (-2, 1), s, 2),
                       2 ** (-2 * 2.5) * mother.eval(s / 4 - 1, 2), rtol=0, atol=1e-15)


def test_bound_constants(mother):
    assert scale_bound(2) == 16.0
    assert scale_bound(-3) == pytest.approx(0.35355339059327373)
    assert scale_bound(0) == 1.0
    D, A = bounds_DA(mother, (0, 5), 0)
    assert D == 1.0 and A == pytest.approx(2 ** 0.25 * SUP_NORMS[0], rel=1e-9)
    assert order_bound(mother, 2) == pytest.approx(2 ** 6.25 * SUP_NORMS[2], rel=1e-9)


@pytest.mark.parametrize("idx", [(0, 0), (1, -1), (2, 3), (-1, 2), (-3, -1)])
@pytest.mark.parametrize("order", [0, 1, 2])
def test_sampled_sup_below_bound(mother, idx, order):
    j, k = idx
    s = (np.linspace(-20, 20, 8001) + k) / 2.0 ** j
    sampled = np.max(np.abs(child_eval(mother, idx, s, order)))
    D, A = bounds_DA(mother, idx, order)
    assert sampled <= child_sup_norm(mother, idx, order) * (1 + 1e-9)
    assert sampled <= D * A


def test_order_budget(mother):
    with pytest.raises(OrderBudgetExceeded):
        mother.eval(0.0, 3)
    with pytest.raises(OrderBudgetExceeded):
        bounds_DA(mother, (0, 0), 5)


def test_degenerate_bell_gives_zero():
    flat = MotherWavelet(bell=lambda xi: np.zeros_like(xi), i_max=1)
    assert np.all(flat.eval(np.linspace(-3, 3, 7)) == 0)
    assert flat.sup_norm(1) == 0.0


def test_gram_of_mixed_children(mother):
    pairs = [(0, 0), (0, 1), (1, 0), (-1, 0), (-1, 1), (1, -1)]
    G = gram_matrix(mother, pairs)
    assert np.max(np.abs(G - np.eye(len(pairs)))) < 1e-6


def test_mass_table(mother):
    table = MassTable(mother)
    assert table.total == pytest.approx(1.0, abs=1e-6)
    assert table.outside((0, 0), -100, 100) < 1e-9
    assert table.outside((0, 0), -12, 12) < 1e-6
    # a wide child leaks mass past a narrow window
    assert table.outside((-5, 0), -12, 12) > 0.5
    assert table.outside((1, 2), -12, 12) < table.outside((-1, 0), -12, 12)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-20, max_value=20))
def test_modulus_symmetric_about_minus_half(mother, s):
    # the bell is even, so |u| is symmetric about s = -1/2
    assert abs(mother.eval(-0.5 + s)) == pytest.approx(abs(mother.eval(-0.5 - s)), abs=1e-14)
