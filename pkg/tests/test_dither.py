import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partial_es.dither import (DitherSignal, check_zero_mean, compute_nu, nu_matrix,
                               pattern_residual, quadrature_dither, sup_bound, zero_dither)
from partial_es.vectorfield import NumericError

A = 2.0 * np.sqrt(np.pi)


def sig(fn, bound=1.0):
    return DitherSignal(fn, bound)


COS = sig(lambda th: A * np.cos(2 * np.pi * th), A)
SIN = sig(lambda th: A * np.sin(2 * np.pi * th), A)


def test_nu_quadrature_pair_is_one():
    # closed form a^2 / (4 pi) with a = 2 sqrt(pi)
    assert compute_nu(COS, SIN) == pytest.approx(1.0, abs=1e-10)


def test_nu_same_signal_vanishes_and_swap_flips_sign():
    assert abs(compute_nu(COS, COS)) < 1e-12
    assert compute_nu(SIN, COS) == pytest.approx(-1.0, abs=1e-10)


def test_nu_rejects_non_finite_and_small_grids():
    bad = sig(lambda th: np.where(th > 0.5, np.nan, 0.0))
    with pytest.raises(NumericError):
        compute_nu(bad, COS)
    with pytest.raises(ValueError):
        compute_nu(COS, SIN, n_points=16)


def test_zero_mean_residuals():
    assert check_zero_mean(sig(lambda th: np.cos(2 * np.pi * th))) < 1e-12
    assert check_zero_mean(sig(lambda th: np.ones_like(th))) == pytest.approx(1.0)
    assert check_zero_mean(sig(lambda th: np.sin(2 * np.pi * th) + 0.5)) == pytest.approx(0.5)


def test_sup_bound_examples():
    assert sup_bound([COS]) == pytest.approx(A, abs=1e-3)
    assert sup_bound([sig(lambda th: np.zeros_like(th))]) == 0.0
    unit = [sig(lambda th: np.sin(2 * np.pi * th)), sig(lambda th: np.cos(2 * np.pi * th))]
    assert sup_bound(unit) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        sup_bound([])


def test_quadrature_convergence_rate():
    w1 = sig(lambda th: np.cos(2 * np.pi * th) + 0.3 * np.sin(6 * np.pi * th))
    w2 = sig(lambda th: np.sin(2 * np.pi * th) ** 3)
    ref = compute_nu(w1, w2, 8192)
    for n in (128, 256, 512):
        assert abs(compute_nu(w1, w2, n) - ref) <= 50.0 / n**4


def test_multifrequency_pattern():
    spec = quadrature_dither(2, (1, 2))
    scaled = [w.scaled(2.0) for w in spec.signals]
    nu = nu_matrix(scaled)
    assert pattern_residual(nu, 1.0) <= 1e-8
    assert spec.label == "multifrequency"


def test_single_frequency_cross_channel_coefficient_is_nonzero():
    # both channels at the same frequency couple: nu_12 = gamma^2 / 4 for outer gain 2
    scaled = [w.scaled(2.0) for w in quadrature_dither(2).signals]
    nu = nu_matrix(scaled).values
    assert nu[0, 2] == pytest.approx(1.0, abs=1e-10)
    assert nu[1, 3] == pytest.approx(1.0, abs=1e-10)
    assert abs(nu[0, 1]) > 0.5


def test_spec_values_shape_and_zero_dither():
    spec = quadrature_dither(2)
    t = np.linspace(0, 1, 7)
    assert spec.values(t, 0.5).shape == (7, 4)
    assert spec.m == 2
    assert np.all(zero_dither(2).values(t, 0.1) == 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.floats(0.3, 4.0))
def test_dither_invariants(k, amp):
    w = sig(lambda th: amp * np.sin(2 * np.pi * k * th), amp)
    assert check_zero_mean(w) <= 1e-10
    assert sup_bound([w]) <= w.amplitude_bound + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.floats(-2, 2), st.floats(-2, 2))
def test_nu_antisymmetric_for_zero_mean_signals(k1, k2, p1, p2):
    w1 = sig(lambda th: np.cos(2 * np.pi * k1 * th + p1))
    w2 = sig(lambda th: np.cos(2 * np.pi * k2 * th + p2))
    assert compute_nu(w1, w2) == pytest.approx(-compute_nu(w2, w1), abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(0.0, 5.0))
def test_signal_is_unit_periodic(eps, t):
    spec = quadrature_dither(2)
    assert np.allclose(spec.values(t, eps), spec.values(t + eps, eps), atol=1e-9)
