import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partial_es.controller import make_params
from partial_es.dither import quadrature_dither
from partial_es.scenarios import brockett_fields, brockett_scenario, rigid_body_scenario
from partial_es.simulator import BoxDomain, Trajectory, integrate_closed_loop
from partial_es.systems import InputAffineSystem
from partial_es.vectorfield import ScalarField, constant_field, zero_field
from partial_es.volterra import (DomainExitError, bound_constants, defect_slope, one_period_defect,
                                 one_period_defect_dithered, period_decay_check, sigma_of)

BROCKETT = brockett_scenario()
RIGID = rigid_body_scenario()


def _cube(half, per_axis=11):
    ax = np.linspace(-half, half, per_axis)
    return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)


def _brockett_bare():
    f1, f2 = brockett_fields()
    return InputAffineSystem(zero_field(3), (f1, f2), 2, 1)


def test_zero_system_constants_and_defect():
    sys_ = InputAffineSystem(zero_field(3), (zero_field(3), zero_field(3)), 2, 1)
    c = bound_constants(sys_, _cube(1.0, 3), 2.0, 0.1)
    assert (c.M0, c.M1, c.M2, c.M3, c.sigma) == (0.0, 0.0, 0.0, 0.0, 0.0)
    d = one_period_defect_dithered(sys_, quadrature_dither(1), [0.3, -0.2, 1.0], 0.1)
    assert d.defect == 0.0 and d.bound == 0.0


def test_brockett_input_bound():
    c = bound_constants(_brockett_bare(), _cube(5.0), 1.0, 0.1)
    assert abs(c.M1 - np.sqrt(26.0)) < 1e-2
    assert c.M0 == 0.0


def test_brockett_lie_derivative_constants():
    # (df2) f1 = (0, 0, -1) and (df1) f2 = (0, 0, 1); the other products vanish
    c = bound_constants(_brockett_bare(), _cube(3.0, 7), 1.0, 0.1)
    assert abs(c.M2 - 1.0) < 1e-9
    assert c.M3 < 1e-6


def test_constant_drift_without_inputs():
    sys_ = InputAffineSystem(constant_field([3.0, -4.0]), (), 1, 1)
    c = bound_constants(sys_, np.random.default_rng(0).normal(size=(20, 2)), 0.0, 0.5)
    assert c.M0 == 5.0 and c.M1 == 0.0 and c.M2 == 0.0


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        bound_constants(_brockett_bare(), np.zeros((0, 3)), 1.0, 0.1)


def test_nonfinite_grid_value_rejected():
    bad = InputAffineSystem(constant_field([np.inf, 0.0]), (), 1, 1)
    with pytest.raises(ArithmeticError):
        bound_constants(bad, np.zeros((2, 2)), 0.0, 0.1)


def test_sigma_formula():
    assert sigma_of(2.0, 3.0, 1.5, 2, 0.25) == pytest.approx((2.0 + 1.5**2 * 4 * 3.0 / 6.0) * (0.5 + 3.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 10), st.floats(0, 10), st.floats(0, 5), st.integers(1, 4),
       st.floats(1e-4, 1.0), st.floats(1e-4, 1.0))
def test_sigma_monotone_in_epsilon(M2, M3, W, m, e1, e2):
    lo, hi = sorted((e1, e2))
    assert sigma_of(M2, M3, W, m, lo) <= sigma_of(M2, M3, W, m, hi)


def test_brockett_defect_within_bound():
    p = make_params("contA", 0.1, (2.0, 2.0))
    d = one_period_defect(BROCKETT.system_for("J1"), p, BROCKETT.cost("J1").field, [0.0, 0.0, 2.0])
    assert np.isfinite(d.defect) and d.defect <= d.bound
    defect, bound = d
    assert (defect, bound) == (d.defect, d.bound)


@pytest.mark.parametrize("kind", ["contA", "contB"])
def test_rigid_defect_within_bound(kind):
    p = make_params(kind, 0.25, (2.0, 2.0))
    d = one_period_defect(RIGID.system_for("J"), p, RIGID.cost("J").field, [2.0, 1.0, 1.0])
    assert d.defect <= d.bound


def test_defect_order_at_small_epsilon():
    eps = [0.0016, 0.0008, 0.0004, 0.0002]
    sys_, J = BROCKETT.system_for("J1"), BROCKETT.cost("J1").field
    d = [one_period_defect(sys_, make_params("contA", e, (2.0, 2.0)), J, [0.0, 0.0, 2.0]).defect for e in eps]
    assert abs(defect_slope(eps, d) - 1.5) < 0.1


@pytest.mark.xfail(strict=True, reason="pre-asymptotic at these epsilons: the slope measures about 1.02; "
                                       "see the decisions ledger")
def test_defect_slope_on_coarse_epsilons():
    eps = [0.4, 0.2, 0.1, 0.05]
    sys_, J = BROCKETT.system_for("J1"), BROCKETT.cost("J1").field
    d = [one_period_defect(sys_, make_params("contA", e, (2.0, 2.0)), J, [0.0, 0.0, 2.0]).defect for e in eps]
    assert defect_slope(eps, d) >= 1.4


def test_defect_slope_regression():
    eps = np.array([0.1, 0.01, 0.001])
    assert defect_slope(eps, 7.0 * eps**1.5) == pytest.approx(1.5)


def test_domain_exit_raises_with_time():
    tight = BoxDomain(((-0.01, 0.01), (-0.01, 0.01)), ((1.9, 2.1),))
    p = make_params("contA", 0.1, (2.0, 2.0))
    with pytest.raises(DomainExitError) as info:
        one_period_defect(BROCKETT.system_for("J1"), p, BROCKETT.cost("J1").field, [0.0, 0.0, 2.0],
                          domain=tight)
    assert 0.0 < info.value.time <= 0.1


def test_dither_count_must_match_inputs():
    with pytest.raises(ValueError):
        one_period_defect_dithered(_brockett_bare(), quadrature_dither(2), [0.0, 0.0, 0.0], 0.1)


def _const_V(n=3):
    return ScalarField(n, lambda x: np.ones(np.shape(x)[:-1]), name="one")


def test_period_decay_constant_V_never_decays():
    times = np.linspace(0.0, 2.0, 9)
    tr = Trajectory(times, np.tile([2.0, 1.0, 0.0], (9, 1)))
    checks = period_decay_check(_const_V(), tr, 0.5, 0.3, 1e-3, [0.0, 0.0])
    assert checks and not any(checks)


def test_period_decay_inside_ball_is_empty():
    times = np.linspace(0.0, 2.0, 9)
    tr = Trajectory(times, np.tile([0.1, 0.0, 5.0], (9, 1)))
    assert period_decay_check(_const_V(), tr, 0.5, 0.3, 1e-3, [0.0, 0.0]) == []


def test_period_decay_short_trajectory():
    tr = Trajectory([0.0, 0.1], [[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
    with pytest.raises(ValueError):
        period_decay_check(_const_V(), tr, 0.5, 0.3, 1e-3, [0.0, 0.0])


@pytest.mark.parametrize("kind", ["contA", "contB"])
def test_rigid_energy_decays_per_period(kind):
    fp = RIGID.figure_params["fig2a"]
    tr = integrate_closed_loop(RIGID.system_for("J"), make_params(kind, 0.25, (2.0, 2.0)),
                               RIGID.cost("J").field, fp.x0, fp.T)
    checks = period_decay_check(RIGID.reference_V["energy"], tr, 0.25, 0.3, 1e-3, [0.0, 0.0])
    assert checks and np.mean(checks) >= 0.9
