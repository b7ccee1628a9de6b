import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from hypothesis import strategies as st

from partial_es.averaging import (InputAffineSystem, averaged_equivalence_residual,
                                  es_averaged_field, es_lie_bracket_system, lie_bracket_system)
from partial_es.controller import make_params
from partial_es.scenarios import brockett_fields, brockett_scenario, rigid_body_scenario
from partial_es.vectorfield import DimensionError, constant_field, zero_field

RIGID = rigid_body_scenario(1.0, 2.0, 3.0)
BROCKETT = brockett_scenario()


def test_zero_nu_gives_drift():
    sys_ = RIGID.system_for("J")
    x = np.array([2.0, 1.0, 1.0])
    assert np.allclose(lie_bracket_system(sys_, np.zeros((2, 2))).field(x), sys_.drift(x))


def test_single_input_gives_drift():
    drift = constant_field([1.0, -1.0])
    sys_ = InputAffineSystem(drift, (constant_field([0.0, 1.0]),), 1, 1)
    assert np.allclose(lie_bracket_system(sys_, np.zeros((1, 1))).field([0.3, 0.4]), [1.0, -1.0])


def test_nu_shape_checked():
    with pytest.raises(DimensionError):
        lie_bracket_system(RIGID.system_for("J"), np.zeros((3, 3)))


def test_brockett_unit_nu_adds_constant_bracket():
    f1, f2 = brockett_fields()
    sys_ = InputAffineSystem(zero_field(3), (f1, f2), 2, 1)
    pts = np.random.default_rng(3).normal(size=(10, 3))
    assert np.allclose(lie_bracket_system(sys_, [[0.0, 1.0], [-1.0, 0.0]]).field(pts), [0, 0, -2])


def test_rigid_closed_form_at_hand_point():
    x = np.array([2.0, 1.0, 1.0])
    fbar = es_averaged_field(RIGID.system_for("J"), RIGID.cost("J").field, (1.0, 1.0))
    assert np.allclose(fbar.field(x), [-3.0, -4.0, 2.0 / 3.0])


def test_zero_gains_and_brockett_minimizer():
    sys_ = BROCKETT.system_for("J1")
    J = BROCKETT.cost("J1").field
    x = np.array([0.4, 2.0, -1.0])
    assert np.allclose(es_averaged_field(sys_, J, (0.0, 0.0)).field(x), sys_.drift(x))
    fbar = es_averaged_field(sys_, J, (1.0, 1.0)).field(np.array([3.0, 1.0, 7.0]))
    assert np.allclose(fbar[:2], 0.0)


def _grid(lo, hi, n=50, seed=0):
    return np.random.default_rng(seed).uniform(lo, hi, size=(n, 3))


def test_equivalence_brockett_cont_a():
    p = make_params("contA", 0.1, (2.0, 2.0), frequencies=(1, 2))
    r = averaged_equivalence_residual(BROCKETT.system_for("J1"), p, BROCKETT.cost("J1").field, _grid(0, 5))
    assert r <= 1e-5


def test_equivalence_rigid_cont_b():
    p = make_params("contB", 0.1, (2.0, 2.0), frequencies=(1, 2))
    grid = _grid(-2, 2)
    grid = grid[np.sum(grid[:, :2] ** 2, axis=1) > 0]
    assert averaged_equivalence_residual(RIGID.system_for("J"), p, RIGID.cost("J").field, grid) <= 1e-5


def test_equivalence_zero_gain_is_exact():
    p = make_params("contA", 0.1, (0.0, 0.0), frequencies=(1, 2))
    assert averaged_equivalence_residual(RIGID.system_for("J"), p, RIGID.cost("J").field, _grid(-2, 2)) == 0.0


def test_single_frequency_dither_breaks_the_gradient_form():
    # with both channels at one frequency the cross-channel brackets survive averaging
    p = make_params("contA", 0.1, (2.0, 2.0))
    r = averaged_equivalence_residual(BROCKETT.system_for("J1"), p, BROCKETT.cost("J1").field, _grid(0, 5))
    assert r > 1e-2


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 3, elements=st.floats(-4, 4)), st.sampled_from(["contA", "contB"]))
def test_bracket_gradient_identity_pointwise(x, kind):
    for scen, cost in ((BROCKETT, "J1"), (BROCKETT, "J2"), (RIGID, "J"), (RIGID, "J_full")):
        sys_ = scen.system_for(cost)
        p = make_params(kind, 0.2, (2.0, 1.5), frequencies=(1, 3))
        a = es_lie_bracket_system(sys_, scen.cost(cost).field, p).field(x)
        b = es_averaged_field(sys_, scen.cost(cost).field, p.effective_gains).field(x)
        assert np.allclose(a, b, atol=1e-6 * (1 + np.abs(b).max()))
