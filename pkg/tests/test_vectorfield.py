import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from partial_es.scenarios import brockett_fields, rigid_body_drift
from partial_es.vectorfield import (DimensionError, NumericError, ScalarField, VectorField,
                                    bracket_field, constant_field, eval_field, fd_jacobian,
                                    jacobian_at, lie_bracket, lie_derivative, linear_field,
                                    sum_fields, zero_field)

F1, F2 = brockett_fields()
X = np.array([1.0, 1.0, 2.0])
finite = st.floats(-5, 5, allow_nan=False)
states = arrays(np.float64, 3, elements=finite)


def identity_field(n=3):
    return VectorField(n, n, lambda x: np.asarray(x, dtype=float).copy(), name="id")


def test_zero_field_is_zero():
    assert np.array_equal(eval_field(zero_field(3), X), np.zeros(3))


def test_brockett_fields_by_hand():
    assert np.allclose(F1(X), [1, 0, 1])
    assert np.allclose(F2(X), [0, 1, -1])


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        eval_field(F1, [1.0, 2.0])
    bad = VectorField(3, 3, lambda x: np.zeros(2))
    with pytest.raises(DimensionError):
        eval_field(bad, X)


def test_linear_jacobian_exact_and_fd():
    A = np.arange(9.0).reshape(3, 3) - 4
    f = linear_field(A)
    assert np.array_equal(jacobian_at(f, X).matrix, A)
    assert np.allclose(fd_jacobian(f, X), A, atol=1e-8)


def test_brockett_f2_jacobian_and_constant_jacobian():
    want = np.array([[0, 0, 0], [0, 0, 0], [-1, 0, 0]])
    assert np.array_equal(jacobian_at(F2, [3.0, -2.0, 7.0]).matrix, want)
    assert np.array_equal(jacobian_at(constant_field([1, 2, 3]), X).matrix, np.zeros((3, 3)))


def test_non_finite_jacobian_reports_coordinate():
    # the backward step along x2 leaves the domain of sqrt; the x1 direction stays finite
    f = VectorField(2, 1, lambda x: np.sqrt(x[..., 1:2]))
    with np.errstate(invalid="ignore"), pytest.raises(NumericError) as err:
        fd_jacobian(f, [1.0, 1e-7])
    assert err.value.coordinate == 1


def test_lie_derivative_examples():
    assert np.allclose(lie_derivative(constant_field([1, 2, 3]), F1, X), 0)
    g = linear_field(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(lie_derivative(identity_field(), g, X), g(X))
    assert np.allclose(lie_derivative(F2, F1, X), [0, 0, -1])


def test_brockett_bracket_is_constant():
    pts = np.random.default_rng(1).normal(size=(25, 3)) * 4
    assert np.allclose(lie_bracket(F1, F2, pts), [0, 0, -2])


def test_bracket_of_fd_fields_matches_analytic():
    # strip the analytic Jacobians so the finite-difference path is the one exercised
    g1 = VectorField(3, 3, F1.eval)
    g2 = VectorField(3, 3, F2.eval)
    assert np.allclose(lie_bracket(g1, g2, X), [0, 0, -2], atol=1e-8)


def test_bracket_constant_fields_and_self():
    c1, c2 = constant_field([1, 0, 0]), constant_field([0, 3, 1])
    assert np.allclose(lie_bracket(c1, c2, X), 0)
    assert np.allclose(lie_bracket(F1, F1, X), 0)


def test_scalar_field_fd_gradient():
    J = ScalarField(3, lambda x: np.sum(np.asarray(x) ** 2, axis=-1))
    assert np.allclose(J.gradient(X), 2 * X, atol=1e-8)


def test_sum_fields_and_bracket_field():
    s = sum_fields([F1, F2], [2.0, -1.0])
    assert np.allclose(s(X), 2 * F1(X) - F2(X))
    assert np.allclose(jacobian_at(s, X).matrix, 2 * jacobian_at(F1, X).matrix - jacobian_at(F2, X).matrix)
    assert np.allclose(bracket_field(F1, F2)(X), [0, 0, -2])
    with pytest.raises(DimensionError):
        sum_fields([])


@settings(max_examples=40, deadline=None)
@given(states)
def test_analytic_jacobian_agrees_with_fd(x):
    f = rigid_body_drift(1.0, 2.0, 3.0)
    analytic = jacobian_at(f, x).matrix
    fd = fd_jacobian(f, x)
    assert np.allclose(fd, analytic, rtol=1e-5, atol=1e-5)


@settings(max_examples=40, deadline=None)
@given(states, arrays(np.float64, (3, 3), elements=finite), arrays(np.float64, (3, 3), elements=finite))
def test_bracket_antisymmetry(x, A, B):
    f, g = rigid_body_drift(1.0, 2.0, 3.0), linear_field(A)
    h = linear_field(B)
    for p, q in ((f, g), (g, h), (f, F2)):
        assert np.allclose(lie_bracket(p, q, x), -lie_bracket(q, p, x), atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(states, st.floats(-3, 3, allow_nan=False))
def test_bracket_bilinearity(x, alpha):
    f, g = rigid_body_drift(1.0, 2.0, 3.0), F1
    assert np.allclose(lie_bracket(f.scaled(alpha), g, x), alpha * lie_bracket(f, g, x), atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (4, 3), elements=finite))
def test_batched_evaluation_matches_rowwise(xs):
    f = rigid_body_drift(1.0, 2.0, 3.0)
    batch = lie_bracket(f, F2, xs)
    rows = np.array([lie_bracket(f, F2, x) for x in xs])
    assert np.allclose(batch, rows)
