"""Smooth vector fields, Jacobians, Lie derivatives and Lie brackets.

Every field accepts either a single state of shape ``(n,)`` or a batch of
states of shape ``(..., n)`` and returns an array with the same leading
shape.  Analytic Jacobians follow the same convention and return
``(..., dim_out, dim_in)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

FD_STEP_SCALE = 1e-5

ArrayFn = Callable[[np.ndarray], np.ndarray]


class DimensionError(ValueError):
    """State or field dimensions do not agree."""


class NumericError(ArithmeticError):
    """A field evaluation produced a non-finite value."""

    def __init__(self, message: str, coordinate: Optional[int] = None):
        super().__init__(message)
        self.coordinate = coordinate


@dataclass(frozen=True)
class VectorField:
    """A map ``x -> f(x)`` from R^dim_in to R^dim_out, optionally with its Jacobian."""

    dim_in: int
    dim_out: int
    eval: ArrayFn
    jac: Optional[ArrayFn] = None
    name: str = ""

    def __call__(self, x) -> np.ndarray:
        return eval_field(self, x)

    def scaled(self, alpha: float) -> "VectorField":
        jac = None if self.jac is None else (lambda x, j=self.jac: alpha * j(x))
        return VectorField(self.dim_in, self.dim_out, lambda x, f=self.eval: alpha * f(x), jac,
                           name=f"{alpha}*{self.name}")


@dataclass(frozen=True)
class Jacobian:
    matrix: np.ndarray
    point: np.ndarray


@dataclass(frozen=True)
class ScalarField:
    """A real-valued function with optional analytic gradient."""

    dim_in: int
    eval: ArrayFn
    grad: Optional[ArrayFn] = None
    name: str = ""

    def __call__(self, x) -> np.ndarray:
        x = _as_state(x, self.dim_in)
        return np.asarray(self.eval(x), dtype=float)

    def gradient(self, x, step_scale: float = FD_STEP_SCALE) -> np.ndarray:
        x = _as_state(x, self.dim_in)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return _central_difference(lambda p: np.asarray(self.eval(p), dtype=float)[..., None],
                                   x, step_scale)[..., 0, :]


def _as_state(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise DimensionError(f"expected state with last dimension {dim}, got shape {x.shape}")
    return x


def constant_field(c) -> VectorField:
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    return VectorField(
        n, n,
        lambda x: np.broadcast_to(c, np.shape(x)[:-1] + (n,)).copy(),
        lambda x: np.zeros(np.shape(x)[:-1] + (n, n)),
        name="const",
    )


def zero_field(n: int) -> VectorField:
    return constant_field(np.zeros(n))


def linear_field(A) -> VectorField:
    A = np.asarray(A, dtype=float)
    return VectorField(
        A.shape[1], A.shape[0],
        lambda x: np.einsum("ij,...j->...i", A, x),
        lambda x: np.broadcast_to(A, np.shape(x)[:-1] + A.shape).copy(),
        name="linear",
    )


def eval_field(field: VectorField, x) -> np.ndarray:
    x = _as_state(x, field.dim_in)
    out = np.asarray(field.eval(x), dtype=float)
    if out.shape != x.shape[:-1] + (field.dim_out,):
        raise DimensionError(
            f"field {field.name!r} returned shape {out.shape} for input shape {x.shape}")
    return out


def _central_difference(fn: ArrayFn, x: np.ndarray, step_scale: float) -> np.ndarray:
    n = x.shape[-1]
    cols = []
    for k in range(n):
        h = step_scale * np.maximum(1.0, np.abs(x[..., k]))
        dx = np.zeros_like(x)
        dx[..., k] = h
        fp = fn(x + dx)
        fm = fn(x - dx)
        col = (fp - fm) / (2.0 * h[..., None])
        if not np.all(np.isfinite(col)):
            raise NumericError(f"non-finite finite difference along coordinate {k}", coordinate=k)
        cols.append(col)
    return np.stack(cols, axis=-1)


def fd_jacobian(field: VectorField, x, step_scale: float = FD_STEP_SCALE) -> np.ndarray:
    """Central-difference Jacobian with step ``step_scale * max(1, |x_k|)``."""
    x = _as_state(x, field.dim_in)
    return _central_difference(lambda p: eval_field(field, p), x, step_scale)


def jacobian_matrix(field: VectorField, x, step_scale: float = FD_STEP_SCALE) -> np.ndarray:
    x = _as_state(x, field.dim_in)
    if field.jac is not None:
        J = np.asarray(field.jac(x), dtype=float)
        if not np.all(np.isfinite(J)):
            bad = np.argwhere(~np.isfinite(J))[0]
            raise NumericError("non-finite analytic Jacobian entry", coordinate=int(bad[-1]))
        return J
    return fd_jacobian(field, x, step_scale)


def jacobian_at(field: VectorField, x, step_scale: float = FD_STEP_SCALE) -> Jacobian:
    x = _as_state(x, field.dim_in)
    return Jacobian(jacobian_matrix(field, x, step_scale), x.copy())


def lie_derivative(f: VectorField, g: VectorField, x) -> np.ndarray:
    """``L_g f(x) = (df/dx)(x) g(x)``."""
    if g.dim_out != f.dim_in or f.dim_in != g.dim_in:
        raise DimensionError(f"cannot differentiate {f.name!r} along {g.name!r}")
    x = _as_state(x, f.dim_in)
    return np.einsum("...ij,...j->...i", jacobian_matrix(f, x), eval_field(g, x))


def lie_bracket(f: VectorField, g: VectorField, x) -> np.ndarray:
    """``[f, g](x) = (dg/dx) f - (df/dx) g``."""
    if f.dim_in != g.dim_in or f.dim_out != g.dim_out or f.dim_in != f.dim_out:
        raise DimensionError(f"bracket of {f.name!r} and {g.name!r} needs square fields of equal size")
    return lie_derivative(g, f, x) - lie_derivative(f, g, x)


def lie_derivative_field(f: VectorField, g: VectorField) -> VectorField:
    """The field ``x -> L_g f(x)``; its Jacobian is left to finite differences."""
    return VectorField(f.dim_in, f.dim_out, lambda x: lie_derivative(f, g, x),
                       name=f"L_{g.name}{f.name}")


def bracket_field(f: VectorField, g: VectorField) -> VectorField:
    return VectorField(f.dim_in, f.dim_out, lambda x: lie_bracket(f, g, x),
                       name=f"[{f.name},{g.name}]")


def sum_fields(fields, coeffs=None) -> VectorField:
    fields = list(fields)
    if not fields:
        raise DimensionError("need at least one field")
    coeffs = [1.0] * len(fields) if coeffs is None else list(coeffs)
    n = fields[0].dim_in

    def ev(x):
        return sum(c * eval_field(f, x) for c, f in zip(coeffs, fields))

    jac = None
    if all(f.jac is not None for f in fields):
        def jac(x):
            return sum(c * jacobian_matrix(f, x) for c, f in zip(coeffs, fields))

    return VectorField(n, fields[0].dim_out, ev, jac, name="+".join(f.name for f in fields))
