"""Lie bracket (averaged) systems.

Two routes to the averaged drift of an extremum-seeking loop are provided:
the generic bracket sum ``f0 + sum_{i<j} [f_i, f_j] nu_ij`` over the
effective gain-scaled fields, and the closed form
``f0 - sum_i gamma_i f_i f_i^T grad J``.  They agree whenever the dither
coefficients follow the paired pattern and the gains satisfy the Wronskian
relation, which is what :func:`averaged_equivalence_residual` measures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .controller import EsControllerParams, es_effective_system
from .dither import NuMatrix
from .systems import InputAffineSystem
from .vectorfield import DimensionError, ScalarField, VectorField, eval_field, lie_bracket

__all__ = [
    "InputAffineSystem",
    "AveragedSystem",
    "lie_bracket_system",
    "es_averaged_field",
    "es_lie_bracket_system",
    "averaged_equivalence_residual",
]


@dataclass(frozen=True)
class AveragedSystem:
    field: VectorField
    source: str  # "bracket_sum" or "es_closed_form"

    def __call__(self, x):
        return self.field(x)

    def rhs(self, t, x):
        return self.field(x)


def lie_bracket_system(sys: InputAffineSystem, nu: NuMatrix, tol: float = 0.0) -> AveragedSystem:
    """Bracket-sum averaged field; pairs with ``|nu_ij| <= tol`` are skipped."""
    nu_vals = np.asarray(nu.values if isinstance(nu, NuMatrix) else nu, dtype=float)
    if nu_vals.shape != (sys.m, sys.m):
        raise DimensionError(f"nu is {nu_vals.shape}, system has {sys.m} inputs")
    terms = [(sys.inputs[i], sys.inputs[j], nu_vals[i, j])
             for i in range(sys.m) for j in range(i + 1, sys.m) if abs(nu_vals[i, j]) > tol]

    def ev(x):
        out = eval_field(sys.drift, x)
        for fi, fj, c in terms:
            out = out + c * lie_bracket(fi, fj, x)
        return out

    return AveragedSystem(VectorField(sys.n, sys.n, ev, name="lie_bracket_system"), "bracket_sum")


def es_averaged_field(sys: InputAffineSystem, cost: ScalarField,
                      gammas: Sequence[float]) -> AveragedSystem:
    gammas = [float(g) for g in gammas]
    if len(gammas) != sys.m:
        raise DimensionError(f"{len(gammas)} gains for {sys.m} inputs")

    def ev(x):
        out = eval_field(sys.drift, x)
        grad = cost.gradient(x)
        for g, f in zip(gammas, sys.inputs):
            fx = eval_field(f, x)
            out = out - g * fx * np.sum(fx * grad, axis=-1, keepdims=True)
        return out

    return AveragedSystem(VectorField(sys.n, sys.n, ev, name="es_averaged"), "es_closed_form")


def es_lie_bracket_system(sys: InputAffineSystem, cost: ScalarField,
                          params: EsControllerParams) -> AveragedSystem:
    """Bracket-sum averaged system of the closed ES loop, using the full effective ``nu``."""
    eff, dither = es_effective_system(sys, cost, params)
    return lie_bracket_system(eff, dither.nu, tol=1e-12)


def averaged_equivalence_residual(sys: InputAffineSystem, params: EsControllerParams,
                                  cost: ScalarField, grid) -> float:
    """Sup-norm gap between the bracket-sum and closed-form averaged fields over ``grid``."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    bracket = es_lie_bracket_system(sys, cost, params)
    closed = es_averaged_field(sys, cost, params.effective_gains)
    diff = bracket.field(grid) - closed.field(grid)
    return float(np.max(np.linalg.norm(diff, axis=-1)))
