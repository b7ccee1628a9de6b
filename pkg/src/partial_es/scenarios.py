"""The two benchmark systems: the Brockett integrator and the rotating rigid body."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .simulator import BoxDomain
from .systems import InputAffineSystem
from .vectorfield import ScalarField, VectorField, constant_field, zero_field

INF = float("inf")


@dataclass(frozen=True)
class Cost:
    field: ScalarField
    y_indices: tuple
    y_star: np.ndarray

    def __call__(self, x):
        return self.field(x)


@dataclass(frozen=True)
class FigureParams:
    cost: str
    gain_kind: str
    epsilon: float
    gammas: tuple
    x0: tuple
    T: float


@dataclass(frozen=True)
class Scenario:
    name: str
    system: InputAffineSystem
    costs: dict
    domains: dict
    reference_V: dict = field(default_factory=dict)
    figure_params: dict = field(default_factory=dict)
    averaged_closed_form: Optional[Callable[..., VectorField]] = None

    def system_for(self, cost_name: str) -> InputAffineSystem:
        cost = self.cost(cost_name)
        idx = tuple(cost.y_indices)
        default = tuple(range(len(idx)))
        return self.system.with_split(len(idx), None if idx == default else idx)

    def cost(self, name: str) -> Cost:
        try:
            return self.costs[name]
        except KeyError:
            raise KeyError(f"scenario {self.name!r} has no cost {name!r}; "
                           f"choose from {sorted(self.costs)}") from None


def _quad_cost(weights, center, name) -> ScalarField:
    w = np.asarray(weights, dtype=float)
    c = np.asarray(center, dtype=float)
    return ScalarField(
        len(w),
        lambda x: np.sum(w * (np.asarray(x) - c) ** 2, axis=-1),
        lambda x: 2.0 * w * (np.asarray(x) - c),
        name=name,
    )


def brockett_fields():
    def f1(x):
        x = np.asarray(x)
        return np.stack([np.ones_like(x[..., 0]), np.zeros_like(x[..., 0]), x[..., 1]], axis=-1)

    def f2(x):
        x = np.asarray(x)
        return np.stack([np.zeros_like(x[..., 0]), np.ones_like(x[..., 0]), -x[..., 0]], axis=-1)

    j1 = np.zeros((3, 3))
    j1[2, 1] = 1.0
    j2 = np.zeros((3, 3))
    j2[2, 0] = -1.0

    def const_jac(M):
        return lambda x: np.broadcast_to(M, np.shape(x)[:-1] + (3, 3)).copy()

    return (VectorField(3, 3, f1, const_jac(j1), name="f1"),
            VectorField(3, 3, f2, const_jac(j2), name="f2"))


def brockett_scenario() -> Scenario:
    """``x1' = u1, x2' = u2, x3' = x2 u1 - x1 u2`` with costs ``J1`` (y = x1, x2) and ``J2`` (y = x1, x3)."""
    f1, f2 = brockett_fields()
    system = InputAffineSystem(zero_field(3), (f1, f2), 2, 1)
    costs = {
        "J1": Cost(_quad_cost([1, 1, 0], [3, 1, 0], "J1"), (0, 1), np.array([3.0, 1.0])),
        "J2": Cost(_quad_cost([1, 0, 1], [4, 0, 0], "J2"), (0, 2), np.array([4.0, 0.0])),
    }
    domains = {
        "J1": BoxDomain(((-20.0, 20.0), (-20.0, 20.0)), ((-INF, INF),)),
        # keeps x1 away from the plane where the J2 input directions degenerate
        "J2": BoxDomain(((0.2, 20.0), (-20.0, 20.0)), ((-INF, INF),), y_indices=(0, 2)),
    }
    figures = {
        "fig1a": FigureParams("J1", "contA", 0.75, (2.0, 2.0), (0.0, 0.0, 2.0), 60.0),
        "fig1b": FigureParams("J1", "contB", 0.75, (2.0, 2.0), (0.0, 0.0, 2.0), 60.0),
        "fig1c": FigureParams("J2", "contB", 0.75, (2.0, 2.0), (1.0, 1.0, 2.0), 60.0),
    }
    return Scenario("brockett", system, costs, domains, {}, figures)


def rigid_body_drift(A1: float, A2: float, A3: float) -> VectorField:
    a1 = (A3 - A2) / A1
    a2 = (A1 - A3) / A2
    a3 = (A2 - A1) / A3

    def ev(x):
        x = np.asarray(x)
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        return np.stack([a1 * x2 * x3, a2 * x1 * x3, a3 * x1 * x2], axis=-1)

    def jac(x):
        x = np.asarray(x)
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        z = np.zeros_like(x1)
        return np.stack([
            np.stack([z, a1 * x3, a1 * x2], axis=-1),
            np.stack([a2 * x3, z, a2 * x1], axis=-1),
            np.stack([a3 * x2, a3 * x1, z], axis=-1),
        ], axis=-2)

    return VectorField(3, 3, ev, jac, name="rigid_drift")


def rigid_body_averaged(A1: float, A2: float, A3: float, gammas=(1.0, 1.0)) -> VectorField:
    """Closed-form averaged rigid body for ``J = x1^2 + x2^2``: drift minus ``2 gamma_i x_i`` on the first two axes."""
    drift = rigid_body_drift(A1, A2, A3)
    damp = np.array([2.0 * gammas[0], 2.0 * gammas[1], 0.0])

    def ev(x):
        return drift.eval(x) - damp * np.asarray(x)

    def jac(x):
        return drift.jac(x) - np.diag(damp)

    return VectorField(3, 3, ev, jac, name="rigid_averaged")


def _quadratic_form(weights, name) -> ScalarField:
    return _quad_cost(weights, [0.0, 0.0, 0.0], name)


def rigid_body_scenario(A1: float = 1.0, A2: float = 2.0, A3: float = 3.0) -> Scenario:
    if min(A1, A2, A3) <= 0:
        raise ValueError(f"moments of inertia must be positive, got {(A1, A2, A3)}")
    e1 = constant_field([1.0, 0.0, 0.0])
    e2 = constant_field([0.0, 1.0, 0.0])
    system = InputAffineSystem(rigid_body_drift(A1, A2, A3), (e1, e2), 2, 1)
    y_star = np.zeros(2)
    costs = {
        "J": Cost(_quad_cost([1, 1, 0], [0, 0, 0], "J"), (0, 1), y_star),
        "J_full": Cost(_quad_cost([1, 1, 1], [0, 0, 0], "J_full"), (0, 1), y_star),
    }
    domains = {
        "J": BoxDomain(((-10.0, 10.0), (-10.0, 10.0)), ((-INF, INF),)),
        "J_full": BoxDomain(((-10.0, 10.0), (-10.0, 10.0)), ((-INF, INF),)),
    }
    ref = {"energy": _quadratic_form([A1, A2, A3], "energy")}
    if max(A1, A2) < A3:
        ref["weighted"] = _quadratic_form([A1 / (A3 - A2), A2 / (A3 - A1), 0.0], "weighted")
    elif min(A1, A2) > A3:
        ref["weighted"] = _quadratic_form([A1 / (A2 - A3), A2 / (A1 - A3), 0.0], "weighted")
    figures = {}
    if (A1, A2, A3) == (1.0, 2.0, 3.0):
        figures = {
            "fig2a": FigureParams("J", "contA", 0.25, (2.0, 2.0), (2.0, 1.0, 1.0), 40.0),
            "fig2b": FigureParams("J", "contB", 0.25, (2.0, 2.0), (2.0, 1.0, 1.0), 40.0),
            "fig2c": FigureParams("J_full", "contB", 0.25, (2.0, 2.0), (2.0, 1.0, 1.0), 40.0),
        }
    return Scenario("rigid_body", system, costs, domains, ref, figures,
                    averaged_closed_form=lambda gammas=(1.0, 1.0): rigid_body_averaged(A1, A2, A3, gammas))


SCENARIOS = {"brockett": brockett_scenario, "rigid_body": rigid_body_scenario}


def get_scenario(name: str, **kwargs) -> Scenario:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return factory(**kwargs)


def domain_box(scenario: Scenario, cost_name: str, y_cap: float = 6.0, z_cap: float = 2.0):
    """The default domain of ``cost_name`` clipped to ``|y_k| <= y_cap`` and ``|z_k| <= z_cap``."""
    b = scenario.domains[cost_name].bounds()
    y_idx = set(scenario.system_for(cost_name).y_idx)
    caps = np.array([y_cap if i in y_idx else z_cap for i in range(len(b))])
    return np.maximum(b[:, 0], -caps), np.minimum(b[:, 1], caps)


def domain_grid(scenario: Scenario, cost_name: str, n_points: int, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in :func:`domain_box`."""
    from scipy.stats import qmc

    lo, hi = domain_box(scenario, cost_name)
    return qmc.scale(qmc.Halton(d=len(lo), scramble=True, seed=seed).random(n_points), lo, hi)
