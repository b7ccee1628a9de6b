"""One-period remainder bounds for dithered input-affine systems.

Over one dither period the solution satisfies

    x(eps) = x0 + eps * fbar(x0) + R(eps),   |R(eps)| <= sigma * eps**1.5

with ``sigma = (M2 + W^2 m^2 M3 / 6) (sqrt(eps) + W m)`` built from sup
norms of the fields and their first and second Lie derivatives over the
working region.  This module measures both sides numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .averaging import lie_bracket_system
from .controller import EsControllerParams, es_effective_system
from .dither import DitherSpec
from .simulator import BoxDomain, Trajectory, _rk4, domain_exit
from .systems import InputAffineSystem
from .vectorfield import ScalarField, eval_field, fd_jacobian, lie_derivative, lie_derivative_field

REFERENCE_SUBSTEPS = 1024


class DomainExitError(RuntimeError):
    def __init__(self, time: float, coordinate: int):
        super().__init__(f"trajectory left the domain at t = {time:.6g} (coordinate {coordinate})")
        self.time = time
        self.coordinate = coordinate


@dataclass(frozen=True)
class BoundConstants:
    M0: float
    M1: float
    M2: float
    M3: float
    W: float
    m: int
    epsilon: float

    @property
    def sigma(self) -> float:
        return sigma_of(self.M2, self.M3, self.W, self.m, self.epsilon)


def sigma_of(M2: float, M3: float, W: float, m: int, epsilon: float) -> float:
    return (M2 + W**2 * m**2 * M3 / 6.0) * (np.sqrt(epsilon) + W * m)


def _max_norm(values) -> float:
    norms = np.linalg.norm(values, axis=-1)
    if not np.all(np.isfinite(norms)):
        raise ArithmeticError("non-finite field value on the bound grid")
    return float(norms.max()) if norms.size else 0.0


def bound_constants(sys: InputAffineSystem, grid, W: float, epsilon: float) -> BoundConstants:
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("bound grid is empty")
    fields = (sys.drift, *sys.inputs)
    M0 = _max_norm(eval_field(sys.drift, grid))
    M1 = max((_max_norm(eval_field(f, grid)) for f in sys.inputs), default=0.0)
    M2 = max(_max_norm(lie_derivative(fi, fj, grid)) for fi in fields for fj in fields)
    M3 = 0.0
    for fi in sys.inputs:
        for fj in sys.inputs:
            # one finite-difference layer on top of the analytic first derivatives
            dh = fd_jacobian(lie_derivative_field(fi, fj), grid)
            for fl in fields:
                M3 = max(M3, _max_norm(np.einsum("...ij,...j->...i", dh, eval_field(fl, grid))))
    return BoundConstants(M0, M1, M2, M3, float(W), sys.m, float(epsilon))


@dataclass(frozen=True)
class PeriodDefect:
    defect: float
    bound: float
    constants: BoundConstants
    x_end: np.ndarray

    def __iter__(self):
        return iter((self.defect, self.bound))


def _working_grid(x0: np.ndarray, states: np.ndarray, per_axis: int = 5) -> np.ndarray:
    reach = np.max(np.abs(states - x0), axis=0)
    half = 1.25 * reach + 1e-3
    axes = [np.linspace(c - h, c + h, per_axis) for c, h in zip(x0, half)]
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(x0))
    return np.concatenate([lattice, states[:: max(1, len(states) // 128)]])


def one_period_defect_dithered(sys: InputAffineSystem, dither: DitherSpec, x0, epsilon: float,
                               domain: Optional[BoxDomain] = None,
                               substeps: int = REFERENCE_SUBSTEPS) -> PeriodDefect:
    """Defect of one period of ``x' = f0 + sum_k f_k w_k(t/eps)/sqrt(eps)`` against the averaged step."""
    if len(dither.signals) != sys.m:
        raise ValueError(f"{len(dither.signals)} dithers for {sys.m} inputs")
    x0 = np.asarray(x0, dtype=float)
    scale = 1.0 / np.sqrt(epsilon)

    def rhs(t, x):
        w = dither.values(t, epsilon) * scale
        out = eval_field(sys.drift, x)
        for k, f in enumerate(sys.inputs):
            out = out + eval_field(f, x) * w[k]
        return out

    times, states = _rk4(rhs, x0, 0.0, epsilon, epsilon / substeps)
    if domain is not None:
        hit = domain_exit(Trajectory(times, states), domain)
        if hit is not None:
            raise DomainExitError(hit.time, hit.coordinate)
    fbar = lie_bracket_system(sys, dither.nu, tol=1e-12).field(x0)
    defect = float(np.linalg.norm(states[-1] - x0 - epsilon * fbar))
    consts = bound_constants(sys, _working_grid(x0, states), dither.W if sys.m else 0.0, epsilon)
    return PeriodDefect(defect, consts.sigma * epsilon**1.5, consts, states[-1])


def one_period_defect(sys: InputAffineSystem, params: EsControllerParams, cost: ScalarField, x0,
                      epsilon: Optional[float] = None, domain: Optional[BoxDomain] = None) -> PeriodDefect:
    """One-period defect of the closed ES loop, viewed as a ``2m``-input dithered system."""
    if epsilon is not None:
        params = params.with_epsilon(epsilon)
    eff, dither = es_effective_system(sys, cost, params)
    return one_period_defect_dithered(eff, dither, x0, params.epsilon, domain)


def defect_slope(epsilons, defects) -> float:
    """Least-squares slope of ``log defect`` against ``log eps``."""
    return float(np.polyfit(np.log(epsilons), np.log(defects), 1)[0])


def period_decay_check(V: ScalarField, traj: Trajectory, epsilon: float, rho_prime: float,
                       lam: float, y_star, y_indices=None) -> list:
    """Per-period test of ``V(x((k+1)eps)) <= V(x(k eps)) - eps*lam`` while ``|y - y*| >= rho_prime``."""
    t0 = traj.times[0]
    if traj.times[-1] - t0 < epsilon * (1 - 1e-9):
        raise ValueError("trajectory is shorter than one period")
    phase = (traj.times - t0) / epsilon
    idx = np.flatnonzero(np.abs(phase - np.round(phase)) < 1e-6)
    y_star = np.asarray(y_star, dtype=float)
    cols = list(y_indices) if y_indices is not None else list(range(len(y_star)))
    values = np.asarray(V(traj.states[idx]), dtype=float)
    dist = np.linalg.norm(traj.states[idx][:, cols] - y_star, axis=-1)
    return [bool(values[k + 1] <= values[k] - epsilon * lam)
            for k in range(len(idx) - 1) if dist[k] >= rho_prime]
