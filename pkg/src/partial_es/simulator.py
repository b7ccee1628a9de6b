"""Fixed-step RK4 integration with trajectory recording and domain surveillance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .controller import EsControllerParams, closed_loop_field, es_control
from .systems import InputAffineSystem
from .vectorfield import ScalarField

TimeVaryingField = Callable[[float, np.ndarray], np.ndarray]


class SimulationBlowUp(ArithmeticError):
    def __init__(self, time: float, message: str = ""):
        super().__init__(message or f"non-finite state at t = {time:.6g}")
        self.time = time


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: Optional[np.ndarray] = None
    cost: Optional[np.ndarray] = None
    epsilon: float = float("nan")
    step: float = float("nan")

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        n = len(self.times)
        if self.states.shape[0] != n:
            raise ValueError("times and states differ in length")
        for name in ("controls", "cost"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n:
                raise ValueError(f"{name} has {len(arr)} samples, expected {n}")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``D1 x D2``; ``z_bounds`` may be infinite."""

    y_bounds: tuple
    z_bounds: tuple = ()
    y_indices: Optional[tuple] = None

    def __post_init__(self):
        for lo, hi in (*self.y_bounds, *self.z_bounds):
            if not lo < hi:
                raise ValueError(f"empty interval ({lo}, {hi})")

    @property
    def n(self) -> int:
        return len(self.y_bounds) + len(self.z_bounds)

    def index_layout(self):
        n = self.n
        y_idx = tuple(self.y_indices) if self.y_indices is not None else tuple(range(len(self.y_bounds)))
        z_idx = tuple(i for i in range(n) if i not in y_idx)
        return y_idx, z_idx

    def bounds(self) -> np.ndarray:
        y_idx, z_idx = self.index_layout()
        out = np.zeros((self.n, 2))
        for i, b in zip(y_idx, self.y_bounds):
            out[i] = b
        for i, b in zip(z_idx, self.z_bounds):
            out[i] = b
        return out

    def contains(self, x) -> np.ndarray:
        b = self.bounds()
        x = np.asarray(x, dtype=float)
        return np.all((x >= b[:, 0]) & (x <= b[:, 1]), axis=-1)


@dataclass(frozen=True)
class DomainExit:
    time: float
    index: int
    coordinate: int
    part: str  # "y" or "z"


def _rk4(rhs: TimeVaryingField, x0: np.ndarray, t0: float, T: float, step: float):
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if T < t0:
        raise ValueError(f"final time {T} precedes start time {t0}")
    span = T - t0
    n_full = int(math.floor(span / step + 1e-9))
    times = [t0 + k * step for k in range(n_full + 1)]
    if span - n_full * step > 1e-9 * max(1.0, abs(T)):
        times.append(T)
    x = np.array(x0, dtype=float)
    states = np.empty((len(times),) + x.shape)
    states[0] = x
    # overflow is reported through SimulationBlowUp, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(len(times) - 1):
            t, h = times[k], times[k + 1] - times[k]
            k1 = rhs(t, x)
            k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
            k4 = rhs(t + h, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise SimulationBlowUp(times[k + 1])
            states[k + 1] = x
    return np.asarray(times), states


def integrate(field: TimeVaryingField, x0, t0: float, T: float, step: float) -> Trajectory:
    """Classical RK4 from ``t0`` to ``T``; the last step is shortened to land on ``T``."""
    times, states = _rk4(field, np.asarray(x0, dtype=float), t0, T, step)
    return Trajectory(times, states, step=step)


def integrate_batch(field: TimeVaryingField, x0s, t0: float, T: float, step: float) -> list:
    """Integrate many initial states at once; ``field`` must accept ``(B, n)`` arrays."""
    x0s = np.atleast_2d(np.asarray(x0s, dtype=float))
    times, states = _rk4(field, x0s, t0, T, step)
    return [Trajectory(times, states[:, b], step=step) for b in range(x0s.shape[0])]


def integrate_closed_loop(sys: InputAffineSystem, params: EsControllerParams, cost: ScalarField,
                          x0, T: float, substeps_per_period: int = 64, t0: float = 0.0) -> Trajectory:
    """Simulate the ES loop with step ``eps / substeps_per_period``, recording ``u`` and ``J``."""
    if substeps_per_period < 32:
        raise ValueError(f"substeps_per_period must be >= 32, got {substeps_per_period}")
    step = params.epsilon / substeps_per_period
    rhs = closed_loop_field(sys, cost, params)
    times, states = _rk4(rhs, np.asarray(x0, dtype=float), t0, T, step)
    J = np.asarray(cost(states), dtype=float)
    u = es_control(times, J, params)
    return Trajectory(times, states, u, J, epsilon=params.epsilon, step=step)


def integrate_closed_loop_batch(sys: InputAffineSystem, params: EsControllerParams,
                                cost: ScalarField, x0s, T: float,
                                substeps_per_period: int = 64, t0: float = 0.0) -> list:
    if substeps_per_period < 32:
        raise ValueError(f"substeps_per_period must be >= 32, got {substeps_per_period}")
    step = params.epsilon / substeps_per_period
    trajs = integrate_batch(closed_loop_field(sys, cost, params), x0s, t0, T, step)
    for tr in trajs:
        tr.epsilon = params.epsilon
        tr.cost = np.asarray(cost(tr.states), dtype=float)
    return trajs


def domain_exit(traj: Trajectory, domain: BoxDomain) -> Optional[DomainExit]:
    b = domain.bounds()
    y_idx, _ = domain.index_layout()
    outside = (traj.states < b[:, 0]) | (traj.states > b[:, 1])
    rows = np.flatnonzero(outside.any(axis=1))
    if rows.size == 0:
        return None
    k = int(rows[0])
    coords = np.flatnonzero(outside[k])
    y_hits = [c for c in coords if c in y_idx]
    coord = int(y_hits[0]) if y_hits else int(coords[0])
    return DomainExit(float(traj.times[k]), k, coord, "y" if y_hits else "z")
