"""Unit-period dither signals and the averaging coefficients ``nu_ij``.

Signals are stored on the unit period ``theta in [0, 1]``; the physical
signal is ``w(t / eps mod 1)``.  With that scaling the coefficient

    nu_ij = int_0^1 w_j(theta) int_0^theta w_i(s) ds dtheta

does not depend on ``eps``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .vectorfield import NumericError

DEFAULT_POINTS = 1024


@dataclass(frozen=True)
class DitherSignal:
    shape: Callable[[np.ndarray], np.ndarray]
    amplitude_bound: float
    name: str = ""

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.asarray(self.shape(np.mod(theta, 1.0)), dtype=float) * np.ones_like(theta)

    def at_time(self, t, epsilon: float) -> np.ndarray:
        return self(np.asarray(t, dtype=float) / epsilon)

    def scaled(self, c: float) -> "DitherSignal":
        return DitherSignal(lambda th, s=self.shape: c * s(th), abs(c) * self.amplitude_bound,
                            name=f"{c:g}*{self.name}")


def _check_points(n_points: int) -> int:
    if n_points < 64:
        raise ValueError(f"n_points must be >= 64, got {n_points}")
    return n_points + (n_points % 2)


def _samples(w: DitherSignal, theta: np.ndarray) -> np.ndarray:
    vals = w(theta)
    if not np.all(np.isfinite(vals)):
        raise NumericError(f"dither {w.name!r} produced non-finite values")
    return vals


def _simpson(vals: np.ndarray, h: float) -> float:
    return h / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum())


def _cumulative(w: DitherSignal, n: int) -> np.ndarray:
    """Running integral of ``w`` at the ``n + 1`` grid nodes, Simpson per cell."""
    h = 1.0 / n
    nodes = _samples(w, np.linspace(0.0, 1.0, n + 1))
    mids = _samples(w, (np.arange(n) + 0.5) * h)
    cells = h / 6.0 * (nodes[:-1] + 4.0 * mids + nodes[1:])
    return np.concatenate(([0.0], np.cumsum(cells)))


def compute_nu(w_i: DitherSignal, w_j: DitherSignal, n_points: int = DEFAULT_POINTS) -> float:
    n = _check_points(n_points)
    theta = np.linspace(0.0, 1.0, n + 1)
    integrand = _samples(w_j, theta) * _cumulative(w_i, n)
    return float(_simpson(integrand, 1.0 / n))


def check_zero_mean(w: DitherSignal, n_points: int = DEFAULT_POINTS) -> float:
    n = _check_points(n_points)
    return abs(float(_simpson(_samples(w, np.linspace(0.0, 1.0, n + 1)), 1.0 / n)))


def sup_bound(signals: Sequence[DitherSignal], n_points: int = DEFAULT_POINTS) -> float:
    if len(signals) == 0:
        raise ValueError("sup_bound needs at least one signal")
    theta = np.linspace(0.0, 1.0, 8 * max(n_points, 64) + 1)
    return max(float(np.max(np.abs(_samples(w, theta)))) for w in signals)


@dataclass(frozen=True)
class NuMatrix:
    values: np.ndarray
    quadrature_points: int

    def strict_upper(self):
        m = self.values.shape[0]
        return [(i, j, self.values[i, j]) for i in range(m) for j in range(i + 1, m)]


def nu_matrix(signals: Sequence[DitherSignal], n_points: int = DEFAULT_POINTS) -> NuMatrix:
    m = len(signals)
    vals = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            vals[i, j] = compute_nu(signals[i], signals[j], n_points)
    return NuMatrix(vals, n_points)


@dataclass(frozen=True)
class DitherSpec:
    """``2m`` signals laid out as ``(w_1..w_m, w_{m+1}..w_{2m})``."""

    signals: tuple
    n_points: int = DEFAULT_POINTS
    label: str = ""

    @property
    def m(self) -> int:
        return len(self.signals) // 2

    @cached_property
    def nu(self) -> NuMatrix:
        return nu_matrix(self.signals, self.n_points)

    @cached_property
    def W(self) -> float:
        return sup_bound(self.signals, self.n_points)

    def values(self, t, epsilon: float) -> np.ndarray:
        """Signal values at time(s) ``t``; shape ``t.shape + (2m,)``."""
        if not self.signals:
            return np.zeros(np.shape(t) + (0,))
        return np.stack([w.at_time(t, epsilon) for w in self.signals], axis=-1)


def pattern_residual(nu: NuMatrix, target: float = 1.0) -> float:
    """Largest deviation of ``nu`` from the ES pattern (paired = target, rest = 0) on the strict upper triangle."""
    m = nu.values.shape[0] // 2
    worst = 0.0
    for i, j, v in nu.strict_upper():
        want = target if (j == i + m and i < m) else 0.0
        worst = max(worst, abs(v - want))
    return worst


def _cos(k: int, a: float):
    return lambda th: a * np.cos(2.0 * np.pi * k * th)


def _sin(k: int, a: float):
    return lambda th: a * np.sin(2.0 * np.pi * k * th)


def quadrature_dither(m: int = 2, frequencies: Sequence[int] | None = None) -> DitherSpec:
    """Sine/cosine pairs with amplitude ``sqrt(pi k)`` per channel.

    Odd channels (1-based) use ``(cos, sin)``, even channels ``(sin, -cos)``.
    With all frequencies equal to one this is the two-channel layout used in
    the worked examples; an outer gain of 2 then yields ``nu_{i,i+m} = 1``.
    Distinct frequencies make every cross-channel coefficient vanish.
    """
    freqs = [1] * m if frequencies is None else [int(k) for k in frequencies]
    if len(freqs) != m or min(freqs) < 1:
        raise ValueError(f"need {m} positive integer frequencies, got {freqs}")
    first, second = [], []
    for i, k in enumerate(freqs):
        a = np.sqrt(np.pi * k)
        if i % 2 == 0:
            first.append(DitherSignal(_cos(k, a), a, name=f"cos{k}"))
            second.append(DitherSignal(_sin(k, a), a, name=f"sin{k}"))
        else:
            first.append(DitherSignal(_sin(k, a), a, name=f"sin{k}"))
            second.append(DitherSignal(_cos(k, -a), a, name=f"-cos{k}"))
    label = "uniform" if len(set(freqs)) == 1 else "multifrequency"
    return DitherSpec(tuple(first + second), label=label)


def zero_dither(m: int) -> DitherSpec:
    z = DitherSignal(lambda th: np.zeros_like(th), 0.0, name="0")
    return DitherSpec(tuple([z] * (2 * m)), label="zero")
