"""Extremum-seeking control law built from gain pairs and dither signals.

Channel ``i`` applies

    u_i = c_i / sqrt(eps) * (g_i(J) w_i(t/eps) + g_{i+m}(J) w_{i+m}(t/eps))

where ``c_i`` is an outer gain.  Absorbing ``c_i`` into the dithers gives
the plain input-affine form with ``2m`` effective fields ``g_k(J) f_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .dither import DitherSpec, NuMatrix
from .systems import InputAffineSystem
from .vectorfield import DimensionError, ScalarField, VectorField, eval_field, jacobian_matrix

ScalarFn = Callable[[np.ndarray], np.ndarray]

GAIN_KINDS = ("contA", "contB", "custom")


class GainDomainError(ValueError):
    """A gain function was evaluated outside its domain."""


@dataclass(frozen=True)
class GainPair:
    """Paired gains ``(g, g_pair)`` with ``g g_pair' - g' g_pair = -gamma``."""

    g: ScalarFn
    g_pair: ScalarFn
    gamma: float
    domain_lo: float = -np.inf
    dg: Optional[ScalarFn] = None
    dg_pair: Optional[ScalarFn] = None
    kind: str = "custom"

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < self.domain_lo):
            raise GainDomainError(f"{self.kind} gains need z >= {self.domain_lo}, got min {z.min()}")
        return z

    def values(self, z):
        z = self._check(z)
        return np.asarray(self.g(z), dtype=float), np.asarray(self.g_pair(z), dtype=float)

    def derivatives(self, z):
        z = self._check(z)
        if self.dg is not None and self.dg_pair is not None:
            return np.asarray(self.dg(z), dtype=float), np.asarray(self.dg_pair(z), dtype=float)
        h = 1e-6 * np.maximum(1.0, np.abs(z))
        lo = np.maximum(z - h, self.domain_lo)
        span = z + h - lo
        return ((self.g(z + h) - self.g(lo)) / span, (self.g_pair(z + h) - self.g_pair(lo)) / span)


def _cont_a_pair() -> GainPair:
    return GainPair(np.sin, np.cos, 1.0, -np.inf, np.cos, lambda z: -np.sin(z), kind="contA")


# beyond this q = z/4 the amplitude is below exp(-300); gains are returned as zero
_CONTB_QMAX = 600.0


def _cont_b_parts(z):
    z = np.asarray(z, dtype=float)
    q = np.minimum(z, 4.0 * _CONTB_QMAX) / 4.0
    pos = z > 0
    live = pos & (q < _CONTB_QMAX)
    qs = np.where(live, q, 1.0)
    emq = np.exp(-qs)
    amp = np.sqrt(emq * (-np.expm1(-qs)) / (1.0 + emq))
    phase = np.exp(qs) + 2.0 * np.log(np.expm1(qs))
    return live, qs, emq, amp, phase


def cont_b_values(z):
    live, _, _, amp, phase = _cont_b_parts(z)
    return np.where(live, amp * np.sin(phase), 0.0), np.where(live, amp * np.cos(phase), 0.0)


def cont_b_derivatives(z):
    live, q, emq, amp, phase = _cont_b_parts(z)
    damp2 = 0.25 * (2.0 * emq**2 + emq**3 - emq) / (1.0 + emq) ** 2
    damp = damp2 / (2.0 * amp)
    dphase = 0.25 * (np.exp(q) + 1.0) / (-np.expm1(-q))
    s, c = np.sin(phase), np.cos(phase)
    dg = damp * s + amp * dphase * c
    dgp = damp * c - amp * dphase * s
    return np.where(live, dg, 0.0), np.where(live, dgp, 0.0)


def _cont_b_pair() -> GainPair:
    return GainPair(
        lambda z: cont_b_values(z)[0],
        lambda z: cont_b_values(z)[1],
        0.25,
        0.0,
        lambda z: cont_b_derivatives(z)[0],
        lambda z: cont_b_derivatives(z)[1],
        kind="contB",
    )


def gain_pair(kind: str) -> GainPair:
    if kind == "contA":
        return _cont_a_pair()
    if kind == "contB":
        return _cont_b_pair()
    raise ValueError(f"unknown gain kind {kind!r}; built-in kinds are contA, contB")


def eval_gain_pair(kind: str, z):
    """Return ``(g(z), g_pair(z))`` for a built-in family."""
    return gain_pair(kind).values(z)


def wronskian_residual(pair: GainPair, z: float) -> float:
    """``g g_pair' - g' g_pair + gamma`` with central differences in ``z``."""
    z = float(z)
    h = 1e-6 * max(1.0, abs(z))
    g, gp = (float(v) for v in pair.values(z))
    g_plus, gp_plus = pair.values(z + h)
    g_minus, gp_minus = pair.values(z - h)
    dg = (float(g_plus) - float(g_minus)) / (2 * h)
    dgp = (float(gp_plus) - float(gp_minus)) / (2 * h)
    return g * dgp - dg * gp + pair.gamma


@dataclass(frozen=True)
class EsControllerParams:
    epsilon: float
    gains: tuple
    dither: DitherSpec
    gamma_outer: tuple

    def __post_init__(self):
        object.__setattr__(self, "gains", tuple(self.gains))
        object.__setattr__(self, "gamma_outer", tuple(float(c) for c in self.gamma_outer))
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        m = len(self.gains)
        if len(self.dither.signals) != 2 * m or len(self.gamma_outer) != m:
            raise DimensionError(
                f"{m} gain pairs need {2 * m} dither signals and {m} outer gains, got "
                f"{len(self.dither.signals)} and {len(self.gamma_outer)}")

    @property
    def m(self) -> int:
        return len(self.gains)

    def with_epsilon(self, epsilon: float) -> "EsControllerParams":
        return EsControllerParams(epsilon, self.gains, self.dither, self.gamma_outer)

    @cached_property
    def effective_dither(self) -> DitherSpec:
        """Dithers with the outer gains folded in."""
        m = self.m
        sig = [w.scaled(self.gamma_outer[k % m]) for k, w in enumerate(self.dither.signals)]
        return DitherSpec(tuple(sig), self.dither.n_points, label=self.dither.label)

    @property
    def nu(self) -> NuMatrix:
        return self.effective_dither.nu

    @property
    def effective_gains(self) -> np.ndarray:
        """Bracket gain per channel: ``nu_{i,i+m} * gamma_i``."""
        m = self.m
        return np.array([self.nu.values[i, i + m] * self.gains[i].gamma for i in range(m)])


def make_params(kind: str, epsilon: float, gamma_outer: Sequence[float],
                frequencies: Optional[Sequence[int]] = None) -> EsControllerParams:
    from .dither import quadrature_dither

    m = len(gamma_outer)
    return EsControllerParams(epsilon, tuple(gain_pair(kind) for _ in range(m)),
                              quadrature_dither(m, frequencies), tuple(gamma_outer))


def es_control(t, J_value, params: EsControllerParams) -> np.ndarray:
    """Controls ``u`` of shape ``J_value.shape + (m,)``."""
    J_value = np.asarray(J_value, dtype=float)
    w = params.dither.values(t, params.epsilon)
    m = params.m
    scale = 1.0 / np.sqrt(params.epsilon)
    us = []
    for i, pair in enumerate(params.gains):
        g, gp = pair.values(J_value)
        us.append(params.gamma_outer[i] * scale * (g * w[..., i] + gp * w[..., i + m]))
    return np.stack(us, axis=-1) if us else np.zeros(J_value.shape + (0,))


def closed_loop_field(system: InputAffineSystem, cost: ScalarField, params: EsControllerParams):
    """``(t, x) -> f0(x) + sum_i f_i(x) u_i(t, J(x))``."""
    if params.m != system.m:
        raise DimensionError(f"controller has {params.m} channels, system has {system.m} inputs")
    if cost.dim_in != system.n:
        raise DimensionError("cost and system dimensions differ")

    def rhs(t, x):
        return system.rhs(x, es_control(t, cost(x), params))

    return rhs


def gain_scaled_field(f: VectorField, gain: ScalarFn, dgain: Optional[ScalarFn],
                      cost: ScalarField, name: str = "") -> VectorField:
    """The field ``x -> gain(J(x)) f(x)`` with a chain-rule Jacobian when ``dgain`` is known."""

    def ev(x):
        return np.asarray(gain(cost(x)), dtype=float)[..., None] * eval_field(f, x)

    jac = None
    if dgain is not None:
        def jac(x):
            J = cost(x)
            fx = eval_field(f, x)
            dJ = np.asarray(dgain(J), dtype=float)[..., None] * cost.gradient(x)
            return (fx[..., :, None] * dJ[..., None, :]
                    + np.asarray(gain(J), dtype=float)[..., None, None] * jacobian_matrix(f, x))

    return VectorField(f.dim_in, f.dim_out, ev, jac, name=name or f"g(J){f.name}")


def es_effective_system(system: InputAffineSystem, cost: ScalarField,
                        params: EsControllerParams) -> tuple[InputAffineSystem, DitherSpec]:
    """The ``2m``-input system ``f0 + sum_k g_k(J) f_{k mod m} w_k / sqrt(eps)`` and its dithers."""
    if params.m != system.m:
        raise DimensionError(f"controller has {params.m} channels, system has {system.m} inputs")
    first, second = [], []
    for i, (f, pair) in enumerate(zip(system.inputs, params.gains)):
        have_d = pair.dg is not None and pair.dg_pair is not None
        first.append(gain_scaled_field(f, pair.g, pair.dg if have_d else None, cost, f"g{i + 1}f{i + 1}"))
        second.append(gain_scaled_field(f, pair.g_pair, pair.dg_pair if have_d else None, cost,
                                        f"g{i + 1 + system.m}f{i + 1}"))
    eff = InputAffineSystem(system.drift, tuple(first + second), system.y_dim, system.z_dim,
                            system.y_indices)
    return eff, params.effective_dither
