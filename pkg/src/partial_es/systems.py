"""Input-affine systems ``x' = f0(x) + sum_i f_i(x) u_i`` with a ``(y, z)`` split."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .vectorfield import DimensionError, VectorField, eval_field


@dataclass(frozen=True)
class InputAffineSystem:
    """Drift plus ``m`` input fields on R^n.

    ``y_indices`` names the coordinates forming ``y``; by default these are
    the first ``y_dim`` coordinates.
    """

    drift: VectorField
    inputs: tuple
    y_dim: int
    z_dim: int
    y_indices: Optional[tuple] = None

    def __post_init__(self):
        n = self.drift.dim_in
        if self.y_dim + self.z_dim != n:
            raise DimensionError(f"y_dim + z_dim = {self.y_dim + self.z_dim} but n = {n}")
        for f in (self.drift, *self.inputs):
            if f.dim_in != n or f.dim_out != n:
                raise DimensionError(f"field {f.name!r} is not a map R^{n} -> R^{n}")
        if self.y_indices is not None:
            idx = tuple(int(i) for i in self.y_indices)
            if len(idx) != self.y_dim or len(set(idx)) != len(idx) or not all(0 <= i < n for i in idx):
                raise DimensionError(f"bad y_indices {self.y_indices} for y_dim {self.y_dim}")
            object.__setattr__(self, "y_indices", idx)
        object.__setattr__(self, "inputs", tuple(self.inputs))

    @property
    def n(self) -> int:
        return self.drift.dim_in

    @property
    def m(self) -> int:
        return len(self.inputs)

    @property
    def y_idx(self) -> tuple:
        return self.y_indices if self.y_indices is not None else tuple(range(self.y_dim))

    @property
    def z_idx(self) -> tuple:
        return tuple(i for i in range(self.n) if i not in self.y_idx)

    def y_of(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)[..., list(self.y_idx)]

    def z_of(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)[..., list(self.z_idx)]

    def compose(self, y, z) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        lead = np.broadcast_shapes(y.shape[:-1], z.shape[:-1])
        x = np.zeros(lead + (self.n,))
        x[..., list(self.y_idx)] = y
        if self.z_dim:
            x[..., list(self.z_idx)] = z
        return x

    def rhs(self, x, u) -> np.ndarray:
        """``f0(x) + sum_i f_i(x) u_i`` for controls ``u`` of shape ``(..., m)``."""
        out = eval_field(self.drift, x)
        u = np.asarray(u, dtype=float)
        for i, f in enumerate(self.inputs):
            out = out + eval_field(f, x) * u[..., i, None]
        return out

    def with_split(self, y_dim: int, y_indices: Optional[Sequence[int]] = None) -> "InputAffineSystem":
        return InputAffineSystem(self.drift, self.inputs, y_dim, self.n - y_dim,
                                 None if y_indices is None else tuple(y_indices))
