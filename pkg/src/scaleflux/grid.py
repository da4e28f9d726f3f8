"""Periodic uniform grids on [0, 2pi)^d with integer wavenumbers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

BOX_LENGTH = 2.0 * np.pi


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic lattice for the d-torus, box length 2pi per axis.

    Parameters
    ----------
    d : int
        Spatial dimension, 2 or 3.
    n : int
        Points per dimension; power of two, at least 8.
    """

    d: int
    n: int

    def __post_init__(self) -> None:
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")

    @property
    def h(self) -> float:
        """Grid spacing 2pi/n."""
        return BOX_LENGTH / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def npoints(self) -> int:
        return self.n**self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def box_volume(self) -> float:
        return BOX_LENGTH**self.d

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays x_1, ..., x_d in [0, 2pi)."""
        x = np.arange(self.n) * self.h
        return tuple(
            x.reshape([-1 if a == axis else 1 for a in range(self.d)])
            for axis in range(self.d)
        )

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Broadcastable integer wavenumber arrays, each in [-n/2, n/2)."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return tuple(
            k.reshape([-1 if a == axis else 1 for a in range(self.d)])
            for axis in range(self.d)
        )

    @cached_property
    def wavenumbers_deriv(self) -> tuple[np.ndarray, ...]:
        """
        Wavenumbers for first-derivative symbols: the unpaired Nyquist mode
        -n/2 is zeroed so that d/dx stays skew-adjoint and real on real data.
        """
        out = []
        for k in self.wavenumbers:
            kk = k.copy()
            kk[kk == -self.n // 2] = 0.0
            out.append(kk)
        return tuple(out)

    @cached_property
    def k_squared(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for k in self.wavenumbers:
            out = out + k**2
        return out

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask: True where every |k_i| <= n/3."""
        keep = np.ones(self.shape, dtype=bool)
        for k in self.wavenumbers:
            keep = keep & (3 * np.abs(k) <= self.n)
        return keep

    def integrate(self, values: np.ndarray) -> float:
        """Uniform-grid quadrature of a scalar sample array over the box."""
        if values.shape != self.shape:
            raise ValueError("sample array does not match grid shape")
        return float(np.sum(values)) * self.cell_volume
