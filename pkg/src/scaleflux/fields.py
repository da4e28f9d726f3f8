"""
Real/spectral field storage and the band-limited field operations built on it:
exact phase-shift translation, divergence-free projection, spectral pressure
recovery, derivatives, norms, and the translation-based Besov seminorm.

Fields are immutable after construction; every operation is a pure function
of its inputs, so concurrent use from multiple threads is safe.  The spectral
cache is memoized lazily; a racing recompute is benign (same value).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import Grid


@dataclass(frozen=True, eq=False)
class Field:
    """
    A c-component real field sampled on a Grid, with a paired spectral form.

    Parameters
    ----------
    grid : Grid
    data : ndarray, shape (c, n, ..., n)
        Component-major float64 samples.  Stored read-only.
    time : float
        Simulation time of the sample.
    nu : float
        Viscosity tag carried through file I/O (0 when not meaningful).
    """

    grid: Grid
    data: np.ndarray
    time: float = 0.0
    nu: float = 0.0
    _spectral: dict = dc_field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == self.grid.d:
            data = data[np.newaxis]
        if data.shape[1:] != self.grid.shape:
            raise ValueError(
                f"field shape {data.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("field contains non-finite values")
        data = np.ascontiguousarray(data)
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @property
    def spectral(self) -> np.ndarray:
        """Fourier coefficients of exp(i k.x), shape (c, n, ..., n)."""
        cached = self._spectral.get("coef")
        if cached is None:
            axes = tuple(range(1, self.grid.d + 1))
            cached = np.fft.fftn(self.data, axes=axes) / self.grid.npoints
            cached.flags.writeable = False
            self._spectral["coef"] = cached
        return cached

    @classmethod
    def from_spectral(
        cls,
        grid: Grid,
        coef: np.ndarray,
        time: float = 0.0,
        nu: float = 0.0,
        trust_spectral: bool = False,
    ) -> "Field":
        """
        Build from Fourier coefficients.  With trust_spectral the (Hermitian)
        coefficients are kept as the spectral cache instead of re-transforming
        the real samples, so exact spectral zeros stay exact.
        """
        coef = np.asarray(coef, dtype=np.complex128)
        if coef.ndim == grid.d:
            coef = coef[np.newaxis]
        axes = tuple(range(1, grid.d + 1))
        data = np.real(np.fft.ifftn(coef * grid.npoints, axes=axes))
        out = cls(grid, data, time=time, nu=nu)
        if trust_spectral:
            cached = np.ascontiguousarray(coef)
            cached.flags.writeable = False
            out._spectral["coef"] = cached
        return out

    def component(self, i: int) -> np.ndarray:
        return self.data[i]

    def with_time(self, time: float) -> "Field":
        return Field(self.grid, self.data, time=time, nu=self.nu)


def forward_transform(f: Field) -> np.ndarray:
    """Fourier coefficients of f (coefficient of exp(i k.x) per mode)."""
    return f.spectral


def inverse_transform(grid: Grid, coef: np.ndarray, time: float = 0.0) -> Field:
    """Real field whose Fourier coefficients are ``coef``."""
    return Field.from_spectral(grid, coef, time=time)


def _phase(grid: Grid, offset: np.ndarray) -> np.ndarray:
    arg = np.zeros(grid.shape)
    for a, k in enumerate(grid.wavenumbers):
        arg = arg + k * offset[a]
    return np.exp(1j * arg)


def shift(f: Field, offset) -> Field:
    """
    Translate f by an arbitrary (possibly off-grid) offset vector, exactly
    for band-limited data: u(x) -> u(x + offset), via spectral phase factors.
    """
    offset = np.asarray(offset, dtype=np.float64)
    if offset.shape != (f.grid.d,):
        raise ValueError(f"offset must have {f.grid.d} components")
    coef = f.spectral * _phase(f.grid, offset)[np.newaxis]
    return Field.from_spectral(f.grid, coef, time=f.time, nu=f.nu)


def shift_spectral(grid: Grid, coef: np.ndarray, offset) -> np.ndarray:
    """Spectral-space translation of coefficient array(s) by ``offset``."""
    offset = np.asarray(offset, dtype=np.float64)
    return coef * _phase(grid, offset)


def leray_project(f: Field) -> Field:
    """Orthogonal projection onto divergence-free fields (mean preserved)."""
    grid = f.grid
    if f.ncomp != grid.d:
        raise ValueError("Leray projection requires a d-component field")
    coef = f.spectral
    out = project_spectral(grid, coef)
    return Field.from_spectral(grid, out, time=f.time, nu=f.nu)


def project_spectral(grid: Grid, coef: np.ndarray) -> np.ndarray:
    """Leray projection applied directly to a spectral coefficient array."""
    kd = grid.wavenumbers_deriv
    ksq = np.zeros(grid.shape)
    for k in kd:
        ksq = ksq + k**2
    ksq[ksq == 0.0] = 1.0
    kdotu = np.zeros(grid.shape, dtype=np.complex128)
    for a, k in enumerate(kd):
        kdotu = kdotu + k * coef[a]
    kdotu /= ksq
    out = np.empty_like(coef)
    for a, k in enumerate(kd):
        out[a] = coef[a] - k * kdotu
    return out


def divergence(f: Field) -> Field:
    """Spectral divergence of a d-component field (1-component result)."""
    grid = f.grid
    if f.ncomp != grid.d:
        raise ValueError("divergence requires a d-component field")
    coef = np.zeros(grid.shape, dtype=np.complex128)
    for a, k in enumerate(grid.wavenumbers_deriv):
        coef = coef + 1j * k * f.spectral[a]
    return Field.from_spectral(grid, coef[np.newaxis], time=f.time)


def gradient_arrays(f: Field) -> np.ndarray:
    """All spectral partial derivatives; shape (c, d, n, ..., n), real."""
    grid = f.grid
    coef = f.spectral
    out = np.empty((f.ncomp, grid.d) + grid.shape)
    axes = tuple(range(grid.d))
    for a, k in enumerate(grid.wavenumbers_deriv):
        deriv = 1j * k[np.newaxis] * coef
        out[:, a] = np.real(np.fft.ifftn(deriv * grid.npoints, axes=tuple(ax + 1 for ax in axes)))
    return out


def laplacian(f: Field) -> Field:
    coef = f.spectral * (-f.grid.k_squared)[np.newaxis]
    return Field.from_spectral(f.grid, coef, time=f.time)


def apply_multiplier(f: Field, multiplier: np.ndarray) -> Field:
    """Apply a real, radially symmetric Fourier multiplier to every component."""
    coef = f.spectral * multiplier[np.newaxis]
    return Field.from_spectral(f.grid, coef, time=f.time, nu=f.nu)


def is_solenoidal(f: Field, rtol: float = 1e-10) -> bool:
    """Max-norm spectral divergence below rtol times the field max-norm."""
    scale = float(np.max(np.abs(f.data)))
    if scale == 0.0:
        return True
    div = divergence(f)
    return float(np.max(np.abs(div.data))) <= rtol * scale


def integral(f: Field) -> float:
    """Integral of a 1-component field over the box."""
    if f.ncomp != 1:
        raise ValueError("integral expects a scalar field")
    return f.grid.box_volume * float(np.mean(f.data[0]))


def inner(f: Field, g: Field) -> float:
    """L2 inner product, summed over components."""
    if f.grid != g.grid or f.ncomp != g.ncomp:
        raise ValueError("mismatched fields")
    return f.grid.box_volume * float(np.mean(np.sum(f.data * g.data, axis=0)))


def l2_norm(f: Field) -> float:
    return np.sqrt(max(inner(f, f), 0.0))


def spectral_energy(f: Field) -> float:
    """Box volume times the sum of squared coefficient moduli (Parseval)."""
    return f.grid.box_volume * float(np.sum(np.abs(f.spectral) ** 2))


def kinetic_energy(u: Field) -> float:
    """(1/2) integral of |u|^2."""
    return 0.5 * inner(u, u)


def gradient_norm_squared(u: Field) -> float:
    """Integral of |grad u|^2 over the box, via Parseval."""
    return u.grid.box_volume * float(
        np.sum(u.grid.k_squared[np.newaxis] * np.abs(u.spectral) ** 2)
    )


def pressure_from_velocity(u: Field, force: Field | None = None, dealias: bool = True) -> Field:
    """
    Zero-mean pressure determined by the velocity and force:
    lap p = div f - d_i d_j (u^i u^j), solved spectrally.
    """
    grid = u.grid
    if u.ncomp != grid.d:
        raise ValueError("pressure recovery requires a d-component velocity")
    kd = grid.wavenumbers_deriv
    ksq = np.zeros(grid.shape)
    for k in kd:
        ksq = ksq + k**2
    origin = (0,) * grid.d
    ksq[ksq == 0.0] = 1.0
    axes = tuple(range(grid.d))
    rhs = np.zeros(grid.shape, dtype=np.complex128)
    for i in range(grid.d):
        for j in range(i, grid.d):
            prod = u.data[i] * u.data[j]
            phat = np.fft.fftn(prod, axes=axes) / grid.npoints
            if dealias:
                phat = phat * grid.dealias_mask
            w = 1.0 if i == j else 2.0
            rhs = rhs + w * kd[i] * kd[j] * phat
    if force is not None:
        if force.ncomp != grid.d:
            raise ValueError("force must have d components")
        for j, k in enumerate(kd):
            rhs = rhs + 1j * k * force.spectral[j]
    pot = -rhs / ksq
    pot[origin] = 0.0
    return Field.from_spectral(grid, pot[np.newaxis], time=u.time)


def _lattice_index(grid: Grid, offset: np.ndarray, tol: float = 1e-9):
    """Integer lattice index of a grid-aligned offset, or None."""
    steps = offset / grid.h
    rounded = np.round(steps)
    if np.max(np.abs(steps - rounded)) <= tol:
        return tuple(int(m) % grid.n for m in rounded)
    return None


def besov_seminorm(u: Field, alpha: float, shifts) -> float:
    """
    Discrete Besov-type seminorm sup_y |y|^(-alpha) ||u(.+y) - u||_L2 over a
    finite set of translation vectors.

    Parameters
    ----------
    u : Field
    alpha : float
        Exponent in (0, 1].
    shifts : array_like, shape (m, d)
        Nonempty set of offsets with 0 < |y| <= pi each.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    shifts = np.atleast_2d(np.asarray(shifts, dtype=np.float64))
    if shifts.size == 0:
        raise ValueError("shift set must be nonempty")
    if shifts.shape[1] != u.grid.d:
        raise ValueError("shift vectors must have d components")
    radii = np.sqrt(np.sum(shifts**2, axis=1))
    if np.any(radii <= 0.0) or np.any(radii > np.pi + 1e-12):
        raise ValueError("each shift must satisfy 0 < |y| <= pi")

    grid = u.grid
    power = np.sum(np.abs(u.spectral) ** 2, axis=0)  # spectral energy density
    total = float(np.sum(power))
    corr = None  # lattice autocorrelation, built on first use

    best = 0.0
    for y, r in zip(shifts, radii):
        idx = _lattice_index(grid, y)
        if idx is not None:
            if corr is None:
                corr = np.real(np.fft.ifftn(power)) * grid.npoints
            overlap = float(corr[idx])
        else:
            arg = np.zeros(grid.shape)
            for a, k in enumerate(grid.wavenumbers):
                arg = arg + k * y[a]
            overlap = float(np.sum(power * np.cos(arg)))
        incr_sq = grid.box_volume * max(2.0 * (total - overlap), 0.0)
        best = max(best, np.sqrt(incr_sq) / r**alpha)
    return best
