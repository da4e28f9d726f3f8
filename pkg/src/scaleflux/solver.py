"""
Pseudo-spectral incompressible Navier-Stokes solver on the periodic box:
2/3-rule dealiased convective nonlinearity, divergence-free projection,
explicit RK4 (optionally with an integrating factor for the viscous term),
deterministic forcing and snapshot emission.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import fldio
from .fields import Field, project_spectral
from .grid import Grid

CODE_VERSION = "scaleflux-0.1.0"


class SolverError(RuntimeError):
    pass


class CFLViolation(SolverError):
    pass


class BlowupDetected(SolverError):
    pass


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------

def taylor_green(grid: Grid, amplitude: float = 1.0, time: float = 0.0, nu: float = 0.0) -> Field:
    """
    Taylor-Green vortex sample: in 2D an exact Navier-Stokes solution whose
    amplitude decays like exp(-2 nu t); in 3D the standard single-mode variant
    used as initial data.
    """
    if grid.d == 2:
        x, y = grid.coords
        data = amplitude * np.stack(
            [np.sin(x) * np.cos(y) + 0.0 * y, -np.cos(x) * np.sin(y) + 0.0 * y]
        )
    else:
        x, y, z = grid.coords
        zero = 0.0 * (x + y + z)
        data = amplitude * np.stack(
            [
                np.sin(x) * np.cos(y) * np.cos(z),
                -np.cos(x) * np.sin(y) * np.cos(z),
                zero,
            ]
        )
    return Field(grid, data, time=time, nu=nu)


def taylor_green_2d_exact(grid: Grid, nu: float, t: float) -> Field:
    """Exact decaying 2D Taylor-Green velocity at time t."""
    if grid.d != 2:
        raise ValueError("exact decay form is two-dimensional")
    return taylor_green(grid, amplitude=np.exp(-2.0 * nu * t), time=t, nu=nu)


def taylor_green_2d_pressure(grid: Grid, nu: float, t: float) -> Field:
    """Exact 2D Taylor-Green pressure (zero mean) for the orientation above."""
    x, y = grid.coords
    p = 0.25 * (np.cos(2 * x) + np.cos(2 * y)) * np.exp(-4.0 * nu * t) + 0.0 * y
    return Field(grid, p[np.newaxis], time=t, nu=nu)


def random_solenoidal(
    grid: Grid,
    seed: int,
    band: tuple = (2.0, 8.0),
    slope: float = -3.0,
    urms: float = 1.0,
) -> Field:
    """
    Band-limited random divergence-free field with shell spectrum ~ k^slope,
    zero mean, normalized to the requested rms speed.  Deterministic in seed.
    """
    rng = np.random.default_rng(seed)
    white = rng.standard_normal((grid.d,) + grid.shape)
    coef = np.fft.fftn(white, axes=tuple(range(1, grid.d + 1))) / grid.npoints
    kmag = grid.k_magnitude
    lo, hi = band
    shell = np.where(
        (kmag >= lo) & (kmag <= hi) & grid.dealias_mask,
        np.power(np.maximum(kmag, 1.0), 0.5 * (slope - (grid.d - 1))),
        0.0,
    )
    coef = coef * shell[np.newaxis]
    coef = project_spectral(grid, coef)
    coef[(slice(None),) + (0,) * grid.d] = 0.0
    u = Field.from_spectral(grid, coef)
    ms = float(np.mean(np.sum(u.data**2, axis=0)))
    if ms == 0.0:
        raise ValueError("empty spectral band for this grid")
    return Field(grid, u.data * (urms / np.sqrt(ms)))


@dataclass(frozen=True)
class InitSpec:
    """Initial condition: taylor_green | random | file."""

    kind: str = "taylor_green"
    amplitude: float = 1.0
    seed: int = 0
    band: tuple = (2.0, 8.0)
    slope: float = -3.0
    urms: float = 1.0
    path: str | None = None

    def build(self, grid: Grid) -> Field:
        if self.kind == "taylor_green":
            return taylor_green(grid, self.amplitude)
        if self.kind == "random":
            return random_solenoidal(grid, self.seed, self.band, self.slope, self.urms)
        if self.kind == "file":
            if not self.path:
                raise ValueError("file initial condition needs a path")
            f = fldio.read_field(self.path)
            if f.grid != grid:
                raise ValueError("initial-condition file grid does not match")
            return f
        raise ValueError(f"unknown initial condition kind {self.kind!r}")


# ---------------------------------------------------------------------------
# Forcing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeForcing:
    """One forcing mode: amplitude * cos(k.x + phase) * cos(omega t + tphase)."""

    wavevector: tuple
    amplitude: tuple
    phase: float = 0.0
    omega: float = 0.0
    tphase: float = 0.0


@dataclass(frozen=True)
class ForcingSpec:
    """Forcing: none | modes | file (FLD1 series, held per step) | callable."""

    kind: str = "none"
    modes: tuple = ()
    paths: tuple = ()
    times: tuple = ()
    function: object = None

    def provider(self, grid: Grid):
        if self.kind == "none":
            return None
        if self.kind == "modes":
            return _ModeProvider(grid, self.modes)
        if self.kind == "file":
            return _FileProvider(grid, self.paths, self.times)
        if self.kind == "callable":
            if self.function is None:
                raise ValueError("callable forcing needs a function")
            return _CallableProvider(grid, self.function)
        raise ValueError(f"unknown forcing kind {self.kind!r}")


class _ModeProvider:
    def __init__(self, grid: Grid, modes) -> None:
        self.grid = grid
        self.modes = tuple(modes)
        self._static = []
        for m in self.modes:
            karg = np.zeros(grid.shape)
            for a, x in enumerate(grid.coords):
                karg = karg + m.wavevector[a] * x
            pattern = np.cos(karg + m.phase)
            amp = np.asarray(m.amplitude, dtype=np.float64)
            self._static.append(amp[(slice(None),) + (np.newaxis,) * grid.d] * pattern)

    def spectral(self, t: float) -> np.ndarray:
        total = np.zeros((self.grid.d,) + self.grid.shape)
        for m, pattern in zip(self.modes, self._static):
            total = total + pattern * np.cos(m.omega * t + m.tphase)
        coef = np.fft.fftn(total, axes=tuple(range(1, self.grid.d + 1))) / self.grid.npoints
        return project_spectral(self.grid, coef * self.grid.dealias_mask[np.newaxis])


class _FileProvider:
    def __init__(self, grid: Grid, paths, times) -> None:
        if len(paths) != len(times) or not paths:
            raise ValueError("file forcing needs matching nonempty paths and times")
        self.grid = grid
        self.times = np.asarray(times, dtype=np.float64)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("file forcing times must be increasing")
        self.fields = []
        for p in paths:
            f = fldio.read_field(p)
            if f.grid != grid:
                raise ValueError(f"forcing file {p} grid does not match")
            coef = project_spectral(grid, f.spectral * grid.dealias_mask[np.newaxis])
            self.fields.append(coef)

    def spectral(self, t: float) -> np.ndarray:
        idx = int(np.searchsorted(self.times, t + 1e-12, side="right") - 1)
        idx = min(max(idx, 0), len(self.fields) - 1)
        return self.fields[idx]


class _CallableProvider:
    def __init__(self, grid: Grid, fn) -> None:
        self.grid = grid
        self.fn = fn

    def spectral(self, t: float) -> np.ndarray:
        f = self.fn(t, self.grid)
        data = f.data if isinstance(f, Field) else np.asarray(f, dtype=np.float64)
        coef = np.fft.fftn(data, axes=tuple(range(1, self.grid.d + 1))) / self.grid.npoints
        return project_spectral(self.grid, coef * self.grid.dealias_mask[np.newaxis])


# ---------------------------------------------------------------------------
# Parameters and stepping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverParams:
    """Time-stepping configuration; CFL check dt <= cfl_factor*h/max|u|."""

    nu: float
    dt: float
    t_end: float
    snapshot_stride: int = 1
    cfl_factor: float = 0.5
    cfl_policy: str = "abort"  # abort | warn
    integrating_factor: bool = False

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot stride must be >= 1")
        if self.cfl_policy not in ("abort", "warn"):
            raise ValueError("cfl_policy must be 'abort' or 'warn'")
        if self.nu < 0.0:
            raise ValueError("viscosity must be nonnegative")


class _Stepper:
    """Spectral-space RK4 integrator for the projected, dealiased system."""

    def __init__(self, grid: Grid, params: SolverParams, forcing=None) -> None:
        self.grid = grid
        self.params = params
        self.forcing = forcing
        self.mask = grid.dealias_mask
        self.ksq = grid.k_squared
        self.kderiv = grid.wavenumbers_deriv
        self.axes = tuple(range(1, grid.d + 1))
        self.last_umax = 0.0

    def nonlinear(self, coef: np.ndarray, t: float) -> np.ndarray:
        grid = self.grid
        u = np.real(np.fft.ifftn(coef * grid.npoints, axes=self.axes))
        self.last_umax = float(np.max(np.abs(u)))
        adv = np.zeros_like(u)
        for j, kj in enumerate(self.kderiv):
            du_j = np.real(
                np.fft.ifftn(1j * kj[np.newaxis] * coef * grid.npoints, axes=self.axes)
            )
            adv += u[j][np.newaxis] * du_j
        rhs = -np.fft.fftn(adv, axes=self.axes) / grid.npoints
        rhs *= self.mask[np.newaxis]
        if self.forcing is not None:
            rhs = rhs + self.forcing.spectral(t)
        return project_spectral(grid, rhs)

    def check_cfl(self, step_index: int) -> None:
        if self.last_umax == 0.0:
            return
        limit = self.params.cfl_factor * self.grid.h / self.last_umax
        if self.params.dt > limit:
            msg = (
                f"CFL violation at step {step_index}: dt={self.params.dt:g} exceeds "
                f"{limit:g} (max|u|={self.last_umax:g})"
            )
            if self.params.cfl_policy == "abort":
                raise CFLViolation(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)

    def step(self, coef: np.ndarray, t: float, step_index: int = 0) -> np.ndarray:
        dt = self.params.dt
        nu = self.params.nu
        if self.params.integrating_factor and nu > 0.0:
            e_half = np.exp(-nu * self.ksq * (0.5 * dt))[np.newaxis]
            e_full = e_half**2
            k1 = self.nonlinear(coef, t)
            self.check_cfl(step_index)
            k2 = self.nonlinear(e_half * (coef + 0.5 * dt * k1), t + 0.5 * dt)
            k3 = self.nonlinear(e_half * coef + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = self.nonlinear(e_full * coef + dt * e_half * k3, t + dt)
            out = e_full * coef + (dt / 6.0) * (
                e_full * k1 + 2.0 * e_half * (k2 + k3) + k4
            )
        else:
            visc = (-nu * self.ksq)[np.newaxis]

            def rhs(c, tt):
                return self.nonlinear(c, tt) + visc * c

            k1 = rhs(coef, t)
            self.check_cfl(step_index)
            k2 = rhs(coef + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = rhs(coef + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = rhs(coef + dt * k3, t + dt)
            out = coef + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(out.real)) or not np.all(np.isfinite(out.imag)):
            raise BlowupDetected(f"non-finite state after step {step_index}")
        return out


def step(state: Field, params: SolverParams, forcing: ForcingSpec | None = None) -> Field:
    """Advance one RK4 step; the result stays solenoidal and dealiased."""
    grid = state.grid
    provider = forcing.provider(grid) if forcing is not None else None
    stepper = _Stepper(grid, params, provider)
    coef = project_spectral(grid, state.spectral * grid.dealias_mask[np.newaxis])
    out = stepper.step(coef, state.time)
    return Field.from_spectral(grid, out, time=state.time + params.dt, nu=params.nu)


@dataclass
class RunResult:
    """Snapshots plus per-step energy samples from one simulation."""

    grid: Grid
    params: SolverParams
    snapshots: list
    times: np.ndarray
    energy: np.ndarray
    work_rate: np.ndarray
    dissipation_rate: np.ndarray
    snapshot_paths: list = dc_field(default_factory=list)

    def energy_series(self):
        from .balance import series_from_samples

        return series_from_samples(
            self.times, self.energy, self.work_rate, self.dissipation_rate
        )


def run(
    params: SolverParams,
    grid: Grid,
    init: InitSpec | Field,
    forcing: ForcingSpec | None = None,
    out_dir=None,
    start_state: Field | None = None,
    start_step: int = 0,
) -> RunResult:
    """
    Integrate from t = start_step*dt to t_end, emitting snapshots every
    ``snapshot_stride`` steps (plus the final state) and sampling the energy,
    work rate, and viscous dissipation rate at every step.
    """
    if start_state is not None:
        state0 = start_state
    elif isinstance(init, Field):
        state0 = init
    else:
        state0 = init.build(grid)
    provider = forcing.provider(grid) if forcing is not None else None
    stepper = _Stepper(grid, params, provider)
    coef = project_spectral(grid, state0.spectral * grid.dealias_mask[np.newaxis])

    nsteps = int(round(params.t_end / params.dt))
    if abs(nsteps * params.dt - params.t_end) > 1e-9 * max(params.t_end, params.dt):
        raise ValueError("t_end must be an integer number of steps")

    box = grid.box_volume
    times, energy, work, diss = [], [], [], []
    snapshots, paths = [], []

    def sample(i: int, c: np.ndarray) -> None:
        t = i * params.dt
        times.append(t)
        e = 0.5 * box * float(np.sum(np.abs(c) ** 2))
        energy.append(e)
        if provider is not None:
            f = provider.spectral(t)
            work.append(box * float(np.real(np.sum(np.conj(c) * f))))
        else:
            work.append(0.0)
        diss.append(
            params.nu * box * float(np.sum(grid.k_squared[np.newaxis] * np.abs(c) ** 2))
        )

    def emit(i: int, c: np.ndarray) -> None:
        f = Field.from_spectral(grid, c, time=i * params.dt, nu=params.nu, trust_spectral=True)
        snapshots.append(f)
        if out_dir is not None:
            path = Path(out_dir) / f"snap_{i:06d}.fld"
            fldio.write_field(path, f)
            paths.append(path)

    for i in range(start_step, nsteps + 1):
        sample(i, coef)
        if i % params.snapshot_stride == 0 or i == nsteps:
            emit(i, coef)
        if i == nsteps:
            break
        coef = stepper.step(coef, i * params.dt, step_index=i)

    return RunResult(
        grid=grid,
        params=params,
        snapshots=snapshots,
        times=np.asarray(times),
        energy=np.asarray(energy),
        work_rate=np.asarray(work),
        dissipation_rate=np.asarray(diss),
        snapshot_paths=paths,
    )


def write_manifest(path, grid: Grid, params: SolverParams, extra: dict | None = None) -> None:
    doc = {
        "code_version": CODE_VERSION,
        "grid": {"d": grid.d, "n": grid.n},
        "solver": {
            "nu": params.nu,
            "dt": params.dt,
            "t_end": params.t_end,
            "snapshot_stride": params.snapshot_stride,
            "cfl_factor": params.cfl_factor,
            "cfl_policy": params.cfl_policy,
            "integrating_factor": params.integrating_factor,
        },
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
