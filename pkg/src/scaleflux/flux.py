"""
Third-order structure functions and the local scale-flux fields built from
sphere averages of projected velocity increments.

Sign conventions: structure functions are stored as defined (typically
negative in a forward cascade); flux fields carry the opposite sign so that
nonnegative values mean local dissipation.  Both conventions are recorded in
table metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss

from .fields import Field, apply_multiplier
from .grid import Grid
from .kernels import (
    ELL_MAX,
    BumpProfile,
    SphereRule,
    apply_tensor_multiplier,
    combined_l_multiplier,
    combined_l_potential_multiplier,
    default_rule,
    sphere_area,
)
from .tensors import TensorKind, projection_constant

SIGN_NOTE = "S stored as defined (negative = forward cascade); D = -const*S-density/ell (nonnegative = dissipation)"


def _check_scale(ell: float) -> None:
    if not 0.0 < ell <= ELL_MAX + 1e-15:
        raise ValueError(f"scale ell must lie in (0, pi/2], got {ell}")


def dyadic_scales(grid: Grid, minimum_cells: int = 4) -> list[float]:
    """Dyadic scale lattice between minimum_cells*h and pi/2, descending."""
    scales = []
    ell = ELL_MAX
    floor = minimum_cells * grid.h
    while ell >= floor - 1e-12:
        scales.append(ell)
        ell /= 2.0
    return scales


def _increment_integrands(u: Field, radius: float, rule: SphereRule, want_fields: bool):
    """
    Sphere-rule average of the three projected third-order integrands at one
    separation radius.  Returns (means, fields) where means are box integrals
    and fields the pointwise sphere averages (or None).
    """
    grid = u.grid
    coef = u.spectral
    axes = tuple(range(1, grid.d + 1))
    means = {kind: 0.0 for kind in TensorKind}
    fields = {kind: np.zeros(grid.shape) for kind in TensorKind} if want_fields else None
    for w, node in zip(rule.weights, rule.nodes):
        phase_arg = np.zeros(grid.shape)
        for a, k in enumerate(grid.wavenumbers):
            phase_arg = phase_arg + k * (radius * node[a])
        phase = np.exp(1j * phase_arg)
        shifted = np.real(np.fft.ifftn(coef * phase[np.newaxis] * grid.npoints, axes=axes))
        delta = shifted - u.data
        s = np.zeros(grid.shape)
        for a in range(grid.d):
            s = s + delta[a] * node[a]
        q = np.sum(delta**2, axis=0)
        ii = s * q
        il = s**3
        it = s * (q - s**2)
        means[TensorKind.I] += w * float(np.mean(ii))
        means[TensorKind.L] += w * float(np.mean(il))
        means[TensorKind.T] += w * float(np.mean(it))
        if want_fields:
            fields[TensorKind.I] += w * ii
            fields[TensorKind.L] += w * il
            fields[TensorKind.T] += w * it
    integrals = {kind: grid.box_volume * val for kind, val in means.items()}
    return integrals, fields


def structure_functions_all(u: Field, ell: float, rule: SphereRule) -> dict:
    """All three structure functions at scale ell, from one pass of shifts."""
    _check_scale(ell)
    if rule.d != u.grid.d:
        raise ValueError("sphere rule dimension does not match the field")
    integrals, _ = _increment_integrands(u, ell, rule, want_fields=False)
    d = u.grid.d
    return {kind: projection_constant(kind, d) * integrals[kind] for kind in TensorKind}


def structure_function(u: Field, projection: TensorKind, ell: float, rule: SphereRule) -> float:
    """
    Space- and sphere-averaged third-order structure function S(t, ell) with
    the normalization constants d/4, d(d+2)/12, d(d+2)/(4(d-1)).
    """
    return structure_functions_all(u, ell, rule)[projection]


def cubic_scale(u: Field) -> float:
    """Natural magnitude of third-order increment integrals of u."""
    return u.grid.box_volume * float(np.mean(np.sum(u.data**2, axis=0))) ** 1.5


def decomposition_residual(d: int, s: dict, scale: float) -> float:
    """
    Relative residual of (4/d) S_I = (12/(d(d+2))) S_L + (4(d-1)/(d(d+2))) S_T.
    ``scale`` guards the denominator for fields whose structure functions
    vanish by symmetry (the identity then holds as 0 = 0 up to round-off).
    """
    lhs = 4.0 / d * s[TensorKind.I]
    rhs = 12.0 / (d * (d + 2)) * s[TensorKind.L] + 4.0 * (d - 1) / (d * (d + 2)) * s[TensorKind.T]
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), scale, 1e-300)


def decomposition_identity(u: Field, ell: float, rule: SphereRule) -> float:
    """Discrete-level residual of the three-way structure-function identity."""
    s = structure_functions_all(u, ell, rule)
    return decomposition_residual(u.grid.d, s, cubic_scale(u))


@dataclass(frozen=True, eq=False)
class FluxField:
    """Pointwise scale-flux density D at one scale (gamma=0 means sharp sphere)."""

    projection: TensorKind
    ell: float
    gamma: float
    field: Field
    rule_name: str

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.field.data)):
            raise ValueError("flux field contains non-finite values")

    @property
    def values(self) -> np.ndarray:
        return self.field.data[0]

    def mean(self) -> float:
        return float(np.mean(self.values))


def flux_field_sphere(u: Field, projection: TensorKind, ell: float, rule: SphereRule) -> FluxField:
    """
    Sharp-sphere local flux density: D(x) = -(const/ell) * sphere average of
    (sigma . delta u) |T delta u|^2.  Its box integral equals -S(ell)/ell.
    """
    _check_scale(ell)
    if rule.d != u.grid.d:
        raise ValueError("sphere rule dimension does not match the field")
    _, fields = _increment_integrands(u, ell, rule, want_fields=True)
    d = u.grid.d
    values = -(projection_constant(projection, d) / ell) * fields[projection]
    out = Field(u.grid, values[np.newaxis], time=u.time)
    return FluxField(projection, ell, 0.0, out, rule.name)


def flux_field_mollified(
    u: Field,
    ell: float,
    gamma: float,
    rule: SphereRule | None = None,
    radial_nodes: int = 16,
) -> FluxField:
    """
    Mollified local flux density D_{l,gamma}(x): the gradient-annulus radial
    integral of the sphere-averaged third-order increment, converging to the
    sharp-sphere form as gamma -> 0.
    """
    _check_scale(ell)
    if rule is None:
        rule = default_rule(u.grid.d, u.grid.n)
    if gamma == 0.0:
        return flux_field_sphere(u, TensorKind.I, ell, rule)
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    grid = u.grid
    profile = BumpProfile(grid.d, gamma)
    x, w = leggauss(radial_nodes)
    rho = 1.0 + gamma * x
    wts = gamma * w
    area = sphere_area(grid.d)
    acc = np.zeros(grid.shape)
    for rq, wq in zip(rho, wts):
        _, fields = _increment_integrands(u, ell * rq, rule, want_fields=True)
        acc += wq * rq ** (grid.d - 1) * float(profile.derivative(np.asarray(rq))) * fields[TensorKind.I]
    values = (area / (4.0 * ell)) * acc
    out = Field(grid, values[np.newaxis], time=u.time)
    return FluxField(TensorKind.I, ell, gamma, out, rule.name)


def combined_l_average(f: Field, ell: float) -> Field:
    """
    The combined longitudinal average: ball-mean of the longitudinal part
    minus the special-kernel average of the transverse part.  Maps a constant
    field c to (3/(d+2)) c.
    """
    _check_scale(ell)
    grid = f.grid
    if f.ncomp != grid.d:
        raise ValueError("combined average expects a d-component field")
    P, Q = combined_l_multiplier(grid, ell)
    coef = apply_tensor_multiplier(grid, f.spectral, P, Q)
    return Field.from_spectral(grid, coef, time=f.time, nu=f.nu)


def combined_l_potential_average(p: Field, ell: float) -> Field:
    """Scalar companion of combined_l_average for the pressure terms."""
    _check_scale(ell)
    if p.ncomp != 1:
        raise ValueError("potential average expects a scalar field")
    return apply_multiplier(p, combined_l_potential_multiplier(p.grid, ell))


@dataclass(frozen=True, eq=False)
class StructureTable:
    """S(t, ell) over a time x scale lattice for one projection."""

    projection: TensorKind
    times: tuple
    scales: tuple
    values: np.ndarray  # (ntimes, nscales)
    metadata: dict

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.times), len(self.scales)):
            raise ValueError("table shape does not match times x scales")
        if not np.all(np.isfinite(values)):
            raise ValueError("table contains non-finite entries")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly increasing")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def to_csv(self, path) -> None:
        write_structure_csv(path, [self])


def write_structure_csv(path, tables) -> None:
    """CSV export, columns: t, ell, projection, value (RFC 4180)."""
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "ell", "projection", "value"])
        for table in tables:
            for i, t in enumerate(table.times):
                for j, ell in enumerate(table.scales):
                    writer.writerow(
                        [repr(float(t)), repr(float(ell)), table.projection.value,
                         repr(float(table.values[i, j]))]
                    )


def structure_table(
    snapshots, scales, projection: TensorKind, rule: SphereRule
) -> StructureTable:
    """Evaluate S(t, ell) over time-ordered snapshots and ascending scales."""
    scales = sorted(float(s) for s in scales)
    times = []
    rows = []
    for snap in snapshots:
        times.append(snap.time)
        rows.append([structure_function(snap, projection, ell, rule) for ell in scales])
    grid = snapshots[0].grid
    meta = {
        "d": grid.d,
        "n": grid.n,
        "rule": rule.name,
        "constants": "d/4, d(d+2)/12, d(d+2)/(4(d-1))",
        "sign": SIGN_NOTE,
    }
    return StructureTable(projection, tuple(times), tuple(scales), np.asarray(rows), meta)
