"""
Vanishing-viscosity sweep: for each viscosity, integrate the flow, evaluate
R(nu, ell, t) = int_0^t S(r, ell)/ell dr + eps(t) on a dyadic scale lattice
between the dissipative scale nu^L and each inertial cutoff, and report the
sup over resolved scales of its time norm as a trend table.  No limit value
is asserted; desk-scale runs can only witness trends.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .balance import cumulative_series, integrate_series, measure_besov_exponent, _uniform_dt
from .config import ConfigError, build_forcing, build_grid, build_init, build_solver_params
from .flux import structure_function
from .kernels import default_rule, sphere_rule
from .solver import run
from .tensors import TensorKind


@dataclass(frozen=True)
class SweepParams:
    """Viscosity list, regularity exponent, scale-lattice controls."""

    nu_list: tuple
    alpha: float | None
    alpha_mode: str           # given | measured
    length_exponent: float    # L in ell_D = nu^L, constrained L < 1/(2(1-alpha))
    ell_i_list: tuple
    p_exponent: float = 1.0
    uniform_time: bool = False
    sphere_order: int | None = None
    projection: str = "I"

    def __post_init__(self) -> None:
        if any(b >= a for a, b in zip(self.nu_list, self.nu_list[1:])):
            raise ValueError("nu_list must be strictly decreasing")
        if any(b >= a for a, b in zip(self.ell_i_list, self.ell_i_list[1:])):
            raise ValueError("ell_I_list must be strictly decreasing")
        if self.p_exponent < 1.0:
            raise ValueError("p exponent must be >= 1")
        if self.alpha_mode == "given":
            check_length_exponent(self.length_exponent, self.alpha)


def check_length_exponent(length_exponent: float, alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    limit = 1.0 / (2.0 * (1.0 - alpha)) if alpha < 1.0 else float("inf")
    if length_exponent >= limit:
        raise ConfigError(
            f"length exponent must satisfy L < 1/(2(1-alpha)) = {limit:g}, "
            f"got {length_exponent}"
        )


@dataclass(frozen=True, eq=False)
class NuRecord:
    """Per-viscosity sweep result."""

    nu: float
    alpha_used: float
    alpha_mode: str
    ell_d: float
    ell_d_resolved: float
    warnings: tuple
    scales: tuple             # resolved dyadic lattice, descending
    r_norms: dict             # ell -> time norm of R
    sup_by_ell_i: dict        # ell_I -> sup over lattice scales in [ell_d, ell_I]


@dataclass(frozen=True, eq=False)
class SweepReport:
    params: SweepParams
    records: tuple
    trend: dict               # ell_I -> "decreasing" | "non-monotone" over nu

    def __post_init__(self) -> None:
        for rec in self.records:
            sups = [rec.sup_by_ell_i[e] for e in sorted(rec.sup_by_ell_i, reverse=True)]
            if any(b > a + 1e-14 for a, b in zip(sups, sups[1:])):
                raise ValueError("sup over a larger scale interval must dominate")

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "projection": self.params.projection,
            "p_exponent": self.params.p_exponent,
            "uniform_time": self.params.uniform_time,
            "length_exponent": self.params.length_exponent,
            "alpha_mode": self.params.alpha_mode,
            "records": [
                {
                    "nu": rec.nu,
                    "alpha_used": rec.alpha_used,
                    "ell_D": rec.ell_d,
                    "ell_D_resolved": rec.ell_d_resolved,
                    "warnings": list(rec.warnings),
                    "scales": list(rec.scales),
                    "r_norms": {repr(k): v for k, v in rec.r_norms.items()},
                    "sup_by_ell_I": {repr(k): v for k, v in rec.sup_by_ell_i.items()},
                }
                for rec in self.records
            ],
            "trend_over_nu": self.trend,
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["nu", "ell_I", "sup_r_norm"])
            for rec in self.records:
                for ell_i in sorted(rec.sup_by_ell_i, reverse=True):
                    writer.writerow(
                        [repr(rec.nu), repr(ell_i), repr(rec.sup_by_ell_i[ell_i])]
                    )


def scale_lattice(ell_top: float, ell_bottom: float) -> list[float]:
    """Dyadic scales from ell_top down to >= ell_bottom, descending."""
    scales = []
    ell = ell_top
    while ell >= ell_bottom - 1e-12:
        scales.append(ell)
        ell /= 2.0
    return scales


def _sweep_single(doc: dict, params: SweepParams, nu: float, out_dir=None) -> NuRecord:
    grid = build_grid(doc)
    solver_params = build_solver_params(doc, nu_override=nu)
    init = build_init(doc)
    forcing = build_forcing(doc)
    run_dir = None
    if out_dir is not None:
        run_dir = Path(out_dir) / f"nu_{nu:g}"
        run_dir.mkdir(parents=True, exist_ok=True)
    result = run(solver_params, grid, init, forcing=forcing, out_dir=run_dir)
    snapshots = result.snapshots
    # keep the uniformly spaced prefix (the final state may be off-stride)
    if len(snapshots) >= 3:
        strides = np.diff([s.time for s in snapshots])
        if abs(strides[-1] - strides[0]) > 1e-9 * strides[0]:
            snapshots = snapshots[:-1]
    series = result.energy_series()

    warnings = []
    if params.alpha_mode == "measured":
        alpha_used = measure_besov_exponent(snapshots)
        alpha_used = min(max(alpha_used, 1e-3), 1.0)
        check_length_exponent(params.length_exponent, alpha_used)
    else:
        alpha_used = params.alpha

    ell_d = nu**params.length_exponent
    floor = 4.0 * grid.h
    ell_d_resolved = ell_d
    if ell_d < floor:
        warnings.append(
            f"ell_D = {ell_d:g} below resolved floor 4h = {floor:g}; "
            "analysis restricted to resolved scales"
        )
        ell_d_resolved = floor
    ell_top = params.ell_i_list[0]
    if ell_d_resolved > ell_top:
        raise ValueError(
            f"dissipative scale {ell_d_resolved:g} exceeds the largest inertial cutoff {ell_top:g}"
        )

    order = params.sphere_order
    rule = sphere_rule(grid.d, order) if order else default_rule(grid.d, min(grid.n, 128))
    scales = scale_lattice(ell_top, ell_d_resolved)

    snap_times = np.asarray([s.time for s in snapshots])
    dt_snap = _uniform_dt(snap_times)
    # eps at the snapshot times, from the per-step accumulators
    snap_steps = np.round(snap_times / solver_params.dt).astype(int)
    eps_at = series.eps[snap_steps]

    r_norms = {}
    for ell in scales:
        s_over_ell = np.asarray(
            [structure_function(s, TensorKind(params.projection), ell, rule) / ell
             for s in snapshots]
        )
        r_t = cumulative_series(s_over_ell, dt_snap) + eps_at
        if params.uniform_time:
            r_norms[ell] = float(np.max(np.abs(r_t)))
        else:
            p = params.p_exponent
            r_norms[ell] = float(
                integrate_series(np.abs(r_t) ** p, dt_snap) ** (1.0 / p)
            )

    sup_by_ell_i = {}
    for ell_i in params.ell_i_list:
        in_range = [r_norms[e] for e in scales if ell_d_resolved - 1e-12 <= e <= ell_i + 1e-12]
        sup_by_ell_i[ell_i] = max(in_range) if in_range else float("nan")

    return NuRecord(
        nu=nu,
        alpha_used=float(alpha_used),
        alpha_mode=params.alpha_mode,
        ell_d=ell_d,
        ell_d_resolved=ell_d_resolved,
        warnings=tuple(warnings),
        scales=tuple(scales),
        r_norms=r_norms,
        sup_by_ell_i=sup_by_ell_i,
    )


def run_sweep(doc: dict, params: SweepParams, threads: int = 1, out_dir=None) -> SweepReport:
    """Run the viscosity list (optionally as parallel tasks) and assemble the report."""
    nus = list(params.nu_list)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(
                pool.map(lambda nu: _sweep_single(doc, params, nu, out_dir), nus)
            )
    else:
        records = [_sweep_single(doc, params, nu, out_dir) for nu in nus]

    trend = {}
    for ell_i in params.ell_i_list:
        sups = [rec.sup_by_ell_i[ell_i] for rec in records]
        decreasing = all(b < a for a, b in zip(sups, sups[1:]))
        trend[repr(ell_i)] = "decreasing" if decreasing else "non-monotone"
    return SweepReport(params=params, records=tuple(records), trend=trend)
