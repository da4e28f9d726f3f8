"""
Command-line front end: simulate, analyze, balance, sweep, verify.

Outputs are deterministic for fixed configuration and seed: FLD1 fields,
RFC-4180 CSV, and JSON with stable key order.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import fldio
from .balance import epsilon_series, global_balance_residual
from .config import (
    ConfigError,
    build_forcing,
    build_grid,
    build_init,
    build_solver_params,
    build_sweep_params,
    load_config,
)
from .fields import Field
from .flux import (
    ELL_MAX,
    StructureTable,
    cubic_scale,
    decomposition_residual,
    dyadic_scales,
    flux_field_sphere,
    structure_functions_all,
    write_structure_csv,
)
from .kernels import default_rule, sphere_rule
from .solver import CODE_VERSION, run, write_manifest
from .sweep import run_sweep
from .tensors import TensorKind
from .verify import run_suite

_SNAP_RE = re.compile(r"snap_(\d{6})\.fld$")


class CliError(RuntimeError):
    pass


def _fail(msg: str) -> "None":
    raise CliError(msg)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _prepare_out_dir(out: Path, force: bool, resume: bool) -> None:
    if out.exists() and any(out.iterdir()):
        if resume:
            return
        if not force:
            _fail(
                f"output directory {out} already contains a run; "
                "pass --force to overwrite or --resume to continue"
            )
        for p in out.glob("snap_*.fld"):
            p.unlink()
        for name in ("manifest.json", "energy.csv"):
            p = out / name
            if p.exists():
                p.unlink()
    out.mkdir(parents=True, exist_ok=True)


def _write_energy_csv(path: Path, result) -> None:
    series = result.energy_series()
    series.to_csv(path)


def cmd_simulate(args) -> int:
    doc = load_config(args.config)
    grid = build_grid(doc)
    params = build_solver_params(doc)
    init = build_init(doc, seed_override=args.seed)
    forcing = build_forcing(doc)
    out = Path(args.out)
    _prepare_out_dir(out, args.force, args.resume)

    start_state = None
    start_step = 0
    if args.resume:
        snaps = sorted(out.glob("snap_*.fld"))
        if snaps:
            last = snaps[-1]
            start_state = fldio.read_field(last)
            start_step = int(_SNAP_RE.search(last.name).group(1))
            print(f"resuming from {last.name} (t = {start_state.time:g})")

    result = run(
        params,
        grid,
        init,
        forcing=forcing,
        out_dir=out,
        start_state=start_state,
        start_step=start_step,
    )
    write_manifest(
        out / "manifest.json",
        grid,
        params,
        extra={"config": doc, "seed": int(init.seed) if init.kind == "random" else None},
    )
    if args.resume and start_step > 0:
        _merge_energy_csv(out / "energy.csv", result, params.dt, start_step)
    else:
        _write_energy_csv(out / "energy.csv", result)
    print(f"wrote {len(result.snapshot_paths)} snapshots to {out}")
    return 0


def _merge_energy_csv(path: Path, result, dt: float, start_step: int) -> None:
    """Keep pre-resume rows, splice cumulative tails to continue exactly."""
    kept = []
    offset_work = 0.0
    offset_diss = 0.0
    e0 = None
    if path.exists():
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            for row in reader:
                t = float(row[0])
                step = int(round(t / dt))
                if step < start_step:
                    kept.append(row)
                elif step == start_step:
                    offset_work = float(row[2])
                    offset_diss = float(row[3])
            if kept:
                e0 = float(kept[0][1])
    series = result.energy_series()
    if e0 is None:
        e0 = float(series.kinetic[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "kinetic", "work", "dissipation", "eps"])
        writer.writerows(kept)
        for i in range(len(series.times)):
            work = series.work[i] + offset_work
            diss = series.dissipation[i] + offset_diss
            eps = e0 - series.kinetic[i] + work
            writer.writerow(
                [repr(float(v)) for v in
                 (series.times[i], series.kinetic[i], work, diss, eps)]
            )


# ---------------------------------------------------------------------------
# run-directory loading
# ---------------------------------------------------------------------------

def _load_run(run_dir: Path):
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        _fail(f"{run_dir} has no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    snaps = {}
    for p in run_dir.glob("snap_*.fld"):
        idx = int(_SNAP_RE.search(p.name).group(1))
        snaps[idx] = p
    if not snaps:
        _fail(f"{run_dir} contains no snapshots")
    stride = int(manifest["solver"]["snapshot_stride"])
    dt = float(manifest["solver"]["dt"])
    t_end = float(manifest["solver"]["t_end"])
    nsteps = int(round(t_end / dt))
    expected = sorted(set(list(range(0, nsteps + 1, stride)) + [nsteps]))
    missing = [i for i in expected if i not in snaps]
    if missing:
        _fail(
            f"{run_dir} is missing snapshots at steps: "
            + ", ".join(str(i) for i in missing)
        )
    fields = [fldio.read_field(snaps[i]) for i in expected]
    return manifest, fields


def _forces_for(manifest: dict, fields) -> list | None:
    doc = manifest.get("config", {})
    spec = build_forcing(doc)
    provider = spec.provider(fields[0].grid)
    if provider is None:
        return None
    grid = fields[0].grid
    return [
        Field.from_spectral(grid, provider.spectral(f.time), time=f.time, trust_spectral=True)
        for f in fields
    ]


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _parse_scales(arg: str | None, grid) -> list[float]:
    if not arg:
        return sorted(dyadic_scales(grid))
    scales = []
    for tok in arg.split(","):
        val = float(tok)
        if not 0.0 < val <= ELL_MAX + 1e-15:
            _fail(f"scale {tok} outside (0, pi/2]")
        scales.append(val)
    return sorted(scales)


def cmd_analyze(args) -> int:
    run_dir = Path(args.run)
    manifest, fields = _load_run(run_dir)
    grid = fields[0].grid
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)

    scales = _parse_scales(args.scales, grid)
    projections = [TensorKind(p.strip()) for p in args.projections.split(",")]
    rule = (
        sphere_rule(grid.d, args.sphere_order)
        if args.sphere_order
        else default_rule(grid.d, grid.n)
    )

    times = [f.time for f in fields]
    all_values = {kind: np.zeros((len(fields), len(scales))) for kind in TensorKind}
    worst = 0.0
    for i, f in enumerate(fields):
        scale3 = cubic_scale(f)
        for j, ell in enumerate(scales):
            s = structure_functions_all(f, ell, rule)
            for kind in TensorKind:
                all_values[kind][i, j] = s[kind]
            resid = decomposition_residual(grid.d, s, scale3)
            worst = max(worst, resid)
            print(f"t={times[i]:.6g} ell={ell:.6g} identity residual {resid:.3e}")

    meta = {
        "d": grid.d,
        "n": grid.n,
        "rule": rule.name,
        "constants": "d/4, d(d+2)/12, d(d+2)/(4(d-1))",
        "schema_version": 1,
    }
    tables = [
        StructureTable(kind, tuple(times), tuple(scales), all_values[kind], meta)
        for kind in projections
    ]
    write_structure_csv(out / "structure.csv", tables)

    # flux fields at the final time, one FLD1 per (projection, scale)
    flux_rows = []
    for kind in projections:
        for j, ell in enumerate(scales):
            flux = flux_field_sphere(fields[-1], kind, ell, rule)
            fldio.write_field(out / f"flux_{kind.value}_s{j}.fld", flux.field)
            flux_rows.append((times[-1], ell, kind.value, flux.mean()))
    with open(out / "flux_means.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "ell", "projection", "value"])
        for row in flux_rows:
            writer.writerow([repr(float(row[0])), repr(float(row[1])), row[2], repr(float(row[3]))])

    print(f"worst identity residual: {worst:.3e}")
    if worst > 1e-10:
        print("identity residual exceeds 1e-10", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# balance
# ---------------------------------------------------------------------------

def cmd_balance(args) -> int:
    run_dir = Path(args.run)
    manifest, fields = _load_run(run_dir)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    nu = float(manifest["solver"]["nu"])
    ell = float(args.ell)
    if not 0.0 < ell <= ELL_MAX + 1e-15:
        _fail(f"scale {args.ell} outside (0, pi/2]")
    forces = _forces_for(manifest, fields)
    rule = (
        sphere_rule(fields[0].grid.d, args.sphere_order)
        if args.sphere_order
        else default_rule(fields[0].grid.d, fields[0].grid.n)
    )
    series = epsilon_series(fields, forces, nu)
    series.to_csv(out / "energy_series.csv")
    report = global_balance_residual(fields, forces, nu, ell, rule)
    report.to_json(out / "balance.json")
    report.to_csv(out / "balance.csv")
    print(
        f"ell={ell:g}: flux={report.flux_term:.6e} eps={report.eps_term:.6e} "
        f"boundary={report.boundary_term:.6e} forcing={report.forcing_term:.6e} "
        f"viscous={report.viscous_term:.6e} residual={report.residual:.6e}"
    )
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    doc = load_config(args.config)
    params = build_sweep_params(doc)
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        _fail(f"output directory {out} is not empty; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    report = run_sweep(doc, params, threads=args.threads, out_dir=out)
    report.to_json(out / "sweep.json")
    report.to_csv(out / "sweep.csv")
    for rec in report.records:
        for w in rec.warnings:
            print(f"nu={rec.nu:g}: warning: {w}")
        sups = ", ".join(
            f"ell_I={e:g}: {rec.sup_by_ell_i[e]:.6e}"
            for e in sorted(rec.sup_by_ell_i, reverse=True)
        )
        print(f"nu={rec.nu:g} alpha={rec.alpha_used:g} ell_D={rec.ell_d:g} | {sups}")
    for ell_i, verdict in report.trend.items():
        print(f"trend over nu at ell_I={ell_i}: {verdict}")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    checks = run_suite(
        suite=args.suite,
        samples=args.samples,
        ct_override=args.perturb_ct,
    )
    if args.json:
        print(json.dumps([c.to_dict() for c in checks], sort_keys=True, indent=2))
    else:
        for c in checks:
            status = "PASS" if c.ok else "FAIL"
            print(f"{status} {c.name}: residual {c.residual:.3e} (tol {c.tolerance:g})")
    failed = [c for c in checks if not c.ok]
    if failed:
        print(f"{len(failed)} check(s) failed", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scaleflux",
        description="Structure-function and scale-flux diagnostics on periodic boxes",
    )
    parser.add_argument("--version", action="version", version=CODE_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the solver from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="structure functions and flux fields for a run")
    p.add_argument("--run", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--scales", default=None, help="comma-separated scales (default dyadic)")
    p.add_argument("--projections", default="I,L,T")
    p.add_argument("--sphere-order", type=int, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("balance", help="time-integrated balance report at one scale")
    p.add_argument("--run", required=True)
    p.add_argument("--ell", required=True, type=float)
    p.add_argument("--out", default=None)
    p.add_argument("--sphere-order", type=int, default=None)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("sweep", help="viscosity sweep over a scale lattice")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all", choices=["all", "tensors", "kernels", "identities"])
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--json", action="store_true")
    p.add_argument("--perturb-ct", type=float, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CliError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
