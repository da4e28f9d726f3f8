"""
TOML run configuration: nested sections, explicit units in key names,
unknown keys rejected with their full dotted path.
"""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .grid import Grid
from .solver import ForcingSpec, InitSpec, ModeForcing, SolverParams


class ConfigError(ValueError):
    """Configuration problem, message names the offending key path."""


_GRID_KEYS = {"d", "n"}
_SOLVER_KEYS = {
    "nu",
    "dt_seconds",
    "t_end_seconds",
    "snapshot_stride",
    "cfl_factor",
    "cfl_policy",
    "integrating_factor",
}
_INITIAL_KEYS = {"kind", "amplitude", "seed", "band", "slope", "urms", "path"}
_FORCING_KEYS = {"kind", "modes", "paths", "times"}
_MODE_KEYS = {"wavevector", "amplitude", "phase", "omega", "tphase"}
_ANALYSIS_KEYS = {"scales", "projections", "sphere_order"}
_SWEEP_KEYS = {
    "nu_list",
    "alpha",
    "alpha_mode",
    "length_exponent",
    "ell_I_list",
    "p_exponent",
    "uniform_time",
    "sphere_order",
    "projection",
}
_SECTIONS = {
    "grid": _GRID_KEYS,
    "solver": _SOLVER_KEYS,
    "initial": _INITIAL_KEYS,
    "forcing": _FORCING_KEYS,
    "analysis": _ANALYSIS_KEYS,
    "sweep": _SWEEP_KEYS,
}


def _reject_unknown(section: str, table: dict, allowed: set) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {section}.{key}")


def _need(table: dict, section: str, key: str):
    if key not in table:
        raise ConfigError(f"missing key {section}.{key}")
    return table[key]


def load_config(path) -> dict:
    """Parse and validate a TOML configuration file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for section in doc:
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section {section}")
        if not isinstance(doc[section], dict):
            raise ConfigError(f"section {section} must be a table")
        _reject_unknown(section, doc[section], _SECTIONS[section])
    if "forcing" in doc:
        for i, mode in enumerate(doc["forcing"].get("modes", []) or []):
            _reject_unknown(f"forcing.modes[{i}]", mode, _MODE_KEYS)
    validate_config(doc)
    return doc


def validate_config(doc: dict) -> None:
    if "grid" in doc:
        build_grid(doc)
    if "solver" in doc:
        build_solver_params(doc)
    if "initial" in doc:
        build_init(doc)
    if "forcing" in doc:
        build_forcing(doc)
    if "sweep" in doc:
        build_sweep_params(doc)


def build_grid(doc: dict) -> Grid:
    table = doc.get("grid")
    if table is None:
        raise ConfigError("missing section grid")
    d = _need(table, "grid", "d")
    n = _need(table, "grid", "n")
    try:
        return Grid(int(d), int(n))
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def build_solver_params(doc: dict, nu_override: float | None = None) -> SolverParams:
    table = doc.get("solver")
    if table is None:
        raise ConfigError("missing section solver")
    dt = _need(table, "solver", "dt_seconds")
    if not isinstance(dt, (int, float)) or dt <= 0:
        raise ConfigError(f"solver.dt_seconds must be a positive number, got {dt!r}")
    t_end = _need(table, "solver", "t_end_seconds")
    if not isinstance(t_end, (int, float)) or t_end < 0:
        raise ConfigError(f"solver.t_end_seconds must be nonnegative, got {t_end!r}")
    nu = nu_override if nu_override is not None else _need(table, "solver", "nu")
    if not isinstance(nu, (int, float)) or nu < 0:
        raise ConfigError(f"solver.nu must be nonnegative, got {nu!r}")
    stride = table.get("snapshot_stride", 1)
    if not isinstance(stride, int) or stride < 1:
        raise ConfigError(f"solver.snapshot_stride must be a positive integer, got {stride!r}")
    policy = table.get("cfl_policy", "abort")
    if policy not in ("abort", "warn"):
        raise ConfigError(f"solver.cfl_policy must be 'abort' or 'warn', got {policy!r}")
    try:
        return SolverParams(
            nu=float(nu),
            dt=float(dt),
            t_end=float(t_end),
            snapshot_stride=stride,
            cfl_factor=float(table.get("cfl_factor", 0.5)),
            cfl_policy=policy,
            integrating_factor=bool(table.get("integrating_factor", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc


def build_init(doc: dict, seed_override: int | None = None) -> InitSpec:
    table = doc.get("initial", {"kind": "taylor_green"})
    kind = table.get("kind", "taylor_green")
    if kind not in ("taylor_green", "random", "file"):
        raise ConfigError(f"initial.kind must be taylor_green|random|file, got {kind!r}")
    band = table.get("band", [2.0, 8.0])
    if len(band) != 2 or band[0] <= 0 or band[1] <= band[0]:
        raise ConfigError(f"initial.band must be an increasing positive pair, got {band!r}")
    seed = seed_override if seed_override is not None else table.get("seed", 0)
    return InitSpec(
        kind=kind,
        amplitude=float(table.get("amplitude", 1.0)),
        seed=int(seed),
        band=(float(band[0]), float(band[1])),
        slope=float(table.get("slope", -3.0)),
        urms=float(table.get("urms", 1.0)),
        path=table.get("path"),
    )


def build_forcing(doc: dict) -> ForcingSpec:
    table = doc.get("forcing", {"kind": "none"})
    kind = table.get("kind", "none")
    if kind == "none":
        return ForcingSpec(kind="none")
    if kind == "modes":
        modes = table.get("modes", [])
        if not modes:
            raise ConfigError("forcing.modes must be nonempty for kind = 'modes'")
        built = []
        for i, mode in enumerate(modes):
            wv = _need(mode, f"forcing.modes[{i}]", "wavevector")
            amp = _need(mode, f"forcing.modes[{i}]", "amplitude")
            if len(wv) != len(amp):
                raise ConfigError(
                    f"forcing.modes[{i}]: wavevector and amplitude must have equal length"
                )
            built.append(
                ModeForcing(
                    wavevector=tuple(int(k) for k in wv),
                    amplitude=tuple(float(a) for a in amp),
                    phase=float(mode.get("phase", 0.0)),
                    omega=float(mode.get("omega", 0.0)),
                    tphase=float(mode.get("tphase", 0.0)),
                )
            )
        return ForcingSpec(kind="modes", modes=tuple(built))
    if kind == "file":
        paths = table.get("paths", [])
        times = table.get("times", [])
        if not paths or len(paths) != len(times):
            raise ConfigError("forcing.paths and forcing.times must be matching nonempty lists")
        return ForcingSpec(kind="file", paths=tuple(paths), times=tuple(float(t) for t in times))
    raise ConfigError(f"forcing.kind must be none|modes|file, got {kind!r}")


def build_sweep_params(doc: dict):
    from .sweep import SweepParams

    table = doc.get("sweep")
    if table is None:
        raise ConfigError("missing section sweep")
    nu_list = _need(table, "sweep", "nu_list")
    if len(nu_list) < 1 or any(b >= a for a, b in zip(nu_list, nu_list[1:])):
        raise ConfigError("sweep.nu_list must be strictly decreasing")
    ell_list = _need(table, "sweep", "ell_I_list")
    if len(ell_list) < 1 or any(b >= a for a, b in zip(ell_list, ell_list[1:])):
        raise ConfigError("sweep.ell_I_list must be strictly decreasing")
    alpha_mode = table.get("alpha_mode", "given")
    if alpha_mode not in ("given", "measured"):
        raise ConfigError(f"sweep.alpha_mode must be given|measured, got {alpha_mode!r}")
    alpha = table.get("alpha")
    if alpha_mode == "given" and alpha is None:
        raise ConfigError("sweep.alpha is required when sweep.alpha_mode = 'given'")
    length_exp = _need(table, "sweep", "length_exponent")
    if alpha_mode == "given":
        if not 0.0 < alpha <= 1.0:
            raise ConfigError(f"sweep.alpha must lie in (0, 1], got {alpha!r}")
        limit = 1.0 / (2.0 * (1.0 - alpha)) if alpha < 1.0 else float("inf")
        if length_exp >= limit:
            raise ConfigError(
                f"sweep.length_exponent must satisfy L < 1/(2(1-alpha)) = {limit:g}, "
                f"got {length_exp!r}"
            )
    projection = table.get("projection", "I")
    if projection not in ("I", "L", "T"):
        raise ConfigError(f"sweep.projection must be I|L|T, got {projection!r}")
    try:
        return SweepParams(
            nu_list=tuple(float(v) for v in nu_list),
            alpha=None if alpha is None else float(alpha),
            alpha_mode=alpha_mode,
            length_exponent=float(length_exp),
            ell_i_list=tuple(float(v) for v in ell_list),
            p_exponent=float(table.get("p_exponent", 1.0)),
            uniform_time=bool(table.get("uniform_time", False)),
            sphere_order=int(table.get("sphere_order", 0)) or None,
            projection=projection,
        )
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from exc
