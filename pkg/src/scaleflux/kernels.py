"""
Radial smoothing kernels, sphere quadrature rules, and the spherical-averaging
operators built from them.

The standard kernel family is a normalized C-infinity radial bump, flat on
[0, (1-gamma)l] and decaying to zero across the annulus {| |y|-l | <= gamma*l},
so its gradient is supported in that annulus.  The special kernel is the
ball-supported quadratic (|y|^2/l^2 - 1)/|B_l|, whose gradient satisfies a
first-order identity used to combine longitudinal and transverse averages.
All operators here are pure functions, safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import j0, j1

from .fields import Field
from .grid import Grid
from .tensors import TensorKind

MAX_SPHERE_ORDER = 192
ELL_MAX = np.pi / 2.0


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(d: int, radius: float = 1.0) -> float:
    return sphere_area(d) / d * radius**d


def _check_ell(ell: float) -> None:
    if not 0.0 < ell <= ELL_MAX + 1e-15:
        raise ValueError(f"scale ell must lie in (0, pi/2], got {ell}")


# ---------------------------------------------------------------------------
# Radial bump profile
# ---------------------------------------------------------------------------

def _expm_inv(t) -> np.ndarray:
    """exp(-1/t) extended by zero to t <= 0."""
    t = np.asarray(t, dtype=np.float64)
    pos = t > 1e-12
    safe = np.where(pos, t, 1.0)
    return np.where(pos, np.exp(-1.0 / safe), 0.0)


def smooth_ramp(s) -> np.ndarray:
    """C-infinity monotone transition, 1 at s=-1 down to 0 at s=+1."""
    s = np.asarray(s, dtype=np.float64)
    a = _expm_inv(1.0 + s)
    b = _expm_inv(1.0 - s)
    return b / (a + b)  # a and b never vanish simultaneously


def smooth_ramp_derivative(s) -> np.ndarray:
    """Analytic derivative of smooth_ramp; zero outside (-1, 1)."""
    s = np.asarray(s, dtype=np.float64)
    mid = np.abs(s) < 1.0
    sm = np.where(mid, s, 0.0)
    a = _expm_inv(1.0 + sm)
    b = _expm_inv(1.0 - sm)
    val = -a * b * ((1.0 - sm) ** -2 + (1.0 + sm) ** -2) / (a + b) ** 2
    return np.where(mid, val, 0.0)


@dataclass(frozen=True)
class BumpProfile:
    """
    Unit-mass radial profile on R^d: amplitude * ramp across [1-gamma, 1+gamma].

    For gamma = 0 this degenerates to the normalized indicator of the unit
    ball, matching the sharp sphere/ball limits.
    """

    d: int
    gamma: float
    amplitude: float = dc_field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.gamma == 0.0:
            amp = 1.0 / ball_volume(self.d)
        else:
            area = sphere_area(self.d)
            plateau = (1.0 - self.gamma) ** self.d / self.d
            nodes, weights = leggauss(192)
            rho = 1.0 + self.gamma * nodes
            ring = self.gamma * np.sum(
                weights * smooth_ramp(nodes) * rho ** (self.d - 1)
            )
            amp = 1.0 / (area * (plateau + ring))
        object.__setattr__(self, "amplitude", amp)

    def value(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.float64)
        if self.gamma == 0.0:
            return np.where(rho <= 1.0, self.amplitude, 0.0)
        s = (rho - 1.0) / self.gamma
        return self.amplitude * smooth_ramp(s)

    def derivative(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.float64)
        if self.gamma == 0.0:
            raise ValueError("sharp profile has no classical derivative")
        s = (rho - 1.0) / self.gamma
        return self.amplitude * smooth_ramp_derivative(s) / self.gamma


# ---------------------------------------------------------------------------
# Kernel specification and the special quadratic kernel
# ---------------------------------------------------------------------------

KERNEL_KINDS = ("standard", "special", "combined_l")


@dataclass(frozen=True)
class KernelSpec:
    """Scale, smoothing width and kind of a radial kernel."""

    d: int
    ell: float
    gamma: float = 0.0
    kind: str = "standard"
    profile: str = "bump"

    def __post_init__(self) -> None:
        if self.d not in (2, 3):
            raise ValueError("kernel dimension must be 2 or 3")
        _check_ell(self.ell)
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.profile != "bump":
            raise ValueError(f"unknown radial profile {self.profile!r}")

    def bump(self) -> BumpProfile:
        return BumpProfile(self.d, self.gamma)


def special_kernel_value(d: int, ell: float, r) -> np.ndarray:
    """(r^2/l^2 - 1)/|B_l| on r <= l, zero outside; continuous at r = l."""
    r = np.asarray(r, dtype=np.float64)
    inside = r <= ell
    return np.where(inside, (r**2 / ell**2 - 1.0) / ball_volume(d, ell), 0.0)


def special_kernel_gradient(d: int, ell: float, y: np.ndarray) -> np.ndarray:
    """Analytic gradient of the special kernel on the open ball."""
    y = np.asarray(y, dtype=np.float64)
    return 2.0 * y / (ell**2 * ball_volume(d, ell))


def special_kernel_gradient_identity(spec: KernelSpec, y) -> float:
    """
    Residual of  grad_k phi(y) - (2 y_k/|y|^2) phi(y) = 2 y_k/(|B_l| |y|^2)
    for the special kernel, evaluated with the analytic gradient.
    Only defined on 0 < |y| < l.
    """
    if spec.kind != "special":
        raise ValueError("gradient identity applies to the special kernel")
    y = np.asarray(y, dtype=np.float64)
    r = float(np.sqrt(np.sum(y**2)))
    if r <= 0.0 or r >= spec.ell:
        raise ValueError(f"identity domain is 0 < |y| < ell, got |y| = {r}")
    vol = ball_volume(spec.d, spec.ell)
    lhs = special_kernel_gradient(spec.d, spec.ell, y) - (
        2.0 * y / r**2
    ) * special_kernel_value(spec.d, spec.ell, r)
    rhs = 2.0 * y / (vol * r**2)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# Sphere quadrature rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereRule:
    """Nodes (unit vectors) and weights summing to one on S^{d-1}."""

    d: int
    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    name: str

    def __post_init__(self) -> None:
        nodes = np.ascontiguousarray(np.asarray(self.nodes, dtype=np.float64))
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if nodes.ndim != 2 or nodes.shape[1] != self.d:
            raise ValueError("nodes must have shape (m, d)")
        if weights.shape != (nodes.shape[0],):
            raise ValueError("weights must match the node count")
        norms = np.sqrt(np.sum(nodes**2, axis=1))
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("nodes must be unit vectors")
        if abs(float(np.sum(weights)) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def negated(self) -> "SphereRule":
        return SphereRule(self.d, -self.nodes, self.weights, self.degree, self.name + "-neg")


def sphere_rule(d: int, order: int, kind: str = "gauss") -> SphereRule:
    """
    Quadrature rule on S^{d-1} integrating polynomials up to ``order`` exactly.

    d=2 uses equispaced angles (spectrally accurate trapezoid), d=3 a
    Gauss-Legendre x equispaced-azimuth product rule.  ``kind='fibonacci'``
    returns an equal-weight golden-angle point set instead (no certified
    polynomial exactness; recorded degree 0).
    """
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    if order > MAX_SPHERE_ORDER:
        raise ValueError(
            f"order {order} unsupported; the maximal supported order is {MAX_SPHERE_ORDER}"
        )
    if kind == "fibonacci":
        return _fibonacci_rule(d, max(8, 2 * order))
    if kind != "gauss":
        raise ValueError(f"unknown sphere rule kind {kind!r}")
    if d == 2:
        m = 4 * ((order + 4) // 4)  # multiple of 4: includes axis directions
        theta = 2.0 * np.pi * np.arange(m) / m
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(m, 1.0 / m)
        return SphereRule(2, nodes, weights, m - 1, f"uniform-{m}")
    nz = (order + 2) // 2
    z, wz = leggauss(nz)
    nphi = 2 * nz
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    rho = np.sqrt(np.maximum(1.0 - z**2, 0.0))
    nodes = np.empty((nz * nphi, 3))
    weights = np.empty(nz * nphi)
    for i in range(nz):
        sl = slice(i * nphi, (i + 1) * nphi)
        nodes[sl, 0] = rho[i] * np.cos(phi)
        nodes[sl, 1] = rho[i] * np.sin(phi)
        nodes[sl, 2] = z[i]
        weights[sl] = wz[i] / (2.0 * nphi)
    degree = min(2 * nz - 1, nphi - 1)
    return SphereRule(3, nodes, weights, degree, f"gauss-{nz}x{nphi}")


def _fibonacci_rule(d: int, m: int) -> SphereRule:
    if d == 2:
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        theta = 2.0 * np.pi * np.arange(m) * golden
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    else:
        i = np.arange(m) + 0.5
        z = 1.0 - 2.0 * i / m
        phi = np.pi * (1.0 + np.sqrt(5.0)) * i
        rho = np.sqrt(np.maximum(1.0 - z**2, 0.0))
        nodes = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    weights = np.full(m, 1.0 / m)
    return SphereRule(d, nodes, weights, 0, f"fibonacci-{m}")


def axis_rule(d: int) -> SphereRule:
    """The 2d axis directions with equal weights (degree-3 exactness)."""
    nodes = np.concatenate([np.eye(d), -np.eye(d)], axis=0)
    weights = np.full(2 * d, 1.0 / (2 * d))
    return SphereRule(d, nodes, weights, 3, f"axes-{2 * d}")


def save_sphere_rule(path, rule: SphereRule) -> None:
    lines = []
    for w, node in zip(rule.weights, rule.nodes):
        comps = " ".join(repr(float(c)) for c in node)
        lines.append(f"{w!r} {comps}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_sphere_rule(path, d: int, degree: int = 0) -> SphereRule:
    """Read a plain-text rule: one "w s1 ... sd" line per node."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != d + 1:
            raise ValueError(f"{path}:{lineno}: expected {d + 1} columns")
        rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError(f"{path}: empty sphere rule")
    arr = np.asarray(rows)
    return SphereRule(d, arr[:, 1:], arr[:, 0], degree, f"file:{Path(path).name}")


def default_rule(d: int, n: int | None = None) -> SphereRule:
    """Default rule sized for band-limited integrands at the given resolution."""
    if d == 2:
        order = 96 if n is None else min(MAX_SPHERE_ORDER, max(32, n // 2))
    else:
        order = 23 if n is None else min(47, max(15, (3 * n) // 8))
    return sphere_rule(d, order)


# ---------------------------------------------------------------------------
# Kernel moments
# ---------------------------------------------------------------------------

def kernel_moment(spec: KernelSpec, what, rule: SphereRule | None = None):
    """
    Numerically computed kernel moments.

    what = "mass": total integral of the radial kernel over R^d (scalar for
    standard/special kernels, a d x d matrix for the combined kernel).
    what = TensorKind: normalized sphere average of the projection tensor.
    """
    d = spec.d
    if isinstance(what, TensorKind):
        if rule is None:
            rule = sphere_rule(d, 16)
        nodes = rule.nodes
        outer = nodes[:, :, np.newaxis] * nodes[:, np.newaxis, :]
        avg_outer = np.einsum("m,mij->ij", rule.weights, outer)
        if what is TensorKind.I:
            return np.eye(d)
        if what is TensorKind.L:
            return avg_outer
        return np.eye(d) - avg_outer
    if what != "mass":
        raise ValueError("moment selector must be 'mass' or a TensorKind")
    area = sphere_area(d)
    if spec.kind == "standard":
        prof = spec.bump()
        total = 0.0
        pieces = [(0.0, 1.0 - spec.gamma, 64), (1.0 - spec.gamma, 1.0 + spec.gamma, 256)]
        for lo, hi, count in pieces:
            if hi <= lo:
                continue
            nodes, weights = leggauss(count)
            rho = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            wts = 0.5 * (hi - lo) * weights
            total += float(np.sum(wts * prof.value(rho) * rho ** (d - 1)))
        return area * total
    if spec.kind == "special":
        nodes, weights = leggauss(64)
        r = 0.5 * spec.ell * (nodes + 1.0)
        wts = 0.5 * spec.ell * weights
        vals = special_kernel_value(d, spec.ell, r)
        return area * float(np.sum(wts * vals * r ** (d - 1)))
    # combined kernel: matrix-valued mass (ball T_L part minus special T_T part)
    nodes, weights = leggauss(64)
    r = 0.5 * spec.ell * (nodes + 1.0)
    wts = 0.5 * spec.ell * weights
    ball = 1.0 / ball_volume(d, spec.ell)
    special = special_kernel_value(d, spec.ell, r)
    radial_l = area * float(np.sum(wts * ball * r ** (d - 1)))
    radial_t = area * float(np.sum(wts * special * r ** (d - 1)))
    return radial_l * np.eye(d) / d - radial_t * (d - 1) / d * np.eye(d)


# ---------------------------------------------------------------------------
# Plane-wave sphere factors and Fourier multipliers of radial kernels
# ---------------------------------------------------------------------------

def sphere_wave_factor(d: int, z) -> np.ndarray:
    """g(z) = normalized sphere average of exp(i z k.sigma): sinc / J0."""
    z = np.asarray(z, dtype=np.float64)
    if d == 3:
        return np.sinc(z / np.pi)
    return j0(z)


def _sphere_factor_A(d: int, z: np.ndarray) -> np.ndarray:
    """Coefficient of delta_ij in the sphere average of sigma_i sigma_j e^{iz k.sigma}."""
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    if d == 3:
        out = (np.sin(zs) - zs * np.cos(zs)) / zs**3
        ser = 1.0 / 3.0 - z**2 / 30.0
    else:
        out = j1(zs) / zs
        ser = 0.5 - z**2 / 16.0
    return np.where(small, ser, out)


def _sphere_factor_B(d: int, z: np.ndarray) -> np.ndarray:
    """Coefficient of khat_i khat_j in the same sphere average."""
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    if d == 3:
        out = np.sin(zs) / zs + 3.0 * np.cos(zs) / zs**2 - 3.0 * np.sin(zs) / zs**3
        ser = -(z**2) / 15.0
    else:
        out = j0(zs) - 2.0 * j1(zs) / zs
        ser = -(z**2) / 8.0
    return np.where(small, ser, out)


def ball_average_multiplier(grid: Grid, ell: float) -> np.ndarray:
    """Exact Fourier multiplier of the mean over the ball of radius ell."""
    _check_ell(ell)
    z = ell * grid.k_magnitude
    small = z < 1e-4
    zs = np.where(small, 1.0, z)
    if grid.d == 3:
        out = 3.0 * (np.sin(zs) - zs * np.cos(zs)) / zs**3
        ser = 1.0 - z**2 / 10.0
    else:
        out = 2.0 * j1(zs) / zs
        ser = 1.0 - z**2 / 8.0
    return np.where(small, ser, out)


def _auto_radial_nodes(z_max: float, base: int = 48) -> int:
    return int(max(base, 0.7 * z_max + 24))


def radial_scalar_multiplier(
    grid: Grid, radial_fn, r_lo: float, r_hi: float, nodes: int | None = None
) -> np.ndarray:
    """
    Multiplier of convolution with the radial kernel radial_fn(r) supported on
    [r_lo, r_hi]: m(k) = area * int r^{d-1} radial_fn(r) g(r|k|) dr.
    """
    kmax = float(np.max(grid.k_magnitude))
    if nodes is None:
        nodes = _auto_radial_nodes(r_hi * kmax)
    x, w = leggauss(nodes)
    r = 0.5 * (r_hi - r_lo) * x + 0.5 * (r_hi + r_lo)
    wts = 0.5 * (r_hi - r_lo) * w
    area = sphere_area(grid.d)
    out = np.zeros(grid.shape)
    kmag = grid.k_magnitude
    for rq, wq in zip(r, wts):
        out += (
            wq * rq ** (grid.d - 1) * float(radial_fn(np.asarray(rq)))
            * sphere_wave_factor(grid.d, rq * kmag)
        )
    return area * out


def radial_tensor_multiplier(
    grid: Grid,
    radial_fn,
    r_lo: float,
    r_hi: float,
    part: TensorKind,
    nodes: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Multiplier of convolution with radial_fn(r) T_part(yhat): returns (P, Q)
    with matrix symbol P(k) delta_ij + Q(k) khat_i khat_j.
    """
    kmax = float(np.max(grid.k_magnitude))
    if nodes is None:
        nodes = _auto_radial_nodes(r_hi * kmax)
    x, w = leggauss(nodes)
    r = 0.5 * (r_hi - r_lo) * x + 0.5 * (r_hi + r_lo)
    wts = 0.5 * (r_hi - r_lo) * w
    area = sphere_area(grid.d)
    kmag = grid.k_magnitude
    P = np.zeros(grid.shape)
    Q = np.zeros(grid.shape)
    for rq, wq in zip(r, wts):
        z = rq * kmag
        fac = wq * rq ** (grid.d - 1) * float(radial_fn(np.asarray(rq)))
        A = _sphere_factor_A(grid.d, z)
        B = _sphere_factor_B(grid.d, z)
        if part is TensorKind.L:
            P += fac * A
            Q += fac * B
        elif part is TensorKind.T:
            P += fac * (sphere_wave_factor(grid.d, z) - A)
            Q -= fac * B
        else:
            P += fac * sphere_wave_factor(grid.d, z)
    return area * P, area * Q


@lru_cache(maxsize=64)
def mollifier_multiplier(grid: Grid, ell: float, gamma: float) -> np.ndarray:
    """Multiplier of the standard (unit-mass) radial mollifier at (ell, gamma)."""
    _check_ell(ell)
    if gamma == 0.0:
        return ball_average_multiplier(grid, ell)
    prof = BumpProfile(grid.d, gamma)
    r0 = (1.0 - gamma) * ell
    r1 = (1.0 + gamma) * ell
    kmag = grid.k_magnitude
    # plateau: amplitude * |B_{r0}| * ball-average multiplier at radius r0
    out = np.zeros(grid.shape)
    if r0 > 0.0:
        amp = prof.amplitude / ell**grid.d
        out += amp * ball_volume(grid.d, r0) * ball_average_multiplier(grid, r0)
    # transition annulus by quadrature
    kmax = float(np.max(kmag))
    nodes = _auto_radial_nodes(r1 * kmax)
    x, w = leggauss(nodes)
    r = 0.5 * (r1 - r0) * x + 0.5 * (r1 + r0)
    wts = 0.5 * (r1 - r0) * w
    area = sphere_area(grid.d)
    ann = np.zeros(grid.shape)
    for rq, wq in zip(r, wts):
        val = float(prof.value(np.asarray(rq / ell))) / ell**grid.d
        ann += wq * rq ** (grid.d - 1) * val * sphere_wave_factor(grid.d, rq * kmag)
    out += area * ann
    mult = np.ascontiguousarray(out)
    mult.flags.writeable = False
    return mult


@lru_cache(maxsize=64)
def combined_l_multiplier(grid: Grid, ell: float) -> tuple[np.ndarray, np.ndarray]:
    """
    (P, Q) multiplier pair of the combined longitudinal kernel
    ball-average x T_L  minus  special-kernel x T_T.  A constant field maps
    to 3/(d+2) times itself.
    """
    _check_ell(ell)
    d = grid.d
    ball = 1.0 / ball_volume(d, ell)
    P1, Q1 = radial_tensor_multiplier(grid, lambda r: ball, 0.0, ell, TensorKind.L)
    P2, Q2 = radial_tensor_multiplier(
        grid, lambda r: special_kernel_value(d, ell, r), 0.0, ell, TensorKind.T
    )
    P = np.ascontiguousarray(P1 - P2)
    Q = np.ascontiguousarray(Q1 - Q2)
    P.flags.writeable = False
    Q.flags.writeable = False
    return P, Q


@lru_cache(maxsize=64)
def combined_l_potential_multiplier(grid: Grid, ell: float) -> np.ndarray:
    """
    Scalar multiplier of the pressure potential paired with the combined
    kernel: the ball-supported radial potential whose gradient matches the
    divergence of the combined tensor kernel.
    """
    _check_ell(ell)
    d = grid.d
    vol = ball_volume(d, ell)

    def potential(r):
        return (1.0 - 0.5 * (d - 1) * (1.0 - r**2 / ell**2)) / vol

    mult = np.ascontiguousarray(
        radial_scalar_multiplier(grid, potential, 0.0, ell)
    )
    mult.flags.writeable = False
    return mult


def apply_tensor_multiplier(
    grid: Grid, coef: np.ndarray, P: np.ndarray, Q: np.ndarray
) -> np.ndarray:
    """Apply the symbol P delta + Q khat khat to a d-component coefficient array."""
    kmag = grid.k_magnitude.copy()
    kmag[kmag == 0.0] = 1.0
    khat = [k / kmag for k in grid.wavenumbers]
    kdot = np.zeros(grid.shape, dtype=np.complex128)
    for a in range(grid.d):
        kdot = kdot + khat[a] * coef[a]
    out = np.empty_like(coef)
    for a in range(grid.d):
        out[a] = P * coef[a] + Q * khat[a] * kdot
    return out


# ---------------------------------------------------------------------------
# Spherical averaging
# ---------------------------------------------------------------------------

def spherical_average(f: Field, ell: float, rule: SphereRule) -> Field:
    """
    Average of f over the sphere of radius ell around each point, realized by
    exact spectral translations to the rule nodes.
    """
    if not 0.0 <= ell <= ELL_MAX + 1e-15:
        raise ValueError(f"ell must lie in [0, pi/2], got {ell}")
    if rule.d != f.grid.d:
        raise ValueError("sphere rule dimension does not match the field")
    if ell == 0.0:
        return f
    grid = f.grid
    arg = np.zeros(grid.shape, dtype=np.complex128)
    for w, node in zip(rule.weights, rule.nodes):
        phase = np.zeros(grid.shape)
        for a, k in enumerate(grid.wavenumbers):
            phase = phase + k * (ell * node[a])
        arg += w * np.exp(1j * phase)
    return Field.from_spectral(grid, f.spectral * arg[np.newaxis], time=f.time, nu=f.nu)


@dataclass(frozen=True)
class SmearingConvergence:
    """Gap between gamma-smeared radial averages and the sharp sphere average."""

    ell: float
    gammas: tuple
    gaps: tuple
    monotone: bool
    linear_prediction: float

    @property
    def final_gap(self) -> float:
        return self.gaps[-1]


def mollifier_to_sphere_limit(
    f: Field,
    ell: float,
    gammas,
    rule: SphereRule | None = None,
    radial_nodes: int = 32,
) -> SmearingConvergence:
    """
    Empirical convergence of the gamma-smeared radial average of f toward the
    sharp sphere average as the smearing width shrinks.
    """
    gammas = [float(g) for g in gammas]
    if not gammas or any(g <= 0.0 or g > 1.0 for g in gammas):
        raise ValueError("gammas must be positive widths at most 1")
    if any(b >= a for a, b in zip(gammas, gammas[1:])):
        raise ValueError("gammas must be strictly decreasing")
    if rule is None:
        rule = default_rule(f.grid.d, f.grid.n)
    sharp = spherical_average(f, ell, rule)

    x, w = leggauss(radial_nodes)
    bump = np.exp(-1.0 / np.maximum(1.0 - x**2, 1e-300))
    bump_w = w * bump / np.sum(w * bump)  # even, unit-mass smearing weights

    gaps = []
    for g in gammas:
        acc = np.zeros_like(sharp.data)
        for s, ws in zip(x, bump_w):
            radius = ell * (1.0 + g * s)
            acc = acc + ws * spherical_average(f, radius, rule).data
        gaps.append(float(np.max(np.abs(acc - sharp.data))))
    monotone = all(b <= a + 1e-10 for a, b in zip(gaps, gaps[1:]))
    if len(gaps) >= 2:
        linear = gaps[-2] * (gammas[-1] / gammas[-2])
    else:
        linear = gaps[-1]
    return SmearingConvergence(ell, tuple(gammas), tuple(gaps), monotone, linear)
