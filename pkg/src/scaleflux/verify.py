"""
Machine-checkable invariant suites over the tensor algebra, kernels, sphere
rules, and the discrete decomposition identity; used by the CLI verify
subcommand and the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fields import Field, leray_project
from .flux import decomposition_identity
from .grid import Grid
from .kernels import (
    BumpProfile,
    KernelSpec,
    default_rule,
    kernel_moment,
    special_kernel_gradient_identity,
    sphere_rule,
)
from .solver import random_solenoidal
from .tensors import TensorKind, apply_tensor, tensor_matrix


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "residual": self.residual,
            "tolerance": self.tolerance,
        }


def _tensor_checks(d: int, samples: int, rng) -> list[CheckResult]:
    y = rng.standard_normal((samples, d))
    y /= np.sqrt(np.sum(y**2, axis=1, keepdims=True))
    v = rng.standard_normal((samples, d))
    out = []

    vi = apply_tensor(TensorKind.I, y, v)
    vl = apply_tensor(TensorKind.L, y, v)
    vt = apply_tensor(TensorKind.T, y, v)
    out.append(CheckResult(f"d={d} identity action", float(np.max(np.abs(vi - v))), 1e-14))
    pyth = np.sum(vi**2, axis=1) - np.sum(vl**2, axis=1) - np.sum(vt**2, axis=1)
    out.append(CheckResult(f"d={d} pythagoras |I v|^2 = |L v|^2 + |T v|^2",
                           float(np.max(np.abs(pyth))), 1e-14))

    ml = tensor_matrix(TensorKind.L, y)
    mt = tensor_matrix(TensorKind.T, y)
    idem_l = np.einsum("mij,mjk->mik", ml, ml) - ml
    idem_t = np.einsum("mij,mjk->mik", mt, mt) - mt
    cross = np.einsum("mij,mjk->mik", ml, mt)
    out.append(CheckResult(f"d={d} L projector idempotent", float(np.max(np.abs(idem_l))), 1e-14))
    out.append(CheckResult(f"d={d} T projector idempotent", float(np.max(np.abs(idem_t))), 1e-14))
    out.append(CheckResult(f"d={d} L T orthogonal", float(np.max(np.abs(cross))), 1e-14))
    sym = np.max(np.abs(ml - np.swapaxes(ml, 1, 2)))
    out.append(CheckResult(f"d={d} L symmetric", float(sym), 1e-14))
    return out


def coefficient_identity_residual(d: int, ct_value: Fraction | None = None) -> Fraction:
    """Exact rational residual of 3/(d+2) + 1/(4 C_T) - 1."""
    ct = ct_value if ct_value is not None else Fraction(d + 2, 4 * (d - 1))
    return Fraction(3, d + 2) + Fraction(1, 1) / (4 * ct) - 1


def _kernel_checks(d: int) -> list[CheckResult]:
    out = []
    spec = KernelSpec(d, 0.5, kind="special")
    mass = kernel_moment(spec, "mass")
    out.append(CheckResult(
        f"d={d} special kernel mass = -2/(d+2)", abs(mass + 2.0 / (d + 2)), 1e-8))

    std = KernelSpec(d, 0.5, gamma=0.2, kind="standard")
    out.append(CheckResult(
        f"d={d} standard kernel unit mass", abs(kernel_moment(std, "mass") - 1.0), 1e-10))

    rule = sphere_rule(d, 16)
    tl = kernel_moment(std, TensorKind.L, rule)
    out.append(CheckResult(
        f"d={d} sphere average T_L = delta/d",
        float(np.max(np.abs(tl - np.eye(d) / d))), 1e-12))
    tt = kernel_moment(std, TensorKind.T, rule)
    out.append(CheckResult(
        f"d={d} sphere average T_T = (d-1)/d delta",
        float(np.max(np.abs(tt - (d - 1) / d * np.eye(d)))), 1e-12))

    comb = kernel_moment(KernelSpec(d, 0.5, kind="combined_l"), "mass")
    out.append(CheckResult(
        f"d={d} combined kernel mass = 3/(d+2) delta",
        float(np.max(np.abs(comb - 3.0 / (d + 2) * np.eye(d)))), 1e-8))

    point = np.zeros(d)
    point[0] = 0.2
    resid = special_kernel_gradient_identity(KernelSpec(d, 0.5, kind="special"), point)
    out.append(CheckResult(f"d={d} special kernel gradient identity", resid, 1e-12))

    # profile nonnegativity and gradient support confinement
    prof = BumpProfile(d, 0.2)
    rho = np.linspace(0.0, 1.5, 4001)
    out.append(CheckResult(
        f"d={d} profile nonnegative", float(max(0.0, -np.min(prof.value(rho)))), 0.0))
    outside = (rho < 0.8 - 1e-12) | (rho > 1.2 + 1e-12)
    leak = float(np.max(np.abs(prof.derivative(rho)[outside])))
    out.append(CheckResult(f"d={d} gradient support in annulus", leak, 1e-14))
    return out


def _rule_checks(d: int) -> list[CheckResult]:
    out = []
    rule = sphere_rule(d, 16)
    out.append(CheckResult(
        f"d={d} rule weights sum to 1", abs(float(np.sum(rule.weights)) - 1.0), 1e-14))
    first = np.einsum("m,mi->i", rule.weights, rule.nodes)
    out.append(CheckResult(f"d={d} rule first moment", float(np.max(np.abs(first))), 1e-14))
    second = np.einsum("m,mi,mj->ij", rule.weights, rule.nodes, rule.nodes)
    out.append(CheckResult(
        f"d={d} rule second moment = delta/d",
        float(np.max(np.abs(second - np.eye(d) / d))), 1e-12))
    if d == 2:
        # trigonometric monomials up to degree 8 integrate exactly
        rule8 = sphere_rule(2, 8)
        theta = np.arctan2(rule8.nodes[:, 1], rule8.nodes[:, 0])
        worst = 0.0
        for m in range(1, 9):
            worst = max(worst, abs(float(np.sum(rule8.weights * np.cos(m * theta)))))
            worst = max(worst, abs(float(np.sum(rule8.weights * np.sin(m * theta)))))
        out.append(CheckResult("d=2 trig monomials to degree 8", worst, 1e-12))
    return out


def _identity_checks(ct_override: float | None, rng) -> list[CheckResult]:
    out = []
    for d in (2, 3):
        frac = coefficient_identity_residual(
            d, None if ct_override is None else Fraction(ct_override).limit_denominator(10**9)
        )
        out.append(CheckResult(
            f"d={d} exact coefficient identity 3/(d+2) + 1/(4 C_T) = 1",
            float(abs(frac)), 0.0))

    for d, n in ((2, 32), (3, 16)):
        grid = Grid(d, n)
        u = random_solenoidal(grid, seed=int(rng.integers(2**31)), band=(1.0, n / 4.0))
        u = leray_project(u)
        rule = default_rule(d, n)
        res = decomposition_identity(u, np.pi / 8.0, rule)
        out.append(CheckResult(f"d={d} n={n} decomposition identity", res, 1e-12))
    return out


def run_suite(
    suite: str = "all",
    samples: int = 10_000,
    seed: int = 2024,
    ct_override: float | None = None,
) -> list[CheckResult]:
    """Run the requested invariant suite; returns measured residuals."""
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = []
    if suite in ("all", "tensors"):
        for d in (2, 3):
            checks.extend(_tensor_checks(d, samples, rng))
    if suite in ("all", "kernels"):
        for d in (2, 3):
            checks.extend(_kernel_checks(d))
            checks.extend(_rule_checks(d))
    if suite in ("all", "identities"):
        checks.extend(_identity_checks(ct_override, rng))
    if not checks:
        raise ValueError(f"unknown suite {suite!r}")
    return checks
