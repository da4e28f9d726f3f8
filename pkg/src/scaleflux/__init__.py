"""Scale-by-scale energy flux diagnostics for periodic incompressible flows."""

from .balance import (
    BalanceReport,
    EnergySeries,
    LocalBalanceResult,
    RemainderAudit,
    epsilon_series,
    global_balance_residual,
    local_balance_residual_I,
    local_balance_residual_L,
    measure_besov_exponent,
    remainder_bound_audit,
)
from .fields import (
    Field,
    besov_seminorm,
    forward_transform,
    inverse_transform,
    leray_project,
    pressure_from_velocity,
    shift,
)
from .fldio import FieldFormatError, read_field, write_field
from .flux import (
    FluxField,
    StructureTable,
    combined_l_average,
    decomposition_identity,
    dyadic_scales,
    flux_field_mollified,
    flux_field_sphere,
    structure_function,
    structure_functions_all,
    structure_table,
)
from .grid import Grid
from .kernels import (
    BumpProfile,
    KernelSpec,
    SphereRule,
    kernel_moment,
    load_sphere_rule,
    mollifier_to_sphere_limit,
    save_sphere_rule,
    special_kernel_gradient_identity,
    sphere_rule,
    spherical_average,
)
from .solver import (
    ForcingSpec,
    InitSpec,
    ModeForcing,
    RunResult,
    SolverParams,
    run,
    step,
    taylor_green,
    taylor_green_2d_exact,
)
from .sweep import SweepParams, SweepReport, run_sweep
from .tensors import TensorKind, apply_tensor, tensor_matrix

__version__ = "0.1.0"
