"""Bi-fidelity velocity-space reduction for multiscale kinetic equations.

A cheap relaxation (low-fidelity) solver predicts the next state on the full
velocity grid, a pivoted-Cholesky greedy pass picks the few velocity points
that span the prediction, the asymptotic-preserving (high-fidelity) solver is
evaluated only there, and the full solution is rebuilt by projection.
"""

from .boltzmann import (
    BoltzmannWorkspace,
    ImexStepResult,
    TransportedState,
    hf_step_imex_typeA,
    hf_step_penalty,
    lf_step_bgk,
    transport_step,
    upwind_divergence,
)
from .collision import (
    CrossSectionTable,
    DvmTables,
    build_cross_section,
    build_dvm_tables,
    q_lb_apply,
    q_nb_dvm_apply,
    q_nb_loss_max,
    relaxation_penalty,
)
from .driver import (
    Problem,
    RunConfig,
    RunResult,
    StepRecord,
    bifid_step_boltzmann,
    bifid_step_semiconductor,
    build_problem,
    make_config,
    run_simulation,
)
from .errors import (
    BfkinError,
    CflViolationError,
    ConfigError,
    DegenerateKernelError,
    NumericsError,
    VacuumCellError,
)
from .error_metrics import (
    ErrorReport,
    empirical_bound,
    relative_l1_error,
    similarity_ratio,
    subspace_distance,
)
from .grids import (
    DistributionField,
    MacroMoments,
    SpatialMesh,
    VelocityMesh,
    build_centered_velocity_mesh,
    build_spatial_mesh,
    build_velocity_mesh,
    compute_moments,
    equilibrium_distance,
    field_moments,
    lp_norm,
    matched_maxwellian,
    maxwellian,
    maxwellian_field,
)
from .selection import (
    ProjectionCoeffs,
    SelectionResult,
    bf_reconstruct,
    greedy_select,
    project_coefficients,
)
from .semiconductor import (
    EvenOddState,
    PotentialField,
    SemiconductorWorkspace,
    build_semiconductor_workspace,
    even_odd_decompose,
    even_odd_recompose,
    hf_update_r,
    lf_update_r,
    update_j,
)

__version__ = "0.1.0"
