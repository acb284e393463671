"""Open-system dynamics of two masses coupled to the gravitational vacuum.

The package is organized around one pipeline: physical or dimensionless
parameters (`params`) fix the vacuum-induced constants (`coeffs`), which
build master-equation generators on a truncated number register
(`generators`), which are integrated or solved for stationary structure
(`dynamics`) and mined for observable signatures (`analysis`).  Neighboring
sectors get their own modules: free particles evolve via moment recurrences
instead of a register (`freepart`), perturbation theory supplies an
independent route to the same level shifts (`perturb`), and `validity`
checks the regime where the non-completely-positive generators still
transport thermal states to physical states.  `cli` wraps the lot in
deterministic CSV scenarios.
"""

from .analysis import (
    ChannelReport,
    CutoffFit,
    SpectralLadder,
    channel_discriminator,
    cutoff_sweep,
    extract_ladder,
)
from .coeffs import VacuumCoefficients, quadrature_oracle, vacuum_coefficients
from .dynamics import (
    SteadyStateResult,
    Trajectory,
    evolve,
    long_time_populations,
    steady_state,
)
from .errors import (
    ConvergenceError,
    DegenerateDataError,
    IllConditionedKernel,
    InvariantViolation,
)
from .fock import (
    fock_state,
    superposition_state,
    thermal_state,
    validate_density_matrix,
)
from .freepart import (
    FreeMoments,
    MomentTable,
    closed_form_x,
    closed_form_xi,
    gaussian_moments,
    moment_ode_oracle,
)
from .generators import (
    Liouvillian,
    effective_hamiltonian,
    lindblad_amp,
    lindblad_pha,
    liouvillian_x_full,
    liouvillian_x_rwa,
    liouvillian_xi_full,
    liouvillian_xi_rwa,
    transition_frequencies,
)
from .params import DimensionlessParams, PhysicalParams, to_dimensionless, vacuum_decay_rate
from .perturb import dense_reference_shift, multimode_shift, single_mode_shift
from .validity import (
    PositivityReport,
    check_trace_annihilation,
    empirical_n_max,
    first_order_state,
    n_max_bound,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelReport",
    "ConvergenceError",
    "CutoffFit",
    "DegenerateDataError",
    "DimensionlessParams",
    "FreeMoments",
    "IllConditionedKernel",
    "InvariantViolation",
    "Liouvillian",
    "MomentTable",
    "PhysicalParams",
    "PositivityReport",
    "SpectralLadder",
    "SteadyStateResult",
    "Trajectory",
    "VacuumCoefficients",
    "channel_discriminator",
    "check_trace_annihilation",
    "closed_form_x",
    "closed_form_xi",
    "cutoff_sweep",
    "dense_reference_shift",
    "effective_hamiltonian",
    "empirical_n_max",
    "evolve",
    "extract_ladder",
    "first_order_state",
    "fock_state",
    "gaussian_moments",
    "lindblad_amp",
    "lindblad_pha",
    "liouvillian_x_full",
    "liouvillian_x_rwa",
    "liouvillian_xi_full",
    "liouvillian_xi_rwa",
    "long_time_populations",
    "moment_ode_oracle",
    "multimode_shift",
    "n_max_bound",
    "quadrature_oracle",
    "single_mode_shift",
    "steady_state",
    "superposition_state",
    "thermal_state",
    "to_dimensionless",
    "transition_frequencies",
    "vacuum_coefficients",
    "vacuum_decay_rate",
    "validate_density_matrix",
]
