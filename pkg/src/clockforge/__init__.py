"""Optimal distillation of one coherent qubit from N noisy copies after Schur sampling."""

from .errors import ClockforgeError, ConvergenceError, DomainError, ZeroOutcomeMassError
from .schur_stats import (
    ClockParams,
    SchurDistribution,
    nc_moment_exact,
    nc_moment_poly,
    nc_negative_moment_series,
    schur_distribution,
    zero_outcome_mass,
)
from .matrix_elements import (
    PBand,
    centered_moment_exact,
    centered_moment_series,
    p_band,
    p_entry_oracle,
    r_ratios,
)
from .protocol import (
    ProtocolAngles,
    choi_blocks,
    fidelity,
    infidelity,
    is_ppt,
    output_state,
    stinespring_rotations,
    ti_covariance_residual,
)
from .solver import (
    average_infidelity,
    discarding_protocol,
    solve_equatorial_odd_exact,
    solve_optimal,
    three_angle_residual,
)
from .asymptotic import (
    InfidelitySeries,
    equatorial_symmetry_lower_bound,
    infidelity_factor_lower_bound,
    infidelity_series,
    ph_near_pure_bound,
    protocol_order1,
    protocol_order2,
    protocol_order3_equatorial,
    purity_of_coherence_general,
)
from .baselines import (
    dissipation,
    eb_infidelity,
    eb_optimal_protocol,
    perfect_conversion_oracle,
    perfect_conversion_probability,
    perturbative_protocol,
)

__version__ = "0.1.0"
