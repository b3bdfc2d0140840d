"""Numerical laboratory for a coupled KdV system with Clifford-component fields."""

from .dynamics import (
    BracketConvention,
    BracketReport,
    bracket_consistency,
    bracket_flow,
    grad_h_phi,
    grad_h_u,
    rhs,
)
from .errors import BlowUpError, CkdvError, ConfigError
from .grid import (
    Grid1D,
    RealField,
    antiderivative,
    dealias,
    deriv,
    integrate,
    make_grid,
    shift,
    zero_field,
)
from .integrator import EvolveResult, SolverConfig, evolve, step, suggest_dt
from .invariants import (
    AprioriCheck,
    AprioriData,
    InvariantReport,
    apriori,
    casimir_v,
    check_apriori,
    hamiltonian,
    masses,
    nonlocal_matrix,
    sobolev_h1,
)
from .solitons import SolitonSpec, soliton_profile, soliton_state, tw_residual
from .stability import (
    DhBound,
    GroundStateReport,
    StabilityRunReport,
    TrackPoint,
    check_dh_lower,
    check_dh_upper,
    distance_d1,
    distance_d2,
    make_perturbation,
    rescale_to_v,
    run_ground_state_stability,
    run_soliton_stability,
)
from .state import (
    CoupledState,
    StateRate,
    axpy_state,
    p_body,
    p_body_deriv,
    scale_state,
    state_from_values,
    zero_state,
)

__version__ = "0.1.0"

__all__ = [
    "AprioriCheck",
    "AprioriData",
    "BlowUpError",
    "BracketConvention",
    "BracketReport",
    "CkdvError",
    "ConfigError",
    "CoupledState",
    "DhBound",
    "EvolveResult",
    "Grid1D",
    "GroundStateReport",
    "InvariantReport",
    "RealField",
    "SolitonSpec",
    "SolverConfig",
    "StabilityRunReport",
    "StateRate",
    "TrackPoint",
    "antiderivative",
    "apriori",
    "axpy_state",
    "bracket_consistency",
    "bracket_flow",
    "casimir_v",
    "check_apriori",
    "check_dh_lower",
    "check_dh_upper",
    "dealias",
    "deriv",
    "distance_d1",
    "distance_d2",
    "evolve",
    "grad_h_phi",
    "grad_h_u",
    "hamiltonian",
    "integrate",
    "make_grid",
    "make_perturbation",
    "masses",
    "nonlocal_matrix",
    "p_body",
    "p_body_deriv",
    "rescale_to_v",
    "rhs",
    "run_ground_state_stability",
    "run_soliton_stability",
    "scale_state",
    "shift",
    "sobolev_h1",
    "soliton_profile",
    "soliton_state",
    "state_from_values",
    "step",
    "suggest_dt",
    "tw_residual",
    "zero_field",
    "zero_state",
]
