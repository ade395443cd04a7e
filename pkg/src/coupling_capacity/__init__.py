"""Coupling capacities of positive operators over measured matrix algebras."""

from .capacity import (CapacityResult, Kind, StrassenVerdict, alpha, alpha_channel_form,
                       alpha_unitary_search, beta, duality_gap, strassen_decide, w_of_vector)
from .classical import ClassicalInstance, TransportPlan, diag_embed, matching_value, ot_alpha, ot_beta, ot_gamma
from .entangle import (EntanglementClass, EntanglementVerdict, SchmidtDecomposition, alpha_min_projection_check,
                       alpha_rank_one_lower, capacity_sweep, classify, maximally_entangled_in_range, schmidt)
from .errors import (CapacityError, InconsistencyError, PreconditionError, SolverFailure,
                     ValidationError)
from .gamma import (GammaResult, Method, gamma_bounds, gamma_commuting_sweep, gamma_product,
                    gamma_rank_one_2x2, gamma_search)
from .model import (ChoiMap, Coupling, MeasuredAlgebra, channel_of_coupling, choi_of_coupling,
                    complete_subcoupling, coupling_of_choi, is_coupling)
from .sdp import SolverOptions, SolverOutcome, Status, solve_alpha, solve_beta

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "CapacityResult", "ChoiMap", "ClassicalInstance", "Coupling", "EntanglementClass",
    "EntanglementVerdict", "GammaResult", "InconsistencyError", "Kind", "MeasuredAlgebra", "Method",
    "PreconditionError", "SchmidtDecomposition", "SolverFailure", "SolverOptions", "SolverOutcome", "Status",
    "StrassenVerdict", "TransportPlan", "ValidationError", "alpha", "alpha_channel_form",
    "alpha_min_projection_check", "alpha_rank_one_lower", "alpha_unitary_search", "beta", "capacity_sweep",
    "channel_of_coupling", "choi_of_coupling", "classify", "complete_subcoupling", "coupling_of_choi",
    "diag_embed", "duality_gap", "gamma_bounds", "gamma_commuting_sweep", "gamma_product", "gamma_rank_one_2x2",
    "gamma_search", "is_coupling", "matching_value", "maximally_entangled_in_range", "ot_alpha", "ot_beta",
    "ot_gamma", "schmidt", "solve_alpha", "solve_beta", "strassen_decide", "w_of_vector",
]
