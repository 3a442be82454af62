"""3D strip packing with harmonic segments and certified lower bounds."""

from .binpack import (DualSolution, FbpSolution, SizeProfile, aptas_bp,
                      exact_bp, first_fit_decreasing, next_fit, solve_fbp)
from .errors import (BudgetExceededError, ContractError, DomainError,
                     SegpackError, StructureError)
from .harmonic import (DualFeasibleFn, T_k, f_k, harmonic_scaled_fn,
                       harmonic_type, identity_fn, m_of_k, make_g,
                       modified_volume, step_fn, t_sequence,
                       total_modified_volume)
from .model import (Box3, Instance, Packing, Placement, ValidationReport,
                    as_fraction, instance_from_json, instance_to_json,
                    packing_from_json, packing_height, packing_to_json,
                    total_volume, validate_packing)
from .oracle import SearchBudget, exact_strip_opt, square_fit
from .ssp import (Certificate, Segment, SspConfig, SspResult, gnf_pack,
                  gnfdh_pack, group_by_length, realize_layers, run_3ssp)
from .aptas import (AptasResult, GapGrouping, RestrictedInstance,
                    enumerate_patterns, harvest_regions, mnfdh_pack,
                    pack_large, restricted_lp_value, run_square_aptas,
                    select_gap, solve_restricted, stack_group_round,
                    stack_sandwich_profiles)

__version__ = "0.1.0"
