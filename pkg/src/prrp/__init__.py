"""Panel rank-revealing pivoted LU factorizations and their
communication-avoiding variants, with the measurement apparatus used to
study their growth factors and backward errors.
"""

from .block_variants import (BlockVariantFactors, block_pairwise_luprrp,
                             block_parallel_luprrp, replay_events)
from .costmodel import (CostReport, MachineModel, flops_luprrp, lower_bounds,
                        optimal_layout, perf_model, total_time)
from .gepp import GeppFactors, gepp_factor, gepp_solve
from .luprrp import (BlockLUFactors, ElimStats, growth_bound_luprrp,
                     luprrp_factor, luprrp_solve)
from .matgen import (MatrixSpec, gen_foster, gen_generalized_wilkinson,
                     gen_randn, gen_special, gen_wilkinson, gen_wright,
                     generate, parse_spec)
from .metrics import (StabilityReport, componentwise_backward_error,
                      full_report, growth_factor, hpl_triplet,
                      iterative_refinement, normwise_backward_error,
                      rel_factorization_error, residual_extended)
from .pivoted_qr import (QRFactors, SrrqrResult, householder_qr,
                         multiplier_block, qr_column_pivoting, strong_rrqr)
from .tournament import (ReductionTree, TournamentTrace, binary_tree,
                         calu_factor, caluprrp_factor, flat_tree,
                         growth_bound_caluprrp, growth_condition,
                         tournament_select, tree_height)

__version__ = "0.1.0"
