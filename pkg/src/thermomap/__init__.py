"""Transfer-operator thermodynamics for intermittent circle maps.

Build a map T(x) = x(1+V(x)) mod 1, pick concave moduli of continuity for
the potential and the eigenfunction space, verify their compatibility near
the indifferent fixed point, compute the maximal eigendata (chi, h, nu) of
the transfer operator, assemble the invariant measure mu = h nu, and check
the equilibrium and Gibbs properties at grid resolution.
"""

from .circle import (DiscreteMeasure, GridFunction, ResolutionMismatchError,
                     circle_dist, grid_nodes, integrate, wrap)
from .maps import (BISECTION_TOL, CircleMap, DegenerateMapError,
                   ExpansionConstants, InvalidMapError, PairingError,
                   VaryingFunction, branch_preorbit, estimate_expansion,
                   expansion_inequality_holds, ilog_map, ilog_varying,
                   manneville_pomeau, pair_preorbit_batch, paired_preorbit,
                   power_varying, random_preorbit)
from .moduli import (CompatibilityReport, Modulus, WindowError,
                     build_omega_legendre, check_compatibility,
                     check_ratio_condition, concavity_threshold,
                     corollary_b_moduli, default_c, ilog_modulus, omega_ab,
                     upper_concave_hull)
from .spectral import (Potential, PowerIterationResult, SpectralData,
                       TransferKernel, UlamResult, birkhoff_sum,
                       dual_residual, eigenmeasure, estimate_seminorm,
                       invariance_residual, iterate_convergence,
                       normalized_potential, power_iterate, refined_nodes,
                       second_eigenvalue_estimate, solve_eigendata,
                       transfer_apply, ulam_invariant_measure)
from .thermo import (DynamicBall, GibbsReport, GibbsRow, ThermoReport,
                     VariationalProbe, cover_pressure, dirac_exclusion_check,
                     dynamic_ball, gibbs_report, jacobian,
                     jacobian_reciprocal_defect, rokhlin_entropy,
                     thermo_report, variational_probe)

__version__ = "0.1.0"
