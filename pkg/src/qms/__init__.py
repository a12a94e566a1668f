"""Superlinear integral equations u = K u^q + f on finite atomic measures:
existence criteria, Picard solves, gauge norms, capacities, and the 1D
Dirichlet model problem."""

__version__ = "0.1.0"

from .space import (AtomicMeasure, ConjugatePair, QuasiMetricSpace,
                    QuasiMetricViolation, ball_measure, breakpoints,
                    estimate_kappa, load_space_file)
from .kernel import (KernelModel, NaimTransform, harnack_check, local_profile,
                     make_kernel, naim_transform, potential,
                     potential_via_balls, riesz_constant, split)
from .solver import (HypothesisNotMet, SolveReport, ZNormBracket, apply_A,
                     guaranteed_solve_iterated, guaranteed_solve_small,
                     picard_solve, subadditivity_check, znorm, zprime_norm)
from .criteria import (CriteriaReport, infinitesimal_constant,
                       hardy_property_check, iterated_weight_constants,
                       nondegeneracy_check, phi_ball, pointwise_constant,
                       structural_conditions, testing_constant, verdict,
                       weighted_norm_constant)
from .capacity import (CapacityResult, capacity, capacity_ball_bounds_check,
                       capacity_ball_upper, capacity_condition_constant,
                       lemma_5_5_check)
from .dirichlet import (BVPReport, Interval1DProblem, c11_quasimetric_scan,
                        green1d, model_c11_distance, naim1d_rho,
                        naim_triangle_scan, solve_bvp_1d, theorem_7_7_battery,
                        uniform_problem)
