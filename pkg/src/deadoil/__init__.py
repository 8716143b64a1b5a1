"""Optimal injection control for an isothermal dead-oil model.

Finite differences on a rectangle, explicit Euler in time, and exact
discrete adjoints for the control gradient.
"""

from .adjoint import (AdjointTrajectory, AggregateAdjoint, NonConvergenceError,
                      NonConvergenceWarning, aggregate_operator, gradient_wrt_control,
                      kkt_residual, linearized_step, linearized_step_T, reduced_gradient,
                      solve_adjoint_aggregate, solve_adjoint_discrete,
                      solve_adjoint_paper)
from .coefficients import (CoefficientSet, HypothesisReport, builtin_set, load_table,
                           tabulated_set, verify_hypotheses)
from .linsolve import BreakdownError, LinearOperator, SolveResult, solve_linear
from .mesh import (Grid2D, GridMismatchError, build_grid, div_coeff_grad, dot_grad,
                   inner, integrate_power, laplacian, norm, read_field, write_field)
from .objective import CostParams, cost_control_partial, evaluate_cost, mismatch
from .optimizer import OptimizationResult, OptimizerOptions, minimize
from .oracle import (ConvergenceReport, fd_directional, fd_gateaux, mms_run, mms_study,
                     refinement_studies)
from .state import (GateauxDirection, InstabilityError, StabilityWarning, StateTrajectory,
                    TimeGrid, frozen_operator, gateaux_apply, residual_F, solve_forward,
                    stability_bound, step_forward)

__version__ = "0.1.0"
