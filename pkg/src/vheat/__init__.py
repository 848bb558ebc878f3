"""Solvers and diagnostics for the degenerate variational heat equation.

The library discretizes the transformed director-relaxation equation
w_t = B(w) w_xx (and its divergence-form v-companion) with a theta-weighted
finite difference scheme on a periodic grid, and ships the machinery to
verify its structural guarantees: total-variation and maximum-principle
monitors, an extended Harten-lemma oracle, weak-form residuals, and grid
refinement tables.
"""

from .coefficients import (B_of_w, CoefficientModel, InversionConfig,
                           OseenFrankModel, c2_of_v, c_of_u, ellip_E, ellip_F,
                           jacobi_am, k_v, k_w, kv_inverse, kw_inverse)
from .diagnostics import (BoundReport, ConvergenceTable, HartenCoefficients,
                          SpaceTimeTestFunction, error_table, harten_check,
                          harten_property_test, harten_solve, monitor_bounds,
                          smooth_bump, time_modulus_w, weak_residual)
from .errors import (CFLViolation, CoefficientBlowup, DegenerateNodeError,
                     NewtonDivergence, NonfiniteState, SolverError)
from .experiments import ExperimentSpec, cells_for, converge, k1_sweep, make_model
from .grid import (DiscreteNorms, GridFunction, PeriodicGrid, backward_diff,
                   cross_grid_error, discrete_norms, eval_interpolant,
                   forward_diff, second_diff, theta_combination)
from .scheme_v import VState, run_v, u_from_v, u_from_w, v_initial, v_step
from .scheme_w import (SolverState, StepReport, ThetaSchemeConfig, Trajectory,
                       cfl_check, derivative_sequences, project_initial, run,
                       step)

__version__ = "0.1.0"
