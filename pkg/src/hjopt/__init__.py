"""hjopt: grid-based Hamilton-Jacobi toolkit for global optimization.

Computes the critical value and critical solution of the ergodic equation
``min f + |Dv|^2/2 = f`` by three independent routes (small discount,
long-time limit, Dirichlet eikonal), drives normalized steepest-descent
trajectories on the result to the minimizers of f, and checks every
quantitative bound those constructions are supposed to satisfy.
"""

from .errors import ConfigError, ConvergenceError, EmptyTargetError
from .fields import (GridSpec, ObjectiveFunction, ScalarField, TargetMask,
                     build_target_mask, distance_to_mask, field_to_csv,
                     interpolate, interpolate_many, mask_from_points,
                     read_field, sample, write_field)
from .objectives import CORPUS, get_objective, list_objectives
from .solvers import (CriticalSolution, CriticalValueEstimate,
                      DiscountedSolveConfig, EikonalSolveConfig,
                      EvolutiveSolveConfig, build_ell, critical_solution,
                      estimate_critical_value, gradient_cap,
                      solve_discounted, solve_eikonal_dirichlet,
                      solve_evolutive)
from .descent import (DescentConfig, OccupationalStats, Trajectory,
                      batch_summary, descend_batch, hitting_time,
                      integrate_descent, occupational_fraction,
                      seeded_starts)
from .checks import (CheckReport, check_assumption_H, check_gradient_bound,
                     check_hitting_time_radial, check_lojasiewicz_hitting,
                     check_rho_bound, check_rho_lower_bound_excursion,
                     check_semiconcavity, check_v_upper_bound,
                     check_value_bounds)
from .oracles import (GraphOracleConfig, brute_force_min, dijkstra_value,
                      exact_v_radial, read_fixture, write_fixture)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
