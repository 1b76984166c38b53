"""Wall laws for the Poisson problem over a periodically rough boundary."""
from ._core import BACKEND
from .cell import CellSolution, Spectrum, oscillation_l2, solve_beta, solve_cell, solve_tau
from .corrector import DecayParameters, decay_report, solve_xi, solve_xi_pair
from .errors import *  # noqa: F401,F403
from .fem import ScalarField, apply_bc, assemble, interpolate, norm_on_region, solve
from .geometry import (DomainSpec, Mesh, RoughProfile, build_cell_mesh, build_quarter_mesh,
                       build_rectangle_mesh, build_rough_mesh, check_mesh)
from .harness import (Config, ConvergenceReport, Resolution, error_table, fit_rate,
                      load_config, run_flat_suite, solve_exact)
from .linalg import SparseMatrix, cg_solve
from .walllaw import ApproxField, WallLawParams, full_bl, u0, u1, u1_extended, u2

__version__ = "0.1.0"
