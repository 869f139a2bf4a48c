"""Quantum gradient-flow solver for SPD systems, simulated on a dense statevector."""
from .approx import ChebyshevFit, TargetFunction, chebyshev_fit, eval_target, qmia_degree
from .errors import (
    BracketError, FitQualityError, GeometryError, LayoutError, ParameterError,
    SingularityError, SolverError, SpdError,
)
from .fem import (
    BcSpec, FemProblem, Material, Mesh, SpdSystem, cantilever_problem,
    pad_to_power_of_two, tensile_problem,
)
from .flow import error_bound, gradient_flow, relative_error, select_time, solve_direct
from .qcirc import QgfaOutput, block_encode, qet_apply, run_qgfa, state_prep
from .qmia import relative_error_inv, run_qmia
from .qsp import PhaseSequence, find_phases, qsp_response, response_report
from .softabs import SmoothingParams, soft_abs, solve_epsilon, solve_epsilon_pair
from .sweep import SweepConfig, SweepResult, emit_csv, run_sweep

__version__ = "0.1.0"
