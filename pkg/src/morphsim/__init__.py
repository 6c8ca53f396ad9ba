"""Variable-inertia dumbbell simulator and inertial-morphing MPC."""

from morphsim._kernels import BACKEND_NAME as kernel_backend
from morphsim.model import (
    DumbbellConfig,
    InfeasibleInertia,
    PrincipalInertia,
    inertia_bounds,
    is_taut,
    principal_inertia,
    radii_from_inertia,
    tether_tension,
)
from morphsim.dynamics import (
    ContactParams,
    ExternalWrench,
    NonFiniteState,
    RigidState,
    SimParams,
    apply_morph,
    contact_force,
    quaternion_derivative,
    rk4_step,
    rotational_derivative,
    translational_derivative,
)
from morphsim.mpc import (
    MpcProblem,
    MpcSolution,
    RecedingHorizonController,
    SolverFailure,
    predict_step,
    reference_quaternion_trajectory,
    solve,
    stage_cost,
    terminal_cost,
)

__version__ = "0.1.0"
