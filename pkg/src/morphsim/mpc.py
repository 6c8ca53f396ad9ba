"""Inertial-morphing model predictive controller.

States are (omega, q, I) and controls are per-step principal-inertia
increments. The finite-horizon program minimizes angular-velocity tracking,
orientation tracking via the real part of the quaternion error, control
effort, and a terminal term, subject to a hard box on each increment and
saturation of the predicted inertia. It is solved by quasi-Newton single
shooting (L-BFGS-B over the box) with analytic adjoint gradients from the
kernel backend, warm-started between receding-horizon solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from morphsim import _kernels
from morphsim._kernels import py_backend as _ref
from morphsim.model import InfeasibleInertia


class SolverFailure(RuntimeError):
    """The optimizer returned an unusable (non-finite) solution."""


def _as3(v, name):
    a = np.asarray(v, dtype=float)
    if a.shape == ():
        a = np.full(3, float(a))
    if a.shape != (3,):
        raise ValueError(f"{name} must be a scalar or length-3 vector")
    return a


def predict_step(omega, q, inertia, d_inertia, dt, coupling_sign=1.0,
                 i_max=None, i_min=None):
    """One step of the prediction model.

    Inertia update first (with optional saturation), then the explicit
    momentum update I1*w1 = I0*w0 + dt * s * (w0 x I0*w0), then normalized
    quaternion integration driven by the pre-update rate. Raises
    InfeasibleInertia when an unsaturated component would become
    non-positive.
    """
    omega = np.asarray(omega, dtype=float)
    q = np.asarray(q, dtype=float)
    inertia = np.asarray(inertia, dtype=float)
    inew = inertia + np.asarray(d_inertia, dtype=float)
    if i_max is not None:
        inew = np.minimum(inew, _as3(i_max, "i_max"))
    if i_min is not None:
        inew = np.maximum(inew, _as3(i_min, "i_min"))
    if np.any(inew <= 0.0):
        raise InfeasibleInertia(f"predicted inertia {inew} has a non-positive component")
    mom = inertia * omega
    mom_next = mom + dt * coupling_sign * np.cross(omega, mom)
    omega_next = mom_next / inew
    qt = q + 0.5 * dt * _ref.quat_mul(q, np.array([0.0, *omega]))
    return omega_next, qt / np.linalg.norm(qt), inew


def quat_error_real(q_ref, q) -> float:
    """Real part of q_ref^* (x) q after canonicalizing the sign, i.e.
    |<q_ref, q>|; equals 1 when the orientations coincide."""
    return abs(float(np.asarray(q_ref, dtype=float) @ np.asarray(q, dtype=float)))


def stage_cost(omega, q, d_inertia, omega_ref, q_ref,
               omega_weight, quat_weight, control_weight) -> float:
    """Quadratic rate tracking + sign-canonicalized quaternion tracking +
    control effort for one stage."""
    dw = np.asarray(omega, dtype=float) - np.asarray(omega_ref, dtype=float)
    u = np.asarray(d_inertia, dtype=float)
    c = float(dw @ (_as3(omega_weight, "omega_weight") * dw))
    c += float(u @ (_as3(control_weight, "control_weight") * u))
    if q_ref is not None:
        c += quat_weight * (1.0 - quat_error_real(q_ref, q))
    return c


def terminal_cost(omega, q, omega_ref, q_ref,
                  omega_terminal_weight, quat_terminal_weight) -> float:
    """Tracking error at the horizon end."""
    dw = np.asarray(omega, dtype=float) - np.asarray(omega_ref, dtype=float)
    c = float(dw @ (_as3(omega_terminal_weight, "omega_terminal_weight") * dw))
    if q_ref is not None:
        c += quat_terminal_weight * (1.0 - quat_error_real(q_ref, q))
    return c


def reference_quaternion_trajectory(q0, omega_ref, n_steps, dt) -> np.ndarray:
    """Forward-integrate the quaternion update under a reference rate
    (constant (3,) or per-step (n_steps, 3)); returns (n_steps + 1, 4)."""
    q0 = np.asarray(q0, dtype=float)
    w = np.asarray(omega_ref, dtype=float)
    if w.ndim == 1:
        w = np.broadcast_to(w, (n_steps, 3))
    out = np.empty((n_steps + 1, 4))
    out[0] = q0 / np.linalg.norm(q0)
    for k in range(n_steps):
        qt = out[k] + 0.5 * dt * _ref.quat_mul(out[k], np.array([0.0, *w[k]]))
        out[k + 1] = qt / np.linalg.norm(qt)
    return out


@dataclass
class MpcProblem:
    """One finite-horizon solve: initial (omega, q, I), references over the
    horizon, weights, bounds, and solver settings."""

    omega0: np.ndarray
    q0: np.ndarray
    inertia0: np.ndarray
    omega_ref: np.ndarray            # (3,) constant or (horizon+1, 3)
    horizon: int
    dt: float
    di_max: np.ndarray               # per-axis |dI| bound per step
    i_max: np.ndarray                # per-axis inertia ceiling
    i_min: np.ndarray | None = None  # per-axis inertia floor; tiny if None
    q_ref: np.ndarray | None = None  # (horizon+1, 4) when orientation tracked
    omega_weight: np.ndarray = field(default_factory=lambda: np.full(3, 100.0))
    omega_terminal_weight: np.ndarray = field(default_factory=lambda: np.array([100.0, 10.0, 100.0]))
    control_weight: np.ndarray = field(default_factory=lambda: np.array([0.01, 1.0, 1.0]))
    quat_weight: float = 0.0
    quat_terminal_weight: float = 0.0
    coupling_sign: float = 1.0
    tol: float = 1e-8
    max_iter: int = 200
    warm_start: np.ndarray | None = None

    I_FLOOR = 1e-9

    def __post_init__(self) -> None:
        self.omega0 = _as3(self.omega0, "omega0")
        self.q0 = np.asarray(self.q0, dtype=float)
        self.inertia0 = _as3(self.inertia0, "inertia0")
        self.di_max = _as3(self.di_max, "di_max")
        self.i_max = _as3(self.i_max, "i_max")
        self.i_min = np.full(3, self.I_FLOOR) if self.i_min is None else _as3(self.i_min, "i_min")
        self.omega_weight = _as3(self.omega_weight, "omega_weight")
        self.omega_terminal_weight = _as3(self.omega_terminal_weight, "omega_terminal_weight")
        self.control_weight = _as3(self.control_weight, "control_weight")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if np.any(self.di_max <= 0) or np.any(self.i_max <= 0):
            raise ValueError("di_max and i_max must be positive")
        if np.any(self.i_min <= 0) or np.any(self.i_min > self.i_max):
            raise ValueError("require 0 < i_min <= i_max")
        for w, name in ((self.omega_weight, "omega_weight"),
                        (self.omega_terminal_weight, "omega_terminal_weight"),
                        (self.control_weight, "control_weight")):
            if np.any(w < 0):
                raise ValueError(f"{name} must be non-negative")
        if self.quat_weight < 0 or self.quat_terminal_weight < 0:
            raise ValueError("quaternion weights must be non-negative")

    def omega_ref_array(self) -> np.ndarray:
        w = np.asarray(self.omega_ref, dtype=float)
        if w.ndim == 1:
            return np.broadcast_to(w, (self.horizon + 1, 3)).copy()
        if w.shape != (self.horizon + 1, 3):
            raise ValueError("omega_ref must be (3,) or (horizon+1, 3)")
        return w

    def q_ref_array(self) -> np.ndarray:
        if self.q_ref is None:
            # placeholder; multiplied by zero weights in the cost
            out = np.zeros((self.horizon + 1, 4))
            out[:, 0] = 1.0
            return out
        q = np.asarray(self.q_ref, dtype=float)
        if q.shape != (self.horizon + 1, 4):
            raise ValueError("q_ref must be (horizon+1, 4)")
        return q


@dataclass
class MpcSolution:
    """Control plan plus the predicted trajectory and solver diagnostics."""

    d_inertia: np.ndarray    # (horizon, 3)
    omegas: np.ndarray       # (horizon+1, 3)
    quats: np.ndarray        # (horizon+1, 4)
    inertias: np.ndarray     # (horizon+1, 3)
    cost: float
    status: str              # converged | max_iters | infeasible
    iterations: int
    residual: float          # max-norm of the projected gradient
    cost_trace: list[float]


def objective(problem: MpcProblem, u: np.ndarray, want_grad: bool = True):
    """Shooting cost (and gradient) of a control sequence for this problem;
    the same function the solver minimizes."""
    u = np.asarray(u, dtype=float).reshape(problem.horizon, 3)
    return _kernels.rollout_cost_grad(
        problem.omega0, problem.q0, problem.inertia0, u,
        problem.omega_ref_array(), problem.q_ref_array(),
        problem.omega_weight, problem.quat_weight, problem.control_weight,
        problem.omega_terminal_weight, problem.quat_terminal_weight,
        problem.dt, problem.coupling_sign, problem.i_min, problem.i_max,
        want_grad)


def solve(problem: MpcProblem) -> MpcSolution:
    """Locally optimal increment sequence under the hard per-step box, with
    predicted inertia saturated into [i_min, i_max]."""
    if np.any(problem.inertia0 <= 0) or np.any(problem.inertia0 > problem.i_max):
        raise InfeasibleInertia(
            f"initial inertia {problem.inertia0} outside (0, i_max]")
    n = problem.horizon
    if problem.warm_start is not None:
        u0 = np.clip(np.asarray(problem.warm_start, dtype=float).reshape(n, 3),
                     -problem.di_max, problem.di_max)
    else:
        u0 = np.zeros((n, 3))

    omega_ref = problem.omega_ref_array()
    q_ref = problem.q_ref_array()
    kernel_args = (problem.omega0, problem.q0, problem.inertia0)
    weights = (problem.omega_weight, problem.quat_weight, problem.control_weight,
               problem.omega_terminal_weight, problem.quat_terminal_weight)
    trace: list[float] = []

    def fun(x):
        c, g = _kernels.rollout_cost_grad(
            *kernel_args, x.reshape(n, 3), omega_ref, q_ref, *weights,
            problem.dt, problem.coupling_sign, problem.i_min, problem.i_max, True)
        trace.append(float(c))
        return c, g.ravel()

    bounds = [(-b, b) for b in problem.di_max] * n
    res = minimize(fun, u0.ravel(), jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": problem.max_iter, "gtol": problem.tol,
                            "ftol": 1e-16})

    u = np.clip(res.x.reshape(n, 3), -problem.di_max, problem.di_max)
    cost, grad = objective(problem, u, want_grad=True)
    lo = np.tile(-problem.di_max, n)
    hi = np.tile(problem.di_max, n)
    projected = np.clip(u.ravel() - grad.ravel(), lo, hi) - u.ravel()
    residual = float(np.max(np.abs(projected)))

    if not np.isfinite(cost):
        status = "infeasible"
    elif res.status == 0 or residual <= problem.tol:
        status = "converged"
    else:
        status = "max_iters"
    omegas, quats, inertias = _kernels.rollout_states(
        *kernel_args, u, problem.dt, problem.coupling_sign,
        problem.i_min, problem.i_max)
    return MpcSolution(u, omegas, quats, inertias, float(cost), status,
                       int(res.nit), residual, trace)


class RecedingHorizonController:
    """Re-solves the horizon problem at each control instant, warm-starting
    from the previous plan shifted by the consumed steps (zero-padded)."""

    def __init__(self, horizon, dt, di_max, i_max, i_min=None,
                 omega_weight=(100.0, 100.0, 100.0),
                 omega_terminal_weight=(100.0, 10.0, 100.0),
                 control_weight=(0.01, 1.0, 1.0),
                 quat_weight=0.0, quat_terminal_weight=0.0,
                 coupling_sign=1.0, tol=1e-8, max_iter=200, warm_start=True):
        self.horizon = int(horizon)
        self.dt = float(dt)
        self.di_max = _as3(di_max, "di_max")
        self.i_max = _as3(i_max, "i_max")
        self.i_min = None if i_min is None else _as3(i_min, "i_min")
        self.omega_weight = _as3(omega_weight, "omega_weight")
        self.omega_terminal_weight = _as3(omega_terminal_weight, "omega_terminal_weight")
        self.control_weight = _as3(control_weight, "control_weight")
        self.quat_weight = float(quat_weight)
        self.quat_terminal_weight = float(quat_terminal_weight)
        self.coupling_sign = float(coupling_sign)
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.warm_start = bool(warm_start)
        self._last_plan: np.ndarray | None = None

    def reset(self) -> None:
        self._last_plan = None

    def plan(self, omega, q, inertia, omega_ref, q_ref=None,
             shift_steps: int = 0) -> MpcSolution:
        """Solve from the measured state. shift_steps is how many prediction
        steps elapsed since the previous solve (for the warm start)."""
        u0 = None
        if self.warm_start and self._last_plan is not None:
            u0 = np.zeros((self.horizon, 3))
            keep = self._last_plan[shift_steps:]
            u0[: len(keep)] = keep
        problem = MpcProblem(
            omega0=omega, q0=q, inertia0=inertia, omega_ref=omega_ref,
            horizon=self.horizon, dt=self.dt, di_max=self.di_max,
            i_max=self.i_max, i_min=self.i_min, q_ref=q_ref,
            omega_weight=self.omega_weight,
            omega_terminal_weight=self.omega_terminal_weight,
            control_weight=self.control_weight, quat_weight=self.quat_weight,
            quat_terminal_weight=self.quat_terminal_weight,
            coupling_sign=self.coupling_sign, tol=self.tol,
            max_iter=self.max_iter, warm_start=u0)
        sol = solve(problem)
        self._last_plan = sol.d_inertia
        return sol
