"""6-DoF rigid-body propagation under time-varying principal inertia.

The integrator is RK4 on body-frame Euler rotation plus world-frame
translation, with a spring-damper ground contact acting at the two tether
end masses. Inertia changes are not part of the ODE: they are applied
between steps as discrete momentum-preserving updates (apply_morph), which
is what keeps angular momentum exact across morphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from morphsim import _kernels
from morphsim._kernels import py_backend as _ref
from morphsim.model import InfeasibleInertia, PrincipalInertia


class NonFiniteState(RuntimeError):
    """Integration produced NaN or infinity (typically blown-up contact)."""


@dataclass
class ContactParams:
    """Flat ground plane: spring-damper normal force plus a viscous
    tangential force clamped to the Coulomb friction cone."""

    stiffness: float = 5000.0
    damping: float = 100.0
    mu: float = 0.8
    ground_z: float = 0.0

    def __post_init__(self) -> None:
        if self.stiffness <= 0 or self.damping < 0 or self.mu < 0:
            raise ValueError("require stiffness > 0, damping >= 0, mu >= 0")


@dataclass
class ExternalWrench:
    """World-frame force applied at a world point, held fixed over a step."""

    force: np.ndarray
    application_point: np.ndarray

    def __post_init__(self) -> None:
        self.force = np.asarray(self.force, dtype=float)
        self.application_point = np.asarray(self.application_point, dtype=float)
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.application_point))):
            raise ValueError("wrench entries must be finite")


@dataclass
class SimParams:
    """Everything the stepper needs besides the state: total mass, linear
    velocity damping, gravity vector (as subtracted in the momentum balance,
    so (0, 0, 1.62) pulls toward -z), optional ground contact, and the
    current tether half-length locating the two contact points."""

    mass_total: float
    damping: float = 0.0
    gravity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    contact: ContactParams | None = None
    end_offset_x: float = 0.0

    def __post_init__(self) -> None:
        self.gravity = np.asarray(self.gravity, dtype=float)
        if self.mass_total <= 0:
            raise ValueError("mass_total must be positive")


@dataclass
class RigidState:
    """Body angular velocity, body-to-world unit quaternion (w, x, y, z),
    world COM position/velocity, and the current principal inertia."""

    omega: np.ndarray
    q: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    inertia: PrincipalInertia

    def __post_init__(self) -> None:
        self.omega = np.asarray(self.omega, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.pos = np.asarray(self.pos, dtype=float)
        self.vel = np.asarray(self.vel, dtype=float)
        n = np.linalg.norm(self.q)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"quaternion norm {n} deviates from 1 beyond 1e-9")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.omega, self.q, self.pos, self.vel])

    @classmethod
    def from_vector(cls, y: np.ndarray, inertia: PrincipalInertia) -> "RigidState":
        return cls(y[0:3].copy(), y[3:7].copy(), y[7:10].copy(), y[10:13].copy(), inertia)

    def rotation(self) -> np.ndarray:
        return _ref.quat_to_mat(self.q / np.linalg.norm(self.q))

    def angular_momentum_world(self) -> np.ndarray:
        return self.rotation() @ (self.inertia.as_array() * self.omega)

    def rotational_energy(self) -> float:
        return 0.5 * float(self.omega @ (self.inertia.as_array() * self.omega))

    def end_mass_positions(self, end_offset_x: float) -> np.ndarray:
        """World positions of the +x and -x end masses, rows [plus, minus]."""
        axis = self.rotation()[:, 0] * end_offset_x
        return np.array([self.pos + axis, self.pos - axis])

    def copy(self) -> "RigidState":
        return RigidState(self.omega.copy(), self.q.copy(), self.pos.copy(),
                          self.vel.copy(), self.inertia)


def rotational_derivative(state: RigidState, torque_body: np.ndarray) -> np.ndarray:
    """Body-frame angular acceleration from the Euler equations with
    diagonal inertia."""
    inert = state.inertia.as_array()
    return (np.asarray(torque_body, dtype=float) - np.cross(state.omega, inert * state.omega)) / inert


def translational_derivative(state: RigidState, total_force: np.ndarray,
                             mass_total: float, damping: float,
                             gravity: np.ndarray) -> np.ndarray:
    """COM acceleration from applied force, linear velocity damping, and
    gravity subtracted as written in the momentum balance."""
    if mass_total <= 0:
        raise ValueError("mass_total must be positive")
    return (np.asarray(total_force, dtype=float) - damping * state.vel) / mass_total \
        - np.asarray(gravity, dtype=float)


def quaternion_derivative(q: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Kinematic quaternion rate 0.5 * q (x) (0, omega)."""
    w = np.asarray(omega, dtype=float)
    return 0.5 * _ref.quat_mul(np.asarray(q, dtype=float),
                                        np.array([0.0, w[0], w[1], w[2]]))


def contact_force(point_z: float, point_vz: float, tangential_v: np.ndarray,
                  params: ContactParams) -> np.ndarray:
    """World contact force on a point: zero above ground, else clamped
    spring-damper normal plus viscous tangential force inside the cone."""
    vt = np.asarray(tangential_v, dtype=float)
    pe = np.array([0.0, 0.0, point_z])
    ve = np.array([vt[0], vt[1], point_vz])
    force, _ = _ref._contact_point_force(
        pe, ve, params.stiffness, params.damping, params.mu, params.ground_z)
    return force


def contact_normal_forces(state: RigidState, params: ContactParams,
                          end_offset_x: float) -> np.ndarray:
    """Normal force magnitudes at the [+x, -x] end masses for the current
    state (no stepping)."""
    rot = state.rotation()
    w_world = rot @ state.omega
    out = np.zeros(2)
    for i, sgn in enumerate((1.0, -1.0)):
        r_w = rot[:, 0] * (sgn * end_offset_x)
        pe = state.pos + r_w
        ve = state.vel + np.cross(w_world, r_w)
        f = contact_force(pe[2], ve[2], ve[:2], params)
        out[i] = f[2]
    return out


def derivative(state: RigidState, wrenches: list[ExternalWrench],
               params: SimParams) -> np.ndarray:
    """Full state derivative assembled from the public pieces; the RK4
    kernel computes the same quantity internally."""
    rot = state.rotation()
    force = np.zeros(3)
    torque_w = np.zeros(3)
    for wr in wrenches:
        force += wr.force
        torque_w += np.cross(wr.application_point - state.pos, wr.force)
    if params.contact is not None:
        w_world = rot @ state.omega
        for sgn in (1.0, -1.0):
            r_w = rot[:, 0] * (sgn * params.end_offset_x)
            pe = state.pos + r_w
            ve = state.vel + np.cross(w_world, r_w)
            fc = contact_force(pe[2], ve[2], ve[:2], params.contact)
            force += fc
            torque_w += np.cross(r_w, fc)
    w_dot = rotational_derivative(state, rot.T @ torque_w)
    q_dot = quaternion_derivative(state.q, state.omega)
    v_dot = translational_derivative(state, force, params.mass_total,
                                     params.damping, params.gravity)
    return np.concatenate([w_dot, q_dot, state.vel, v_dot])


def _pack_wrenches(wrenches) -> tuple[np.ndarray, np.ndarray]:
    if not wrenches:
        z = np.zeros((0, 3))
        return z, z
    f = np.array([w.force for w in wrenches], dtype=float)
    p = np.array([w.application_point for w in wrenches], dtype=float)
    return f, p


def rk4_step(state: RigidState, wrenches: list[ExternalWrench],
             params: SimParams, dt: float,
             diag: np.ndarray | None = None) -> RigidState:
    """Advance one step of size dt; inertia is held fixed (morphing happens
    between steps). diag, when given a (8,) array, receives the start-of-step
    [fn_plus, fn_minus, omega_dot(3), v_dot(3)] telemetry."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    wf, wp = _pack_wrenches(wrenches)
    contact = params.contact
    on = contact is not None
    y = _kernels.rk4_step(
        state.as_vector(), state.inertia.as_array(), dt,
        params.mass_total, params.damping, params.gravity, params.end_offset_x,
        1 if on else 0,
        contact.stiffness if on else 0.0,
        contact.damping if on else 0.0,
        contact.mu if on else 0.0,
        contact.ground_z if on else 0.0,
        wf, wp, diag)
    if not np.all(np.isfinite(y)):
        raise NonFiniteState("state became non-finite during integration")
    return RigidState.from_vector(y, state.inertia)


def apply_morph(state: RigidState, new_inertia: PrincipalInertia) -> RigidState:
    """Swap the principal inertia, rescaling omega so body-frame angular
    momentum (hence also world-frame, orientation unchanged) is preserved."""
    old = state.inertia.as_array()
    new = new_inertia.as_array()  # PrincipalInertia validated on construction
    omega = old * state.omega / new
    return RigidState(omega, state.q.copy(), state.pos.copy(), state.vel.copy(),
                      new_inertia)


def integrate_free(state: RigidState, params: SimParams, dt: float,
                   n_steps: int, record_every: int = 1) -> np.ndarray:
    """Fast contact-free, wrench-free integration; returns sampled packed
    state rows with row 0 the initial state."""
    out = _kernels.integrate_free(state.as_vector(), state.inertia.as_array(),
                                  dt, n_steps, params.mass_total, params.damping,
                                  params.gravity, record_every)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState("state became non-finite during integration")
    return out
