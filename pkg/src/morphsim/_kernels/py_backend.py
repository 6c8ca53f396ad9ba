"""Pure-numpy implementation of the hot kernels.

The compiled extension in _core.pyx mirrors this module function for
function; this is the readable reference and the fallback used when the
extension is unavailable. Quaternions are scalar-first (w, x, y, z) and map
body to world. The packed rigid state vector is

    y = [omega(3, body), q(4), pos(3, world), vel(3, world)]
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_to_mat(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def _contact_point_force(pe, ve, stiffness, damping, mu, ground_z):
    """Spring-damper normal force (clamped non-negative) plus viscous
    tangential force clamped to the friction cone. Returns (force, fn)."""
    if pe[2] >= ground_z:
        return np.zeros(3), 0.0
    delta = ground_z - pe[2]
    fn = stiffness * delta - damping * ve[2]
    if fn < 0.0:
        fn = 0.0
    ftx = -damping * ve[0]
    fty = -damping * ve[1]
    mag = math.hypot(ftx, fty)
    cap = mu * fn
    if mag > cap:
        scale = cap / mag if mag > 0.0 else 0.0
        ftx *= scale
        fty *= scale
    return np.array([ftx, fty, fn]), fn


def _deriv(y, inertia, mass_total, damping, gravity, end_offset_x,
           contact_on, c_stiff, c_damp, c_mu, c_ground,
           wrench_f, wrench_p, diag=None):
    w = y[0:3]
    q = y[3:7]
    pos = y[7:10]
    vel = y[10:13]
    qn = q / np.linalg.norm(q)
    rot = quat_to_mat(qn)

    force = np.zeros(3)
    torque_w = np.zeros(3)
    for i in range(wrench_f.shape[0]):
        force += wrench_f[i]
        torque_w += np.cross(wrench_p[i] - pos, wrench_f[i])

    fn_plus = fn_minus = 0.0
    if contact_on:
        w_world = rot @ w
        for sgn in (1.0, -1.0):
            r_w = rot[:, 0] * (sgn * end_offset_x)
            pe = pos + r_w
            ve = vel + np.cross(w_world, r_w)
            fc, fn = _contact_point_force(pe, ve, c_stiff, c_damp, c_mu, c_ground)
            force += fc
            torque_w += np.cross(r_w, fc)
            if sgn > 0:
                fn_plus = fn
            else:
                fn_minus = fn

    torque_b = rot.T @ torque_w
    iw = inertia * w
    w_dot = (torque_b - np.cross(w, iw)) / inertia
    q_dot = 0.5 * quat_mul(q, np.array([0.0, w[0], w[1], w[2]]))
    v_dot = (force - damping * vel) / mass_total - gravity

    if diag is not None:
        diag[0] = fn_plus
        diag[1] = fn_minus
        diag[2:5] = w_dot
        diag[5:8] = v_dot
    return np.concatenate([w_dot, q_dot, vel, v_dot])


def rk4_step(y, inertia, dt, mass_total, damping, gravity, end_offset_x,
             contact_on, c_stiff, c_damp, c_mu, c_ground,
             wrench_f, wrench_p, diag=None):
    """One RK4 step of the full 6-DoF state; quaternion renormalized at the
    end. diag, when given, receives [fn_plus, fn_minus, omega_dot, v_dot]
    evaluated at the start of the step."""
    args = (inertia, mass_total, damping, gravity, end_offset_x,
            contact_on, c_stiff, c_damp, c_mu, c_ground, wrench_f, wrench_p)
    k1 = _deriv(y, *args, diag=diag)
    k2 = _deriv(y + 0.5 * dt * k1, *args)
    k3 = _deriv(y + 0.5 * dt * k2, *args)
    k4 = _deriv(y + dt * k3, *args)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out[3:7] /= np.linalg.norm(out[3:7])
    return out


def integrate_free(y0, inertia, dt, n_steps, mass_total, damping, gravity,
                   record_every=1):
    """Integrate with no contact and no wrenches, sampling every
    record_every steps (row 0 is the initial state)."""
    empty = np.zeros((0, 3))
    n_rec = n_steps // record_every + 1
    out = np.empty((n_rec, 13))
    out[0] = y0
    y = np.array(y0, dtype=float)
    row = 1
    for i in range(1, n_steps + 1):
        y = rk4_step(y, inertia, dt, mass_total, damping, gravity, 0.0,
                     0, 0.0, 0.0, 0.0, 0.0, empty, empty)
        if i % record_every == 0:
            out[row] = y
            row += 1
    return out[:row]


def _quat_omega_adj_q(g, w):
    """Adjoint of P(q, w) = q (x) (0, w) with respect to q, applied to g."""
    gw, gx, gy, gz = g
    wx, wy, wz = w
    return np.array([
        gx * wx + gy * wy + gz * wz,
        -gw * wx - gy * wz + gz * wy,
        -gw * wy + gx * wz - gz * wx,
        -gw * wz - gx * wy + gy * wx,
    ])


def _quat_omega_adj_w(g, q):
    """Adjoint of P(q, w) = q (x) (0, w) with respect to w, applied to g."""
    gw, gx, gy, gz = g
    qw, qx, qy, qz = q
    return np.array([
        -gw * qx + gx * qw + gy * qz - gz * qy,
        -gw * qy - gx * qz + gy * qw + gz * qx,
        -gw * qz + gx * qy - gy * qx + gz * qw,
    ])


def rollout_states(omega0, q0, inertia0, u, dt, coupling_sign, i_lo, i_hi):
    """Forward shooting rollout of the prediction model.

    Per step: inertia update with saturation into [i_lo, i_hi], explicit
    momentum update with the gyroscopic term scaled by coupling_sign, then
    normalized quaternion integration using the pre-update rate.
    """
    n = u.shape[0]
    ws = np.empty((n + 1, 3))
    qs = np.empty((n + 1, 4))
    inertias = np.empty((n + 1, 3))
    ws[0] = omega0
    qs[0] = q0
    inertias[0] = inertia0
    for k in range(n):
        w = ws[k]
        q = qs[k]
        inert = inertias[k]
        mom = inert * w
        mom_next = mom + dt * coupling_sign * np.cross(w, mom)
        inew = np.clip(inert + u[k], i_lo, i_hi)
        ws[k + 1] = mom_next / inew
        qt = q + 0.5 * dt * quat_mul(q, np.array([0.0, w[0], w[1], w[2]]))
        qs[k + 1] = qt / np.linalg.norm(qt)
        inertias[k + 1] = inew
    return ws, qs, inertias


def rollout_cost_grad(omega0, q0, inertia0, u, omega_ref, q_ref,
                      w_omega, w_q, w_u, w_omega_t, w_q_t,
                      dt, coupling_sign, i_lo, i_hi, want_grad=True):
    """Total shooting cost and, optionally, its gradient w.r.t. the flat
    control sequence, via a reverse (adjoint) sweep of the rollout.

    Quaternion tracking uses 1 - |<q_ref, q>| so the antipodal quaternion is
    not penalized. Saturated inertia components pass zero gradient.
    """
    n = u.shape[0]
    ws = np.empty((n + 1, 3))
    qs = np.empty((n + 1, 4))
    inertias = np.empty((n + 1, 3))
    moms = np.empty((n, 3))
    moms_next = np.empty((n, 3))
    qnorms = np.empty(n)
    masks = np.empty((n, 3))
    ws[0] = omega0
    qs[0] = q0
    inertias[0] = inertia0

    cost = 0.0
    for k in range(n):
        w = ws[k]
        q = qs[k]
        inert = inertias[k]
        dw = w - omega_ref[k]
        dq = float(q_ref[k] @ q)
        cost += dw @ (w_omega * dw) + w_q * (1.0 - abs(dq)) + u[k] @ (w_u * u[k])

        mom = inert * w
        mom_n = mom + dt * coupling_sign * np.cross(w, mom)
        iraw = inert + u[k]
        inew = np.clip(iraw, i_lo, i_hi)
        ws[k + 1] = mom_n / inew
        qt = q + 0.5 * dt * quat_mul(q, np.array([0.0, w[0], w[1], w[2]]))
        nrm = np.linalg.norm(qt)
        qs[k + 1] = qt / nrm
        inertias[k + 1] = inew
        moms[k] = mom
        moms_next[k] = mom_n
        qnorms[k] = nrm
        masks[k] = (iraw > i_lo) & (iraw < i_hi)

    dw_t = ws[n] - omega_ref[n]
    dq_t = float(q_ref[n] @ qs[n])
    cost += dw_t @ (w_omega_t * dw_t) + w_q_t * (1.0 - abs(dq_t))
    if not want_grad:
        return cost, None

    grad = np.zeros((n, 3))
    g_w = 2.0 * w_omega_t * dw_t
    g_q = -w_q_t * np.sign(dq_t) * q_ref[n]
    g_i = np.zeros(3)
    for k in range(n - 1, -1, -1):
        w = ws[k]
        q = qs[k]
        inew = inertias[k + 1]
        # q_{k+1} = qt / |qt|
        qp = qs[k + 1]
        g_qt = (g_q - (g_q @ qp) * qp) / qnorms[k]
        # qt = q + dt/2 * q (x) (0, w)
        g_q_new = g_qt + 0.5 * dt * _quat_omega_adj_q(g_qt, w)
        g_w_new = 0.5 * dt * _quat_omega_adj_w(g_qt, q)
        # omega_{k+1} = mom_next / inew
        g_mn = g_w / inew
        g_inew = g_i - g_w * moms_next[k] / (inew * inew)
        # inew = clip(inert + u_k)
        g_iraw = g_inew * masks[k]
        grad[k] += g_iraw
        g_i_new = g_iraw.copy()
        # mom_next = mom + dt*s*(w x mom)
        g_mom = g_mn.copy()
        g_tau = dt * g_mn
        g_w_new += coupling_sign * np.cross(moms[k], g_tau)
        g_mom += coupling_sign * np.cross(g_tau, w)
        # mom = inert * w
        g_i_new += g_mom * w
        g_w_new += g_mom * inertias[k]
        # stage cost terms at k
        g_w_new += 2.0 * w_omega * (w - omega_ref[k])
        g_q_new += -w_q * np.sign(float(q_ref[k] @ q)) * q_ref[k]
        grad[k] += 2.0 * w_u * u[k]
        g_w, g_q, g_i = g_w_new, g_q_new, g_i_new
    return cost, grad
