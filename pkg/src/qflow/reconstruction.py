"""Eulerian fields and the wavefunction rebuilt from trajectory snapshots.

The map a -> q(a, t) is inverted on the spatial grid (monotone cubic
interpolation, well-posed because J > 0), densities push forward by
rho = rho0 / J, velocities by composition, and the phase rides along the
trajectories as S = S0 + chi.  A second, spatial-quadrature route to the
phase is kept as a consistency check only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import PhaseInconsistencyWarning, TrajectoryCrossing, ValidationError
from .model import (EulerianField, InitialState, PhysicsParams,
                    TrajectoryState, assemble_wavefunction)
from .stencils import derivative, grid_spacing, trapezoid_weights

# residual diagnostics are quoted over the interior where the density
# clears this fraction of its peak; farther out the reconstructed
# log-density carries interpolation noise that derivative stencils amplify
RHO_INTERIOR_REL = 1e-6
DUAL_PHASE_TOL = 1e-3


def _pchip_linear_edges(xs, ys):
    """Shape-preserving interpolant with a linear fallback in the first and
    last intervals (the monotone cubic's one-sided slopes are least
    trustworthy there)."""
    p = PchipInterpolator(xs, ys, extrapolate=False)

    def f(x):
        x = np.asarray(x, dtype=float)
        out = p(x)
        lo = x <= xs[1]
        hi = x >= xs[-2]
        if np.any(lo):
            s = (ys[1] - ys[0]) / (xs[1] - xs[0])
            out[lo] = ys[0] + s * (x[lo] - xs[0])
        if np.any(hi):
            s = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out[hi] = ys[-2] + s * (x[hi] - xs[-2])
        return out

    return f


def invert_map(traj: TrajectoryState, x_grid):
    """Labels a(x) of the trajectories passing through the grid points.

    Points outside [q_first, q_last] are masked, never extrapolated.
    Returns (a_of_x, mask).
    """
    x = np.asarray(x_grid, dtype=float)
    q = traj.q
    if np.any(np.diff(q) <= 0):
        raise TrajectoryCrossing(int(np.argmin(np.diff(q))), traj.t)
    mask = (x >= q[0]) & (x <= q[-1])
    a_of_x = np.full(x.shape, np.nan)
    if np.any(mask):
        a_of_x[mask] = _pchip_linear_edges(q, traj.labels)(x[mask])
    return a_of_x, mask


def _interp_on_labels(traj, values, a_query):
    return _pchip_linear_edges(traj.labels, values)(a_query)


def eulerian_density(traj: TrajectoryState, init: InitialState, x_grid,
                     stencil_order: int = 4):
    """rho(x) = [rho0 / J] at a(x); masked outside the trajectory image."""
    x = np.asarray(x_grid, dtype=float)
    a_of_x, mask = invert_map(traj, x)
    rho = np.full(x.shape, np.nan)
    if not np.any(mask):
        return rho, mask
    h = grid_spacing(traj.labels)
    J = derivative(traj.q, h, 1, stencil_order)
    aq = a_of_x[mask]
    J_at = _interp_on_labels(traj, J, aq)
    if init.forms is not None and init.forms.rho0 is not None:
        rho0_at = np.asarray(init.forms.rho0(aq), dtype=float)
    else:
        rho0_at = _interp_on_labels(traj, init.rho0, aq)
    rho[mask] = np.maximum(rho0_at / J_at, 0.0)
    return rho, mask


def eulerian_velocity(traj: TrajectoryState, x_grid):
    """v(x) = qdot at a(x), by the same interpolation as the inverse map."""
    x = np.asarray(x_grid, dtype=float)
    a_of_x, mask = invert_map(traj, x)
    v = np.full(x.shape, np.nan)
    if np.any(mask):
        v[mask] = _interp_on_labels(traj, traj.qdot, a_of_x[mask])
    return v, mask


def _phase_on_grid(traj, init, a_query):
    s_label = init.s0 + traj.chi
    return _interp_on_labels(traj, s_label, a_query)


def _vq_window(traj, init, params, x_center, half=4, stencil_order=4):
    """Quantum potential at a single spatial point from a local window."""
    h_lbl = grid_spacing(traj.labels)
    dx = h_lbl  # local window spacing; any smooth small spacing works
    xs = x_center + dx * np.arange(-half, half + 1)
    a_of_x, mask = invert_map(traj, xs)
    if not np.all(mask):
        raise ValidationError("phase-anchor window left the trajectory support")
    J = derivative(traj.q, h_lbl, 1, stencil_order)
    J_at = _interp_on_labels(traj, J, a_of_x)
    if init.forms is not None and init.forms.rho0 is not None:
        rho0_at = np.asarray(init.forms.rho0(a_of_x), dtype=float)
    else:
        rho0_at = _interp_on_labels(traj, init.rho0, a_of_x)
    c = np.log(rho0_at) - np.log(J_at)
    c1 = derivative(c, dx, 1, stencil_order)[half]
    c2 = derivative(c, dx, 2, stencil_order)[half]
    return -(params.hbar**2 / (4.0 * params.mass)) * (c2 + 0.5 * c1**2)


def phase_consistency_deviation(history: Sequence[TrajectoryState],
                                init: InitialState, params: PhysicsParams,
                                x_grid, stencil_order: int = 4) -> float:
    """Largest deviation (after removing one constant) between the
    trajectory-carried phase and the spatial quadrature of m*v anchored at
    the packet center, with the center's time dependence integrated from
    -(m v^2 / 2 + V + V_Q).
    """
    if len(history) < 2:
        raise ValidationError("need at least two snapshots for the dual-phase check")
    x = np.asarray(x_grid, dtype=float)
    final = history[-1]
    mid = init.n // 2
    x_c = float(history[0].q[mid])

    # f(t): integrate dS/dt at the fixed spatial anchor over the history
    times = np.array([s.t for s in history])
    dsdt = np.empty(times.size)
    for i, snap in enumerate(history):
        a_c, m_c = invert_map(snap, np.array([x_c]))
        if not m_c[0]:
            raise ValidationError("phase anchor left the trajectory support")
        v_c = float(_interp_on_labels(snap, snap.qdot, a_c[:1])[0])
        vq_c = _vq_window(snap, init, params, x_c, stencil_order=stencil_order)
        V_c = float(params.potential_energy(np.array([x_c]))[0])
        dsdt[i] = -(0.5 * params.mass * v_c**2 + V_c + vq_c)
    a0_c, _ = invert_map(history[0], np.array([x_c]))
    s0_c = float(np.interp(a0_c[0], init.labels, init.s0))
    s_center = s0_c + np.trapezoid(dsdt, times)

    v, mask = eulerian_velocity(final, x)
    a_of_x, _ = invert_map(final, x)
    s_path = np.full(x.shape, np.nan)
    s_path[mask] = _phase_on_grid(final, init, a_of_x[mask])

    xm = x[mask]
    vm = v[mask]
    ic = int(np.argmin(np.abs(xm - x_c)))
    integral = cumulative_trapezoid(params.mass * vm, xm, initial=0.0)
    s_quad = integral - integral[ic] + s_center

    diff = s_path[mask] - s_quad
    return float(np.max(np.abs(diff - np.mean(diff))))


def reconstruct_wavefunction(history: Sequence[TrajectoryState],
                             init: InitialState, params: PhysicsParams,
                             x_grid, stencil_order: int = 4,
                             dual_check: bool = True) -> EulerianField:
    """Assemble the full Eulerian field (rho, S, v, psi) at the last snapshot.

    The phase is carried along trajectories (S = S0 + chi composed with
    the inverse map); when the history holds at least two snapshots the
    independent spatial-quadrature route is evaluated and a deviation
    beyond tolerance raises a :class:`PhaseInconsistencyWarning` (the
    reconstruction itself is returned regardless).
    """
    if len(history) == 0:
        raise ValidationError("empty trajectory history")
    x = np.asarray(x_grid, dtype=float)
    final = history[-1]
    rho, mask = eulerian_density(final, init, x, stencil_order)
    v, _ = eulerian_velocity(final, x)
    a_of_x, _ = invert_map(final, x)
    S = np.full(x.shape, np.nan)
    S[mask] = _phase_on_grid(final, init, a_of_x[mask])
    psi = np.zeros(x.shape, dtype=complex)
    psi[mask] = assemble_wavefunction(rho[mask], S[mask], params.hbar)
    if dual_check and len(history) >= 2:
        dev = phase_consistency_deviation(history, init, params, x, stencil_order)
        if dev > DUAL_PHASE_TOL:
            warnings.warn(
                f"dual-route phase deviation {dev:.2e} exceeds {DUAL_PHASE_TOL:.0e}",
                PhaseInconsistencyWarning, stacklevel=2)
    rho_f = np.where(mask, rho, 0.0)
    S_f = np.where(mask, S, 0.0)
    v_f = np.where(mask, v, 0.0)
    return EulerianField(x=x, t=final.t, rho=rho_f, S=S_f, v=v_f, psi=psi,
                         mask=mask, hbar=params.hbar)


# ---------------------------------------------------------------------------
# residual diagnostics
# ---------------------------------------------------------------------------

def _check_pair(field_a: EulerianField, field_b: EulerianField):
    if field_a is None or field_b is None:
        raise ValidationError("two consecutive field snapshots are required")
    if field_a.x.shape != field_b.x.shape or not np.allclose(field_a.x, field_b.x):
        raise ValidationError("field snapshots live on different grids")
    if field_b.t == field_a.t:
        raise ValidationError("field snapshots must differ in time")


def _interior_mask(mask, rho, order):
    """Shared support, above the density floor, eroded by the stencil reach."""
    scale = np.max(rho[mask]) if np.any(mask) else 0.0
    good = mask & (rho > RHO_INTERIOR_REL * max(scale, 1e-300))
    erode = 3 if order == 4 else 2
    out = good.copy()
    for _ in range(erode):
        out[1:] &= good[:-1]
        out[:-1] &= good[1:]
        good = out.copy()
    return out


def qhj_residual(field_a: EulerianField, field_b: EulerianField,
                 params: PhysicsParams, stencil_order: int = 4):
    """Phase-evolution residual dS/dt + (dS/dx)^2/2m + V + V_Q at the
    midpoint of two consecutive snapshots.  Returns (r, mask)."""
    _check_pair(field_a, field_b)
    for f in (field_a, field_b):
        if f.S is None or f.rho is None:
            raise ValidationError("qhj_residual needs rho and S populated")
    x = field_a.x
    h = grid_spacing(x)
    dt = field_b.t - field_a.t
    mask = _interior_mask(field_a.mask & field_b.mask,
                          0.5 * (field_a.rho + field_b.rho), stencil_order)
    S_mid = 0.5 * (field_a.S + field_b.S)
    rho_mid = 0.5 * (field_a.rho + field_b.rho)
    dSdt = (field_b.S - field_a.S) / dt
    dSdx = derivative(S_mid, h, 1, stencil_order)
    c = np.log(np.where(rho_mid > 0, rho_mid, 1.0))
    c1 = derivative(c, h, 1, stencil_order)
    c2 = derivative(c, h, 2, stencil_order)
    vq = -(params.hbar**2 / (4.0 * params.mass)) * (c2 + 0.5 * c1**2)
    r = dSdt + dSdx**2 / (2.0 * params.mass) + params.potential_energy(x) + vq
    return np.where(mask, r, 0.0), mask


def continuity_euler_residuals(field_a: EulerianField, field_b: EulerianField,
                               params: PhysicsParams, stencil_order: int = 4):
    """Residuals of mass transport and of the velocity equation between two
    consecutive snapshots.  Returns (r_cont, r_euler, mask)."""
    _check_pair(field_a, field_b)
    for f in (field_a, field_b):
        if f.rho is None or f.v is None:
            raise ValidationError("residuals need rho and v populated")
    x = field_a.x
    h = grid_spacing(x)
    dt = field_b.t - field_a.t
    rho_mid = 0.5 * (field_a.rho + field_b.rho)
    v_mid = 0.5 * (field_a.v + field_b.v)
    mask = _interior_mask(field_a.mask & field_b.mask, rho_mid, stencil_order)
    r_cont = ((field_b.rho - field_a.rho) / dt
              + derivative(rho_mid * v_mid, h, 1, stencil_order))
    c = np.log(np.where(rho_mid > 0, rho_mid, 1.0))
    c1 = derivative(c, h, 1, stencil_order)
    c2 = derivative(c, h, 2, stencil_order)
    vq = -(params.hbar**2 / (4.0 * params.mass)) * (c2 + 0.5 * c1**2)
    force = derivative(params.potential_energy(x) + vq, h, 1, stencil_order)
    r_euler = ((field_b.v - field_a.v) / dt
               + v_mid * derivative(v_mid, h, 1, stencil_order)
               + force / params.mass)
    return np.where(mask, r_cont, 0.0), np.where(mask, r_euler, 0.0), mask


def advect_labels_check(field_history: Sequence[EulerianField],
                        traj_history: Sequence[TrajectoryState],
                        x0s) -> float:
    """Advect sample points through the reference velocity history and
    compare the arrival positions with the trajectories q(a = x0, t).

    Returns the largest absolute deviation over the sample points.
    """
    if len(field_history) < 2:
        raise ValidationError("need a velocity history with >= 2 snapshots")
    x0s = np.atleast_1d(np.asarray(x0s, dtype=float))
    xs = x0s.copy()

    def v_at(field, pos):
        m = field.mask & np.isfinite(field.v)
        return np.interp(pos, field.x[m], field.v[m])

    for fa, fb in zip(field_history[:-1], field_history[1:]):
        dt = fb.t - fa.t
        v0 = v_at(fa, xs)
        pred = xs + dt * v0
        xs = xs + 0.5 * dt * (v0 + v_at(fb, pred))

    final = traj_history[-1]
    q_at = _pchip_linear_edges(final.labels, final.q)(x0s)
    return float(np.max(np.abs(xs - q_at)))


@dataclass(frozen=True)
class Moments:
    """Mean position and momentum per picture; None when not supplied."""

    lagrangian: Optional[tuple] = None
    eulerian: Optional[tuple] = None


def ensemble_moments(traj: Optional[TrajectoryState] = None,
                     field: Optional[EulerianField] = None,
                     init: Optional[InitialState] = None,
                     params: Optional[PhysicsParams] = None) -> Moments:
    """<x> and <p> from the trajectory ensemble and/or from the fields.

    Trajectory route: sums of w rho0 q and w rho0 m qdot over labels.
    Field route: integrals of x rho and rho dS/dx over the support.
    """
    lagr = euler = None
    if traj is not None:
        if init is None or params is None:
            raise ValidationError("trajectory moments need init and params")
        w = trapezoid_weights(traj.labels) * init.rho0
        lagr = (float(np.sum(w * traj.q)),
                float(np.sum(w * params.mass * traj.qdot)))
    if field is not None:
        if params is None:
            raise ValidationError("field moments need params")
        if field.rho is None:
            raise ValidationError("field moments need rho")
        m = field.mask
        x = field.x[m]
        rho = field.rho[m]
        mean_x = float(np.trapezoid(x * rho, x))
        if field.v is not None:
            dsdx = params.mass * field.v[m]
        elif field.S is not None:
            dsdx = derivative(field.S, grid_spacing(field.x), 1, 4)[m]
        else:
            raise ValidationError("field moments need v or S")
        mean_p = float(np.trapezoid(rho * dsdx, x))
        euler = (mean_x, mean_p)
    return Moments(lagrangian=lagr, eulerian=euler)
