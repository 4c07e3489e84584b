"""Discrete-particle solver: density and phase integrated along paths.

The fluid is approximated by a finite set of co-moving particles.  Along
each path the transport equations close into ODEs,

    dx/dt = v = (dS/dx) / m
    dc/dt = -dv/dx                    (c = ln rho, kept in log form)
    dS/dt = m v^2 / 2 - V - V_Q,

with the spatial derivatives estimated from the scattered particle
positions by a moving weighted least-squares polynomial fit.  The
wavefunction along each path follows from the initial value times an
amplitude factor exp(-integral of div v / 2) and the phase integral of
the Lagrangian density; the amplitude integral is accumulated by an
independent trapezoid rule so the two density routes cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import QtmDerivativeError, TrajectoryCrossing, ValidationError
from .model import InitialState, PhysicsParams
from .stencils import trapezoid_weights

_FACTORIALS = np.array([1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0])


@dataclass(frozen=True)
class QtmConfig:
    """Controls for the particle integration."""

    t_final: float
    dt: Optional[float] = None       # None -> 0.5 * (initial spacing)^2 * m / hbar
    degree: int = 4
    stencil_size: int = 9
    weight_width_mult: float = 3.0
    snapshot_stride: int = 1

    def validate(self):
        if not (self.t_final >= 0):
            raise ValidationError("t_final must be nonnegative")
        if self.dt is not None and not (self.dt > 0):
            raise ValidationError("dt must be positive")
        if self.degree < 1:
            raise ValidationError("degree must be >= 1")
        if self.stencil_size < 2:
            raise ValidationError("stencil_size must be >= 2")
        if self.snapshot_stride < 1:
            raise ValidationError("snapshot_stride must be >= 1")


@dataclass(frozen=True)
class ParticleSet:
    """Positions, log-density and phase carried by each particle."""

    x: np.ndarray
    log_rho: np.ndarray
    S: np.ndarray
    weights: np.ndarray
    t: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if np.any(np.diff(x) <= 0):
            i = int(np.argmin(np.diff(x)))
            raise ValidationError(f"particle positions must increase (index {i})")
        object.__setattr__(self, "x", x)
        for name in ("log_rho", "S", "weights"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != x.shape:
                raise ValidationError(f"{name} must match the particle count")
            object.__setattr__(self, name, v)

    def discrete_norm(self) -> float:
        """sum rho_n * local spacing, a loose mass diagnostic."""
        return float(np.sum(np.exp(self.log_rho) * trapezoid_weights(self.x)))


def _windows(x, k):
    """Start index of the k-nearest contiguous window around each particle."""
    n = x.size
    cand = np.clip(np.arange(n)[:, None] - np.arange(k)[None, :], 0, n - k)
    cost = np.maximum(x[:, None] - x[cand], x[cand + k - 1] - x[:, None])
    return cand[np.arange(n), np.argmin(cost, axis=1)]


def _fit_matrices(x, degree, k, width_mult):
    n = x.size
    starts = _windows(x, k)
    idx = starts[:, None] + np.arange(k)[None, :]
    xs = x[idx]
    d = xs - x[:, None]
    h_loc = (xs[:, -1] - xs[:, 0]) / (k - 1)
    w = np.exp(-((d / (width_mult * h_loc[:, None])) ** 2))
    t = d / h_loc[:, None]
    p = degree + 1
    basis = t[:, :, None] ** np.arange(p)[None, None, :] / _FACTORIALS[None, None, :p]
    weighted = basis * w[:, :, None]
    gram = np.matmul(weighted.transpose(0, 2, 1), basis)
    return idx, weighted, gram, h_loc


def _solve_fits(gram, rhs_stack):
    try:
        return np.linalg.solve(gram, rhs_stack)
    except np.linalg.LinAlgError:
        for i in range(gram.shape[0]):
            if np.linalg.matrix_rank(gram[i]) < gram.shape[1]:
                raise QtmDerivativeError(i, "rank-deficient least-squares system")
        raise


def mwls_derivatives(positions, values, degree: int = 4, stencil_size: int = 9,
                     weight_width_mult: float = 3.0):
    """First and second derivatives at each particle from a local weighted
    least-squares polynomial fit over the nearest neighbors.

    Positions must be strictly increasing (duplicates are rejected with the
    offending index); a rank-deficient fit names the particle.
    """
    x = np.asarray(positions, dtype=float)
    vals = np.asarray(values, dtype=float)
    if x.ndim != 1 or vals.shape != x.shape:
        raise ValidationError("positions and values must be matching 1-D arrays")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    dup = np.flatnonzero(np.diff(xs) == 0.0)
    if dup.size:
        raise QtmDerivativeError(int(order[dup[0]]), "duplicate particle positions")
    if x.size < stencil_size:
        raise ValidationError(
            f"need at least stencil_size = {stencil_size} particles, got {x.size}")
    idx, weighted, gram, h_loc = _fit_matrices(xs, degree, stencil_size,
                                               weight_width_mult)
    rhs = np.matmul(weighted.transpose(0, 2, 1), vals[order][idx][:, :, None])
    beta = _solve_fits(gram, rhs)[:, :, 0]
    d1 = np.empty_like(x)
    d2 = np.empty_like(x)
    d1[order] = beta[:, 1] / h_loc
    d2[order] = beta[:, 2] / h_loc**2 if degree >= 2 else 0.0
    return d1, d2


@dataclass(frozen=True)
class QtmResult:
    """Particle history with the path-wise wavefunction.

    ``psi`` rebuilds the wavefunction at the final particle positions from
    the seeded value, the divergence integral (amplitude) and the phase
    integral; ``div_integral`` holds the independently accumulated
    integral of dv/dx used for the amplitude factor.
    """

    snapshots: list
    psi: np.ndarray
    div_integral: np.ndarray


class _QtmRhs:
    def __init__(self, params: PhysicsParams, config: QtmConfig):
        self.params = params
        self.config = config

    def __call__(self, x, c, S):
        cfg = self.config
        if np.any(np.diff(x) <= 0):
            raise TrajectoryCrossing(int(np.argmin(np.diff(x))), np.nan,
                                     "particle ordering lost during a stage")
        idx, weighted, gram, h_loc = _fit_matrices(x, cfg.degree, cfg.stencil_size,
                                                   cfg.weight_width_mult)
        wt = weighted.transpose(0, 2, 1)
        beta_s = _solve_fits(gram, np.matmul(wt, S[idx][:, :, None]))[:, :, 0]
        beta_c = _solve_fits(gram, np.matmul(wt, c[idx][:, :, None]))[:, :, 0]
        m = self.params.mass
        hbar = self.params.hbar
        v = beta_s[:, 1] / h_loc / m
        vx = beta_s[:, 2] / h_loc**2 / m
        c1 = beta_c[:, 1] / h_loc
        c2 = beta_c[:, 2] / h_loc**2
        vq = -(hbar**2 / (4.0 * m)) * (c2 + 0.5 * c1**2)
        ldens = 0.5 * m * v**2 - self.params.potential_energy(x) - vq
        return v, -vx, ldens, vx


def qtm_evolve(init: InitialState, params: PhysicsParams,
               config: QtmConfig) -> QtmResult:
    """Integrate the particle set seeded at the label grid of ``init``.

    Particles start at the labels with c = ln rho0 and S = S0; the state
    (x, c, S) advances by RK4 and the divergence integral by the trapezoid
    rule between accepted steps.  A particle crossing aborts.
    """
    config.validate()
    if np.any(init.rho0 <= 0):
        raise ValidationError("particle seeding requires strictly positive rho0")
    x = init.labels.copy()
    c = np.log(init.rho0)
    S = init.s0.copy()
    weights = trapezoid_weights(init.labels)
    rhs = _QtmRhs(params, config)

    dt = config.dt
    if dt is None:
        dx0 = float(np.min(np.diff(init.labels)))
        dt = 0.5 * dx0**2 * params.mass / params.hbar
    n_steps = max(1, int(round(config.t_final / dt))) if config.t_final > 0 else 0
    if n_steps:
        dt = config.t_final / n_steps

    snapshots = [ParticleSet(x.copy(), c.copy(), S.copy(), weights, 0.0)]
    div_int = np.zeros_like(x)
    vx_prev = rhs(x, c, S)[3]
    for step in range(n_steps):
        k1 = rhs(x, c, S)
        k2 = rhs(x + 0.5 * dt * k1[0], c + 0.5 * dt * k1[1], S + 0.5 * dt * k1[2])
        k3 = rhs(x + 0.5 * dt * k2[0], c + 0.5 * dt * k2[1], S + 0.5 * dt * k2[2])
        k4 = rhs(x + dt * k3[0], c + dt * k3[1], S + dt * k3[2])
        x = x + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        c = c + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        S = S + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        gaps = np.diff(x)
        if np.any(gaps <= 0):
            raise TrajectoryCrossing(int(np.argmin(gaps)), (step + 1) * dt,
                                     "particle crossing")
        vx_new = rhs(x, c, S)[3]
        div_int += 0.5 * dt * (vx_prev + vx_new)
        vx_prev = vx_new
        t = (step + 1) * dt
        if (step + 1) % config.snapshot_stride == 0 or step + 1 == n_steps:
            snapshots.append(ParticleSet(x.copy(), c.copy(), S.copy(), weights, t))

    amplitude = np.sqrt(init.rho0) * np.exp(-0.5 * div_int)
    psi = amplitude * np.exp(1j * S / params.hbar)
    return QtmResult(snapshots=snapshots, psi=psi, div_integral=div_int)
