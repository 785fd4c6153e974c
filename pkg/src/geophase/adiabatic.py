"""Time-dependent Schrodinger evolution under slow parameter sweeps (hbar = 1).

The evolution operator of each step is the exact exponential of the
Hamiltonian frozen at the step's midpoint, so the evolved block stays
orthonormal to machine precision. Geometric holonomies are extracted by
projecting the final block on the initial eigenframe after removing the
dynamical phase.
"""
from dataclasses import dataclass

import numpy as np

from . import defaults
from .connection import ConnectionSampler
from .errors import AdiabaticityError, GeophaseError
from .frames import Schedule, level_frames, resolve_level
from .hamiltonian import evaluate
from .holonomy import HolonomyElement
from .kernels import ordered_product, propagate
from .numerics import dagger, hermitian_eigendecompose, unitarity_defect, unitarize


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Evolved column block ``states[j]`` at ``times[j]`` (curve parameter ``params[j]``)."""

    times: np.ndarray
    params: np.ndarray
    states: np.ndarray
    points: np.ndarray

    @property
    def final(self):
        return self.states[-1]

    def norm_defect(self):
        """Largest deviation of ``Psi^dagger Psi`` from the identity over stored states."""
        s = self.states
        eye = np.eye(s.shape[-1])
        return float(np.max(np.abs(dagger(s) @ s - eye)))


def propagators(family, schedule, n_steps):
    """Midpoint step propagators ``exp(-i H(lambda(s_mid)) dt)``, shape ``(n_steps, d, d)``."""
    s_mid, dt = schedule.slices(n_steps)
    w, v = hermitian_eigendecompose(evaluate(family, schedule.curve(s_mid)))
    return (v * np.exp(-1j * w * dt[:, None])[:, None, :]) @ dagger(v)


def integrate_schrodinger(family, schedule, psi0, n_steps, keep_all=True):
    """Evolve the orthonormal columns ``psi0`` (``d x r``) along ``schedule``.

    Only the final state is kept when ``keep_all`` is false.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if psi0.ndim == 1:
        psi0 = psi0[:, None]
    if psi0.shape[0] != family.dim:
        raise GeophaseError(f"initial block has {psi0.shape[0]} rows, family dimension is {family.dim}")
    if np.max(np.abs(dagger(psi0) @ psi0 - np.eye(psi0.shape[1]))) > 1e-10:
        raise GeophaseError("initial block must have orthonormal columns")
    if n_steps < 1:
        raise GeophaseError("need at least one time step")
    props = propagators(family, schedule, n_steps)
    s = np.linspace(0.0, 1.0, n_steps + 1)
    if keep_all:
        states = propagate(props, psi0, True)
    else:
        states = propagate(props, psi0, False)[None]
        s = s[-1:]
    return Trajectory(schedule.times(s), s, states, schedule.curve(s))


@dataclass(frozen=True, eq=False)
class Extraction:
    holonomy: HolonomyElement
    leakage: float
    overlap: np.ndarray


def extract_geometric_phase(traj, base_frame, dynamical, leakage_threshold=defaults.LEAKAGE_THRESHOLD):
    """Geometric holonomy estimate from a closed-loop trajectory.

    ``M = Phi(lambda_0)^dagger Psi(T) exp(+i dynamical)`` is projected on
    U(r); ``leakage = ||M - unitarize(M)||`` measures how far the evolution
    left the tracked eigenspace.

    Parameters
    ----------
    traj : Trajectory
    base_frame : SpectralFrame or (d, r) array
        Frame at the loop's base point, in the gauge the holonomy refers to.
    dynamical : float
        ``int E dt`` over the schedule.
    """
    phi0 = getattr(base_frame, "frame", base_frame)
    m = dagger(phi0) @ traj.final * np.exp(1j * dynamical)
    u = unitarize(m)
    leakage = float(np.linalg.norm(m - u, ord=2))
    if leakage > leakage_threshold:
        raise AdiabaticityError(leakage, leakage_threshold)
    phase = float(np.angle(u[0, 0])) if u.shape == (1, 1) else None
    return Extraction(HolonomyElement(u, np.asarray(traj.points[0]), phase), leakage, m)


def adiabatic_defect(traj, frames):
    """``max_t ||(I - Phi Phi^dagger) Psi(t)||`` for frames matching the stored states."""
    f = np.asarray([getattr(x, "frame", x) for x in frames]) if isinstance(frames, list) else np.asarray(frames)
    if f.shape[0] != traj.states.shape[0]:
        raise GeophaseError("need one frame per stored state")
    psi = traj.states
    out = psi - f @ (dagger(f) @ psi)
    return float(np.max(np.linalg.norm(out, ord=2, axis=(-2, -1))))


def trajectory_frames(family, traj, level_index, degeneracy_tol=None, gauge_rows="family",
                      guard_band=defaults.GUARD_BAND):
    """Section-gauge frames of one level at the trajectory's stored points."""
    spec = resolve_level(family, traj.points[0], level_index, degeneracy_tol, None, gauge_rows)
    return level_frames(family, traj.points, spec, guard_band)[1]


@dataclass(frozen=True, eq=False)
class FrameODEResult:
    total: np.ndarray
    geometric: HolonomyElement
    dynamical: float
    unitarity_drift: float


def _rates(schedule, s, delta=1e-6):
    curve = schedule.curve
    if curve.deriv is not None:
        dlam = np.asarray(curve.deriv(s), dtype=float)
    else:
        dlam = (curve(np.clip(s + delta, 0, 1)) - curve(np.clip(s - delta, 0, 1))) / (
            np.clip(s + delta, 0, 1) - np.clip(s - delta, 0, 1)
        )[:, None]
    if schedule.time_map is None:
        dt = np.full(s.shape, schedule.total_time)
    else:
        lo, hi = np.clip(s - delta, 0, 1), np.clip(s + delta, 0, 1)
        dt = (schedule.times(hi) - schedule.times(lo)) / (hi - lo)
    return dlam, dt


def integrate_frame_ode(family, schedule, level_index, n_steps, sampler=None, h=defaults.FD_STEP,
                        degeneracy_tol=None, gauge_rows="family", guard_band=defaults.GUARD_BAND):
    """Integrate the adiabatic amplitude equation ``dW/dt = (-lambda'^k A_k - i E) W`` from ``W = I``.

    Uses the explicit midpoint (second-order Runge-Kutta) rule in the curve
    parameter. The result factors as ``geometric * exp(-i int E dt)``;
    ``geometric`` is returned re-unitarized and ``unitarity_drift`` records
    how far the raw integrator drifted from U(r).
    """
    if n_steps < 1:
        raise GeophaseError("need at least one step")
    curve = schedule.curve
    if sampler is None:
        sampler = ConnectionSampler(family, level_index, curve(0.0)[0], h, degeneracy_tol, gauge_rows, guard_band)
    s = np.linspace(0.0, 1.0, 2 * n_steps + 1)
    pts = curve(s)
    a = sampler(pts)
    energy = np.asarray(sampler.energies(pts))
    dlam, dtds = _rates(schedule, s)
    r = a.shape[-1]
    gen = -np.einsum("mkij,mk->mij", a, dlam) - 1j * (energy * dtds)[:, None, None] * np.eye(r)
    ds = 1.0 / n_steps
    g0, gm = gen[0:-1:2], gen[1::2]
    steps = np.eye(r) + ds * gm + 0.5 * ds * ds * (gm @ g0)
    total = ordered_product(steps)
    e_dt = energy * dtds
    dynamical = float(np.sum(ds / 6 * (e_dt[0:-1:2] + 4 * e_dt[1::2] + e_dt[2::2])))
    raw_geo = total * np.exp(1j * dynamical)
    geo = unitarize(raw_geo)
    phase = float(np.angle(geo[0, 0])) if r == 1 else None
    return FrameODEResult(total, HolonomyElement(geo, pts[0], phase), dynamical, unitarity_defect(raw_geo))


@dataclass(frozen=True, eq=False)
class SweepResult:
    total_time: float
    n_steps: int
    extraction: Extraction
    dynamical: float
    defect: float


def sweep(family, curve, level_index, total_time, n_steps, degeneracy_tol=None, gauge_rows="family",
          guard_band=defaults.GUARD_BAND, leakage_threshold=np.inf):
    """Start in the level's eigenframe, evolve around ``curve`` in ``total_time`` and extract the holonomy.

    The dynamical phase uses the same midpoint slices as the propagators.
    ``leakage_threshold`` defaults to infinity so that callers can report
    the leakage instead of failing.
    """
    schedule = Schedule(curve, total_time)
    start = curve(0.0)[0]
    spec = resolve_level(family, start, level_index, degeneracy_tol, None, gauge_rows)
    energies, frames = level_frames(family, start[None], spec, guard_band)
    traj = integrate_schrodinger(family, schedule, frames[0], n_steps)
    s_mid, dt = schedule.slices(n_steps)
    dyn = float(np.sum(level_frames(family, curve(s_mid), spec, 0.0)[0] * dt))
    ext = extract_geometric_phase(traj, frames[0], dyn, leakage_threshold)
    defect = adiabatic_defect(traj, level_frames(family, traj.points, spec, 0.0)[1])
    return SweepResult(float(total_time), int(n_steps), ext, dyn, defect)
