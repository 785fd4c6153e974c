"""Line, surface and path-ordered integrals of connections.

Samplers are plain callables on stacks of points:

* a *connection sampler* maps ``(M, n)`` points to anti-Hermitian
  components ``(M, n, r, r)`` (see :mod:`geophase.connection` for the sign
  convention);
* a *curvature sampler* maps ``(M, n)`` points to ``(M, n, n)`` arrays;
* an *energy sampler* maps ``(M, n)`` points to ``(M,)`` energies.

All quadratures use the midpoint of equal parameter slices; phases are
returned raw (accumulated, not reduced), use :func:`mod_2pi` for the
representative in ``(-pi, pi]``.
"""
from dataclasses import dataclass

import numpy as np

from . import defaults
from .errors import GeophaseError, GuardBandError
from .kernels import ordered_product
from .numerics import dagger, exp_antihermitian, unitarity_defect, unitarize


def mod_2pi(phase):
    """Representative of ``phase`` in ``(-pi, pi]``."""
    return float(-np.angle(np.exp(-1j * phase)))


def mod_4pi(angle):
    """Representative of ``angle`` in ``[0, 4 pi)``."""
    return float(np.mod(angle, 4 * np.pi))


@dataclass(frozen=True, eq=False)
class HolonomyElement:
    """Unitary transport matrix around a loop based at ``base_point``.

    ``abelian_phase`` is the raw accumulated phase for one-dimensional
    levels (``None`` otherwise); ``matrix == [[exp(i abelian_phase)]]``.
    """

    matrix: np.ndarray
    base_point: np.ndarray
    abelian_phase: float | None = None

    @property
    def rank(self):
        return self.matrix.shape[0]

    @property
    def phase_mod_2pi(self):
        if self.abelian_phase is None:
            return None
        return mod_2pi(self.abelian_phase)

    @property
    def unitarity_defect(self):
        return unitarity_defect(self.matrix)

    def inverse(self):
        phase = None if self.abelian_phase is None else -self.abelian_phase
        return HolonomyElement(dagger(self.matrix), self.base_point, phase)

    def __matmul__(self, other):
        phase = None
        if self.abelian_phase is not None and other.abelian_phase is not None:
            phase = self.abelian_phase + other.abelian_phase
        return HolonomyElement(self.matrix @ other.matrix, other.base_point, phase)


def _sample(sampler, points, what):
    try:
        return sampler(points)
    except GuardBandError as exc:
        i = getattr(exc, "index", None)
        where = f"{what} {i}" if i is not None else what
        err = GuardBandError(f"{where}: {exc}")
        err.index = i
        raise err from None
    except GeophaseError as exc:
        i = getattr(exc, "index", None)
        if i is None:
            raise
        err = type(exc)(f"{what} {i}: {exc}")
        err.index = i
        raise err from None


def abelian_phase_line_integral(connection_sampler, curve, n_segments=defaults.SEGMENTS, increments="chord"):
    """``oint A_k d lambda^k`` of a nondegenerate level (raw; open curves allowed)."""
    mid, inc = curve.segments(n_segments, increments)
    a = _sample(connection_sampler, mid, "segment")
    if a.shape[-1] != 1:
        raise GeophaseError("line integral of the phase needs a nondegenerate level; use path_ordered_exponential")
    berry = np.real(1j * a[..., 0, 0])
    return float(np.sum(berry * inc))


@dataclass(frozen=True, eq=False)
class SurfacePatch:
    """Surface ``(u, v) in [0, 1]^2 -> lambda`` with optional partial derivatives.

    ``orientation = -1`` flips the sign of the area element.
    """

    map: object
    param_dim: int
    du: object = None
    dv: object = None
    orientation: int = 1
    fd_step: float = 1e-6

    def tangents(self, u, v):
        if self.du is not None and self.dv is not None:
            return np.asarray(self.du(u, v)), np.asarray(self.dv(u, v))
        h = self.fd_step
        tu = (np.asarray(self.map(u + h, v)) - np.asarray(self.map(u - h, v))) / (2 * h)
        tv = (np.asarray(self.map(u, v + h)) - np.asarray(self.map(u, v - h))) / (2 * h)
        return tu, tv

    def flipped(self):
        return SurfacePatch(self.map, self.param_dim, self.du, self.dv, -self.orientation, self.fd_step)


def spherical_cap(radius, theta_min, theta_max, phi0=0.0):
    """Patch ``theta in [theta_min, theta_max]``, ``phi in [phi0, phi0 + 2 pi]``, oriented by ``(theta, phi)``."""
    if radius <= 0 or not 0 <= theta_min < theta_max <= np.pi:
        raise GeophaseError("spherical cap needs radius > 0 and 0 <= theta_min < theta_max <= pi")
    dth = theta_max - theta_min
    dph = 2 * np.pi

    def coords(u, v):
        return theta_min + dth * np.asarray(u), phi0 + dph * np.asarray(v)

    def smap(u, v):
        th, ph = coords(u, v)
        return radius * np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)

    def du(u, v):
        th, ph = coords(u, v)
        return radius * dth * np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)

    def dv(u, v):
        th, ph = coords(u, v)
        return radius * dph * np.stack([-np.sin(th) * np.sin(ph), np.sin(th) * np.cos(ph), np.zeros_like(th)], axis=-1)

    return SurfacePatch(smap, 3, du, dv)


def abelian_phase_surface_integral(curvature_sampler, patch, nu=64, nv=64):
    """``(1/2) iint F_kl d lambda^k ^ d lambda^l`` over ``patch`` by Gauss-Legendre quadrature."""
    xu, wu = np.polynomial.legendre.leggauss(nu)
    xv, wv = np.polynomial.legendre.leggauss(nv)
    u, v = np.meshgrid(0.5 * (xu + 1), 0.5 * (xv + 1), indexing="ij")
    w = 0.25 * np.outer(wu, wv)
    pts = np.asarray(patch.map(u, v)).reshape(-1, patch.param_dim)
    tu, tv = patch.tangents(u, v)
    f = np.asarray(_sample(curvature_sampler, pts, "surface node"))
    if not np.all(np.isfinite(f)):
        raise GeophaseError("curvature is not finite on the patch (it touches a singularity)")
    density = np.einsum("mkl,mk,ml->m", f, tu.reshape(-1, patch.param_dim), tv.reshape(-1, patch.param_dim))
    return float(patch.orientation * np.sum(w.ravel() * density))


def slice_factors(connection_sampler, curve, n_segments, increments="chord"):
    """Transport factors ``exp(-A_k(mid) Delta lambda^k)`` for each slice, in curve order."""
    mid, inc = curve.segments(n_segments, increments)
    a = _sample(connection_sampler, mid, "segment")
    gen = -np.einsum("mkij,mk->mij", a, inc)
    return exp_antihermitian(0.5 * (gen - dagger(gen))), gen


def path_ordered_exponential(connection_sampler, curve, n_segments=defaults.SEGMENTS, increments="chord"):
    """Ordered product of slice factors, later slices on the left.

    For nondegenerate levels the result is ``[[exp(i theta)]]`` with
    ``theta`` the line integral on the same slices.
    """
    if n_segments < 1:
        raise GeophaseError("need at least one segment")
    factors, gen = slice_factors(connection_sampler, curve, n_segments, increments)
    mat = unitarize(ordered_product(factors))
    phase = None
    if mat.shape == (1, 1):
        phase = float(np.sum(np.imag(gen[:, 0, 0])))
    return HolonomyElement(mat, curve.points(1)[0], phase)


def dynamical_phase(energy_sampler, schedule, n_steps=defaults.SEGMENTS):
    """``int_0^T E(lambda(t)) dt`` along a schedule (raw; the state picks up ``exp(-i .)``)."""
    s_mid, dt = schedule.slices(n_steps)
    e = _sample(energy_sampler, schedule.curve(s_mid), "step")
    return float(np.sum(np.asarray(e) * dt))


def holonomy_from_frames(frames):
    """Holonomy read off gauge-aligned frames: ``Phi_0^dagger Phi_N``, re-unitarized."""
    first, last = frames[0].frame, frames[-1].frame
    if frames[0].lam is not None and not np.allclose(frames[0].lam, frames[-1].lam):
        raise GeophaseError("frames do not close up; holonomy needs a closed curve")
    mat = unitarize(dagger(first) @ last)
    phase = float(np.angle(mat[0, 0])) if mat.shape == (1, 1) else None
    return HolonomyElement(mat, np.asarray(frames[0].lam), phase)


def _spherical_angles(pts):
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r == 0):
        i = int(np.flatnonzero(r == 0)[0])
        raise GeophaseError(f"sample {i} of the curve is at the origin; the solid angle is undefined")
    cos_theta = np.clip(pts[..., 2] / r, -1.0, 1.0)
    return cos_theta, np.arctan2(pts[..., 1], pts[..., 0])


def solid_angle(curve, n_segments=defaults.SEGMENTS, guard_band=defaults.GUARD_BAND):
    """Oriented solid angle ``oint (1 - cos theta) d phi`` of a closed curve in R^3 (raw).

    ``phi`` is unwrapped continuously along the samples. The raw value is
    defined modulo ``4 pi`` (use :func:`mod_4pi`); loops through the guard
    band around the positive third axis are rejected.
    """
    if curve.param_dim != 3:
        raise GeophaseError("solid angle needs a curve in R^3")
    if not curve.closed:
        raise GeophaseError("solid angle needs a closed curve")
    pts = curve.points(n_segments)
    cos_theta, phi = _spherical_angles(pts)
    near = np.flatnonzero(cos_theta > np.cos(guard_band))
    if near.size:
        raise GuardBandError(f"sample {near[0]} is within the guard band of the positive third axis")
    dphi = np.diff(np.unwrap(phi))
    mid, _ = curve.segments(n_segments)
    cos_mid, _ = _spherical_angles(mid)
    return float(np.sum((1.0 - cos_mid) * dphi))


def berry_phase_solid_angle(curve, level_sign, n_segments=defaults.SEGMENTS, guard_band=defaults.GUARD_BAND):
    """Spin-1/2 geometric phase ``-/+ Omega / 2`` for the upper (``+1``) or lower (``-1``) level."""
    if level_sign not in (1, -1):
        raise GeophaseError("level_sign must be +1 or -1")
    return -level_sign * 0.5 * solid_angle(curve, n_segments, guard_band)
