"""Closed-form spin-1/2 results for ``H = lambda^k sigma_k``.

Levels ``E_+- = +-|lambda|`` with sections

    phi_+ = (cos(theta/2) e^{-i phi}, sin(theta/2))
    phi_- = (-sin(theta/2) e^{-i phi}, cos(theta/2))

``phi_+`` is singular on the half-axis ``lambda^3 >= 0`` (``theta = 0``),
``phi_-`` on ``lambda^3 <= 0`` (``theta = pi``). Every function taking a
``sign`` uses ``+1`` for the upper level and ``-1`` for the lower one.
"""
from dataclasses import dataclass

import numpy as np

from . import defaults
from .errors import GeophaseError, GuardBandError
from .holonomy import berry_phase_solid_angle


@dataclass(frozen=True)
class SphericalPoint:
    """``lambda = r (sin t cos p, sin t sin p, cos t)``."""

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not self.r > 0:
            raise GeophaseError("spherical point needs r > 0")
        if not 0 <= self.theta <= np.pi:
            raise GeophaseError("theta must lie in [0, pi]")
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2 * np.pi)))

    @classmethod
    def from_cartesian(cls, lam):
        x, y, z = np.asarray(lam, dtype=float)
        r = float(np.sqrt(x * x + y * y + z * z))
        if r == 0:
            raise GeophaseError("the origin has no spherical angles")
        return cls(r, float(np.arccos(np.clip(z / r, -1, 1))), float(np.arctan2(y, x)))

    def cartesian(self):
        st = np.sin(self.theta)
        return self.r * np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])


def _check_sign(sign):
    if sign not in (1, -1):
        raise GeophaseError("sign must be +1 (upper level) or -1 (lower level)")


def _angles(lam):
    lam = np.asarray(lam, dtype=float)
    r = np.linalg.norm(lam, axis=-1)
    if np.any(r == 0):
        raise GeophaseError("the spin-1/2 section is undefined at the origin")
    theta = np.arccos(np.clip(lam[..., 2] / r, -1.0, 1.0))
    return r, theta, np.arctan2(lam[..., 1], lam[..., 0])


def _guard(theta, sign, guard_band):
    dist = theta if sign == 1 else np.pi - theta
    if np.any(dist < guard_band):
        axis = "positive" if sign == 1 else "negative"
        raise GuardBandError(
            f"point within {guard_band:g} rad of the {axis} third half-axis where the section is singular"
        )


def eigenvalues(lam):
    """``(E_-, E_+) = (-|lambda|, +|lambda|)``."""
    n = float(np.linalg.norm(lam))
    return -n, n


def eigenvector_spherical(s, sign, guard_band=defaults.GUARD_BAND):
    """Section ``phi_sign`` at a spherical point."""
    _check_sign(sign)
    _guard(s.theta, sign, guard_band)
    c, sn, e = np.cos(0.5 * s.theta), np.sin(0.5 * s.theta), np.exp(-1j * s.phi)
    if sign == 1:
        return np.array([c * e, sn], dtype=np.complex128)
    return np.array([-sn * e, c], dtype=np.complex128)


def eigenvector_cartesian(lam, sign):
    """``phi_+- = (+-lambda^- / sqrt(|l| -+ l3), sqrt(|l| -+ l3)) / sqrt(2 |l|)``."""
    _check_sign(sign)
    l1, l2, l3 = np.asarray(lam, dtype=float)
    n = np.sqrt(l1 * l1 + l2 * l2 + l3 * l3)
    q = np.sqrt(n - sign * l3)
    if q == 0:
        raise GuardBandError("the Cartesian section is singular on this half-axis")
    return np.array([sign * (l1 - 1j * l2) / q, q], dtype=np.complex128) / np.sqrt(2 * n)


def connection_spherical(s, sign, guard_band=defaults.GUARD_BAND):
    """``(A_r, A_theta, A_phi)``: ``(0, 0, cos^2(t/2))`` for ``phi_+``, ``(0, 0, sin^2(t/2))`` for ``phi_-``."""
    _check_sign(sign)
    _guard(s.theta, sign, guard_band)
    a_phi = np.cos(0.5 * s.theta) ** 2 if sign == 1 else np.sin(0.5 * s.theta) ** 2
    return 0.0, 0.0, float(a_phi)


def connection_cartesian(lam, sign=1, guard_band=defaults.GUARD_BAND):
    """Cartesian Berry connection ``(A_1, A_2, A_3)``; works on stacks of points.

    For ``phi_+``: ``A_1 = -sin(p) cos(t/2) / (2 |l| sin(t/2))``,
    ``A_2 = cos(p) cos(t/2) / (2 |l| sin(t/2))``, ``A_3 = 0``.
    """
    _check_sign(sign)
    r, theta, phi = _angles(lam)
    _guard(theta, sign, guard_band)
    # A_phi / (|l| sin t) with A_phi = cos^2(t/2) or sin^2(t/2)
    if sign == 1:
        g = np.cos(0.5 * theta) / (2 * r * np.sin(0.5 * theta))
    else:
        g = np.sin(0.5 * theta) / (2 * r * np.cos(0.5 * theta))
    return np.stack([-np.sin(phi) * g, np.cos(phi) * g, np.zeros_like(g)], axis=-1)


def curvature_cartesian(lam, sign=1):
    """``(F_12, F_13, F_23)`` of ``phi_+`` (negated for ``phi_-``); singular only at the origin."""
    _check_sign(sign)
    r, theta, phi = _angles(lam)
    k = sign / (2 * r * r)
    return np.stack(
        [-np.cos(theta) * k, np.sin(theta) * np.sin(phi) * k, -np.sin(theta) * np.cos(phi) * k],
        axis=-1,
    )


def curvature_matrix(lam, sign=1):
    """Antisymmetric ``(..., 3, 3)`` form of :func:`curvature_cartesian`."""
    f12, f13, f23 = np.moveaxis(curvature_cartesian(lam, sign), -1, 0)
    z = np.zeros_like(f12)
    return np.stack(
        [np.stack([z, f12, f13], -1), np.stack([-f12, z, f23], -1), np.stack([-f13, -f23, z], -1)],
        axis=-2,
    )


def curvature_invariant(lam):
    """``F^2 = 1 / (2 |lambda|^4)``."""
    r = np.linalg.norm(np.asarray(lam, dtype=float), axis=-1)
    return 1.0 / (2 * r ** 4)


def phase_law(curve, sign, n_segments=defaults.SEGMENTS, guard_band=defaults.GUARD_BAND):
    """Geometric phase ``-/+ Omega(curve) / 2`` of ``phi_+-`` around a closed curve."""
    _check_sign(sign)
    return berry_phase_solid_angle(curve, sign, n_segments, guard_band)


class AnalyticSampler:
    """Closed-form samplers with the same calling convention as the numeric ones."""

    def __init__(self, sign=1, guard_band=defaults.GUARD_BAND):
        _check_sign(sign)
        self.sign = sign
        self.guard_band = guard_band
        self.multiplicity = 1

    def __call__(self, points):
        berry = connection_cartesian(np.asarray(points, dtype=float).reshape(-1, 3), self.sign, self.guard_band)
        return (-1j * berry)[..., None, None]

    def berry(self, points):
        return connection_cartesian(np.asarray(points, dtype=float).reshape(-1, 3), self.sign, self.guard_band)

    def curvature(self, points):
        return curvature_matrix(np.asarray(points, dtype=float).reshape(-1, 3), self.sign)

    def energies(self, points):
        return self.sign * np.linalg.norm(np.asarray(points, dtype=float).reshape(-1, 3), axis=-1)
