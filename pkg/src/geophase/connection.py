"""Local connection forms and Abelian curvature from eigenframes.

Conventions
-----------
Inner products are conjugate-linear in the first argument. For a frame
``Phi`` (``d x r``) the connection components are the anti-Hermitian
matrices::

    A_k = Phi^dagger d_k Phi

For a single level (``r = 1``) this is ``(phi, d_k phi)`` and the real
Berry connection is ``i A_k = i (phi, d_k phi)``. Under a change of frame
``Phi' = Phi U`` the components obey ``A'_k = U^-1 A_k U + U^-1 d_k U``;
with ``U = exp(i a)`` the Berry value shifts by ``-d_k a``.

Parallel transport of the adiabatic state solves ``dW/dt = -lambda'^k A_k W``,
so the holonomy is ``P exp(-int A)`` with later slices on the left; at
``r = 1`` this is ``exp(i * Berry phase)``.

Note the textbook literature calls these matrices "antiunitary"; what the
orthonormality argument yields (and what is checked here) is
anti-Hermiticity, i.e. membership in the Lie algebra u(r).
"""
from dataclasses import dataclass, replace

import numpy as np

from . import defaults
from .errors import DegeneracyError, GeophaseError, GuardBandError
from .frames import level_frames, resolve_level
from .hamiltonian import evaluate
from .numerics import dagger, hermitian_eigendecompose, unitarity_defect


@dataclass(frozen=True, eq=False)
class LocalConnection:
    """Connection components ``A_k`` (``n x r x r``, anti-Hermitian) at ``lam``.

    ``raw`` holds the finite-difference estimate before anti-Hermitization,
    when the connection came from a stencil.
    """

    lam: np.ndarray
    components: np.ndarray
    raw: np.ndarray | None = None

    @property
    def multiplicity(self):
        return self.components.shape[-1]

    @property
    def berry(self):
        """Real Berry values ``i A_k`` (single levels only)."""
        if self.multiplicity != 1:
            raise GeophaseError("the real Berry connection is defined for nondegenerate levels only")
        return np.real(1j * self.components[:, 0, 0])

    def antihermitian_defect(self):
        src = self.components if self.raw is None else self.raw
        return float(np.max(np.abs(src + dagger(src))))


@dataclass(frozen=True, eq=False)
class CurvatureComponents:
    """Antisymmetric Abelian curvature ``F_kl = d_k A_l - d_l A_k`` at ``lam``."""

    lam: np.ndarray
    F: np.ndarray

    def upper(self):
        """Components ``F_kl`` for ``k < l`` in lexicographic order."""
        k, l = np.triu_indices(self.F.shape[0], 1)
        return self.F[k, l]


class ConnectionSampler:
    """Finite-difference connection of one level, evaluated at stacks of points.

    The level and the section's reference rows are resolved once at
    ``base_point`` and held fixed, so every evaluation uses the same smooth
    local section. Calling the sampler with points ``(M, n)`` returns
    anti-Hermitian components ``(M, n, r, r)``; ``energies(points)`` returns
    the level energy.
    """

    def __init__(self, family, level_index, base_point, h=defaults.FD_STEP, degeneracy_tol=None,
                 gauge_rows="family", guard_band=defaults.GUARD_BAND, multiplicity=None):
        if h <= 0:
            raise GeophaseError("finite-difference step must be positive")
        self.family = family
        self.h = float(h)
        self.guard_band = guard_band
        base = family.check_point(base_point)
        self.spec = resolve_level(family, base, level_index, degeneracy_tol, multiplicity, gauge_rows)

    @property
    def multiplicity(self):
        return self.spec.size

    def raw(self, points):
        """Central-difference ``Phi^dagger d_k Phi`` before anti-Hermitization."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.family.param_dim)
        n = pts.shape[1]
        shifts = self.h * np.concatenate([np.eye(n), -np.eye(n)])
        stencil = np.concatenate([pts[:, None, :], pts[:, None, :] + shifts[None]], axis=1)
        frames = self._frames(stencil.reshape(-1, n), 2 * n + 1)
        frames = frames.reshape(len(pts), 2 * n + 1, *frames.shape[1:])
        centre = frames[:, :1]
        deriv = (frames[:, 1:n + 1] - frames[:, n + 1:]) / (2 * self.h)
        return dagger(centre) @ deriv

    def __call__(self, points):
        a = self.raw(points)
        return 0.5 * (a - dagger(a))

    def energies(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.family.param_dim)
        e, _ = level_frames(self.family, pts, self.spec, self.guard_band)
        return e

    def _frames(self, flat, per_point):
        try:
            return level_frames(self.family, flat, self.spec, self.guard_band)[1]
        except (DegeneracyError, GuardBandError) as exc:
            i = getattr(exc, "index", None)
            if i is None:
                raise
            err = type(exc)(f"stencil around point {i // per_point}: {exc}")
            err.index = i // per_point
            raise err from None

    def berry(self, points):
        """Real Berry components ``(M, n)`` for a nondegenerate level."""
        if self.multiplicity != 1:
            raise GeophaseError("the real Berry connection is defined for nondegenerate levels only")
        return np.real(1j * self(points)[..., 0, 0])

    def curvature(self, points):
        """Abelian curvature ``(M, n, n)`` by central differences of the Berry connection."""
        if self.multiplicity != 1:
            raise GeophaseError("curvature is implemented for nondegenerate levels only (r = 1)")
        pts = np.asarray(points, dtype=float).reshape(-1, self.family.param_dim)
        n = pts.shape[1]
        shifts = self.h * np.concatenate([np.eye(n), -np.eye(n)])
        a = self.berry((pts[:, None, :] + shifts[None]).reshape(-1, n)).reshape(len(pts), 2 * n, n)
        # da[m, k, l] = d_k A_l
        da = (a[:, :n] - a[:, n:]) / (2 * self.h)
        return da - np.swapaxes(da, 1, 2)


class CurvatureSampler:
    """Abelian curvature of a nondegenerate level with the section chosen per point.

    Curvature does not depend on the gauge, so each point is evaluated in
    the section best conditioned there; this keeps stencils clear of any
    single section's singular set.
    """

    def __init__(self, family, level_index, base_point, h=defaults.FD_STEP, degeneracy_tol=None,
                 guard_band=defaults.GUARD_BAND):
        self.family = family
        self.h = float(h)
        self.guard_band = guard_band
        self.spec = resolve_level(family, family.check_point(base_point), level_index, degeneracy_tol, 1, "auto")

    def __call__(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, self.family.param_dim)
        spec = self.spec
        w, v = hermitian_eigendecompose(evaluate(self.family, pts))
        rows = np.argmax(np.abs(v[:, :, spec.start]), axis=1)
        out = np.empty((len(pts), pts.shape[1], pts.shape[1]))
        for row in np.unique(rows):
            sel = rows == row
            sampler = ConnectionSampler.__new__(ConnectionSampler)
            sampler.family, sampler.h, sampler.guard_band = self.family, self.h, self.guard_band
            sampler.spec = replace(spec, rows=(int(row),))
            out[sel] = sampler.curvature(pts[sel])
        return out


def berry_connection_numeric(family, level_index, lam, h=defaults.FD_STEP, degeneracy_tol=None,
                             gauge_rows="family", guard_band=defaults.GUARD_BAND):
    """Finite-difference connection of a level at one point."""
    sampler = ConnectionSampler(family, level_index, lam, h, degeneracy_tol, gauge_rows, guard_band)
    raw = sampler.raw(np.asarray(lam, dtype=float)[None])[0]
    return LocalConnection(np.asarray(lam, dtype=float), 0.5 * (raw - dagger(raw)), raw)


def curvature_numeric(family, level_index, lam, h=defaults.FD_STEP, degeneracy_tol=None,
                      gauge_rows="auto", guard_band=defaults.GUARD_BAND):
    """Abelian curvature at one point from nested central differences.

    The curvature is gauge invariant, so by default the section's reference
    rows are chosen at ``lam`` for best conditioning.
    """
    sampler = ConnectionSampler(family, level_index, lam, h, degeneracy_tol, gauge_rows, guard_band)
    return CurvatureComponents(np.asarray(lam, dtype=float), sampler.curvature(np.asarray(lam)[None])[0])


def gauge_transform(conn, u, du, tol=1e-10):
    """Components in the frame ``Phi U``: ``A'_k = U^-1 A_k U + U^-1 d_k U``.

    Parameters
    ----------
    conn : LocalConnection
    u : (r, r) unitary at ``conn.lam``
    du : (n, r, r) partial derivatives of ``u``
    """
    u = np.asarray(u, dtype=np.complex128)
    du = np.asarray(du, dtype=np.complex128)
    r = conn.multiplicity
    if u.shape != (r, r) or du.shape != (conn.components.shape[0], r, r):
        raise GeophaseError("gauge transformation shapes do not match the connection")
    defect = unitarity_defect(u)
    if defect > tol:
        raise GeophaseError(f"gauge transformation is not unitary (defect {defect:.3e})")
    uinv = dagger(u)
    comps = uinv @ conn.components @ u + uinv @ du
    return LocalConnection(conn.lam, comps)


def curvature_invariant(curv):
    """``2 (F_12^2 + F_13^2 + F_23^2)`` for a three-parameter curvature."""
    f = curv.F if isinstance(curv, CurvatureComponents) else np.asarray(curv)
    if f.shape[-2:] != (3, 3):
        raise GeophaseError("the curvature invariant is defined here for three parameters")
    return 2.0 * (f[..., 0, 1] ** 2 + f[..., 0, 2] ** 2 + f[..., 1, 2] ** 2)
