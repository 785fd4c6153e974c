"""Gauge-fixed eigenframes and their tracking along parameter curves.

A frame is an orthonormal ``d x r`` block spanning one energy level. Two
gauges are used:

* the *section gauge*: a fixed set of ``r`` basis rows is chosen and the
  corresponding ``r x r`` block of the frame is made Hermitian positive.
  This is a smooth local section wherever that block is invertible, and is
  what connection and curvature stencils differentiate. For the spin-1/2
  family the rows are fixed to the lower component, which reproduces the
  textbook sections ``phi_+ = (cos(t/2) e^{-i p}, sin(t/2))`` and
  ``phi_- = (-sin(t/2) e^{-i p}, cos(t/2))``.
* the *aligned gauge*: consecutive frames along a curve are rotated so that
  neighbour overlaps are Hermitian positive (discrete parallel transport).

The section is singular where its reference block loses rank. Points whose
block has smallest singular value below ``sin(guard_band / 2)`` are
rejected; for spin-1/2 this is exactly the cone ``theta < guard_band``
around the singular half-axis of ``phi_+``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import defaults
from .errors import DegeneracyError, GeophaseError, GuardBandError, SingularMatrixError
from .hamiltonian import evaluate, resolve_tol
from .kernels import ordered_partials
from .numerics import cluster_levels, dagger, hermitian_eigendecompose, unitarize


# -- curves -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParamCurve:
    """A curve ``t -> lambda(t)`` on ``[0, 1]``.

    ``func`` maps an array of ``t`` values to points of shape ``(len(t), n)``;
    ``deriv`` (optional) gives ``d lambda / dt`` the same way. Without it,
    segment increments are chords between samples.

    ``domain="half_space"`` restricts the curve to ``lambda^1 > 0``.
    """

    func: object
    param_dim: int
    closed: bool = False
    deriv: object = None
    domain: str | None = None
    label: str = field(default="")

    def __call__(self, t):
        return np.asarray(self.func(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float)

    def check_domain(self, pts):
        if self.domain == "half_space":
            bad = np.flatnonzero(pts[..., 0] <= 0)
            if bad.size:
                err = GuardBandError(
                    f"sample {bad[0]} leaves the half-space lambda^1 > 0 (lambda^1 = {pts[bad[0], 0]:.3e})"
                )
                err.index = int(bad[0])
                raise err
        elif self.domain is not None:
            raise GeophaseError(f"unknown curve domain {self.domain!r}")
        return pts

    def points(self, n_segments):
        """``n_segments + 1`` samples at uniform ``t``; closed curves end exactly at the start."""
        pts = self(np.linspace(0.0, 1.0, n_segments + 1))
        if self.closed:
            pts[-1] = pts[0]
        return self.check_domain(pts)

    def segments(self, n_segments, increments="chord"):
        """Midpoints and increments ``Delta lambda`` of ``n_segments`` equal parameter slices.

        ``increments="chord"`` uses ``lambda_{j+1} - lambda_j``; ``"tangent"``
        uses ``lambda'(t_mid) / n_segments`` and needs ``deriv``.
        """
        if n_segments < 1:
            raise GeophaseError("need at least one segment")
        t_mid = (np.arange(n_segments) + 0.5) / n_segments
        mid = self.check_domain(self(t_mid))
        if increments == "tangent":
            if self.deriv is None:
                raise GeophaseError("tangent increments need a curve derivative")
            inc = np.asarray(self.deriv(t_mid), dtype=float) / n_segments
        elif increments == "chord":
            inc = np.diff(self.points(n_segments), axis=0)
        else:
            raise GeophaseError(f"unknown increment rule {increments!r}")
        return mid, inc

    def reversed(self):
        f, df = self.func, self.deriv
        return ParamCurve(
            lambda t: f(1.0 - t),
            self.param_dim,
            self.closed,
            None if df is None else (lambda t: -np.asarray(df(1.0 - t))),
            self.domain,
            f"reversed({self.label})",
        )

    def then(self, other):
        """Traverse ``self`` and then ``other`` (each on half of ``[0, 1]``)."""
        if other.param_dim != self.param_dim:
            raise GeophaseError("cannot concatenate curves of different dimension")
        f1, f2 = self.func, other.func

        def func(t):
            t = np.asarray(t, dtype=float)
            first = t < 0.5
            out = np.empty(t.shape + (self.param_dim,))
            if np.any(first):
                out[first] = f1(2 * t[first])
            if np.any(~first):
                out[~first] = f2(2 * t[~first] - 1)
            return out

        deriv = None
        if self.deriv is not None and other.deriv is not None:
            d1, d2 = self.deriv, other.deriv

            def deriv(t):
                t = np.asarray(t, dtype=float)
                first = t < 0.5
                out = np.empty(t.shape + (self.param_dim,))
                if np.any(first):
                    out[first] = 2 * np.asarray(d1(2 * t[first]))
                if np.any(~first):
                    out[~first] = 2 * np.asarray(d2(2 * t[~first] - 1))
                return out

        return ParamCurve(func, self.param_dim, other.closed and self.closed, deriv, self.domain,
                          f"{self.label}+{other.label}")


def cone_circle(axis, half_angle, radius=1.0, turns=1, reference=None):
    """Circle of angular radius ``half_angle`` around ``axis`` on the sphere of ``radius``.

    The loop is traversed positively about ``axis`` ``turns`` times, starting
    in the direction of ``reference`` (projected orthogonal to the axis).
    """
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    if reference is None:
        reference = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.asarray(reference, dtype=float) - np.dot(reference, axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    ca, sa = np.cos(half_angle), np.sin(half_angle)
    w = 2 * np.pi * turns

    def func(t):
        s = w * np.asarray(t)[..., None]
        return radius * (ca * axis + sa * (np.cos(s) * e1 + np.sin(s) * e2))

    def deriv(t):
        s = w * np.asarray(t)[..., None]
        return radius * w * sa * (-np.sin(s) * e1 + np.cos(s) * e2)

    return ParamCurve(func, 3, True, deriv, label=f"cone({half_angle:g})")


def colatitude_circle(radius, theta0, turns=1, phi0=0.0):
    """Circle ``theta = theta0`` on the sphere of ``radius``, ``phi`` from ``phi0`` increasing."""
    if radius <= 0:
        raise GeophaseError("circle radius must be positive")
    if turns == 0 or int(turns) != turns:
        raise GeophaseError("turns must be a nonzero integer")
    w = 2 * np.pi * turns
    st, ct = np.sin(theta0), np.cos(theta0)

    def func(t):
        p = phi0 + w * np.asarray(t)
        return radius * np.stack([st * np.cos(p), st * np.sin(p), ct * np.ones_like(p)], axis=-1)

    def deriv(t):
        p = phi0 + w * np.asarray(t)
        return radius * w * np.stack([-st * np.sin(p), st * np.cos(p), np.zeros_like(p)], axis=-1)

    return ParamCurve(func, 3, True, deriv, label=f"colatitude({theta0:g})")


def polyline(points, closed=None):
    """Piecewise-linear curve through ``points``, one equal ``t`` slice per edge."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise GeophaseError("polyline needs a (k, n) array of points")
    if closed is None:
        closed = pts.shape[0] > 1 and bool(np.array_equal(pts[0], pts[-1]))
    elif closed and not np.array_equal(pts[0], pts[-1]):
        pts = np.vstack([pts, pts[:1]])
    n_edges = max(pts.shape[0] - 1, 1)
    if pts.shape[0] == 1:
        pts = np.vstack([pts, pts])

    def func(t):
        s = np.clip(np.asarray(t) * n_edges, 0, n_edges)
        i = np.minimum(s.astype(int), n_edges - 1)
        frac = (s - i)[..., None]
        return pts[i] * (1 - frac) + pts[i + 1] * frac

    def deriv(t):
        s = np.clip(np.asarray(t) * n_edges, 0, n_edges)
        i = np.minimum(s.astype(int), n_edges - 1)
        return (pts[i + 1] - pts[i]) * n_edges

    return ParamCurve(func, pts.shape[1], bool(closed), deriv, label="polyline")


@dataclass(frozen=True, eq=False)
class Schedule:
    """A curve swept in total time ``total_time``.

    ``time_map(s)`` gives the physical time at curve parameter ``s``; it
    must be strictly increasing with ``time_map(0) = 0`` and
    ``time_map(1) = total_time``. The default is linear.
    """

    curve: ParamCurve
    total_time: float
    time_map: object = None

    def __post_init__(self):
        if not self.total_time > 0:
            raise GeophaseError("total time must be positive")
        if self.time_map is not None:
            s = np.linspace(0.0, 1.0, 1025)
            t = np.asarray(self.time_map(s), dtype=float)
            if abs(t[0]) > 1e-12 * self.total_time or abs(t[-1] - self.total_time) > 1e-12 * self.total_time:
                raise GeophaseError("time map must send 0 -> 0 and 1 -> total_time")
            if np.any(np.diff(t) <= 0):
                raise GeophaseError("time map must be strictly increasing")

    def times(self, s):
        s = np.asarray(s, dtype=float)
        if self.time_map is None:
            return self.total_time * s
        return np.asarray(self.time_map(s), dtype=float)

    def slices(self, n_steps):
        """Midpoint parameters and durations of ``n_steps`` equal parameter slices."""
        if n_steps < 1:
            raise GeophaseError("need at least one time step")
        s = np.linspace(0.0, 1.0, n_steps + 1)
        return 0.5 * (s[1:] + s[:-1]), np.diff(self.times(s))


def constant_curve(point, closed=True):
    p = np.asarray(point, dtype=float)
    return ParamCurve(lambda t: np.broadcast_to(p, np.shape(t) + p.shape).copy(), p.size, closed,
                      lambda t: np.zeros(np.shape(t) + p.shape), label="constant")


# -- frames -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralFrame:
    """Orthonormal basis ``frame`` (``d x r``) of level ``level_index`` at ``lam``."""

    lam: np.ndarray
    energy: float
    frame: np.ndarray
    level_index: int

    @property
    def multiplicity(self):
        return self.frame.shape[1]

    @property
    def projector(self):
        return self.frame @ dagger(self.frame)


@dataclass(frozen=True)
class LevelSpec:
    """Resolved level location used by the batched frame routines."""

    start: int
    size: int
    tol: float
    rows: tuple
    level_index: int


def choose_rows(frame):
    """Rows of ``frame`` giving a well-conditioned ``r x r`` block (pivoted QR)."""
    r = frame.shape[1]
    _, _, piv = scipy.linalg.qr(frame.T, pivoting=True, mode="economic")
    return tuple(sorted(int(i) for i in piv[:r]))


def resolve_level(family, lam, level_index, degeneracy_tol=None, multiplicity=None, gauge_rows="family"):
    """Locate a level at a base point and fix the section's reference rows.

    ``gauge_rows`` is ``"family"`` (use the family's rows when they match
    the multiplicity, else pick automatically), ``"auto"``, or an explicit
    tuple of row indices.
    """
    h = evaluate(family, lam)
    tol = resolve_tol(h, degeneracy_tol)
    w, v = hermitian_eigendecompose(h)
    levels = cluster_levels(w, tol)
    try:
        a, b = levels[level_index]
    except IndexError:
        raise DegeneracyError(f"level index {level_index} out of range for {len(levels)} levels") from None
    if multiplicity is not None and b - a != multiplicity:
        raise DegeneracyError(f"level {level_index} has multiplicity {b - a}, expected {multiplicity}")
    r = b - a
    if isinstance(gauge_rows, str):
        if gauge_rows == "family" and family.gauge_rows is not None and len(family.gauge_rows) == r:
            rows = family.gauge_rows
        elif gauge_rows in ("family", "auto"):
            rows = choose_rows(v[:, a:b])
        else:
            raise GeophaseError(f"unknown gauge_rows mode {gauge_rows!r}")
    else:
        rows = tuple(int(i) for i in gauge_rows)
        if len(rows) != r:
            raise GeophaseError(f"need {r} gauge rows, got {len(rows)}")
    index = level_index if level_index >= 0 else len(levels) + level_index
    return LevelSpec(a, r, tol, rows, index)


def level_frames(family, points, spec, guard_band=defaults.GUARD_BAND):
    """Energies ``(M,)`` and section-gauge frames ``(M, d, r)`` at a stack of points.

    Raises
    ------
    DegeneracyError
        If the level's multiplicity differs from ``spec`` at some point.
    GuardBandError
        If a point lies in the section's guard band.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, family.param_dim)
    w, v = hermitian_eigendecompose(evaluate(family, pts))
    a, b = spec.start, spec.start + spec.size
    d = family.dim
    bad = np.zeros(len(pts), dtype=bool)
    if b - a > 1:
        bad |= np.max(np.diff(w[:, a:b], axis=1), axis=1) >= 0.5 * spec.tol
    if a > 0:
        bad |= (w[:, a] - w[:, a - 1]) <= spec.tol
    if b < d:
        bad |= (w[:, b] - w[:, b - 1]) <= spec.tol
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        err = DegeneracyError(
            f"sample {i}: level {spec.level_index} does not keep multiplicity {spec.size} "
            f"at lambda={pts[i].tolist()} (eigenvalues {np.round(w[i], 12).tolist()})"
        )
        err.index = i
        raise err
    frames = fix_gauge(v[:, :, a:b], spec.rows, guard_band, pts)
    return w[:, a:b].mean(axis=1), frames


def fix_gauge(frames, rows, guard_band=defaults.GUARD_BAND, points=None):
    """Rotate frames so that the block on ``rows`` is Hermitian positive."""
    block = frames[..., list(rows), :]
    s = np.linalg.svd(block, compute_uv=False)
    floor = np.sin(0.5 * guard_band)
    low = s[..., -1] < floor
    if np.any(low):
        i = int(np.flatnonzero(low.ravel())[0])
        where = "" if points is None else f" at lambda={np.asarray(points)[i].tolist()}"
        err = GuardBandError(
            f"sample {i}{where} is inside the guard band of the section singularity "
            f"(reference block singular value {s.reshape(-1, s.shape[-1])[i, -1]:.3e} < {floor:.3e})"
        )
        err.index = i
        raise err
    return frames @ dagger(unitarize(block))


def eigenframe(family, lam, level_index, degeneracy_tol=None, multiplicity=None,
               gauge_rows="family", guard_band=defaults.GUARD_BAND):
    """Section-gauge frame of one level at a single point."""
    lam = family.check_point(lam)
    spec = resolve_level(family, lam, level_index, degeneracy_tol, multiplicity, gauge_rows)
    e, f = level_frames(family, lam[None], spec, guard_band)
    return SpectralFrame(lam, float(e[0]), f[0], spec.level_index)


def align_gauge(prev, nxt, min_singular=defaults.MIN_OVERLAP_SINGULAR):
    """Rotate ``nxt`` within its span so its overlap with ``prev`` is Hermitian positive."""
    if prev.level_index != nxt.level_index or prev.multiplicity != nxt.multiplicity:
        raise DegeneracyError("cannot align frames of different levels or multiplicities")
    omega = dagger(prev.frame) @ nxt.frame
    try:
        q = unitarize(omega, min_singular)
    except SingularMatrixError as exc:
        raise SingularMatrixError(exc.smallest, min_singular, "refine the curve sampling") from None
    return SpectralFrame(nxt.lam, nxt.energy, nxt.frame @ dagger(q), nxt.level_index)


def aligned_frames(family, points, spec, guard_band=defaults.GUARD_BAND,
                   min_singular=defaults.MIN_OVERLAP_SINGULAR):
    """Batched tracking: energies and aligned frames along a sequence of points."""
    energies, c = level_frames(family, points, spec, guard_band)
    overlaps = dagger(c[:-1]) @ c[1:]
    if len(overlaps):
        s = np.linalg.svd(overlaps, compute_uv=False)[:, -1]
        low = np.flatnonzero(s < min_singular)
        if low.size:
            i = int(low[0])
            raise SingularMatrixError(
                s[i], min_singular, f"overlap between samples {i} and {i + 1} is near-singular; refine the curve sampling"
            )
        v = ordered_partials(dagger(unitarize(overlaps)))
    else:
        v = np.eye(spec.size, dtype=np.complex128)[None]
    return energies, c @ v


def frame_along_curve(family, curve, level_index, degeneracy_tol=None, n_segments=None,
                      gauge_rows="family", guard_band=defaults.GUARD_BAND,
                      min_singular=defaults.MIN_OVERLAP_SINGULAR, multiplicity=None):
    """Gauge-aligned frames at ``n_segments + 1`` samples of ``curve``.

    The first frame is in the section gauge. For closed curves the last
    frame is *not* re-aligned to the first; its mismatch is the holonomy.
    """
    n_segments = defaults.SEGMENTS if n_segments is None else n_segments
    pts = curve.points(n_segments)
    spec = resolve_level(family, pts[0], level_index, degeneracy_tol, multiplicity, gauge_rows)
    energies, frames = aligned_frames(family, pts, spec, guard_band, min_singular)
    return [SpectralFrame(p, float(e), f, spec.level_index) for p, e, f in zip(pts, energies, frames)]


def projector_distance(a, b):
    """Spectral-norm distance between the projectors onto two frames' spans."""
    return float(np.linalg.norm(a @ dagger(a) - b @ dagger(b), ord=2))
