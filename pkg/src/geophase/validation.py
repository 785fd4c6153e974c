"""End-to-end acceptance checks shared by ``geophase validate`` and the test suite.

Each check returns a :class:`CheckResult` carrying the measured value, the
bound it was held to and the wall time. Numeric knobs (segment count, guard
band, time steps) are parameters so that deliberately misconfigured runs can
be shown to fail.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from . import defaults
from .adiabatic import integrate_frame_ode, sweep
from .connection import ConnectionSampler, CurvatureSampler, curvature_invariant
from .errors import GeophaseError, GuardBandError
from .frames import ParamCurve, Schedule, colatitude_circle, cone_circle
from .hamiltonian import clifford_family, doubled, spin_half
from .holonomy import (
    abelian_phase_line_integral,
    abelian_phase_surface_integral,
    mod_2pi,
    path_ordered_exponential,
    solid_angle,
    spherical_cap,
)
from .numerics import dagger
from .spin_half import connection_cartesian, curvature_matrix
from .spin_half import curvature_invariant as analytic_invariant


@dataclass
class CheckResult:
    key: str
    name: str
    passed: bool
    measured: dict
    expected: dict
    seconds: float = 0.0
    time_limit: float | None = None
    error: str | None = None
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{k}={_fmt(v)}" for k, v in self.measured.items()]
        bounds = [f"{k}{_fmt(v)}" for k, v in self.expected.items()]
        text = f"[{status}] {self.key}. {self.name}: {', '.join(parts)} (need {', '.join(bounds)})"
        if self.time_limit is not None:
            text += f" in {self.seconds:.2f}s (limit {self.time_limit:g}s)"
        if self.error:
            text += f" error: {self.error}"
        return text

    def as_dict(self):
        return {
            "key": self.key,
            "name": self.name,
            "passed": self.passed,
            "measured": {k: _plain(v) for k, v in self.measured.items()},
            "expected": {k: _plain(v) for k, v in self.expected.items()},
            "seconds": round(self.seconds, 3),
            "time_limit": self.time_limit,
            "error": self.error,
        }


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    return f"{float(v):.3e}"


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, str):
        return v
    return float(v)


@dataclass(frozen=True)
class Settings:
    segments: int = defaults.SEGMENTS
    guard_band: float = defaults.GUARD_BAND
    steps_per_unit_time: int = defaults.STEPS_PER_UNIT_TIME
    fd_step: float = defaults.FD_STEP
    seed: int = 20240611


def _timed(key, name, time_limit, body):
    t0 = time.perf_counter()
    try:
        passed, measured, expected = body()
        error = None
    except GeophaseError as exc:
        passed, measured, expected, error = False, {}, {}, f"{type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - t0
    if time_limit is not None and seconds > time_limit:
        passed = False
    return CheckResult(key, name, bool(passed), measured, expected, seconds, time_limit, error)


def _upper_sampler(settings, base):
    return ConnectionSampler(spin_half(), -1, base, settings.fd_step, guard_band=settings.guard_band)


def _random_points(rng, n, r_range, max_cos):
    """Uniform directions with ``cos(theta) <= max_cos``, radii uniform in ``r_range``."""
    r = rng.uniform(*r_range, n)
    ct = rng.uniform(-1.0, max_cos, n)
    ph = rng.uniform(0.0, 2 * np.pi, n)
    st = np.sqrt(1 - ct * ct)
    return np.stack([r * st * np.cos(ph), r * st * np.sin(ph), r * ct], axis=1)


def check_solid_angle(settings=Settings()):
    def body():
        gaps = []
        for th in (np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3):
            c = colatitude_circle(1.0, th)
            line = abelian_phase_line_integral(_upper_sampler(settings, c(0.0)[0]), c, settings.segments)
            omega = solid_angle(c, settings.segments, settings.guard_band)
            gaps.append(abs(np.exp(1j * line) - np.exp(-0.5j * omega)))
        return max(gaps) < 1e-6, {"max_gap": max(gaps)}, {"<": 1e-6}
    return _timed("1", "SOLID-ANGLE LAW", 1.0, body)


def check_stokes(settings=Settings()):
    def body():
        th = np.pi / 3
        c = colatitude_circle(1.0, th)
        line = abelian_phase_line_integral(_upper_sampler(settings, c(0.0)[0]), c, settings.segments)
        curv = CurvatureSampler(spin_half(), -1, c(0.0)[0], settings.fd_step, guard_band=settings.guard_band)
        # the loop bounds the south cap with the opposite orientation to (theta, phi)
        south = abelian_phase_surface_integral(curv, spherical_cap(1.0, th, np.pi).flipped())
        north = abelian_phase_surface_integral(curv, spherical_cap(1.0, 0.0, th))
        gap_south = abs(line - south)
        gap_north = abs(mod_2pi(line - north))
        offset = abs(line - north - 2 * np.pi)
        ok = gap_south < 1e-6 and gap_north < 1e-6 and offset < 1e-6
        return ok, {"south_raw_gap": gap_south, "north_mod_2pi_gap": gap_north, "offset_minus_2pi": offset}, {
            "<": 1e-6}
    return _timed("2", "STOKES EQUIVALENCE", 2.0, body)


def _random_loops(rng, count, guard_band):
    loops = []
    while len(loops) < count:
        if len(loops) % 2 == 0:
            centre = _random_points(rng, 1, (1.0, 1.5), 0.7)[0]
        else:
            # encircles the section's singular axis
            centre = np.array([0.0, 0.0, rng.uniform(-0.5, 0.5)])
        a, b, a2, b2 = 0.5 * rng.normal(size=(4, 3))
        if len(loops) % 2 == 1:
            a[2], b[2] = 0.0, 0.0
            a[:2] = [1.0, 0.0]
            b[:2] = [0.0, 1.0]
            a2, b2 = 0.2 * a2, 0.2 * b2

        def func(t, c=centre, a=a, b=b, a2=a2, b2=b2):
            w = 2 * np.pi * np.asarray(t)[:, None]
            return c + np.cos(w) * a + np.sin(w) * b + np.cos(2 * w) * a2 + np.sin(2 * w) * b2

        def deriv(t, a=a, b=b, a2=a2, b2=b2):
            w = 2 * np.pi * np.asarray(t)[:, None]
            return 2 * np.pi * (-np.sin(w) * a + np.cos(w) * b - 2 * np.sin(2 * w) * a2 + 2 * np.cos(2 * w) * b2)

        curve = ParamCurve(func, 3, True, deriv, label="random loop")
        pts = curve.points(512)
        r = np.linalg.norm(pts, axis=1)
        theta = np.arccos(np.clip(pts[:, 2] / r, -1, 1))
        if r.min() > 0.4 and theta.min() > max(0.3, 10 * guard_band):
            loops.append(curve)
    return loops


def check_abelian_reduction(settings=Settings()):
    def body():
        rng = np.random.default_rng(settings.seed)
        gaps = []
        for curve in _random_loops(rng, 10, settings.guard_band):
            sampler = _upper_sampler(settings, curve(0.0)[0])
            line = abelian_phase_line_integral(sampler, curve, settings.segments)
            w = path_ordered_exponential(sampler, curve, settings.segments)
            gaps.append(abs(mod_2pi(np.angle(w.matrix[0, 0]) - line)))
        return max(gaps) < 1e-8, {"max_gap": max(gaps)}, {"<": 1e-8}
    return _timed("3", "HOLO-3 ABELIAN REDUCTION", 5.0, body)


def check_curvature_invariant(settings=Settings()):
    def body():
        rng = np.random.default_rng(settings.seed + 1)
        pts = _random_points(rng, 100, (0.5, 2.0), np.cos(settings.guard_band))
        exact = analytic_invariant(pts)
        analytic = curvature_invariant(curvature_matrix(pts, 1))
        numeric = curvature_invariant(CurvatureSampler(spin_half(), -1, pts[0], settings.fd_step,
                                                       guard_band=settings.guard_band)(pts))
        rel_a = float(np.max(np.abs(analytic / exact - 1)))
        rel_n = float(np.max(np.abs(numeric / exact - 1)))
        return rel_a < 1e-6 and rel_n < 1e-4, {"analytic_rel": rel_a, "numeric_rel": rel_n}, {
            "analytic<": 1e-6, "numeric<": 1e-4}
    return _timed("4", "CURVATURE INVARIANT", 2.0, body)


def check_connection(settings=Settings()):
    def body():
        rng = np.random.default_rng(settings.seed + 2)
        # away from the section's singular axis, where third derivatives stay moderate
        pts = _random_points(rng, 100, (0.75, 1.5), np.cos(np.pi / 6))
        exact = connection_cartesian(pts, 1, settings.guard_band)
        errs = []
        for h in (settings.fd_step, 0.5 * settings.fd_step):
            s = ConnectionSampler(spin_half(), -1, pts[0], h, guard_band=settings.guard_band)
            errs.append(float(np.max(np.abs(s.berry(pts) - exact))))
        ratio = errs[0] / errs[1]
        ok = errs[0] < 1e-7 and 3.5 <= ratio <= 4.5
        return ok, {"max_error": errs[0], "richardson_ratio": ratio}, {"max_error<": 1e-7, "ratio in": [3.5, 4.5]}
    return _timed("5", "NUMERIC-VS-ANALYTIC CONNECTION", 2.0, body)


def check_adiabatic(settings=Settings()):
    def body():
        curve = colatitude_circle(1.0, np.pi / 2)
        errors = []
        for t in (50, 100, 200, 400):
            res = sweep(spin_half(), curve, -1, t, settings.steps_per_unit_time * t, guard_band=settings.guard_band)
            errors.append(abs(mod_2pi(res.extraction.holonomy.abelian_phase + np.pi)))
        decreasing = all(b < a for a, b in zip(errors, errors[1:]))
        return decreasing and errors[-1] < 0.02, {"errors": errors, "decreasing": decreasing}, {
            "error(400)<": 0.02}
    return _timed("6", "ADIABATIC CONVERGENCE", 30.0, body)


def check_wilczek_zee(settings=Settings()):
    def body():
        fam = doubled(spin_half(), 2)
        c = colatitude_circle(1.0, np.pi / 3)
        base = c(0.0)[0]
        w = path_ordered_exponential(
            ConnectionSampler(fam, -1, base, settings.fd_step, guard_band=settings.guard_band), c, settings.segments
        ).matrix
        off = float(np.linalg.norm(w - np.diag(np.diag(w))))
        theta = float(np.angle(np.linalg.det(w))) / 2
        abelian = abelian_phase_line_integral(_upper_sampler(settings, base), c, settings.segments)
        # det phase fixes theta only modulo pi; compare both diagonal entries instead
        phase_gap = max(abs(mod_2pi(np.angle(w[i, i]) - abelian)) for i in range(2))
        ode = integrate_frame_ode(fam, Schedule(c, 1.0), -1, 8192, h=settings.fd_step, guard_band=settings.guard_band)
        ode_gap = float(np.linalg.norm(ode.geometric.matrix - w, ord=2))
        ok = off < 1e-6 and phase_gap < 1e-6 and ode_gap < 1e-6
        return ok, {"off_diagonal": off, "phase_gap": phase_gap, "ode_gap": ode_gap, "theta_det": theta}, {
            "<": 1e-6}
    return _timed("7", "WILCZEK-ZEE ORACLE", 5.0, body)


def _fourier_loop(centre, a, b):
    def func(t):
        w = 2 * np.pi * np.asarray(t)[:, None]
        return centre + np.cos(w) * a + np.sin(w) * b

    def deriv(t):
        w = 2 * np.pi * np.asarray(t)[:, None]
        return 2 * np.pi * (-np.sin(w) * a + np.cos(w) * b)

    return ParamCurve(func, len(centre), True, deriv, label="ellipse")


def check_group(settings=Settings()):
    def body():
        rng = np.random.default_rng(settings.seed + 3)
        fam = clifford_family()
        centre = np.array([0.3, 0.2, 0.5, 0.1, 0.6])
        sampler = ConnectionSampler(fam, 0, centre, settings.fd_step, gauge_rows="auto", multiplicity=2,
                                    guard_band=settings.guard_band)
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        u, _ = np.linalg.qr(z)

        def conjugated(points):
            return dagger(u) @ sampler(points) @ u

        n = min(settings.segments, 1024)
        unit, rev, conj, comm = [], [], [], []
        mats = []
        for _ in range(3):
            loop = _fourier_loop(centre, 0.4 * rng.normal(size=5), 0.4 * rng.normal(size=5))
            w = path_ordered_exponential(sampler, loop, n)
            wr = path_ordered_exponential(sampler, loop.reversed(), n)
            wc = path_ordered_exponential(conjugated, loop, n)
            unit.append(w.unitarity_defect)
            rev.append(float(np.max(np.abs(wr.matrix - dagger(w.matrix)))))
            conj.append(float(np.max(np.abs(wc.matrix - dagger(u) @ w.matrix @ u))))
            mats.append(w.matrix)
        comm = float(np.max(np.abs(mats[0] @ mats[1] - mats[1] @ mats[0])))
        ok = max(unit) < 1e-10 and max(rev) < 1e-8 and max(conj) < 1e-8
        return ok, {"unitarity": max(unit), "reverse_vs_inverse": max(rev), "conjugation": max(conj),
                    "commutator": comm}, {"unitarity<": 1e-10, "reverse<": 1e-8, "conjugation<": 1e-8}
    return _timed("8", "GROUP PROPERTIES", 5.0, body)


def check_contraction(settings=Settings()):
    def body():
        axis = np.array([np.sin(1.0) * np.cos(0.7), np.sin(1.0) * np.sin(0.7), np.cos(1.0)])
        phases = []
        for alpha in (0.2, 0.02):
            c = cone_circle(axis, alpha)
            phases.append(abelian_phase_line_integral(_upper_sampler(settings, c(0.0)[0]), c, settings.segments))
        ratio = abs(phases[0]) / abs(phases[1])
        return ratio >= 50, {"ratio": ratio, "theta_large": phases[0], "theta_small": phases[1]}, {">=": 50}
    return _timed("9", "CONTRACTION LIMIT", 2.0, body)


def check_guard_probe(settings=Settings()):
    """A loop hugging the singular axis must be refused or come out right, never silently wrong."""
    def body():
        c = colatitude_circle(1.0, 1e-6)
        try:
            line = abelian_phase_line_integral(_upper_sampler(settings, c(0.0)[0]), c, settings.segments)
        except GuardBandError:
            return True, {"refused": True}, {"refused_or_gap<": 1e-6}
        omega = solid_angle(c, settings.segments, 0.0)
        gap = abs(np.exp(1j * line) - np.exp(-0.5j * omega))
        return gap < 1e-6, {"refused": False, "gap": gap}, {"refused_or_gap<": 1e-6}
    return _timed("G", "SINGULAR-AXIS GUARD", 1.0, body)


CHECKS = (
    check_solid_angle,
    check_stokes,
    check_abelian_reduction,
    check_curvature_invariant,
    check_connection,
    check_adiabatic,
    check_wilczek_zee,
    check_group,
    check_contraction,
    check_guard_probe,
)


def run_all(settings=Settings()):
    return [check(settings) for check in CHECKS]
