"""Command-line interface: ``geophase {phase,holonomy,sweep,curvature-map,validate}``.

Runs are described by a JSON config whose fields mirror :class:`RunConfig`;
command-line flags override config values. Results go to stdout or
``--output`` as JSON (``{"meta": ..., "result": ...}``) or CSV. Complex
numbers are written as ``[re, im]`` pairs.

Exit status: 0 on success, 1 on a numerical failure, 2 on a configuration
error.
"""
import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, defaults
from .adiabatic import sweep
from .connection import ConnectionSampler, CurvatureSampler
from .errors import ConfigError, DegeneracyError, GeophaseError, GuardBandError
from .frames import colatitude_circle, frame_along_curve, polyline
from .hamiltonian import clifford_family, doubled, load_linear_family, spin_half, spectrum
from .holonomy import (
    abelian_phase_line_integral,
    holonomy_from_frames,
    mod_2pi,
    path_ordered_exponential,
    solid_angle,
)
from .kernels import BACKEND

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

BUILTINS = {
    "spin_half": spin_half,
    "doubled_spin_half": lambda: doubled(spin_half(), 2),
    "clifford": clifford_family,
}


@dataclass
class CurveDescriptor:
    """Exactly one of a colatitude circle, an inline point list or a point file."""

    kind: str
    radius: float = 1.0
    theta0: float = 0.0
    turns: int = 1
    points: list | None = None
    path: str | None = None

    @classmethod
    def parse(cls, data, base_dir=Path(".")):
        if not isinstance(data, dict) or len(data) != 1:
            raise ConfigError("curve must be an object with exactly one of colatitude_circle, samples, file")
        (kind, body), = data.items()
        if kind == "colatitude_circle":
            if not isinstance(body, dict):
                raise ConfigError("colatitude_circle needs {radius, theta0, turns}")
            unknown = set(body) - {"radius", "theta0", "turns"}
            if unknown:
                raise ConfigError(f"unknown colatitude_circle fields {sorted(unknown)}")
            radius = float(body.get("radius", 1.0))
            theta0 = float(body.get("theta0", np.pi / 2))
            turns = body.get("turns", 1)
            if not radius > 0:
                raise ConfigError("colatitude_circle radius must be positive")
            if not 0 <= theta0 <= np.pi:
                raise ConfigError("colatitude_circle theta0 must lie in [0, pi]")
            if not isinstance(turns, int) or isinstance(turns, bool) or turns == 0:
                raise ConfigError("colatitude_circle turns must be a nonzero integer")
            return cls("colatitude_circle", radius, theta0, turns)
        if kind == "samples":
            return cls("samples", points=_point_list(body, "samples"))
        if kind == "file":
            path = base_dir / str(body)
            if not path.is_file():
                raise ConfigError(f"curve file {path} does not exist")
            try:
                pts = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"curve file {path} is not valid JSON: {exc}") from None
            return cls("samples", points=_point_list(pts, str(path)), path=str(path))
        raise ConfigError(f"unknown curve descriptor {kind!r}")

    def build(self, param_dim):
        if self.kind == "colatitude_circle":
            if param_dim != 3:
                raise ConfigError("colatitude_circle needs a three-parameter family")
            return colatitude_circle(self.radius, self.theta0, self.turns)
        pts = np.asarray(self.points, dtype=float)
        if pts.shape[1] != param_dim:
            raise ConfigError(f"curve points have {pts.shape[1]} components, family has {param_dim} parameters")
        closed = len(pts) > 1 and np.array_equal(pts[0], pts[-1])
        return polyline(pts, closed=closed if len(pts) > 1 else True)


def _point_list(data, what):
    try:
        pts = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: expected a list of numeric vectors") from None
    if pts.ndim != 2 or len(pts) == 0:
        raise ConfigError(f"{what}: expected a nonempty list of n-vectors")
    if not np.all(np.isfinite(pts)):
        raise ConfigError(f"{what}: points must be finite")
    return pts.tolist()


@dataclass
class RunConfig:
    hamiltonian: str = "spin_half"
    curve: CurveDescriptor = field(default_factory=lambda: CurveDescriptor("colatitude_circle", 1.0, np.pi / 2))
    level: int = -1
    sweep: list | None = None
    segments: int = defaults.SEGMENTS
    steps: int = defaults.STEPS_PER_UNIT_TIME
    degeneracy_tol: float | None = None
    guard_band: float = defaults.GUARD_BAND
    leakage_threshold: float = defaults.LEAKAGE_THRESHOLD
    fd_step: float = defaults.FD_STEP
    grid: dict | None = None
    seed: int = 20240611
    jobs: int = 1
    output: str | None = None
    format: str = "json"
    base_dir: Path = Path(".")

    FIELDS = ("hamiltonian", "curve", "level", "sweep", "segments", "steps", "degeneracy_tol", "guard_band",
              "leakage_threshold", "fd_step", "grid", "seed", "jobs", "output", "format")

    @classmethod
    def from_dict(cls, data, base_dir=Path(".")):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(cls.FIELDS)
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        cfg = cls(base_dir=base_dir)
        for key, value in data.items():
            if key == "curve":
                value = CurveDescriptor.parse(value, base_dir)
            elif key == "level":
                value = _parse_level(value)
            setattr(cfg, key, value)
        return cfg

    def validate(self):
        for name in ("segments", "steps", "jobs"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not self.guard_band >= 0:
            raise ConfigError("guard_band must be nonnegative")
        if self.degeneracy_tol is not None and not self.degeneracy_tol > 0:
            raise ConfigError("degeneracy_tol must be positive")
        if not self.fd_step > 0:
            raise ConfigError("fd_step must be positive")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.sweep is not None:
            if not isinstance(self.sweep, list) or not self.sweep:
                raise ConfigError("sweep must be a nonempty list of total times")
            if any(not isinstance(t, (int, float)) or isinstance(t, bool) or not t > 0 for t in self.sweep):
                raise ConfigError("sweep times must be positive numbers")
        return self

    def family(self):
        name = self.hamiltonian
        if isinstance(name, dict) and set(name) == {"file"}:
            path = self.base_dir / str(name["file"])
            if not path.is_file():
                raise ConfigError(f"linear family file {path} does not exist")
            try:
                return load_linear_family(path)
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ConfigError(f"cannot read linear family {path}: {exc}") from None
            except GeophaseError as exc:
                raise ConfigError(f"invalid linear family {path}: {exc}") from None
        if isinstance(name, str) and name in BUILTINS:
            return BUILTINS[name]()
        raise ConfigError(f"unknown hamiltonian {name!r}; use one of {sorted(BUILTINS)} or {{\"file\": path}}")

    def describe(self):
        return {
            "hamiltonian": self.hamiltonian,
            "level": self.level,
            "segments": self.segments,
            "steps_per_unit_time": self.steps,
            "degeneracy_tol": self.degeneracy_tol,
            "guard_band": self.guard_band,
            "fd_step": self.fd_step,
        }


def _parse_level(value):
    if value in ("+", "upper"):
        return -1
    if value in ("-", "lower"):
        return 0
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    raise ConfigError("level must be an integer index or '+'/'-'")


# -- output -------------------------------------------------------------------

def complex_pairs(m):
    m = np.asarray(m, dtype=np.complex128)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def _json_text(payload):
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _emit(text, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _meta(cfg, command):
    return {"command": command, "version": __version__, "backend": BACKEND, "config": cfg.describe()}


# -- commands -------------------------------------------------------------------

def _level_sign(family, cfg, base):
    if family.kind != "spin_half":
        return None
    n = len(spectrum(family, base, cfg.degeneracy_tol))
    index = cfg.level if cfg.level >= 0 else n + cfg.level
    return 1 if index == n - 1 else -1


def cmd_phase(cfg):
    family = cfg.family()
    curve = cfg.curve.build(family.param_dim)
    if not curve.closed:
        raise ConfigError("phase needs a closed curve")
    base = curve(0.0)[0]
    sampler = ConnectionSampler(family, cfg.level, base, cfg.fd_step, cfg.degeneracy_tol, guard_band=cfg.guard_band)
    if sampler.multiplicity != 1:
        raise ConfigError(f"phase needs a nondegenerate level; level {cfg.level} has multiplicity "
                          f"{sampler.multiplicity} (use the holonomy command)")
    line = abelian_phase_line_integral(sampler, curve, cfg.segments)
    result = {"theta_line": line, "theta_line_mod_2pi": mod_2pi(line)}
    sign = _level_sign(family, cfg, base)
    if sign is not None:
        omega = solid_angle(curve, cfg.segments, 0.0)
        law = -sign * 0.5 * omega
        result.update(
            solid_angle=omega,
            theta_solid_angle=law,
            exp_match=float(abs(np.exp(1j * line) - np.exp(1j * law))),
        )
    return {"meta": _meta(cfg, "phase"), "result": result}


def cmd_holonomy(cfg):
    family = cfg.family()
    curve = cfg.curve.build(family.param_dim)
    if not curve.closed:
        raise ConfigError("holonomy needs a closed curve")
    base = curve(0.0)[0]
    sampler = ConnectionSampler(family, cfg.level, base, cfg.fd_step, cfg.degeneracy_tol, guard_band=cfg.guard_band)
    w = path_ordered_exponential(sampler, curve, cfg.segments)
    frames = frame_along_curve(family, curve, cfg.level, cfg.degeneracy_tol, cfg.segments,
                               guard_band=cfg.guard_band)
    wf = holonomy_from_frames(frames)
    result = {
        "rank": w.rank,
        "matrix": complex_pairs(w.matrix),
        "unitarity_defect": w.unitarity_defect,
        "frames_distance": float(np.linalg.norm(w.matrix - wf.matrix, ord=2)),
        "base_point": base.tolist(),
    }
    if w.rank == 1:
        result.update(phase=w.abelian_phase, phase_mod_2pi=w.phase_mod_2pi)
    return {"meta": _meta(cfg, "holonomy"), "result": result}


def _sweep_oracle(family, cfg, curve):
    """Reference holonomy for the error column: the solid-angle law for spin-1/2, else the P-exponent."""
    base = curve(0.0)[0]
    sign = _level_sign(family, cfg, base)
    if sign is not None:
        return np.array([[np.exp(-0.5j * sign * solid_angle(curve, cfg.segments, 0.0))]])
    sampler = ConnectionSampler(family, cfg.level, base, cfg.fd_step, cfg.degeneracy_tol, guard_band=cfg.guard_band)
    return path_ordered_exponential(sampler, curve, cfg.segments).matrix


def cmd_sweep(cfg):
    if not cfg.sweep:
        raise ConfigError("sweep needs a nonempty 'sweep' list of total times")
    family = cfg.family()
    curve = cfg.curve.build(family.param_dim)
    if not curve.closed:
        raise ConfigError("sweep needs a closed curve")
    oracle = _sweep_oracle(family, cfg, curve)

    def row(t):
        n_steps = max(1, int(round(cfg.steps * t)))
        res = sweep(family, curve, cfg.level, t, n_steps, cfg.degeneracy_tol, guard_band=cfg.guard_band)
        hol = res.extraction.holonomy
        out = {
            "T": float(t),
            "steps": n_steps,
            "leakage": res.extraction.leakage,
            "leakage_ok": bool(res.extraction.leakage <= cfg.leakage_threshold),
            "adiabatic_defect": res.defect,
            "error_vs_oracle": float(np.linalg.norm(hol.matrix - oracle, ord=2)),
        }
        if hol.rank == 1:
            out["phase"] = hol.abelian_phase
        else:
            out["matrix"] = complex_pairs(hol.matrix)
        return out

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        rows = list(pool.map(row, cfg.sweep))
    result = {"oracle": complex_pairs(oracle), "rows": rows}
    return {"meta": _meta(cfg, "sweep"), "result": result}


def _sweep_csv(payload):
    rows = payload["result"]["rows"]
    header = ["T", "steps", "phase", "leakage", "leakage_ok", "adiabatic_defect", "error_vs_oracle"]
    body = [[r["T"], r["steps"], r.get("phase", ""), r["leakage"], int(r["leakage_ok"]), r["adiabatic_defect"],
             r["error_vs_oracle"]] for r in rows]
    return _csv_text(header, body)


def grid_points(grid, param_dim):
    """Grid spec: ``{"shell": {radius, n_theta, n_phi}}``, ``{"box": {min, max, n}}`` or ``{"points": [...]}``."""
    if not isinstance(grid, dict) or len(grid) != 1:
        raise ConfigError("grid must be an object with exactly one of shell, box, points")
    (kind, body), = grid.items()
    if kind == "points":
        return np.asarray(_point_list(body, "grid points"))
    if not isinstance(body, dict):
        raise ConfigError(f"grid {kind} needs an object")
    if kind == "shell":
        if param_dim != 3:
            raise ConfigError("shell grids need a three-parameter family")
        r = float(body.get("radius", 1.0))
        nt, nph = int(body.get("n_theta", 16)), int(body.get("n_phi", 32))
        if not r > 0 or nt < 1 or nph < 1:
            raise ConfigError("shell needs radius > 0 and positive n_theta, n_phi")
        th = (np.arange(nt) + 0.5) * np.pi / nt
        ph = np.arange(nph) * 2 * np.pi / nph
        t, p = np.meshgrid(th, ph, indexing="ij")
        return r * np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], -1).reshape(-1, 3)
    if kind == "box":
        lo, hi = np.asarray(body.get("min"), dtype=float), np.asarray(body.get("max"), dtype=float)
        n = int(body.get("n", 5))
        if lo.shape != (param_dim,) or hi.shape != (param_dim,) or n < 1:
            raise ConfigError(f"box needs min/max of length {param_dim} and n >= 1")
        axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, param_dim)
    raise ConfigError(f"unknown grid kind {kind!r}")


def cmd_curvature_map(cfg, chunk=256):
    family = cfg.family()
    if cfg.grid is None:
        raise ConfigError("curvature-map needs a 'grid' in the config")
    pts = grid_points(cfg.grid, family.param_dim)
    n = family.param_dim
    sampler = CurvatureSampler(family, cfg.level, pts[0], cfg.fd_step, cfg.degeneracy_tol, cfg.guard_band)
    if sampler.spec.size != 1:
        raise ConfigError("curvature-map needs a nondegenerate level")

    def evaluate_chunk(block):
        try:
            return [(p, f) for p, f in zip(block, sampler(block))]
        except (GuardBandError, DegeneracyError):
            out = []
            for p in block:
                try:
                    out.append((p, sampler(p[None])[0]))
                except (GuardBandError, DegeneracyError):
                    out.append((p, None))
            return out

    blocks = [pts[i:i + chunk] for i in range(0, len(pts), chunk)]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        done = [x for part in pool.map(evaluate_chunk, blocks) for x in part]
    k, l = np.triu_indices(n, 1)
    rows, skipped = [], 0
    for p, f in done:
        if f is None:
            skipped += 1
            continue
        comps = f[k, l]
        rows.append([*map(float, p), *map(float, comps), float(2 * np.sum(comps ** 2))])
    header = [f"lambda{i + 1}" for i in range(n)] + [f"F{a + 1}{b + 1}" for a, b in zip(k, l)] + ["F2"]
    result = {"columns": header, "rows": rows, "skipped": skipped, "evaluated": len(rows)}
    return {"meta": _meta(cfg, "curvature-map"), "result": result}


def cmd_validate(cfg):
    from .validation import Settings, run_all

    settings = Settings(cfg.segments, cfg.guard_band, cfg.steps, cfg.fd_step, cfg.seed)
    results = run_all(settings)
    for r in results:
        print(r.line(), file=sys.stderr)
    passed = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed", file=sys.stderr)
    payload = {"meta": _meta(cfg, "validate"), "result": {"passed": passed, "checks": [r.as_dict() for r in results]}}
    return payload, passed


# -- entry point ------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="geophase", description="Berry phases and Wilczek-Zee holonomies.")
    p.add_argument("command", choices=["phase", "holonomy", "sweep", "curvature-map", "validate"])
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--output", help="write results here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--segments", type=int, help=f"curve segments (default {defaults.SEGMENTS})")
    p.add_argument("--steps", type=int,
                   help=f"time steps per unit sweep time (default {defaults.STEPS_PER_UNIT_TIME})")
    p.add_argument("--guard-band", type=float, help=f"section guard band in radians (default {defaults.GUARD_BAND})")
    p.add_argument("--degeneracy-tol", type=float, help="absolute eigenvalue clustering tolerance")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("--jobs", type=int, help="worker threads for sweep rows and grid chunks")
    return p


def load_config(args):
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        cfg = RunConfig.from_dict(data, path.parent)
    else:
        cfg = RunConfig()
    overrides = {
        "output": args.output,
        "format": args.format,
        "segments": args.segments,
        "steps": args.steps,
        "guard_band": args.guard_band,
        "degeneracy_tol": args.degeneracy_tol,
        "seed": args.seed,
        "jobs": args.jobs,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "validate":
            payload, passed = cmd_validate(cfg)
            _emit(_json_text(payload), cfg.output)
            return EXIT_OK if passed else EXIT_NUMERIC
        command = {"phase": cmd_phase, "holonomy": cmd_holonomy, "sweep": cmd_sweep,
                   "curvature-map": cmd_curvature_map}[args.command]
        payload = command(cfg)
    except ConfigError as exc:
        print(f"geophase: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeophaseError as exc:
        print(f"geophase: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.format == "csv":
        if args.command == "sweep":
            text = _sweep_csv(payload)
        elif args.command == "curvature-map":
            text = _csv_text(payload["result"]["columns"], payload["result"]["rows"])
        else:
            print(f"geophase: configuration error: {args.command} has no CSV form", file=sys.stderr)
            return EXIT_CONFIG
    else:
        text = _json_text(payload)
    _emit(text, cfg.output)
    if args.command == "curvature-map" and payload["result"]["skipped"]:
        print(f"geophase: skipped {payload['result']['skipped']} grid points with no usable section", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
