"""Parameter-dependent Hamiltonian families H(lambda).

Three kinds are supported:

``spin_half``
    ``H = lambda^k sigma_k`` on C^2 with three real parameters.
``linear_family``
    ``H = M_0 + sum_k lambda^k M_k`` for Hermitian ``M_0..M_n``.
``doubled``
    ``H_inner(lambda) (x) I_m``; every inner level becomes ``m``-fold
    degenerate, which gives non-Abelian test cases with known answers.

Parameter points are plain float arrays; stacks of points with shape
``(..., n)`` are evaluated in one call.
"""
from dataclasses import dataclass, field
import json
from pathlib import Path

import numpy as np

from . import defaults
from .errors import ConfigError, DegeneracyError, GeophaseError
from .numerics import cluster_levels, hermitian_eigendecompose, hermiticity_defect

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)


@dataclass(frozen=True, eq=False)
class HamiltonianFamily:
    """Immutable descriptor of a Hamiltonian family.

    ``gauge_rows`` names the basis rows whose block of an eigenframe is made
    Hermitian positive when fixing the gauge of a section; ``None`` lets the
    frame code pick rows at the base point of each computation.
    """

    kind: str
    dim: int
    param_dim: int
    matrices: np.ndarray | None = None
    inner: "HamiltonianFamily | None" = None
    copies: int = 1
    gauge_rows: tuple | None = None
    name: str = field(default="")

    def __post_init__(self):
        if self.kind == "spin_half":
            if (self.dim, self.param_dim) != (2, 3):
                raise GeophaseError("spin_half family must have dim 2 and 3 parameters")
        elif self.kind == "linear_family":
            mats = self.matrices
            if mats is None or mats.ndim != 3 or mats.shape[0] != self.param_dim + 1:
                raise GeophaseError("linear_family needs param_dim + 1 basis matrices")
            if mats.shape[1:] != (self.dim, self.dim):
                raise GeophaseError(f"basis matrices must be {self.dim}x{self.dim}, got {mats.shape[1:]}")
            defect = float(np.max(hermiticity_defect(mats)))
            if defect > defaults.HERMITIAN_RTOL:
                raise GeophaseError(f"basis matrices are not Hermitian (defect {defect:.3e})")
        elif self.kind == "doubled":
            if self.inner is None or self.copies < 1:
                raise GeophaseError("doubled family needs an inner family and copies >= 1")
            if self.dim != self.inner.dim * self.copies:
                raise GeophaseError("doubled family dim must equal inner.dim * copies")
        else:
            raise GeophaseError(f"unknown family kind {self.kind!r}")

    def check_point(self, lam):
        lam = np.asarray(lam, dtype=float)
        if lam.shape[-1:] != (self.param_dim,):
            raise GeophaseError(
                f"parameter point has dimension {lam.shape[-1:] or 0}, family expects {self.param_dim}"
            )
        return lam

    def __call__(self, lam):
        return evaluate(self, lam)


def spin_half():
    """The spin-1/2 family ``H = lambda^k sigma_k``."""
    return HamiltonianFamily("spin_half", 2, 3, gauge_rows=(1,), name="spin_half")


def linear_family(matrices, gauge_rows=None, name="linear_family"):
    """Family ``M_0 + sum_k lambda^k M_k`` from a sequence of square matrices."""
    mats = np.asarray(matrices, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise GeophaseError("linear family needs a stack of square matrices")
    return HamiltonianFamily(
        "linear_family",
        mats.shape[1],
        mats.shape[0] - 1,
        matrices=mats,
        gauge_rows=None if gauge_rows is None else tuple(gauge_rows),
        name=name,
    )


def doubled(inner, copies=2):
    """Family ``H_inner (x) I_copies``."""
    rows = None
    if inner.gauge_rows is not None:
        rows = tuple(i * copies + a for i in inner.gauge_rows for a in range(copies))
    return HamiltonianFamily(
        "doubled",
        inner.dim * copies,
        inner.param_dim,
        inner=inner,
        copies=copies,
        gauge_rows=rows,
        name=f"doubled({inner.name},{copies})",
    )


def clifford_family():
    """Five-parameter family ``sum_k lambda^k Gamma_k`` with anticommuting 4x4 ``Gamma_k``.

    Levels are ``+-|lambda|``, each doubly degenerate, and the holonomies of
    either level do not commute in general.
    """
    sx, sy, sz = SIGMA
    eye = np.eye(2)
    gammas = [np.kron(sx, sx), np.kron(sx, sy), np.kron(sx, sz), np.kron(sy, eye), np.kron(sz, eye)]
    return linear_family([np.zeros((4, 4))] + gammas, name="clifford")


def spin_half_hamiltonian(lam):
    """``[[l3, l1 - i l2], [l1 + i l2, -l3]]`` for a point (or stack) in R^3."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1:] != (3,):
        raise GeophaseError("spin-1/2 Hamiltonian needs a 3-component parameter point")
    h = np.empty(lam.shape[:-1] + (2, 2), dtype=np.complex128)
    h[..., 0, 0] = lam[..., 2]
    h[..., 0, 1] = lam[..., 0] - 1j * lam[..., 1]
    h[..., 1, 0] = lam[..., 0] + 1j * lam[..., 1]
    h[..., 1, 1] = -lam[..., 2]
    return h


def evaluate(family, lam):
    """Evaluate ``H(lambda)`` at a point or a stack of points."""
    lam = family.check_point(lam)
    if family.kind == "spin_half":
        return spin_half_hamiltonian(lam)
    if family.kind == "linear_family":
        m = family.matrices
        return m[0] + np.einsum("...k,kij->...ij", lam.astype(np.complex128), m[1:])
    h = evaluate(family.inner, lam)
    eye = np.eye(family.copies)
    return np.einsum("...ij,ab->...iajb", h, eye).reshape(lam.shape[:-1] + (family.dim, family.dim))


@dataclass(frozen=True, eq=False)
class Level:
    """One energy level at a parameter point."""

    energy: float
    multiplicity: int
    basis: np.ndarray
    start: int

    @property
    def stop(self):
        return self.start + self.multiplicity


def resolve_tol(h, degeneracy_tol=None):
    if degeneracy_tol is None:
        return defaults.degeneracy_tol(np.linalg.norm(h, ord=2))
    if degeneracy_tol <= 0:
        raise GeophaseError("degeneracy_tol must be positive")
    return float(degeneracy_tol)


def spectrum(family, lam, degeneracy_tol=None):
    """Energy levels at one parameter point, ascending.

    Eigenvalues closer than ``degeneracy_tol`` are grouped into one level
    whose energy is the cluster mean and whose basis is an orthonormal
    ``d x r`` block. The default tolerance scales with ``||H||``.
    """
    h = evaluate(family, lam)
    if h.ndim != 2:
        raise GeophaseError("spectrum takes a single parameter point")
    tol = resolve_tol(h, degeneracy_tol)
    w, v = hermitian_eigendecompose(h)
    return [
        Level(float(np.mean(w[a:b])), b - a, v[:, a:b], a)
        for a, b in cluster_levels(w, tol)
    ]


def select_level(levels, level_index):
    """Pick a level by index; negative indices count from the top."""
    try:
        return levels[level_index]
    except IndexError:
        raise DegeneracyError(
            f"level index {level_index} out of range for {len(levels)} levels"
        ) from None


def load_linear_family(path):
    """Read a linear family from JSON.

    The file holds ``{"dim": d, "param_dim": n, "matrices": [M_0, ..., M_n]}``
    with each matrix a row-major nested list of ``[re, im]`` pairs.
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read linear family file {path}: {exc}") from exc
    return linear_family_from_dict(data)


def linear_family_from_dict(data):
    try:
        d = int(data["dim"])
        n = int(data["param_dim"])
        raw = np.asarray(data["matrices"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed linear family: {exc}") from exc
    if raw.shape != (n + 1, d, d, 2):
        raise ConfigError(f"matrices must have shape ({n + 1}, {d}, {d}, 2), got {raw.shape}")
    try:
        return linear_family(raw[..., 0] + 1j * raw[..., 1], gauge_rows=data.get("gauge_rows"))
    except GeophaseError as exc:
        raise ConfigError(str(exc)) from exc


def linear_family_to_dict(family):
    m = family.matrices
    return {
        "dim": family.dim,
        "param_dim": family.param_dim,
        "matrices": np.stack([m.real, m.imag], axis=-1).tolist(),
    }
