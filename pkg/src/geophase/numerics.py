"""Dense complex-matrix kernels.

All functions accept a single matrix or a stack of matrices along leading
axes, and are pure.
"""
import numpy as np

from . import defaults
from .errors import DegeneracyError, NonHermitianError, SingularMatrixError


def dagger(m):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_defect(m):
    """Largest ``|M - M^dagger|`` entry relative to the largest entry magnitude."""
    m = np.asarray(m)
    scale = np.max(np.abs(m), axis=(-1, -2))
    defect = np.max(np.abs(m - dagger(m)), axis=(-1, -2))
    return np.where(scale > 0, defect / np.where(scale > 0, scale, 1.0), defect)


def symmetrize(m, tol=defaults.HERMITIAN_RTOL):
    """Return ``(M + M^dagger)/2`` after checking the defect is within ``tol``."""
    m = np.asarray(m, dtype=np.complex128)
    defect = np.max(hermiticity_defect(m))
    if defect > tol:
        raise NonHermitianError(defect, tol)
    return 0.5 * (m + dagger(m))


def hermitian_eigendecompose(m, tol=defaults.HERMITIAN_RTOL):
    """Eigen-decompose a Hermitian matrix (or stack).

    Parameters
    ----------
    m : array_like, shape (..., d, d)
    tol : float
        Accepted relative Hermiticity defect. Inputs within it are
        symmetrized before decomposition.

    Returns
    -------
    eigenvalues : ndarray, shape (..., d)
        Ascending.
    eigenvectors : ndarray, shape (..., d, d)
        Orthonormal columns, ``m @ v[:, i] = w[i] * v[:, i]``.
    """
    return np.linalg.eigh(symmetrize(m, tol))


def exp_antihermitian(x, tol=defaults.ANTIHERMITIAN_TOL):
    """Unitary exponential of an anti-Hermitian matrix (or stack).

    Uses the spectral decomposition of the Hermitian matrix ``i X``, which
    keeps the result unitary to machine precision.
    """
    x = np.asarray(x, dtype=np.complex128)
    defect = np.max(np.abs(x + dagger(x))) if x.size else 0.0
    if defect > tol:
        raise NonHermitianError(defect, tol, what="anti-Hermitian")
    h = 0.5j * (x - dagger(x))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)[..., None, :]) @ dagger(v)


def unitarize(m, min_singular=defaults.POLAR_MIN_SINGULAR):
    """Unitary polar factor ``M (M^dagger M)^{-1/2}`` of a square matrix (or stack).

    Raises
    ------
    SingularMatrixError
        If any smallest singular value is at or below ``min_singular``.
    """
    m = np.asarray(m, dtype=np.complex128)
    w, s, vh = np.linalg.svd(m)
    smallest = np.min(s[..., -1]) if s.size else np.inf
    if smallest <= min_singular:
        raise SingularMatrixError(smallest, min_singular)
    return w @ vh


def unitarity_defect(u):
    """Spectral norm of ``U^dagger U - I`` (maximum over a stack)."""
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return float(np.max(np.linalg.norm(dagger(u) @ u - eye, ord=2, axis=(-2, -1))))


def cluster_levels(eigenvalues, tol):
    """Group ascending eigenvalues into degenerate levels.

    Returns a list of ``(start, stop)`` index pairs. Neighbours closer than
    ``tol / 2`` share a level, gaps above ``tol`` separate levels, and a gap
    in ``[tol/2, tol]`` is too close to call.

    Raises
    ------
    DegeneracyError
        On an ambiguous gap.
    """
    if tol <= 0:
        raise ValueError("degeneracy tolerance must be positive")
    e = np.asarray(eigenvalues, dtype=float)
    gaps = np.diff(e)
    ambiguous = (gaps >= 0.5 * tol) & (gaps <= tol)
    if np.any(ambiguous):
        g = gaps[ambiguous][0]
        raise DegeneracyError(
            f"eigenvalue gap {g:.3e} is ambiguous for degeneracy tolerance {tol:.3e}; choose another tolerance"
        )
    levels = []
    start = 0
    for i, g in enumerate(gaps):
        if g > tol:
            levels.append((start, i + 1))
            start = i + 1
    levels.append((start, e.size))
    return levels
