"""Exception hierarchy.

Every rejection raised by the library derives from :class:`GeophaseError`,
which is a ``ValueError`` so callers treating bad input generically keep
working.
"""


class GeophaseError(ValueError):
    """Base class for all rejections raised by geophase."""


class NonHermitianError(GeophaseError):
    """Input expected to be Hermitian (or anti-Hermitian) is not, beyond tolerance."""

    def __init__(self, defect, tol, what="Hermitian"):
        self.defect = float(defect)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not {what}: symmetry defect {self.defect:.3e} exceeds tolerance {self.tol:.3e}"
        )


class SingularMatrixError(GeophaseError):
    """A matrix that must be invertible has a tiny singular value."""

    def __init__(self, smallest, threshold, hint=""):
        self.smallest = float(smallest)
        self.threshold = float(threshold)
        msg = f"smallest singular value {self.smallest:.3e} is below {self.threshold:.3e}"
        super().__init__(msg + (f"; {hint}" if hint else ""))


class DegeneracyError(GeophaseError):
    """Level clustering is ambiguous or a multiplicity changed."""


class GuardBandError(GeophaseError):
    """A parameter point falls inside the excluded region around a section singularity."""


class AdiabaticityError(GeophaseError):
    """Leakage out of the tracked eigenspace exceeds the accepted threshold."""

    def __init__(self, leakage, threshold):
        self.leakage = float(leakage)
        self.threshold = float(threshold)
        super().__init__(
            f"leakage {self.leakage:.3e} exceeds threshold {self.threshold:.3e}; evolution is not adiabatic"
        )


class ConfigError(GeophaseError):
    """Malformed run configuration or input file."""
