"""Central table of numerical defaults.

Every physical or numerical knob that is not dictated by the physics lives
here, so that a run is fully described by these values plus its config.
The CLI exposes each of them as a flag.
"""

#: Segments per closed curve for line integrals and path-ordered exponentials.
SEGMENTS = 4096

#: Angular exclusion (radians) around a section's singular axis.
GUARD_BAND = 1e-3

#: Relative degeneracy threshold; the absolute tolerance is this times max(||H||, 1).
DEGENERACY_RTOL = 1e-8

#: Largest accepted leakage when projecting an evolved block onto U(r).
LEAKAGE_THRESHOLD = 0.1

#: Finite-difference step for connection and curvature stencils.
FD_STEP = 1e-4

#: Time steps per unit of total sweep time for Schrodinger integration.
STEPS_PER_UNIT_TIME = 64

#: Smallest singular value of a neighbour overlap accepted by gauge alignment.
MIN_OVERLAP_SINGULAR = 0.1

#: Hermiticity tolerance relative to the largest entry magnitude.
HERMITIAN_RTOL = 1e-12

#: Anti-Hermiticity tolerance for exponentiated generators.
ANTIHERMITIAN_TOL = 1e-10

#: Smallest singular value accepted by the polar decomposition.
POLAR_MIN_SINGULAR = 1e-12


def degeneracy_tol(norm):
    """Absolute clustering tolerance for an operator of the given norm."""
    return DEGENERACY_RTOL * max(float(norm), 1.0)


TABLE = {
    "segments": SEGMENTS,
    "guard_band": GUARD_BAND,
    "degeneracy_rtol": DEGENERACY_RTOL,
    "leakage_threshold": LEAKAGE_THRESHOLD,
    "fd_step": FD_STEP,
    "steps_per_unit_time": STEPS_PER_UNIT_TIME,
    "min_overlap_singular": MIN_OVERLAP_SINGULAR,
}
