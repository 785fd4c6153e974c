"""Berry phases and Wilczek-Zee holonomies of parameter-dependent Hamiltonians."""
from .adiabatic import extract_geometric_phase, integrate_frame_ode, integrate_schrodinger, sweep
from .connection import (
    ConnectionSampler,
    CurvatureSampler,
    berry_connection_numeric,
    curvature_invariant,
    curvature_numeric,
    gauge_transform,
)
from .errors import (
    AdiabaticityError,
    ConfigError,
    DegeneracyError,
    GeophaseError,
    GuardBandError,
    NonHermitianError,
    SingularMatrixError,
)
from .frames import ParamCurve, Schedule, colatitude_circle, cone_circle, eigenframe, frame_along_curve, polyline
from .hamiltonian import HamiltonianFamily, clifford_family, doubled, linear_family, spectrum, spin_half
from .holonomy import (
    HolonomyElement,
    abelian_phase_line_integral,
    abelian_phase_surface_integral,
    dynamical_phase,
    holonomy_from_frames,
    mod_2pi,
    path_ordered_exponential,
    solid_angle,
    spherical_cap,
)
from .kernels import BACKEND

__version__ = "0.1.0"
