import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geophase.errors import GeophaseError, GuardBandError
from geophase.frames import colatitude_circle
from geophase.hamiltonian import spin_half_hamiltonian
from geophase.spin_half import (
    AnalyticSampler,
    SphericalPoint,
    connection_cartesian,
    connection_spherical,
    curvature_cartesian,
    curvature_invariant,
    curvature_matrix,
    eigenvalues,
    eigenvector_cartesian,
    eigenvector_spherical,
    phase_law,
)


def fd_berry(lam, sign, h=1e-5):
    """Berry connection i (phi, d_k phi) by differencing the Cartesian section."""
    lam = np.asarray(lam, dtype=float)
    phi = eigenvector_cartesian(lam, sign)
    out = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        d = (eigenvector_cartesian(lam + e, sign) - eigenvector_cartesian(lam - e, sign)) / (2 * h)
        out.append(np.real(1j * np.vdot(phi, d)))
    return np.array(out)


def test_eigenvalues():
    assert eigenvalues([3.0, 0.0, 4.0]) == (-5.0, 5.0)


@pytest.mark.parametrize("sign", [1, -1])
def test_sections_are_eigenvectors(sign, rng):
    for _ in range(5):
        s = SphericalPoint(rng.uniform(0.5, 2), rng.uniform(0.1, 3.0), rng.uniform(0, 6))
        phi = eigenvector_spherical(s, sign)
        h = spin_half_hamiltonian(s.cartesian())
        assert np.allclose(h @ phi, sign * s.r * phi)
        assert np.vdot(phi, phi).real == pytest.approx(1.0)


@pytest.mark.parametrize("sign", [1, -1])
def test_cartesian_and_spherical_sections_agree(sign, rng):
    s = SphericalPoint(1.3, 1.1, 0.4)
    assert np.allclose(eigenvector_cartesian(s.cartesian(), sign), eigenvector_spherical(s, sign))


def test_section_at_first_axis():
    # theta = pi/2, phi = 0
    assert np.allclose(eigenvector_cartesian([1, 0, 0], 1), [1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert np.allclose(eigenvector_cartesian([1, 0, 0], -1), [-1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_guard_band():
    with pytest.raises(GuardBandError):
        eigenvector_spherical(SphericalPoint(1, 5e-4, 0), 1)
    with pytest.raises(GuardBandError):
        eigenvector_spherical(SphericalPoint(1, np.pi - 5e-4, 0), -1)
    eigenvector_spherical(SphericalPoint(1, np.pi - 5e-4, 0), 1)


def test_spherical_connection_values():
    assert connection_spherical(SphericalPoint(1, np.pi / 2, 0), 1) == pytest.approx((0, 0, 0.5))
    assert connection_spherical(SphericalPoint(1, np.pi / 3, 0), 1)[2] == pytest.approx(0.75)
    assert connection_spherical(SphericalPoint(1, np.pi / 3, 0), -1)[2] == pytest.approx(0.25)


def test_cartesian_connection_values():
    assert np.allclose(connection_cartesian([1, 0, 0]), [0, 0.5, 0])
    assert np.allclose(connection_cartesian([0, 1, 0]), [-0.5, 0, 0])
    assert np.allclose(connection_cartesian([2, 0, 0]), [0, 0.25, 0])


@pytest.mark.parametrize("sign", [1, -1])
def test_cartesian_connection_matches_section_derivative(sign, rng):
    for _ in range(10):
        lam = rng.normal(size=3)
        assert np.allclose(connection_cartesian(lam, sign), fd_berry(lam, sign), atol=1e-8)


def test_connection_guard_band():
    with pytest.raises(GuardBandError):
        connection_cartesian([0, 0, 1])
    with pytest.raises(GeophaseError):
        connection_cartesian([0, 0, 0])


def test_curvature_values():
    assert np.allclose(curvature_cartesian([1, 0, 0]), [0, 0, -0.5])
    assert np.allclose(curvature_cartesian([0, 0, 1]), [-0.5, 0, 0])
    assert np.allclose(curvature_cartesian([0, 0, 1], -1), [0.5, 0, 0])


def test_curvature_is_curl_of_connection(rng):
    h = 1e-5
    for _ in range(5):
        lam = rng.normal(size=3)
        da = np.array([(connection_cartesian(lam + h * e) - connection_cartesian(lam - h * e)) / (2 * h)
                       for e in np.eye(3)])
        f = da - da.T
        assert np.allclose(f, curvature_matrix(lam), atol=1e-7)


def test_curvature_invariant_values():
    assert curvature_invariant([1, 0, 0]) == pytest.approx(0.5)
    assert curvature_invariant([0, 2, 0]) == pytest.approx(1 / 32)


def test_phase_law_equator():
    assert phase_law(colatitude_circle(1, np.pi / 2), 1) == pytest.approx(-np.pi)
    assert phase_law(colatitude_circle(1, np.pi / 2), -1) == pytest.approx(np.pi)


def test_analytic_sampler_shapes():
    s = AnalyticSampler(1)
    pts = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    assert s(pts).shape == (2, 3, 1, 1)
    assert np.allclose(s.berry(pts), [[0, 0.5, 0], [-0.5, 0, 0]])
    assert np.allclose(s.energies(pts), [1, 1])


def test_spherical_point_validation():
    with pytest.raises(GeophaseError):
        SphericalPoint(0, 1, 0)
    with pytest.raises(GeophaseError):
        SphericalPoint.from_cartesian([0, 0, 0])
    p = SphericalPoint.from_cartesian([0, 3, 0])
    assert (p.r, p.theta, p.phi) == pytest.approx((3, np.pi / 2, np.pi / 2))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 3), st.floats(0.05, np.pi - 0.05), st.floats(0, 2 * np.pi))
def test_invariant_from_components(r, theta, phi):
    lam = SphericalPoint(r, theta, phi).cartesian()
    f12, f13, f23 = curvature_cartesian(lam)
    assert 2 * (f12 ** 2 + f13 ** 2 + f23 ** 2) == pytest.approx(1 / (2 * r ** 4), rel=1e-12)
