import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geophase.errors import DegeneracyError, GeophaseError, GuardBandError, SingularMatrixError
from geophase.frames import (
    ParamCurve,
    Schedule,
    align_gauge,
    colatitude_circle,
    cone_circle,
    constant_curve,
    eigenframe,
    fix_gauge,
    frame_along_curve,
    polyline,
    projector_distance,
    resolve_level,
)
from geophase.hamiltonian import clifford_family, doubled, evaluate, spin_half
from geophase.holonomy import holonomy_from_frames
from geophase.spin_half import eigenvector_cartesian


def test_closed_curve_points_close_exactly():
    c = colatitude_circle(1.0, 0.7)
    pts = c.points(10)
    assert pts.shape == (11, 3)
    assert np.array_equal(pts[0], pts[-1])


def test_chord_increments_sum_to_zero_on_closed_curve():
    _, inc = colatitude_circle(2.0, 1.0, turns=2).segments(64)
    assert np.allclose(inc.sum(axis=0), 0, atol=1e-13)


def test_tangent_increments():
    c = colatitude_circle(1.0, np.pi / 2)
    mid, inc = c.segments(4, "tangent")
    assert np.allclose(inc[0], (np.pi / 2) * np.array([-np.sin(np.pi / 4), np.cos(np.pi / 4), 0]))
    with pytest.raises(GeophaseError):
        polyline([[0, 0], [1, 0]]).segments(2, "bogus")


def test_colatitude_circle_validation():
    with pytest.raises(GeophaseError):
        colatitude_circle(0.0, 1.0)
    with pytest.raises(GeophaseError):
        colatitude_circle(1.0, 1.0, turns=0)
    with pytest.raises(GeophaseError):
        colatitude_circle(1.0, 1.0, turns=1.5)


def test_cone_circle_geometry():
    axis = np.array([0.0, 1.0, 1.0]) / np.sqrt(2)
    pts = cone_circle(axis, 0.3, radius=2.0).points(32)
    assert np.allclose(np.linalg.norm(pts, axis=1), 2.0)
    assert np.allclose(pts @ axis, 2.0 * np.cos(0.3))


def test_reversed_and_then():
    c = colatitude_circle(1.0, 1.0)
    r = c.reversed()
    assert np.allclose(r(np.array([0.25])), c(np.array([0.75])))
    both = c.then(r)
    assert np.allclose(both(np.array([0.25])), c(np.array([0.5])))
    assert both.closed


def test_polyline_closes():
    p = polyline([[0, 0], [1, 0], [1, 1]], closed=True)
    assert p.closed
    assert np.allclose(p(np.array([1.0])), [[0, 0]])
    assert np.allclose(p(np.array([0.5])), [[1, 0.5]])


def test_constant_curve_has_zero_increments():
    _, inc = constant_curve([1.0, 2.0, 3.0]).segments(8)
    assert np.all(inc == 0)


def test_half_space_domain():
    c = ParamCurve(lambda t: np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)], -1), 2, True,
                   domain="half_space")
    with pytest.raises(GuardBandError):
        c.segments(16)


def test_schedule():
    c = colatitude_circle(1.0, 1.0)
    s = Schedule(c, 10.0)
    mid, dt = s.slices(5)
    assert np.allclose(dt, 2.0) and np.allclose(mid, [0.1, 0.3, 0.5, 0.7, 0.9])
    warped = Schedule(c, 4.0, lambda x: 4.0 * x ** 2)
    assert warped.times(0.5) == pytest.approx(1.0)
    with pytest.raises(GeophaseError):
        Schedule(c, 0.0)
    with pytest.raises(GeophaseError):
        Schedule(c, 1.0, lambda x: 1.0 - x)


def test_spin_half_section_matches_closed_form(rng):
    for sign, index in ((1, -1), (-1, 0)):
        for _ in range(5):
            lam = rng.normal(size=3)
            f = eigenframe(spin_half(), lam, index)
            assert np.allclose(f.frame[:, 0], eigenvector_cartesian(lam, sign), atol=1e-12)


def test_gauge_block_is_hermitian_positive(rng):
    fam = clifford_family()
    lam = rng.normal(size=5)
    f = eigenframe(fam, lam, 0, gauge_rows="auto")
    spec = resolve_level(fam, lam, 0, gauge_rows="auto")
    block = f.frame[list(spec.rows)]
    assert np.allclose(block, block.conj().T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(block) > 0)


def test_frame_spans_eigenspace(rng):
    fam = doubled(spin_half(), 2)
    lam = rng.normal(size=3)
    f = eigenframe(fam, lam, -1)
    h = evaluate(fam, lam)
    assert np.allclose(h @ f.frame, f.energy * f.frame)
    assert np.allclose(f.projector @ f.projector, f.projector)
    assert f.multiplicity == 2


def test_guard_band_rejection():
    with pytest.raises(GuardBandError):
        eigenframe(spin_half(), [0.0, 5e-4, 1.0], -1)
    eigenframe(spin_half(), [0.0, 5e-4, 1.0], 0)
    eigenframe(spin_half(), [0.0, 5e-4, 1.0], -1, guard_band=1e-4)


def test_multiplicity_mismatch():
    with pytest.raises(DegeneracyError):
        eigenframe(spin_half(), [0, 0, 1], -1, multiplicity=2)
    with pytest.raises(DegeneracyError):
        eigenframe(spin_half(), [0, 0, 1], 4)


def test_degeneracy_along_curve():
    with pytest.raises(DegeneracyError):
        frame_along_curve(spin_half(), polyline([[0.5, 0.5, 1.0], [-0.5, -0.5, -1.0]]), 0, n_segments=8)


def test_align_gauge_makes_overlap_positive(rng):
    fam = clifford_family()
    lam = rng.normal(size=5)
    a = eigenframe(fam, lam, 0, gauge_rows="auto")
    b = eigenframe(fam, lam + 1e-3, 0, gauge_rows=(1, 3))
    c = align_gauge(a, b)
    o = a.frame.conj().T @ c.frame
    assert np.allclose(o, o.conj().T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(o) > 0)
    assert projector_distance(b.frame, c.frame) < 1e-12


def test_align_gauge_rejects_jumps():
    a = eigenframe(spin_half(), [1, 0, 0], -1)
    b = eigenframe(spin_half(), [-1, 0, 0], -1)
    with pytest.raises(SingularMatrixError):
        align_gauge(a, b)


def test_frames_give_berry_phase():
    frames = frame_along_curve(spin_half(), colatitude_circle(1, np.pi / 3), -1, n_segments=2048)
    hol = holonomy_from_frames(frames)
    assert abs(np.exp(1j * hol.abelian_phase) - np.exp(-0.5j * np.pi)) < 1e-5


def test_fix_gauge_idempotent(rng):
    f = eigenframe(clifford_family(), rng.normal(size=5), 1, gauge_rows=(0, 2)).frame
    assert np.allclose(fix_gauge(f[None], (0, 2))[0], f)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_section_gauge_removes_phase_and_rotation(a, b):
    fam = doubled(spin_half(), 2)
    lam = np.array([0.3, -0.4, 0.5])
    f = eigenframe(fam, lam, -1).frame
    u = np.array([[np.cos(a), -np.sin(a) * np.exp(1j * b)], [np.sin(a) * np.exp(-1j * b), np.cos(a)]])
    rows = fam.gauge_rows
    assert np.allclose(fix_gauge((f @ u)[None], rows)[0], f, atol=1e-12)
