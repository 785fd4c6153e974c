import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_hermitian, random_unitary
from geophase.errors import NonHermitianError, SingularMatrixError
from geophase.numerics import (
    cluster_levels,
    dagger,
    exp_antihermitian,
    hermitian_eigendecompose,
    hermiticity_defect,
    unitarity_defect,
    unitarize,
)


def taylor_exp(x, terms=60):
    out = np.eye(x.shape[0], dtype=complex)
    term = np.eye(x.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ x / k
        out = out + term
    return out


def test_exp_of_rotation_generator():
    x = np.array([[0, -np.pi / 2], [np.pi / 2, 0]], dtype=complex)
    assert np.allclose(exp_antihermitian(x), [[0, -1], [1, 0]], atol=1e-14)


def test_exp_matches_series(rng):
    for n in (1, 2, 4):
        x = 1j * random_hermitian(rng, n)
        assert np.allclose(exp_antihermitian(x), taylor_exp(x), atol=1e-12)


def test_exp_batched(rng):
    xs = np.stack([1j * random_hermitian(rng, 3) for _ in range(5)])
    out = exp_antihermitian(xs)
    for x, u in zip(xs, out):
        assert np.allclose(u, taylor_exp(x), atol=1e-12)


def test_exp_rejects_hermitian():
    with pytest.raises(NonHermitianError):
        exp_antihermitian(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))


def test_unitarize_matches_polar_from_eigh(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    w, v = np.linalg.eigh(dagger(m) @ m)
    inv_sqrt = v @ np.diag(w ** -0.5) @ dagger(v)
    assert np.allclose(unitarize(m), m @ inv_sqrt, atol=1e-12)


def test_unitarize_fixes_unitary(rng):
    u = random_unitary(rng, 4)
    assert np.allclose(unitarize(u), u, atol=1e-13)


def test_unitarize_singular():
    with pytest.raises(SingularMatrixError):
        unitarize(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_unitarize_scaled_identity():
    assert np.allclose(unitarize(2.0 * np.eye(2)), np.eye(2))


def test_hermitian_eigendecompose_sorted(rng):
    h = random_hermitian(rng, 5)
    w, v = hermitian_eigendecompose(h)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v @ np.diag(w) @ dagger(v), h, atol=1e-12)


def test_hermitian_eigendecompose_rejects():
    with pytest.raises(NonHermitianError):
        hermitian_eigendecompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_hermiticity_defect_zero(rng):
    assert hermiticity_defect(random_hermitian(rng, 3)) < 1e-15


def test_cluster_levels_examples():
    assert cluster_levels(np.array([-1.0, 1.0]), 1e-8) == [(0, 1), (1, 2)]
    assert cluster_levels(np.array([-1.0, -1.0, 1.0, 1.0]), 1e-8) == [(0, 2), (2, 4)]
    assert cluster_levels(np.array([0.0, 3e-9, 1.0]), 1e-8) == [(0, 2), (2, 3)]


def test_cluster_levels_ambiguous_gap():
    from geophase.errors import DegeneracyError

    with pytest.raises(DegeneracyError):
        cluster_levels(np.array([0.0, 0.7e-8]), 1e-8)


def test_unitarity_defect(rng):
    assert unitarity_defect(random_unitary(rng, 3)) < 1e-14
    assert math.isclose(unitarity_defect(2 * np.eye(2)), 3.0)


finite = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (2, 3, 3), elements=finite))
def test_exp_antihermitian_is_unitary(parts):
    z = parts[0] + 1j * parts[1]
    x = 0.5 * (z - dagger(z))
    assert unitarity_defect(exp_antihermitian(x)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (2, 3, 3), elements=finite))
def test_unitarize_is_unitary_and_closest(parts):
    m = parts[0] + 1j * parts[1]
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] < 1e-6:
        return
    u = unitarize(m)
    assert unitarity_defect(u) < 1e-10
    # the polar factor is idempotent
    assert np.allclose(unitarize(u), u, atol=1e-10)
