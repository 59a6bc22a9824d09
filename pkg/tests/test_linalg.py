import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sta_open.config import DEFAULT_TOL
from sta_open.errors import InvalidState, NotHermitian
from sta_open.linalg import (bures_distance, fidelity, hermiticity_defect,
                             psd_sqrt, random_density_matrix,
                             require_hermitian, spectral_decompose,
                             trace_distance, trace_norm, validate_state)


def qubit_pure(theta, phi=0.0):
    v = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return np.outer(v, v.conj())


def test_hermiticity_defect_zero_for_hermitian(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = a + a.conj().T
    assert hermiticity_defect(h) == 0.0
    assert hermiticity_defect(a) > 0.0


def test_require_hermitian_symmetrizes_and_raises(rng):
    h = np.diag([1.0, 2.0]) + 0j
    h[0, 1] = 1e-13
    out = require_hermitian(h, DEFAULT_TOL.herm_op_rel)
    assert hermiticity_defect(out) == 0.0
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NotHermitian):
        require_hermitian(bad, DEFAULT_TOL.herm_op_rel)


def test_spectral_decompose_roundtrip(rng):
    rho = random_density_matrix(5, rng)
    es = spectral_decompose(rho, DEFAULT_TOL)
    recon = (es.vectors * es.values) @ es.vectors.conj().T
    assert np.abs(recon - rho).max() < 1e-12
    assert np.all(np.diff(es.values) >= 0)


def test_validate_state_rejections():
    with pytest.raises(InvalidState):
        validate_state(np.array([[0.6, 0.1], [0.3, 0.4]]), DEFAULT_TOL)
    with pytest.raises(InvalidState):
        validate_state(np.diag([1.2, -0.2]), DEFAULT_TOL)
    with pytest.raises(InvalidState):
        validate_state(np.diag([0.6, 0.6]), DEFAULT_TOL)
    validate_state(np.diag([0.25, 0.75]), DEFAULT_TOL)


def test_psd_sqrt_squares_back(rng):
    rho = random_density_matrix(4, rng)
    s = psd_sqrt(rho, DEFAULT_TOL)
    assert np.abs(s @ s - rho).max() < 1e-12


def test_fidelity_pure_state_overlap():
    # F(|a><a|, |b><b|) = |<a|b>|
    for theta in (0.3, 1.1, 2.4):
        f = fidelity(qubit_pure(0.0), qubit_pure(theta), DEFAULT_TOL)
        assert abs(f - abs(np.cos(theta / 2))) < 1e-12


def test_fidelity_agrees_with_general_formula(rng):
    # 2x2 closed form vs eigendecomposition route on a larger embedding
    for _ in range(5):
        r1 = random_density_matrix(2, rng)
        r2 = random_density_matrix(2, rng)
        f2 = fidelity(r1, r2, DEFAULT_TOL)
        big1 = np.zeros((3, 3), dtype=complex)
        big2 = np.zeros((3, 3), dtype=complex)
        big1[:2, :2] = r1
        big2[:2, :2] = r2
        f3 = fidelity(big1, big2, DEFAULT_TOL, validate=False)
        assert abs(f2 - f3) < 1e-10


@given(p=st.floats(0.0, 1.0), q=st.floats(0.0, 1.0))
def test_fidelity_diagonal_oracle(p, q):
    r1 = np.diag([p, 1 - p]).astype(complex)
    r2 = np.diag([q, 1 - q]).astype(complex)
    want = np.sqrt(p * q) + np.sqrt((1 - p) * (1 - q))
    got = fidelity(r1, r2, DEFAULT_TOL, validate=False)
    assert abs(got - min(want, 1.0)) < 1e-9


def test_bures_distance_range(rng):
    r1 = random_density_matrix(3, rng)
    r2 = random_density_matrix(3, rng)
    d = bures_distance(r1, r2, DEFAULT_TOL)
    assert 0.0 <= d <= np.sqrt(2.0) + 1e-12
    assert bures_distance(r1, r1, DEFAULT_TOL) < 1e-7


def test_trace_distance_diagonal_oracle():
    r1 = np.diag([0.7, 0.3])
    r2 = np.diag([0.4, 0.6])
    assert abs(trace_distance(r1, r2, DEFAULT_TOL) - 0.3) < 1e-14


def test_trace_norm_strict_flag():
    a = np.array([[0.0, 1e-12], [0.0, 0.0]])
    with pytest.raises(NotHermitian):
        trace_norm(a, DEFAULT_TOL)
    assert trace_norm(a, DEFAULT_TOL, strict=False) < 1e-11


def test_random_density_matrix_is_state(rng):
    rho = random_density_matrix(6, rng)
    validate_state(rho, DEFAULT_TOL)
