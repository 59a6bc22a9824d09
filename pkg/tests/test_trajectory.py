import numpy as np
import pytest

from sta_open.config import DEFAULT_TOL, TimeGrid
from sta_open.errors import (AmbiguousMatching, DegenerateSpectrum,
                             InvalidProbability, NotTracePreserving,
                             OutOfRange, StaOpenError)
from sta_open.trajectory import (MarchedEigenbasis, SpectralTrajectory,
                                 ThermalSpec, check_trace_preservation,
                                 gauge_fix, gibbs_weights, random_trajectory,
                                 thermal_trajectory)


def rotating_qubit_basis(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def test_gauge_fix_restores_phase_and_order(rng):
    prev = rotating_qubit_basis(0.3)
    cur = rotating_qubit_basis(0.31)
    scrambled = (cur * np.exp(1j * np.array([2.1, -0.7])))[:, ::-1]
    fixed = gauge_fix(prev, scrambled)
    overlaps = np.diag(prev.conj().T @ fixed)
    assert np.all(np.abs(overlaps.imag) < 1e-12)
    assert np.all(overlaps.real > 0.9)


def test_gauge_fix_ambiguous_raises():
    prev = np.eye(2, dtype=complex)
    col = np.array([1.0, 1.0]) / np.sqrt(2)
    cur = np.stack([col, col], axis=1)
    with pytest.raises(AmbiguousMatching):
        gauge_fix(prev, cur)


def analytic_trajectory(t_f=1.0, **kwargs):
    def lam(t):
        return np.array([0.5 + 0.3 * np.sin(t), 0.5 - 0.3 * np.sin(t)])

    def lam_dot(t):
        return np.array([0.3 * np.cos(t), -0.3 * np.cos(t)])

    def basis_dot(t):
        c, s = np.cos(t / 2), np.sin(t / 2)
        return 0.5 * np.array([[-s, -c], [c, -s]], dtype=complex)

    return SpectralTrajectory(2, t_f, lam, rotating_qubit_basis,
                              **{"lambda_dot_fn": lam_dot,
                                 "basis_dot_fn": basis_dot, **kwargs})


def test_state_reconstruction():
    traj = analytic_trajectory()
    t = 0.4
    rho = traj.state(t)
    b = rotating_qubit_basis(t)
    want = (b * traj.lambdas(t)) @ b.conj().T
    assert np.abs(rho - want).max() < 1e-14
    assert abs(np.trace(rho).real - 1.0) < 1e-14


def test_fd_derivatives_match_analytic():
    an = analytic_trajectory()
    fd = SpectralTrajectory(2, 1.0, an._lambda_fn, rotating_qubit_basis)
    for t in (0.0, 0.3, 0.77, 1.0):
        assert np.abs(fd.lambdas_dot(t) - an.lambdas_dot(t)).max() < 1e-8
        assert np.abs(fd.basis_dot(t) - an.basis_dot(t)).max() < 1e-7


def test_occupation_validation():
    # the constructor probes occupations at t0, so bad inputs die early
    with pytest.raises(InvalidProbability):
        SpectralTrajectory(
            2, 1.0, lambda t: np.array([0.6, 0.6]), rotating_qubit_basis)
    with pytest.raises(InvalidProbability):
        SpectralTrajectory(
            2, 1.0, lambda t: np.array([1.2, -0.2]), rotating_qubit_basis)
    goes_negative = SpectralTrajectory(
        2, 1.0, lambda t: np.array([0.5 + t, 0.5 - t]), rotating_qubit_basis)
    with pytest.raises(InvalidProbability):
        goes_negative.lambdas(0.75)  # valid at t0, invalid later: still caught


def test_domain_guard():
    traj = analytic_trajectory()
    with pytest.raises(OutOfRange):
        traj.state(1.5)
    with pytest.raises(OutOfRange):
        traj.state(-0.2)
    traj.state(1.0)  # boundary is inside


def test_fd_guard_rejects_kinked_schedule():
    def lam(t):
        x = 0.5 + 0.2 * abs(t - 0.5)
        return np.array([x, 1.0 - x])

    traj = SpectralTrajectory(2, 1.0, lam, rotating_qubit_basis)
    with pytest.raises(StaOpenError):
        traj.lambdas_dot(0.5)


def test_trace_preservation_check():
    traj = analytic_trajectory()
    total = check_trace_preservation(traj, 0.3)
    assert abs(total) < 1e-12

    def lam(t):
        return np.array([0.5 + 0.1 * t, 0.5 - 0.05 * t])

    leaky = SpectralTrajectory(2, 1.0, lam, rotating_qubit_basis,
                               trace_preserving=False)
    with pytest.raises(NotTracePreserving):
        check_trace_preservation(
            SpectralTrajectory(2, 1.0, lam, rotating_qubit_basis,
                               trace_preserving=True,
                               lambda_dot_fn=lambda t: np.array([0.1, -0.05])),
            0.3)
    assert abs(check_trace_preservation(leaky, 0.3) - 0.05) < 1e-9


def test_gibbs_weights_anchor():
    # two levels at E = -1/2 and 0, beta = 1
    w = gibbs_weights(np.array([-0.5, 0.0]), 1.0)
    assert abs(w[0] - 0.6224593312018546) < 1e-12
    assert abs(w.sum() - 1.0) < 1e-15
    # shift invariance
    w2 = gibbs_weights(np.array([99.5, 100.0]), 1.0)
    assert np.abs(w - w2).max() < 1e-12


def test_thermal_trajectory_tracks_gibbs():
    def h(t):
        return np.array([[0.5 * (1 - t), 0.3], [0.3, -0.5 * (1 - t)]],
                        dtype=complex)

    spec = ThermalSpec(hamiltonian=h, beta=lambda t: 1.0 + t)
    grid = TimeGrid(0.0, 1.0, 50)
    traj = thermal_trajectory(spec, grid)
    t = 0.42
    evals = np.linalg.eigvalsh(h(t))
    want = gibbs_weights(evals, 1.42)
    assert np.abs(traj.lambdas(t) - want).max() < 1e-10
    rho = traj.state(t)
    z = np.trace(_expm_herm(-1.42 * h(t)))
    want_rho = _expm_herm(-1.42 * h(t)) / z
    assert np.abs(rho - want_rho).max() < 1e-10


def _expm_herm(h):
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(evals)) @ evecs.conj().T


def test_marched_eigenbasis_continuity():
    def h(t):
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, s], [s, -c]], dtype=complex)

    grid = TimeGrid(0.0, 1.0, 200)
    mb = MarchedEigenbasis(h, grid)
    prev = mb.basis_at(0.0)
    for t in np.linspace(0.0, 1.0, 50):
        cur = mb.basis_at(float(t))
        # columns never jump
        assert np.abs(cur - prev).max() < 0.1
        prev = cur


def test_marched_eigenbasis_gap_guard():
    def h(t):
        return np.diag([t, 1.0 - t]).astype(complex)

    with pytest.raises(DegenerateSpectrum):
        MarchedEigenbasis(h, TimeGrid(0.0, 1.0, 100))


def test_random_trajectory_properties(rng):
    traj = random_trajectory(4, 3, rng)
    lam = traj.lambdas(0.37)
    assert lam.shape == (4,)
    assert abs(lam.sum() - 1.0) < 1e-12
    assert np.count_nonzero(lam) == 3
    b = traj.basis(0.37)
    assert np.abs(b.conj().T @ b - np.eye(4)).max() < 1e-12
    assert abs(traj.lambdas_dot(0.37).sum()) < 1e-7


def test_random_trajectory_seed_reproducible():
    a = random_trajectory(3, 2, np.random.default_rng(7))
    b = random_trajectory(3, 2, np.random.default_rng(7))
    assert np.abs(a.state(0.5) - b.state(0.5)).max() == 0.0
