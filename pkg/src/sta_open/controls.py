"""Counterdiabatic control construction for prescribed spectral trajectories.

Given rho(t) = sum_n lambda_n(t)|n_t><n_t|, builds the Hermitian steering
Hamiltonian, the gain/loss operator, the full set of time-dependent Lindblad
operators and rates, and the co-moving frame transform, all evaluated at a
single time from the trajectory's (analytic or finite-difference) derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL, HBAR, TimeGrid, Tolerances
from .errors import (InvalidProbability, NotTracePreserving, ShapeMismatch,
                     StaOpenError,
                     VanishingEigenvalue)
from .trajectory import SpectralTrajectory


@dataclass(eq=False)
class ControlSet:
    """All control objects at one instant.

    lindblads holds (m, n, L_mn, rate) for every ordered pair of occupied
    branches, with L_mn = |m_t><n_t| (unit Frobenius norm, rank one). h_cd is
    the full driving Hamiltonian: the steering term plus the reference
    Hamiltonian when one was supplied.
    """

    t: float
    h_cd: np.ndarray
    gamma: np.ndarray
    lindblads: list
    rank: int
    basis: np.ndarray
    lambdas: np.ndarray
    lambdas_dot: np.ndarray
    h1: np.ndarray

    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(source indices, drain indices, rates) as arrays, built once."""
        cached = getattr(self, "_pairs", None)
        if cached is None:
            cached = (np.array([p[0] for p in self.lindblads], dtype=np.intp),
                      np.array([p[1] for p in self.lindblads], dtype=np.intp),
                      np.array([p[3] for p in self.lindblads], dtype=float))
            self._pairs = cached
        return cached


def _frame_velocity(traj: SpectralTrajectory, t: float) -> tuple[np.ndarray, np.ndarray]:
    """W = B^dagger dB/dt, antisymmetrized.

    Orthonormality forces W + W^dagger = 0 exactly; finite differencing breaks
    it at round-off level, so the projection is applied before any control is
    assembled (this also removes residual gauge drift on the diagonal).
    """
    b = traj.basis(t)
    w = b.conj().T @ traj.basis_dot(t)
    return b, 0.5 * (w - w.conj().T)


def cd_hamiltonian(traj: SpectralTrajectory, t: float) -> np.ndarray:
    """Steering Hamiltonian i hbar sum_n (|dn><n| - <n|dn>|n><n|).

    Exactly Hermitian and purely off-diagonal in the instantaneous basis by
    construction.
    """
    b, w = _frame_velocity(traj, t)
    np.fill_diagonal(w, 0.0)
    return 1j * HBAR * (b @ w @ b.conj().T)


def reference_hamiltonian(traj: SpectralTrajectory, t: float, beta: float,
                          z0: float = 1.0) -> np.ndarray:
    """Hamiltonian whose Gibbs state at inverse temperature beta is rho(t).

    E_n = -log(z0 lambda_n)/beta; commutes with the trajectory state. Only
    defined for full-rank occupations.
    """
    lam = traj.lambdas(t)
    if lam.min() <= 0.0:
        raise InvalidProbability(
            "reference Hamiltonian needs strictly positive occupations")
    if beta <= 0.0:
        raise InvalidProbability(f"beta must be positive, got {beta}")
    energies = -np.log(z0 * lam) / beta
    b = traj.basis(t)
    return (b * energies) @ b.conj().T


def _occupied_rates(traj: SpectralTrajectory, t: float,
                    tol: Tolerances) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lam = traj.lambdas(t)
    occ = np.flatnonzero(traj.occupied)
    if lam[occ].min() <= tol.rank_tol:
        k = occ[np.argmin(lam[occ])]
        raise VanishingEigenvalue(
            f"occupied branch {k} has lambda = {lam[k]:.3e} at t={t}; "
            "rates diverge")
    return lam, traj.lambdas_dot(t), occ


def gain_loss_operator(traj: SpectralTrajectory, t: float,
                       tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Gamma = -1/2 sum_n (lambda_dot_n/lambda_n) |n><n| over occupied branches."""
    lam, lam_dot, occ = _occupied_rates(traj, t, tol)
    coeff = np.zeros(traj.dim)
    coeff[occ] = -0.5 * lam_dot[occ] / lam[occ]
    b = traj.basis(t)
    return (b * coeff) @ b.conj().T


def lindblad_set(traj: SpectralTrajectory, t: float,
                 reference: Callable[[float], np.ndarray] | None = None,
                 tol: Tolerances = DEFAULT_TOL,
                 include_lindblads: bool = True) -> ControlSet:
    """All r^2 ordered-pair jump operators with rates lambda_dot_m/(r lambda_n).

    include_lindblads=False skips materializing the d x d jump matrices (the
    speed-limit post-processing only needs h_cd and gamma; for large
    truncations the r^2 matrices are pure ballast).
    """
    lam, lam_dot, occ = _occupied_rates(traj, t, tol)
    if traj.trace_preserving and abs(lam_dot.sum()) > tol.trace_rate_tol:
        raise NotTracePreserving(
            f"occupation rates sum to {lam_dot.sum():.3e} at t={t}")
    b = traj.basis(t)
    r = occ.size
    lindblads = []
    if include_lindblads:
        for m in occ:
            km = b[:, m]
            for n in occ:
                rate = lam_dot[m] / (r * lam[n])
                lindblads.append((int(m), int(n), np.outer(km, b[:, n].conj()), rate))

    coeff = np.zeros(traj.dim)
    coeff[occ] = -0.5 * lam_dot[occ] / lam[occ]
    gamma = (b * coeff) @ b.conj().T
    h1 = cd_hamiltonian(traj, t)
    h_cd = h1 if reference is None else h1 + reference(t)
    return ControlSet(t=float(t), h_cd=h_cd, gamma=gamma, lindblads=lindblads,
                      rank=r, basis=b, lambdas=lam, lambdas_dot=lam_dot, h1=h1)


def apply_dissipator(cset: ControlSet, rho: np.ndarray) -> np.ndarray:
    """sum gamma_mn (L rho L^dagger - 1/2 {L^dagger L, rho}).

    Every jump is a basis pair |m><n|, so instead of an r^2 loop of outer
    products the sum contracts to two diagonal operators in the participating
    columns: gain coefficients sum rate*pop over source indices, drain
    coefficients sum rates over drain indices. Stored rates are honored as-is
    (they need not factorize). Control sets built with include_lindblads=False
    carry no pairs and are rejected instead of silently contributing nothing.
    """
    if rho.shape != cset.basis.shape:
        raise ShapeMismatch(
            f"state shape {rho.shape} vs basis {cset.basis.shape}")
    if not cset.lindblads:
        raise StaOpenError(
            "control set has no jump pairs; rebuild with include_lindblads=True")
    ms, ns, rates = cset.pair_arrays()
    cols, inv = np.unique(np.concatenate((ms, ns)), return_inverse=True)
    mi, ni = inv[:ms.size], inv[ms.size:]
    b_c = cset.basis[:, cols]
    rho_b = rho @ b_c
    pops = np.einsum("ij,ij->j", b_c.conj(), rho_b)
    gain_c = np.zeros(cols.size, dtype=complex)
    np.add.at(gain_c, mi, rates * pops[ni])
    drain_c = np.bincount(ni, weights=rates, minlength=cols.size)
    gain = (b_c * gain_c) @ b_c.conj().T
    drain = (b_c * drain_c) @ b_c.conj().T
    return gain - 0.5 * (drain @ rho + rho @ drain)


@dataclass(frozen=True)
class ComovingFrame:
    """Frame that freezes the instantaneous basis: U(t) = sum e^{i phi_n}|n_t><n_0|.

    phases accumulate geometric contributions i<n|dn/dt> plus dynamical ones
    -E_n when reference energies were supplied (else the dynamical part is
    zero and only recorded as absent).
    """

    times: np.ndarray
    phases: np.ndarray
    bases: np.ndarray

    def unitary(self, k: int) -> np.ndarray:
        return (self.bases[k] * np.exp(1j * self.phases[k])) @ self.bases[0].conj().T

    def transform(self, op: np.ndarray, k: int) -> np.ndarray:
        u = self.unitary(k)
        return u.conj().T @ op @ u


def comoving_transform(traj: SpectralTrajectory, grid: TimeGrid,
                       reference_energies: Callable[[float], np.ndarray] | None = None
                       ) -> ComovingFrame:
    """Accumulate frame phases along the grid (trapezoid rule)."""
    times = grid.nodes()
    k_nodes = times.size
    bases = np.empty((k_nodes, traj.dim, traj.dim), dtype=complex)
    integrand = np.empty((k_nodes, traj.dim))
    for k, t in enumerate(times):
        b = traj.basis(t)
        bd = traj.basis_dot(t)
        bases[k] = b
        geo = np.real(1j * np.einsum("ij,ij->j", b.conj(), bd))
        if reference_energies is not None:
            geo = geo - np.asarray(reference_energies(t), dtype=float)
        integrand[k] = geo
    phases = np.zeros((k_nodes, traj.dim))
    dt = np.diff(times)
    phases[1:] = np.cumsum(0.5 * dt[:, None] * (integrand[1:] + integrand[:-1]),
                           axis=0)
    return ComovingFrame(times=times, phases=phases, bases=bases)


class TrajectoryControls:
    """Caching control provider for the integrator and post-processing.

    The integrator hits each time at most a handful of times across generator
    variants; building the ControlSet once per distinct time and sharing the
    provider across runs keeps repeated scenario sweeps cheap.
    """

    def __init__(self, traj: SpectralTrajectory,
                 reference: Callable[[float], np.ndarray] | None = None,
                 tol: Tolerances = DEFAULT_TOL,
                 include_lindblads: bool = True):
        self.traj = traj
        self.reference = reference
        self.tol = tol
        self.include_lindblads = include_lindblads
        self._cache: dict[float, ControlSet] = {}

    @property
    def dim(self) -> int:
        return self.traj.dim

    def controls_at(self, t: float) -> ControlSet:
        key = float(t)
        hit = self._cache.get(key)
        if hit is None:
            hit = lindblad_set(self.traj, key, self.reference, self.tol,
                               self.include_lindblads)
            self._cache[key] = hit
        return hit

    def state(self, t: float) -> np.ndarray:
        return self.traj.state(t)
