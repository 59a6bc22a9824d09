"""Prescribed spectral trajectories rho(t) = sum_n lambda_n(t) |n_t><n_t|.

A trajectory bundles eigenvalue schedules with a gauge-smooth eigenbasis
provider and exposes numerically safe time derivatives. Construction paths:

- thermal_trajectory: instantaneous Gibbs weights of a supplied Hamiltonian
  schedule, eigenbasis from eigendecompositions marched along a grid with
  gauge fixing (works for arbitrary smooth H0(t));
- closed-form models (two-level system, oscillator) supply analytic bases and
  occupations directly;
- random_trajectory: seeded smooth random ensembles for identity checks.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL, TimeGrid, Tolerances
from .errors import (AmbiguousMatching, DegenerateSpectrum, InvalidProbability,
                     NotTracePreserving, OutOfRange, StaOpenError)
from .linalg import require_hermitian


def gauge_fix(previous: np.ndarray, current: np.ndarray,
              min_overlap: float = DEFAULT_TOL.gauge_min_overlap) -> np.ndarray:
    """Match and rephase eigenvector columns against a reference basis.

    Columns of `current` are permuted so each one pairs with the reference
    column it overlaps most, then multiplied by a unit phase making
    <prev_n|curr_n> real and non-negative.
    """
    overlaps = previous.conj().T @ current
    order = np.argmax(np.abs(overlaps), axis=0)
    if len(set(order.tolist())) != order.size:
        raise AmbiguousMatching("column matching is not one-to-one")
    permuted = np.empty_like(current)
    permuted[:, order] = current
    diag = np.einsum("ij,ij->j", previous.conj(), permuted)
    mags = np.abs(diag)
    if mags.min() < min_overlap:
        raise AmbiguousMatching(
            f"basis overlap {mags.min():.3f} below {min_overlap}; grid too coarse")
    return permuted * (diag.conj() / mags)


class SpectralTrajectory:
    """Eigenvalue schedules plus a gauge-smooth eigenbasis on [t0, tf].

    lambda_fn(t) returns the full length-d occupation vector (vacant branches
    exactly zero); basis_fn(t) returns d orthonormal columns ordered
    consistently with it. Analytic derivative providers are optional; the
    default is central finite differencing with a step-doubling consistency
    guard on the occupations and local parallel-transport gauging of the
    displaced bases.
    """

    def __init__(self, dim: int, t_f: float,
                 lambda_fn: Callable[[float], np.ndarray],
                 basis_fn: Callable[[float], np.ndarray], *,
                 lambda_dot_fn: Callable[[float], np.ndarray] | None = None,
                 basis_dot_fn: Callable[[float], np.ndarray] | None = None,
                 t0: float = 0.0, h: float | None = None,
                 trace_preserving: bool = True,
                 occupied: np.ndarray | None = None,
                 tol: Tolerances = DEFAULT_TOL):
        if not t_f > t0:
            raise StaOpenError("trajectory needs t_f > t0")
        self.dim = int(dim)
        self.t0 = float(t0)
        self.t_f = float(t_f)
        self._lambda_fn = lambda_fn
        self._basis_fn = basis_fn
        self._lambda_dot_fn = lambda_dot_fn
        self._basis_dot_fn = basis_dot_fn
        self.h = float(h) if h is not None else 1e-5 * (self.t_f - self.t0)
        self.trace_preserving = bool(trace_preserving)
        self.tol = tol

        lam0 = self.lambdas(self.t0)
        if occupied is None:
            occupied = lam0 > tol.rank_tol
        self.occupied = np.asarray(occupied, dtype=bool)
        self.rank = int(self.occupied.sum())
        b0 = self.basis(self.t0)
        defect = np.linalg.norm(b0.conj().T @ b0 - np.eye(self.dim))
        if defect > tol.orth_tol:
            raise StaOpenError(f"basis not orthonormal at t0 (defect {defect:.2e})")

    # -- occupations -------------------------------------------------------

    def lambdas(self, t: float) -> np.ndarray:
        self._check_domain(t)
        lam = np.asarray(self._lambda_fn(t), dtype=float)
        if lam.shape != (self.dim,) or not np.all(np.isfinite(lam)):
            raise InvalidProbability(f"bad occupation vector at t={t}")
        if lam.min() < -self.tol.pos_tol:
            raise InvalidProbability(f"negative occupation {lam.min():.3e} at t={t}")
        if self.trace_preserving and abs(lam.sum() - 1.0) > 1e-9:
            raise InvalidProbability(
                f"occupations sum to {lam.sum():.12f} != 1 at t={t}")
        return lam

    def lambdas_dot(self, t: float) -> np.ndarray:
        if self._lambda_dot_fn is not None:
            return np.asarray(self._lambda_dot_fn(t), dtype=float)
        d1 = self._fd_lambda(t, self.h)
        d2 = self._fd_lambda(t, 2.0 * self.h)
        # step-doubling consistency guard; rates amplify occupation noise
        floor = 1e-9 / (self.t_f - self.t0)
        bad = np.abs(d1 - d2) > self.tol.fd_doubling_rel * (np.abs(d1) + floor)
        if np.any(bad):
            raise StaOpenError(
                f"occupation derivative not step-consistent at t={t}; "
                "schedule too rough for the finite-difference step")
        return d1

    def _fd_lambda(self, t: float, h: float) -> np.ndarray:
        lo, hi = self.t0, self.t_f
        if t - h < lo:
            return (-3.0 * self.lambdas(t) + 4.0 * self.lambdas(t + h)
                    - self.lambdas(t + 2.0 * h)) / (2.0 * h)
        if t + h > hi:
            return (3.0 * self.lambdas(t) - 4.0 * self.lambdas(t - h)
                    + self.lambdas(t - 2.0 * h)) / (2.0 * h)
        return (self.lambdas(t + h) - self.lambdas(t - h)) / (2.0 * h)

    # -- basis -------------------------------------------------------------

    def basis(self, t: float) -> np.ndarray:
        self._check_domain(t)
        return np.asarray(self._basis_fn(t), dtype=complex)

    def basis_dot(self, t: float) -> np.ndarray:
        if self._basis_dot_fn is not None:
            return np.asarray(self._basis_dot_fn(t), dtype=complex)
        h, lo, hi = self.h, self.t0, self.t_f
        b0 = self.basis(t)
        if t - h < lo:
            bp = gauge_fix(b0, self.basis(t + h))
            bpp = gauge_fix(b0, self.basis(t + 2.0 * h))
            return (-3.0 * b0 + 4.0 * bp - bpp) / (2.0 * h)
        if t + h > hi:
            bm = gauge_fix(b0, self.basis(t - h))
            bmm = gauge_fix(b0, self.basis(t - 2.0 * h))
            return (3.0 * b0 - 4.0 * bm + bmm) / (2.0 * h)
        bp = gauge_fix(b0, self.basis(t + h))
        bm = gauge_fix(b0, self.basis(t - h))
        return (bp - bm) / (2.0 * h)

    # -- assembled quantities ----------------------------------------------

    def state(self, t: float) -> np.ndarray:
        lam = self.lambdas(t)
        b = self.basis(t)
        return (b * lam) @ b.conj().T

    def derivatives(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return self.lambdas_dot(t), self.basis_dot(t)

    def _check_domain(self, t: float) -> None:
        slack = 1e-12 * max(abs(self.t0), abs(self.t_f), 1.0)
        if t < self.t0 - slack or t > self.t_f + slack:
            raise OutOfRange(f"t={t} outside [{self.t0}, {self.t_f}]")


def eval_state(traj: SpectralTrajectory, t: float) -> np.ndarray:
    return traj.state(t)


def eval_derivatives(traj: SpectralTrajectory, t: float):
    return traj.derivatives(t)


# -- thermal trajectories ---------------------------------------------------


@dataclass(frozen=True)
class ThermalSpec:
    """Instantaneous Gibbs trajectory specification.

    hamiltonian(t) must return a Hermitian matrix; beta may be a Schedule,
    a plain callable, or a constant.
    """

    hamiltonian: Callable[[float], np.ndarray]
    beta: object

    def beta_at(self, t: float) -> float:
        b = self.beta
        value = b(t) if callable(b) else float(b)
        if not np.isfinite(value) or value <= 0.0:
            raise InvalidProbability(f"inverse temperature {value} at t={t}")
        return value


def gibbs_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """lambda_n = exp(-beta E_n)/Z, computed shift-stably."""
    x = -beta * (energies - energies.min())
    w = np.exp(x)
    return w / w.sum()


class MarchedEigenbasis:
    """Gauge-smooth eigensystem of a Hamiltonian schedule along a grid.

    Grid nodes are decomposed once and gauge-fixed against their predecessor;
    off-grid times are decomposed on demand and gauged against the nearest
    node, so different evaluation orders return identical bases. A small LRU
    cache absorbs the repeated neighbor evaluations of finite differencing.
    """

    def __init__(self, hamiltonian: Callable[[float], np.ndarray],
                 grid: TimeGrid, tol: Tolerances = DEFAULT_TOL,
                 cache_size: int = 512):
        self._ham = hamiltonian
        self._grid = grid
        self._tol = tol
        self._cache_size = cache_size
        self._cache: OrderedDict[float, tuple[np.ndarray, np.ndarray]] = OrderedDict()
        self.nodes = grid.nodes()

        energies_list = []
        bases_list = []
        for k, t in enumerate(self.nodes):
            energies, vectors = self._decompose(t)
            if k > 0:
                vectors = gauge_fix(bases_list[-1], vectors, tol.gauge_min_overlap)
            energies_list.append(energies)
            bases_list.append(vectors)
        self.node_energies = np.array(energies_list)
        self.node_bases = np.array(bases_list)
        self.dim = self.node_bases.shape[1]

    def _decompose(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        h0 = require_hermitian(self._ham(t), self._tol.herm_op_rel, "H0")
        energies, vectors = np.linalg.eigh(h0)
        spread = float(energies[-1] - energies[0])
        gap = float(np.diff(energies).min()) if energies.size > 1 else np.inf
        if gap < self._tol.gap_rel * max(spread, 1e-300):
            raise DegenerateSpectrum(
                f"eigenvalue gap {gap:.3e} at t={t} below "
                f"{self._tol.gap_rel:.1e} of spectral range")
        return energies, vectors

    def snapshot(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        key = float(t)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        k = int(np.argmin(np.abs(self.nodes - t)))
        if abs(self.nodes[k] - t) <= 1e-12 * max(abs(self._grid.tf), 1.0):
            out = (self.node_energies[k], self.node_bases[k])
        else:
            energies, vectors = self._decompose(t)
            vectors = gauge_fix(self.node_bases[k], vectors,
                                self._tol.gauge_min_overlap)
            out = (energies, vectors)
        self._cache[key] = out
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return out

    def energies_at(self, t: float) -> np.ndarray:
        return self.snapshot(t)[0]

    def basis_at(self, t: float) -> np.ndarray:
        return self.snapshot(t)[1]


def thermal_trajectory(spec: ThermalSpec, grid: TimeGrid,
                       tol: Tolerances = DEFAULT_TOL,
                       cache_size: int = 512) -> SpectralTrajectory:
    """Instantaneous-Gibbs trajectory of a Hamiltonian schedule."""
    mb = MarchedEigenbasis(spec.hamiltonian, grid, tol, cache_size)

    def lambda_fn(t: float) -> np.ndarray:
        return gibbs_weights(mb.energies_at(t), spec.beta_at(t))

    return SpectralTrajectory(mb.dim, grid.tf, lambda_fn, mb.basis_at,
                              t0=grid.t0, tol=tol)


# -- seeded random ensembles -------------------------------------------------


def random_trajectory(dim: int, rank: int, rng: np.random.Generator,
                      t_f: float = 1.0,
                      tol: Tolerances = DEFAULT_TOL) -> SpectralTrajectory:
    """Smooth random trace-preserving trajectory for identity checks.

    The basis rotates under a fixed random Hermitian generator; the occupied
    eigenvalues are normalized exponentials of random cubics (positive, unit
    sum), vacant branches are exactly zero. Derivatives intentionally go
    through the default finite-difference path.
    """
    if not 1 <= rank <= dim:
        raise StaOpenError(f"rank {rank} out of range for dim {dim}")
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    gen = 0.5 * (g + g.conj().T)
    evals, evecs = np.linalg.eigh(gen)

    q, _ = np.linalg.qr(rng.standard_normal((dim, dim))
                        + 1j * rng.standard_normal((dim, dim)))
    coeffs = rng.uniform(-0.5, 0.5, size=(rank, 4))

    def basis_fn(t: float) -> np.ndarray:
        phases = np.exp(-1j * evals * t)
        return (evecs * phases) @ evecs.conj().T @ q

    def lambda_fn(t: float) -> np.ndarray:
        powers = np.array([1.0, t, t * t, t * t * t])
        x = coeffs @ powers
        w = np.exp(x - x.max())
        lam = np.zeros(dim)
        lam[:rank] = w / w.sum()
        return lam

    return SpectralTrajectory(dim, t_f, lambda_fn, basis_fn, tol=tol)


def check_trace_preservation(traj: SpectralTrajectory, t: float,
                             tol: Tolerances = DEFAULT_TOL) -> float:
    """|sum of occupation rates|; raises if it belies trace preservation."""
    total = float(traj.lambdas_dot(t).sum())
    if traj.trace_preserving and abs(total) > tol.trace_rate_tol:
        raise NotTracePreserving(
            f"sum of occupation rates {total:.3e} at t={t} exceeds "
            f"{tol.trace_rate_tol:.1e}")
    return total
