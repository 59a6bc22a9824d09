"""Shared configuration: physical constants, tolerances, time grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Natural units throughout (k_B = 1). Kept symbolic so the oscillator module,
# the only place hbar enters explicitly, stays dimensionally honest.
HBAR = 1.0


@dataclass(frozen=True)
class Tolerances:
    """Central numeric tolerance record; every module pulls defaults from here.

    pos_tol           eigenvalue clamp window for matrix square roots
    herm_state_rel    Hermiticity defect bound for states, relative Frobenius
    herm_op_rel       Hermiticity bound for operators fed to eigendecompositions
    recon_rel         spectral reconstruction bound, relative Frobenius
    orth_tol          orthonormality defect bound for eigenvector columns
    rank_tol          occupation threshold deciding the trajectory rank
    gap_rel           degenerate-spectrum gap bound, relative to spectral range
    gauge_min_overlap below this column overlap, basis matching is ambiguous
    trace_rate_tol    |sum of eigenvalue rates| bound for trace preservation
    pos_breach        propagated-state eigenvalue below -pos_breach warns
    fd_doubling_rel   Richardson guard: relative change allowed when doubling h
    trunc_tail        admissible thermal tail mass above level N-2
    u_eps             admissible margin keeping u inside (0, 1)
    """

    pos_tol: float = 1e-9
    herm_state_rel: float = 1e-12
    herm_op_rel: float = 1e-10
    recon_rel: float = 1e-9
    orth_tol: float = 1e-10
    rank_tol: float = 1e-12
    gap_rel: float = 1e-8
    gauge_min_overlap: float = 0.5
    trace_rate_tol: float = 1e-6
    pos_breach: float = 1e-6
    fd_doubling_rel: float = 1e-4
    trunc_tail: float = 1e-4
    u_eps: float = 1e-12


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [t0, tf] with steps intervals (steps + 1 nodes)."""

    t0: float
    tf: float
    steps: int

    def __post_init__(self) -> None:
        if self.steps < 2:
            raise ValueError("TimeGrid needs at least 2 steps")
        if not self.tf > self.t0:
            raise ValueError("TimeGrid needs tf > t0")

    @property
    def dt(self) -> float:
        return (self.tf - self.t0) / self.steps

    def nodes(self) -> np.ndarray:
        return np.linspace(self.t0, self.tf, self.steps + 1)
