"""Dense complex-matrix primitives and state-space metrics.

All operators are plain complex numpy arrays. Matrix functions go through
eigendecompositions of Hermitian matrices; nothing here needs more than
numpy.linalg.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import InvalidState, NotHermitian, ShapeMismatch


def hermiticity_defect(a: np.ndarray) -> float:
    """Frobenius norm of the anti-Hermitian part, ||a - a^dagger||_F."""
    return float(np.linalg.norm(a - a.conj().T))


def require_hermitian(a: np.ndarray, rel: float = DEFAULT_TOL.herm_op_rel,
                      what: str = "operator") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{what} must be square, got shape {a.shape}")
    scale = max(float(np.linalg.norm(a)), 1e-300)
    defect = hermiticity_defect(a)
    if defect > rel * scale:
        raise NotHermitian(
            f"{what} defect {defect:.3e} exceeds {rel:.1e} relative")
    # symmetrize away round-off so eigh sees an exactly Hermitian input
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def spectral_decompose(a: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> EigenSystem:
    """Eigendecompose a Hermitian matrix; raises NotHermitian on defect."""
    h = require_hermitian(a, tol.herm_op_rel)
    values, vectors = np.linalg.eigh(h)
    return EigenSystem(values, vectors)


def validate_state(rho: np.ndarray, tol: Tolerances = DEFAULT_TOL,
                   trace_target: float = 1.0,
                   trace_tol: float = 1e-6) -> np.ndarray:
    """Check Hermiticity, positivity, and trace of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidState(f"state must be square, got shape {rho.shape}")
    scale = max(float(np.linalg.norm(rho)), 1e-300)
    if hermiticity_defect(rho) > tol.herm_state_rel * scale:
        raise InvalidState("state is not Hermitian within tolerance")
    rho = 0.5 * (rho + rho.conj().T)
    w = np.linalg.eigvalsh(rho)
    if w.min() < -tol.pos_tol:
        raise InvalidState(f"state has eigenvalue {w.min():.3e} < -{tol.pos_tol:.1e}")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - trace_target) > trace_tol:
        raise InvalidState(f"trace {tr:.9f} differs from target {trace_target}")
    return rho


def psd_sqrt(rho: np.ndarray, tol: Tolerances = DEFAULT_TOL,
             floor: float | None = None) -> np.ndarray:
    """Square root of a positive-semidefinite Hermitian matrix.

    Eigenvalues in [-floor, 0) are clamped to zero (default floor pos_tol);
    integrator round-off routinely produces them. Anything below -floor is a
    real failure.
    """
    limit = tol.pos_tol if floor is None else floor
    sys = spectral_decompose(rho, tol)
    w = sys.values.copy()
    if w.min() < -limit:
        raise InvalidState(f"matrix has eigenvalue {w.min():.3e} < -{limit:.1e}")
    np.clip(w, 0.0, None, out=w)
    return (sys.vectors * np.sqrt(w)) @ sys.vectors.conj().T


def fidelity(rho1: np.ndarray, rho2: np.ndarray,
             tol: Tolerances = DEFAULT_TOL, validate: bool = True) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), in [0, 1].

    validate=False symmetrizes without the strict state checks; integrator
    output carries Hermiticity defects up to ~1e-9 that are monitored
    separately and must not abort a distance evaluation.
    """
    if validate:
        rho1 = validate_state(rho1, tol)
        rho2 = validate_state(rho2, tol)
    else:
        rho1 = 0.5 * (rho1 + rho1.conj().T)
        rho2 = 0.5 * (rho2 + rho2.conj().T)
    if rho1.shape != rho2.shape:
        raise ShapeMismatch("fidelity needs equal-dimension states")
    if rho1.shape == (2, 2):
        # qubit closed form: F^2 = tr(rho1 rho2) + 2 sqrt(det rho1 det rho2)
        cross = float(np.real(np.trace(rho1 @ rho2)))
        dets = float(np.real(np.linalg.det(rho1)) * np.real(np.linalg.det(rho2)))
        f2 = cross + 2.0 * np.sqrt(max(dets, 0.0))
        return min(float(np.sqrt(max(f2, 0.0))), 1.0)
    floor = None if validate else tol.pos_breach
    s1 = psd_sqrt(rho1, tol, floor=floor)
    inner = s1 @ rho2 @ s1
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    np.clip(w, 0.0, None, out=w)
    f = float(np.sqrt(w).sum())
    return min(f, 1.0)


def bures_distance(rho1: np.ndarray, rho2: np.ndarray,
                   tol: Tolerances = DEFAULT_TOL, validate: bool = True) -> float:
    """D_B = sqrt(2 (1 - F))."""
    f = fidelity(rho1, rho2, tol, validate=validate)
    return float(np.sqrt(max(2.0 * (1.0 - f), 0.0)))


def trace_norm(a: np.ndarray, tol: Tolerances = DEFAULT_TOL,
               strict: bool = True) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix.

    strict=False skips the hermiticity gate and projects instead; needed for
    derivative-like quantities whose norm can sit at round-off level, where a
    relative defect check is meaningless.
    """
    a = np.asarray(a)
    if strict:
        h = require_hermitian(a, tol.herm_op_rel)
    else:
        h = 0.5 * (a + a.conj().T)
    return float(np.abs(np.linalg.eigvalsh(h)).sum())


def trace_distance(rho1: np.ndarray, rho2: np.ndarray,
                   tol: Tolerances = DEFAULT_TOL) -> float:
    """Half the trace norm of the difference."""
    return 0.5 * trace_norm(np.asarray(rho1) - np.asarray(rho2), tol)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank random state G G^dagger / Tr, G standard complex Gaussian."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def batched_min_eig(states: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of each Hermitian matrix in a (k, d, d) stack."""
    sym = 0.5 * (states + np.conj(np.swapaxes(states, -1, -2)))
    return np.linalg.eigvalsh(sym)[..., 0]
