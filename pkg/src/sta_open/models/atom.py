"""Two-level atom exchanging quanta with a bosonic bath.

Level convention: H = (omega0/2) sigma_z, so |0> = (1,0) is the excited
state (+omega0/2) and |1> = (0,1) the ground state (-omega0/2). The bath
drives downward jumps |1><0| at base_rate (nbar + 1) and upward jumps
|0><1| at base_rate nbar.

Two drivings are provided: the plain Markov thermalization (fixed rates,
used as the reference dynamics and the oracle for the closed-form cooling
curve) and the fast-thermalization rates that steer a prescribed
inverse-temperature schedule exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import DEFAULT_TOL, Tolerances
from ..controls import ControlSet
from ..errors import MissingTarget, StaOpenError
from ..schedules import Schedule
from ..trajectory import SpectralTrajectory
from .tls import SIGMA_Z


@dataclass(frozen=True)
class AtomSpec:
    omega0: float
    beta_s0: float
    beta_bath: float
    base_rate: float
    target: Schedule | None = None

    def __post_init__(self):
        if self.omega0 <= 0 or self.beta_s0 <= 0 or self.beta_bath <= 0:
            raise StaOpenError("omega0 and both inverse temperatures must be > 0")
        if self.base_rate < 0:
            raise StaOpenError("base_rate must be >= 0")


def nbar(omega0: float, beta_bath: float) -> float:
    """Mean bath occupation 1/(e^{beta omega} - 1)."""
    return 1.0 / np.expm1(beta_bath * omega0)


def markov_rates(spec: AtomSpec) -> tuple[float, float]:
    """(rate_down, rate_up) = base_rate (nbar + 1), base_rate nbar."""
    n = nbar(spec.omega0, spec.beta_bath)
    return spec.base_rate * (n + 1.0), spec.base_rate * n


def markov_controls(spec: AtomSpec) -> ControlSet:
    """Time-independent ControlSet of the bath master equation."""
    rate_down, rate_up = markov_rates(spec)
    eye = np.eye(2, dtype=complex)
    down = np.zeros((2, 2), dtype=complex)
    down[1, 0] = 1.0
    up = down.conj().T
    return ControlSet(
        t=0.0, h_cd=0.5 * spec.omega0 * SIGMA_Z,
        gamma=np.zeros((2, 2), dtype=complex),
        lindblads=[(1, 0, down, rate_down), (0, 1, up, rate_up)],
        rank=2, basis=eye, lambdas=np.full(2, np.nan),
        lambdas_dot=np.full(2, np.nan), h1=np.zeros((2, 2), dtype=complex))


def thermal_qubit(omega0: float, beta: float) -> np.ndarray:
    """diag Gibbs state of (omega0/2) sigma_z."""
    p_excited = 1.0 / (1.0 + np.exp(beta * omega0))
    return np.diag([p_excited, 1.0 - p_excited]).astype(complex)


def atom_beta_of_t(spec: AtomSpec, t: float) -> float:
    """Closed-form inverse temperature under the bath master equation.

    The population difference w = p_excited - p_ground relaxes exponentially
    to its bath value at rate base_rate coth(omega0 beta_bath / 2).
    """
    theta_bath = 0.5 * spec.omega0 * spec.beta_bath
    w_inf = -np.tanh(theta_bath)
    w_0 = -np.tanh(0.5 * spec.omega0 * spec.beta_s0)
    decay = spec.base_rate / np.tanh(theta_bath)
    w = w_inf + (w_0 - w_inf) * np.exp(-decay * t)
    return float(2.0 * np.arctanh(-w) / spec.omega0)


def atom_sta_rates(spec: AtomSpec, t: float) -> tuple[float, float]:
    """(rate_up, rate_down) steering the target inverse-temperature schedule.

    rate_up = -(omega0/4) beta_dot e^{-beta omega0} drives |0><1| and
    rate_down = +(omega0/4) beta_dot e^{+beta omega0} drives |1><0|; one of
    the two is negative whenever the target moves, which is the non-Markovian
    fingerprint of the protocol.
    """
    if spec.target is None:
        raise MissingTarget("fast-thermalization rates need a target schedule")
    be = spec.target(t)
    be_dot = spec.target.derivative(t)
    rate_up = -0.25 * spec.omega0 * be_dot * np.exp(-be * spec.omega0)
    rate_down = 0.25 * spec.omega0 * be_dot * np.exp(be * spec.omega0)
    return float(rate_up), float(rate_down)


class AtomStaControls:
    """Caching provider of the fast-thermalization Lindblad controls."""

    def __init__(self, spec: AtomSpec):
        if spec.target is None:
            raise MissingTarget("fast-thermalization controls need a target")
        self.spec = spec
        self._h = 0.5 * spec.omega0 * SIGMA_Z
        self._eye = np.eye(2, dtype=complex)
        self._down = np.zeros((2, 2), dtype=complex)
        self._down[1, 0] = 1.0
        self._up = self._down.conj().T
        self._cache: dict[float, ControlSet] = {}

    def controls_at(self, t: float) -> ControlSet:
        key = float(t)
        hit = self._cache.get(key)
        if hit is None:
            rate_up, rate_down = atom_sta_rates(self.spec, key)
            hit = ControlSet(
                t=key, h_cd=self._h, gamma=np.zeros((2, 2), dtype=complex),
                lindblads=[(0, 1, self._up, rate_up),
                           (1, 0, self._down, rate_down)],
                rank=2, basis=self._eye, lambdas=np.full(2, np.nan),
                lambdas_dot=np.full(2, np.nan),
                h1=np.zeros((2, 2), dtype=complex))
            self._cache[key] = hit
        return hit

    def state(self, t: float) -> np.ndarray:
        return thermal_qubit(self.spec.omega0, self.spec.target(t))


def atom_trajectory(spec: AtomSpec, tol: Tolerances = DEFAULT_TOL
                    ) -> SpectralTrajectory:
    """Prescribed thermal trajectory of the target schedule (static basis)."""
    if spec.target is None:
        raise MissingTarget("prescribed atom trajectory needs a target")
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    om = spec.omega0

    def lambda_fn(t: float) -> np.ndarray:
        p_e = 1.0 / (1.0 + np.exp(spec.target(t) * om))
        return np.array([p_e, 1.0 - p_e])

    def lambda_dot_fn(t: float) -> np.ndarray:
        x = spec.target(t) * om
        x_dot = spec.target.derivative(t) * om
        sig = 1.0 / (1.0 + np.exp(-x))
        p_e_dot = -x_dot * sig * (1.0 - sig)
        return np.array([p_e_dot, -p_e_dot])

    t_f = spec.target.t_f if np.isfinite(spec.target.t_f) else 1.0
    return SpectralTrajectory(2, t_f, lambda_fn, lambda basis_t: eye,
                              lambda_dot_fn=lambda_dot_fn,
                              basis_dot_fn=lambda t: zero, tol=tol)


def atom_reference(spec: AtomSpec):
    """t -> H0 callable (time-independent for this model)."""
    h0 = 0.5 * spec.omega0 * SIGMA_Z

    def reference(t: float) -> np.ndarray:
        return h0

    return reference
