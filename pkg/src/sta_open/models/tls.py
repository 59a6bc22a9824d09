"""Two-level thermal strokes: closed-form trajectory, controls, and rates.

Conventions used throughout:

- H0 = (detuning sigma_z + coupling sigma_x)/2, splitting R = sqrt(D^2 + W^2),
  mixing angle theta = atan2(W, D);
- eigenbranches ordered by ascending energy: branch 0 is the ground state
  (sin(theta/2), -cos(theta/2)) at -R/2, branch 1 the excited state
  (cos(theta/2), sin(theta/2)) at +R/2;
- thermal occupations lambda_excited = 1/(1 + e^{beta R}) (Gibbs weights of
  the instantaneous splitting).

The steering Hamiltonian for this family is (theta_dot/2) sigma_y with
theta_dot = (W_dot D - W D_dot)/R^2; the sign follows from
d/dt |excited> = -(theta_dot/2)|ground>, which the generic construction and
the tracking tests both confirm.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..config import DEFAULT_TOL, Tolerances
from ..errors import GapClosure, StaOpenError
from ..schedules import Schedule
from ..trajectory import SpectralTrajectory

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class StrokeKind(str, Enum):
    ISOTHERMAL = "isothermal"
    ISOCHORE = "isochore"
    GENERAL = "general"


@dataclass(frozen=True)
class TlsStroke:
    """Driving schedules for one two-level stroke.

    detuning and coupling are the sigma_z and sigma_x coefficients (in units
    of energy); beta is the inverse-temperature schedule of the instantaneous
    thermal occupations.
    """

    detuning: Schedule
    coupling: Schedule
    beta: Schedule
    kind: StrokeKind = StrokeKind.GENERAL
    t_f: float = 1.0

    def __post_init__(self):
        probes = np.linspace(0.0, self.t_f, 7)
        if self.kind is StrokeKind.ISOTHERMAL:
            if any(abs(self.beta.derivative(t)) > 1e-12 for t in probes):
                raise StaOpenError("isothermal stroke needs constant beta")
        if self.kind is StrokeKind.ISOCHORE:
            drift = max(max(abs(self.detuning.derivative(t)),
                            abs(self.coupling.derivative(t))) for t in probes)
            if drift > 1e-12:
                raise StaOpenError(
                    "isochore stroke needs constant detuning and coupling")

    def fields_at(self, t: float):
        """(D, W, beta, D_dot, W_dot, beta_dot) with the gap guard applied.

        One-slot memo: assembling the controls at one instant asks for these
        fields several times in a row (occupations, basis, steering,
        reference), so the schedule evaluations are shared.
        """
        cached = self.__dict__.get("_fields_memo")
        if cached is not None and cached[0] == t:
            return cached[1]
        d, w = self.detuning(t), self.coupling(t)
        r2 = d * d + w * w
        if r2 < 1e-16:
            raise GapClosure(f"detuning^2 + coupling^2 = {r2:.3e} at t={t}")
        out = (d, w, self.beta(t), self.detuning.derivative(t),
               self.coupling.derivative(t), self.beta.derivative(t))
        object.__setattr__(self, "_fields_memo", (t, out))
        return out


def tls_hamiltonians(stroke: TlsStroke, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(H0, H1) at time t.

    H1 = (theta_dot/2) sigma_y steers the instantaneous eigenbasis exactly.
    """
    d, w, _, dd, wd, _ = stroke.fields_at(t)
    h0 = 0.5 * (d * SIGMA_Z + w * SIGMA_X)
    theta_dot = (wd * d - w * dd) / (d * d + w * w)
    return h0, 0.5 * theta_dot * SIGMA_Y


def tls_basis(d: float, w: float) -> tuple[np.ndarray, np.ndarray]:
    """(ground, excited) eigenvector pair of (D sigma_z + W sigma_x)/2."""
    theta = np.arctan2(w, d)
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    ground = np.array([s, -c], dtype=complex)
    excited = np.array([c, s], dtype=complex)
    return ground, excited


def tls_rates(stroke: TlsStroke, t: float) -> tuple[float, float]:
    """(rate_pm, rate_mn) = (lambda_dot_+/(2 lambda_-), lambda_dot_-/(2 lambda_+)).

    Dispatches to the per-kind closed forms; all reduce to the same general
    numerator R d(beta R)/dt = D^2 beta_dot + W(W beta_dot + beta W_dot)
    + beta D D_dot.
    """
    d, w, be, dd, wd, bed = stroke.fields_at(t)
    r = np.sqrt(d * d + w * w)
    if stroke.kind is StrokeKind.ISOTHERMAL:
        r_dot = (d * dd + w * wd) / r
        num = be * r * r_dot
    elif stroke.kind is StrokeKind.ISOCHORE:
        num = r * r * bed
    else:
        num = d * d * bed + w * (w * bed + be * wd) + be * d * dd
    rate_pm = -num / (2.0 * r * (np.exp(be * r) + 1.0))
    rate_mp = num / (2.0 * r * (np.exp(-be * r) + 1.0))
    return float(rate_pm), float(rate_mp)


def tls_gamma_from_rates(rates: tuple[float, float],
                         ground: np.ndarray, excited: np.ndarray) -> np.ndarray:
    """Gamma assembled from the pair rates.

    Gamma = rate_mp |e><e| + rate_pm |g><g|: the coefficient of each
    projector is -lambda_dot/(2 lambda) of that branch, which for a
    trace-preserving qubit equals the opposite branch's pair rate.
    """
    rate_pm, rate_mp = rates
    return (rate_mp * np.outer(excited, excited.conj())
            + rate_pm * np.outer(ground, ground.conj()))


def tls_occupations(stroke: TlsStroke, t: float) -> tuple[float, float]:
    """(lambda_ground, lambda_excited) thermal weights at time t."""
    d, w, be, *_ = stroke.fields_at(t)
    r = np.sqrt(d * d + w * w)
    lam_e = 1.0 / (1.0 + np.exp(be * r))
    return 1.0 - lam_e, lam_e


def tls_trajectory(stroke: TlsStroke,
                   tol: Tolerances = DEFAULT_TOL) -> SpectralTrajectory:
    """Closed-form spectral trajectory (analytic derivatives, no FD)."""

    def lambda_fn(t: float) -> np.ndarray:
        lam_g, lam_e = tls_occupations(stroke, t)
        return np.array([lam_g, lam_e])

    def lambda_dot_fn(t: float) -> np.ndarray:
        d, w, be, dd, wd, bed = stroke.fields_at(t)
        r = np.sqrt(d * d + w * w)
        x = be * r
        x_dot = bed * r + be * (d * dd + w * wd) / r
        sig = 1.0 / (1.0 + np.exp(-x))
        lam_e_dot = -x_dot * sig * (1.0 - sig)
        return np.array([-lam_e_dot, lam_e_dot])

    def basis_fn(t: float) -> np.ndarray:
        d, w, *_ = stroke.fields_at(t)
        ground, excited = tls_basis(d, w)
        return np.column_stack([ground, excited])

    def basis_dot_fn(t: float) -> np.ndarray:
        d, w, _, dd, wd, _ = stroke.fields_at(t)
        theta_dot = (wd * d - w * dd) / (d * d + w * w)
        ground, excited = tls_basis(d, w)
        return np.column_stack([0.5 * theta_dot * excited,
                                -0.5 * theta_dot * ground])

    return SpectralTrajectory(2, stroke.t_f, lambda_fn, basis_fn,
                              lambda_dot_fn=lambda_dot_fn,
                              basis_dot_fn=basis_dot_fn, tol=tol)


def tls_reference(stroke: TlsStroke):
    """t -> H0(t) callable for the control provider."""

    def h0(t: float) -> np.ndarray:
        d, w, *_ = stroke.fields_at(t)
        return 0.5 * (d * SIGMA_Z + w * SIGMA_X)

    return h0


def isothermal_stroke(beta: float, coupling: float, detuning_start: float,
                      detuning_end: float, t_f: float) -> TlsStroke:
    """Sweep the detuning through an avoided crossing at fixed temperature."""
    return TlsStroke(
        detuning=Schedule.polynomial5(detuning_start, detuning_end, t_f),
        coupling=Schedule.constant(coupling),
        beta=Schedule.constant(beta),
        kind=StrokeKind.ISOTHERMAL, t_f=t_f)


def isochore_stroke(beta_start: float, beta_end: float, detuning: float,
                    coupling: float, t_f: float) -> TlsStroke:
    """Cool or heat at a frozen working point."""
    return TlsStroke(
        detuning=Schedule.constant(detuning),
        coupling=Schedule.constant(coupling),
        beta=Schedule.polynomial5(beta_start, beta_end, t_f),
        kind=StrokeKind.ISOCHORE, t_f=t_f)


def general_stroke(detuning: tuple[float, float], coupling: tuple[float, float],
                   beta: tuple[float, float], t_f: float) -> TlsStroke:
    """All three schedules vary (polynomial5 each)."""
    return TlsStroke(
        detuning=Schedule.polynomial5(detuning[0], detuning[1], t_f),
        coupling=Schedule.polynomial5(coupling[0], coupling[1], t_f),
        beta=Schedule.polynomial5(beta[0], beta[1], t_f),
        kind=StrokeKind.GENERAL, t_f=t_f)
