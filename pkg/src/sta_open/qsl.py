"""Quantum-speed-limit bounds evaluated on completed propagation records.

Two bounds are reported:

- Fisher route: per-node speed 2 sqrt(Re Tr[(H - i Gamma) rho (H + i Gamma)])
  (an upper bound on the Bures-metric speed), trapezoid-averaged;
  tau_min = Bures distance between the endpoint states / average speed.
- Trace route: per-node speed ||d rho/dt||_1 from central differences of the
  stored states (one-sided at the ends); tau_min = (1/2)||rho_f - rho_0||_1 /
  average speed.

The triangle check splits the analytic right-hand side into the commutator
and the rest and asserts trace-norm subadditivity; differencing the stored
states instead would inject O(dt) noise exactly where the inequality is
tight (stroke endpoints, where all rates vanish).
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .controls import ControlSet
from .errors import GridMismatch, InvalidState
from .linalg import bures_distance, trace_distance, trace_norm
from .propagator import PropagationRecord, rhs


@dataclass(frozen=True)
class QslReport:
    bures_distance_endpoints: float
    fisher_speed_avg: float
    trace_speed_avg: float
    tau_min_fisher: float
    tau_min_trace: float
    actual_duration: float
    triangle_max_violation: float | None = None

    def as_dict(self) -> dict:
        return {
            "buresDistanceEndpoints": self.bures_distance_endpoints,
            "fisherBoundSpeedAvg": self.fisher_speed_avg,
            "traceMetricSpeedAvg": self.trace_speed_avg,
            "tauMinFisher": self.tau_min_fisher,
            "tauMinTrace": self.tau_min_trace,
            "actualDuration": self.actual_duration,
            "triangleMaxViolation": self.triangle_max_violation,
        }


def _controls_seq(record: PropagationRecord, controls) -> list[ControlSet]:
    if callable(controls):
        return [controls(float(t)) for t in record.times]
    out = list(controls)
    if len(out) != record.times.size:
        raise GridMismatch(
            f"{len(out)} control sets for {record.times.size} nodes")
    return out


def fisher_speeds(record: PropagationRecord, controls) -> np.ndarray:
    """Per-node Fisher-route speed 2 sqrt(Re Tr[(H-iG) rho (H+iG)])."""
    csets = _controls_seq(record, controls)
    speeds = np.empty(record.times.size)
    for k, cset in enumerate(csets):
        hny = cset.h_cd - 1j * cset.gamma
        val = np.real(np.trace(hny @ record.states[k] @ hny.conj().T))
        speeds[k] = 2.0 * np.sqrt(max(val, 0.0))
    return speeds


def fisher_bound(record: PropagationRecord, controls,
                 tol: Tolerances = DEFAULT_TOL) -> tuple[float, float, float]:
    """(endpoint Bures distance, average speed, tau_min)."""
    if not np.all(np.isfinite(record.states.view(float))):
        raise InvalidState("record contains non-finite states")
    speeds = fisher_speeds(record, controls)
    avg = float(np.trapezoid(speeds, record.times)
                / (record.times[-1] - record.times[0]))
    dist = bures_distance(record.states[0], record.states[-1], tol,
                          validate=False)
    tau = dist / avg if avg > 0.0 else 0.0
    return dist, avg, tau


def trace_speeds(record: PropagationRecord,
                 tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """||d rho/dt||_1 from finite differences of the stored states."""
    if record.times.size < 3:
        raise GridMismatch("trace-metric bound needs at least 3 nodes")
    dt = record.grid.dt
    k_nodes = record.times.size
    speeds = np.empty(k_nodes)
    for k in range(k_nodes):
        if k == 0:
            drho = (record.states[1] - record.states[0]) / dt
        elif k == k_nodes - 1:
            drho = (record.states[-1] - record.states[-2]) / dt
        else:
            drho = (record.states[k + 1] - record.states[k - 1]) / (2.0 * dt)
        speeds[k] = trace_norm(drho, tol, strict=False)
    return speeds


def trace_metric_bound(record: PropagationRecord,
                       tol: Tolerances = DEFAULT_TOL) -> tuple[float, float, float]:
    """(endpoint trace distance, average speed, tau_min)."""
    speeds = trace_speeds(record, tol)
    avg = float(np.trapezoid(speeds, record.times)
                / (record.times[-1] - record.times[0]))
    dist = trace_distance(record.states[0], record.states[-1], tol)
    tau = dist / avg if avg > 0.0 else 0.0
    return dist, avg, tau


def triangle_check(record: PropagationRecord, controls,
                   tol: Tolerances = DEFAULT_TOL) -> float:
    """Max over nodes of ||A + B||_1 - (||A||_1 + ||B||_1).

    A is the commutator part of the generator, B everything else, both
    evaluated analytically at the stored states. Never positive beyond
    round-off for a correct right-hand side.
    """
    csets = _controls_seq(record, controls)
    worst = -np.inf
    for k, cset in enumerate(csets):
        rho = record.states[k]
        h = cset.h_cd if hasattr(cset, "h_cd") else cset.h
        comm = -1j * (h @ rho - rho @ h)
        full = rhs(record.kind, cset, rho)
        rest = full - comm
        lhs = trace_norm(full, tol, strict=False)
        rhs_val = (trace_norm(comm, tol, strict=False)
                   + trace_norm(rest, tol, strict=False))
        worst = max(worst, lhs - rhs_val)
    return float(worst)


def qsl_report(record: PropagationRecord, controls,
               tol: Tolerances = DEFAULT_TOL,
               with_triangle: bool = True) -> QslReport:
    dist_b, avg_f, tau_f = fisher_bound(record, controls, tol)
    _, avg_t, tau_t = trace_metric_bound(record, tol)
    tri = triangle_check(record, controls, tol) if with_triangle else None
    return QslReport(
        bures_distance_endpoints=dist_b,
        fisher_speed_avg=avg_f,
        trace_speed_avg=avg_t,
        tau_min_fisher=tau_f,
        tau_min_trace=tau_t,
        actual_duration=float(record.times[-1] - record.times[0]),
        triangle_max_violation=tri)
