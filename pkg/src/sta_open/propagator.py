"""Fixed-step RK4 propagation of the equivalent equations of motion.

Five right-hand sides share one integrator:

- gain-loss: non-trace-preserving flow under H_CD - i Gamma;
- balanced-nonlinear: the same flow plus the normalizing 2<Gamma> rho term;
- lindblad-like: commutator plus the full pair dissipator;
- markov-lindblad: the same algebraic form with fixed rates (thermalizing
  atom reference dynamics);
- oscillator-dephasing: commutator plus a position double-commutator with a
  scalar dephasing strength.

States are never symmetrized during integration; Hermiticity defects are
diagnostics, not corrections.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL, TimeGrid, Tolerances
from .controls import ControlSet, apply_dissipator
from .errors import GridMismatch, ShapeMismatch, StaOpenError
from .linalg import batched_min_eig, fidelity, validate_state
from .trajectory import SpectralTrajectory


class GeneratorKind(str, Enum):
    GAIN_LOSS = "gain-loss"
    BALANCED_NONLINEAR = "balanced-nonlinear"
    LINDBLAD_LIKE = "lindblad-like"
    MARKOV_LINDBLAD = "markov-lindblad"
    OSCILLATOR_DEPHASING = "oscillator-dephasing"

    @classmethod
    def parse(cls, name: str) -> "GeneratorKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise StaOpenError(
            f"unknown generator '{name}'; choose from "
            + ", ".join(k.value for k in cls))


@dataclass(eq=False)
class DephasingControls:
    """Controls for the oscillator variant: drift Hamiltonian, position
    operator, and scalar dephasing strength at one instant."""

    t: float
    h: np.ndarray
    x: np.ndarray
    strength: float


def rhs(kind: GeneratorKind, controls, rho: np.ndarray) -> np.ndarray:
    """Generator right-hand side at the controls' time."""
    if kind is GeneratorKind.OSCILLATOR_DEPHASING:
        if rho.shape != controls.h.shape:
            raise ShapeMismatch(f"state {rho.shape} vs drift {controls.h.shape}")
        comm = controls.h @ rho - rho @ controls.h
        xr = controls.x @ rho - rho @ controls.x
        dbl = controls.x @ xr - xr @ controls.x
        return -1j * comm - controls.strength * dbl

    if rho.shape != controls.h_cd.shape:
        raise ShapeMismatch(f"state {rho.shape} vs controls {controls.h_cd.shape}")
    h = controls.h_cd
    out = -1j * (h @ rho - rho @ h)
    if kind is GeneratorKind.GAIN_LOSS or kind is GeneratorKind.BALANCED_NONLINEAR:
        g = controls.gamma
        out -= g @ rho + rho @ g
        if kind is GeneratorKind.BALANCED_NONLINEAR:
            out += 2.0 * np.real(np.trace(g @ rho)) * rho
        return out
    if kind is GeneratorKind.LINDBLAD_LIKE or kind is GeneratorKind.MARKOV_LINDBLAD:
        return out + apply_dissipator(controls, rho)
    raise StaOpenError(f"unhandled generator kind {kind}")


@dataclass(eq=False)
class PropagationRecord:
    """One integration: states on the grid plus per-node diagnostics."""

    kind: GeneratorKind
    grid: TimeGrid
    times: np.ndarray
    states: np.ndarray
    trace: np.ndarray
    hermiticity_defect: np.ndarray
    min_eigenvalue: np.ndarray
    fidelity_to_target: np.ndarray | None
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def positivity_breach(self) -> bool:
        return any("positivity" in w for w in self.warnings)

    def subsample(self, stride: int) -> "PropagationRecord":
        """Coarser view of the same run (stride must divide steps)."""
        if stride < 1 or self.grid.steps % stride:
            raise GridMismatch(
                f"stride {stride} does not divide steps {self.grid.steps}")
        sl = slice(None, None, stride)
        fid = None if self.fidelity_to_target is None else self.fidelity_to_target[sl]
        return PropagationRecord(
            kind=self.kind,
            grid=TimeGrid(self.grid.t0, self.grid.tf, self.grid.steps // stride),
            times=self.times[sl], states=self.states[sl],
            trace=self.trace[sl],
            hermiticity_defect=self.hermiticity_defect[sl],
            min_eigenvalue=self.min_eigenvalue[sl],
            fidelity_to_target=fid,
            warnings=list(self.warnings), wall_time=self.wall_time)


class StaticControls:
    """Provider with one time-independent ControlSet (fixed-rate dynamics)."""

    def __init__(self, cset: ControlSet):
        self._cset = cset

    def controls_at(self, t: float) -> ControlSet:
        return self._cset


def integrate(kind: GeneratorKind, provider, grid: TimeGrid,
              rho0: np.ndarray | None = None, *,
              target: Callable[[float], np.ndarray] | SpectralTrajectory | None = None,
              tol: Tolerances = DEFAULT_TOL) -> PropagationRecord:
    """Classical RK4 with controls evaluated at node and midpoint times.

    Positivity breaches below -pos_breach are recorded as warnings and the
    run continues; non-finite states abort. If the provider has a state()
    method it supplies the default initial state.
    """
    t_start = time.perf_counter()
    if rho0 is None:
        if not hasattr(provider, "state"):
            raise StaOpenError("no initial state and provider cannot supply one")
        rho0 = provider.state(grid.t0)
    rho0 = validate_state(rho0, tol, trace_target=float(np.real(np.trace(rho0))))

    times = grid.nodes()
    mids = 0.5 * (times[:-1] + times[1:])
    dt = grid.dt
    dim = rho0.shape[0]
    states = np.empty((times.size, dim, dim), dtype=complex)
    states[0] = rho0

    y = rho0.astype(complex)
    ctrl = provider.controls_at
    for k in range(grid.steps):
        c0 = ctrl(float(times[k]))
        cm = ctrl(float(mids[k]))
        c1 = ctrl(float(times[k + 1]))
        k1 = rhs(kind, c0, y)
        k2 = rhs(kind, cm, y + (0.5 * dt) * k1)
        k3 = rhs(kind, cm, y + (0.5 * dt) * k2)
        k4 = rhs(kind, c1, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if not np.all(np.isfinite(y.view(float))):
            raise StaOpenError(
                f"non-finite state at t={times[k + 1]:.6g} ({kind.value}); "
                "integration aborted")
        states[k + 1] = y

    trace = np.real(np.einsum("kii->k", states))
    herm = np.linalg.norm(states - np.conj(np.swapaxes(states, 1, 2)),
                          axis=(1, 2))
    min_eig = batched_min_eig(states)

    warnings: list[str] = []
    if min_eig.min() < -tol.pos_breach:
        k_bad = int(np.argmin(min_eig))
        warnings.append(
            f"positivity breach: eigenvalue {min_eig[k_bad]:.3e} at "
            f"t={times[k_bad]:.6g} below -{tol.pos_breach:.1e}")

    fid = None
    if target is not None:
        goal = target.state if isinstance(target, SpectralTrajectory) else target
        fid = np.empty(times.size)
        for k, t in enumerate(times):
            fid[k] = fidelity(states[k], goal(float(t)), tol, validate=False)

    return PropagationRecord(
        kind=kind, grid=grid, times=times, states=states, trace=trace,
        hermiticity_defect=herm, min_eigenvalue=min_eig,
        fidelity_to_target=fid, warnings=warnings,
        wall_time=time.perf_counter() - t_start)


def track_error(record: PropagationRecord, traj: SpectralTrajectory,
                renormalize: bool = False,
                tol: Tolerances = DEFAULT_TOL) -> float:
    """Max over nodes of the Bures distance to the prescribed state.

    renormalize=True divides each propagated state by its trace first (the
    gain-loss flow is deliberately not trace-preserving).
    """
    slack = 1e-9 * max(abs(traj.t_f), 1.0)
    if record.times[0] < traj.t0 - slack or record.times[-1] > traj.t_f + slack:
        raise GridMismatch("record grid extends outside the trajectory domain")
    worst = 0.0
    for k, t in enumerate(record.times):
        rho = record.states[k]
        if renormalize:
            rho = rho / np.real(np.trace(rho))
        f = fidelity(rho, traj.state(float(t)), tol, validate=False)
        worst = max(worst, float(np.sqrt(max(2.0 * (1.0 - f), 0.0))))
    return worst
