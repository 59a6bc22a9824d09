"""Named scenario runners.

Each scenario builds its prescribed trajectory and control providers,
propagates the requested generator variants, evaluates the speed-limit
report, and returns plot-ready tables plus a manifest summary. File I/O
lives in the CLI; everything here is pure computation so runs can execute
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL, TimeGrid, Tolerances
from .controls import TrajectoryControls
from .errors import StaOpenError, ValidationError
from .linalg import fidelity
from .models import atom as atom_model
from .models import oscillator as osc_model
from .models import tls as tls_model
from .propagator import (GeneratorKind, PropagationRecord, StaticControls,
                         integrate)
from .qsl import QslReport, qsl_report
from .schedules import Schedule
from .trajectory import SpectralTrajectory

CD_GENERATORS = (GeneratorKind.GAIN_LOSS, GeneratorKind.BALANCED_NONLINEAR,
                 GeneratorKind.LINDBLAD_LIKE)

SCENARIO_DEFAULTS: dict[str, dict] = {
    "tls-isothermal": {
        "parameters": {"beta": 1.0, "coupling": 1.0,
                       "detuning_start": 1.0, "detuning_end": -1.0},
        "grid": {"t_f": 1.0, "steps": 2000},
        "generators": [k.value for k in CD_GENERATORS],
    },
    "tls-otto-cool": {
        "parameters": {"beta_start": 1.0, "beta_end": 2.0,
                       "detuning": 1.0, "coupling": 1.0},
        "grid": {"t_f": 1.0, "steps": 2000},
        "generators": [k.value for k in CD_GENERATORS],
    },
    "tls-otto-heat": {
        "parameters": {"beta_start": 2.0, "beta_end": 1.0,
                       "detuning": 1.0, "coupling": 1.0},
        "grid": {"t_f": 1.0, "steps": 2000},
        "generators": [k.value for k in CD_GENERATORS],
    },
    "tls-general": {
        "parameters": {"detuning_start": 1.0, "detuning_end": -1.0,
                       "coupling_start": 1.0, "coupling_end": 1.5,
                       "beta_start": 1.0, "beta_end": 2.0},
        "grid": {"t_f": 1.0, "steps": 2000},
        "generators": [k.value for k in CD_GENERATORS],
    },
    "atom-markov": {
        "parameters": {"omega0": 2.0, "beta_s0": 0.1, "beta_bath": 0.01,
                       "base_rate": 0.005},
        "grid": {"t_f": 10.0, "steps": 2000},
        "generators": [GeneratorKind.MARKOV_LINDBLAD.value],
    },
    "atom-sta": {
        "parameters": {"omega0": 2.0, "beta_s0": 0.1, "beta_bath": 0.01,
                       "base_rate": 0.005, "target_end": 0.01},
        "grid": {"t_f": 5.0, "steps": 2000},
        "generators": [GeneratorKind.LINDBLAD_LIKE.value],
    },
    "osc-heat": {
        "parameters": {"mass": 1.0, "omega_start": 1.0, "omega_end": 2.0,
                       "beta_start": 1.0, "beta_end": 0.1, "n_levels": 60},
        "grid": {"t_f": 2.0, "steps": 4000},
        "generators": [GeneratorKind.OSCILLATOR_DEPHASING.value],
    },
    "osc-cool": {
        "parameters": {"mass": 1.0, "omega_start": 1.0, "omega_end": 0.5,
                       "beta_start": 1.0, "beta_end": 10.0, "n_levels": 60},
        "grid": {"t_f": 2.0, "steps": 4000},
        "generators": [],
    },
    "custom-trajectory": {
        "parameters": {"occupation_files": [], "basis": "static",
                       "rotation_rate": 0.0},
        "grid": {"t_f": 1.0, "steps": 1000},
        "generators": [k.value for k in CD_GENERATORS],
    },
}

# QSL evaluation cost scales with node count; prescribed ladder records are
# evaluated on a coarser grid (the bounds are integrals, not per-node claims)
QSL_MAX_NODES = 500


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    parameters: dict
    t_f: float
    steps: int
    generators: tuple
    seed: int = 0

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(0.0, self.t_f, self.steps)


def validate_config(raw: dict) -> RunConfig:
    """Normalize a parsed JSON config, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    allowed_top = {"scenario", "parameters", "grid", "generators", "seed"}
    unknown = set(raw) - allowed_top
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    scenario = raw.get("scenario")
    if scenario not in SCENARIO_DEFAULTS:
        raise ValidationError(
            f"unknown scenario {scenario!r}; choose from "
            + ", ".join(sorted(SCENARIO_DEFAULTS)))
    defaults = SCENARIO_DEFAULTS[scenario]

    params = dict(defaults["parameters"])
    user_params = raw.get("parameters", {})
    if not isinstance(user_params, dict):
        raise ValidationError("parameters must be an object")
    bad = set(user_params) - set(params)
    if bad:
        raise ValidationError(
            f"unknown parameters for {scenario}: {sorted(bad)}")
    params.update(user_params)
    _check_parameter_ranges(scenario, params)

    grid_raw = dict(defaults["grid"])
    user_grid = raw.get("grid", {})
    if not isinstance(user_grid, dict) or set(user_grid) - {"t_f", "steps"}:
        raise ValidationError("grid must be an object with t_f and/or steps")
    grid_raw.update(user_grid)
    t_f = float(grid_raw["t_f"])
    steps = int(grid_raw["steps"])
    if not (t_f > 0 and steps >= 2):
        raise ValidationError("grid needs t_f > 0 and steps >= 2")

    generators = raw.get("generators", defaults["generators"])
    if not isinstance(generators, list):
        raise ValidationError("generators must be a list of names")
    kinds = []
    for name in generators:
        try:
            kind = GeneratorKind.parse(name)
        except StaOpenError as exc:
            raise ValidationError(str(exc)) from None
        if kind.value not in defaults["generators"]:
            raise ValidationError(
                f"generator {name!r} not available for {scenario}")
        kinds.append(kind)

    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ValidationError("seed must be an integer")
    return RunConfig(scenario=scenario, parameters=params, t_f=t_f,
                     steps=steps, generators=tuple(kinds), seed=seed)


def _check_parameter_ranges(scenario: str, p: dict) -> None:
    def positive(*names):
        for name in names:
            if not (isinstance(p[name], (int, float)) and p[name] > 0):
                raise ValidationError(f"{name} must be a positive number")

    if scenario.startswith("tls-") or scenario.startswith("atom-"):
        for name, value in p.items():
            if not isinstance(value, (int, float)):
                raise ValidationError(f"{name} must be a number")
    if scenario == "tls-isothermal":
        positive("beta")
    elif scenario in ("tls-otto-cool", "tls-otto-heat", "tls-general"):
        positive("beta_start", "beta_end")
    elif scenario.startswith("atom-"):
        positive("omega0", "beta_s0", "beta_bath")
        if p["base_rate"] < 0:
            raise ValidationError("base_rate must be >= 0")
        if scenario == "atom-sta":
            positive("target_end")
    elif scenario.startswith("osc-"):
        positive("mass", "omega_start", "omega_end", "beta_start", "beta_end")
        if not (isinstance(p["n_levels"], int) and p["n_levels"] >= 2):
            raise ValidationError("n_levels must be an integer >= 2")
    elif scenario == "custom-trajectory":
        if not p["occupation_files"]:
            raise ValidationError("custom-trajectory needs occupation_files")
        if p["basis"] not in ("static", "rotating"):
            raise ValidationError("basis must be 'static' or 'rotating'")


@dataclass
class ScenarioResult:
    config: RunConfig
    tables: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict)
    summaries: dict = field(default_factory=dict)
    qsl: QslReport | None = None
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def failed_checks(self) -> list:
        return [c for c in self.checks if not c[1]]


def _record_summary(record: PropagationRecord) -> dict:
    out = {
        "finalTrace": float(record.trace[-1]),
        "maxTraceDefect": float(np.abs(record.trace - 1.0).max()),
        "minEigenvalue": float(record.min_eigenvalue.min()),
        "maxHermiticityDefect": float(record.hermiticity_defect.max()),
        "wallTime": record.wall_time,
        "warnings": list(record.warnings),
    }
    if record.fidelity_to_target is not None:
        out["finalFidelity"] = float(record.fidelity_to_target[-1])
        out["minFidelity"] = float(record.fidelity_to_target.min())
    return out


def _state_columns(states: np.ndarray) -> tuple[list, list]:
    """Real parametrization of a qubit state stack."""
    headers = ["rho00_re", "rho01_re", "rho01_im", "rho11_re"]
    cols = [np.real(states[:, 0, 0]), np.real(states[:, 0, 1]),
            np.imag(states[:, 0, 1]), np.real(states[:, 1, 1])]
    return headers, cols


def _qsl_checks(report: QslReport, duration: float) -> list:
    checks = [
        ("tau_min_fisher<=duration",
         report.tau_min_fisher <= duration + 1e-9,
         f"{report.tau_min_fisher:.6g} vs {duration:.6g}"),
        ("tau_min_trace<=duration",
         report.tau_min_trace <= duration + 1e-9,
         f"{report.tau_min_trace:.6g} vs {duration:.6g}"),
    ]
    if report.triangle_max_violation is not None:
        checks.append(("triangle_inequality<=1e-8",
                       report.triangle_max_violation <= 1e-8,
                       f"{report.triangle_max_violation:.3e}"))
    return checks


def prescribed_record(traj: SpectralTrajectory, grid: TimeGrid,
                      kind: GeneratorKind = GeneratorKind.GAIN_LOSS,
                      tol: Tolerances = DEFAULT_TOL) -> PropagationRecord:
    """Record of the prescribed trajectory itself (no integration)."""
    times = grid.nodes()
    dim = traj.dim
    states = np.empty((times.size, dim, dim), dtype=complex)
    for k, t in enumerate(times):
        states[k] = traj.state(float(t))
    lam_min = np.empty(times.size)
    for k, t in enumerate(times):
        lam_min[k] = traj.lambdas(float(t)).min()
    return PropagationRecord(
        kind=kind, grid=grid, times=times, states=states,
        trace=np.real(np.einsum("kii->k", states)),
        hermiticity_defect=np.zeros(times.size),
        min_eigenvalue=lam_min, fidelity_to_target=None)


def _tls_stroke(config: RunConfig) -> tls_model.TlsStroke:
    p, t_f = config.parameters, config.t_f
    name = config.scenario
    if name == "tls-isothermal":
        return tls_model.isothermal_stroke(
            p["beta"], p["coupling"], p["detuning_start"], p["detuning_end"], t_f)
    if name in ("tls-otto-cool", "tls-otto-heat"):
        return tls_model.isochore_stroke(
            p["beta_start"], p["beta_end"], p["detuning"], p["coupling"], t_f)
    return tls_model.general_stroke(
        (p["detuning_start"], p["detuning_end"]),
        (p["coupling_start"], p["coupling_end"]),
        (p["beta_start"], p["beta_end"]), t_f)


def _run_tls(config: RunConfig, tol: Tolerances) -> ScenarioResult:
    stroke = _tls_stroke(config)
    traj = tls_model.tls_trajectory(stroke, tol)
    provider = TrajectoryControls(traj, reference=tls_model.tls_reference(stroke),
                                  tol=tol)
    grid = config.grid
    result = ScenarioResult(config=config)

    times = grid.nodes()
    controls_cols = _tls_control_columns(stroke, times)
    lam_sum = controls_cols["lambda_ground"] + controls_cols["lambda_excited"]

    renorm_states = {}
    for kind in config.generators:
        record = integrate(kind, provider, grid, target=traj, tol=tol)
        result.records[kind.value] = record
        summary = _record_summary(record)
        bures = np.sqrt(np.clip(2.0 * (1.0 - record.fidelity_to_target), 0.0,
                                None))
        if kind is GeneratorKind.GAIN_LOSS:
            # the raw flow changes the norm; tracking is judged renormalized
            renorm = record.states / record.trace[:, None, None]
            renorm_states[kind.value] = renorm
            worst = 0.0
            for k, t in enumerate(times):
                f = fidelity(renorm[k], traj.state(float(t)), tol, validate=False)
                worst = max(worst, np.sqrt(max(2.0 * (1.0 - f), 0.0)))
            summary["maxBuresToTarget"] = float(worst)
            trace_defect = float(np.abs(record.trace - lam_sum).max())
            summary["maxTraceVsOccupationSum"] = trace_defect
            result.checks.append(
                (f"{kind.value}:trace_matches_occupation_sum<=1e-5",
                 trace_defect <= 1e-5, f"{trace_defect:.3e}"))
        else:
            renorm_states[kind.value] = record.states
            summary["maxBuresToTarget"] = float(bures.max())
            result.checks.append(
                (f"{kind.value}:unit_trace<=1e-7",
                 summary["maxTraceDefect"] <= 1e-7,
                 f"{summary['maxTraceDefect']:.3e}"))
        result.checks.append(
            (f"{kind.value}:tracking_bures<=1e-5",
             summary["maxBuresToTarget"] <= 1e-5,
             f"{summary['maxBuresToTarget']:.3e}"))
        result.checks.append(
            (f"{kind.value}:min_eig>=-1e-6",
             summary["minEigenvalue"] >= -tol.pos_breach,
             f"{summary['minEigenvalue']:.3e}"))
        result.summaries[kind.value] = summary

        headers = ["t", "trace", "min_eigenvalue", "hermiticity_defect",
                   "fidelity_to_target"]
        cols = [times, record.trace, record.min_eigenvalue,
                record.hermiticity_defect, record.fidelity_to_target]
        sh, sc = _state_columns(record.states)
        headers += sh + list(controls_cols)
        cols += sc + list(controls_cols.values())
        result.tables[f"timeseries_{kind.value}"] = (headers, cols)

    gl, bn = GeneratorKind.GAIN_LOSS.value, GeneratorKind.BALANCED_NONLINEAR.value
    if gl in renorm_states and bn in renorm_states:
        dev = float(np.abs(renorm_states[gl] - renorm_states[bn]).max())
        result.summaries[gl]["maxDeviationFromBalanced"] = dev
        result.checks.append(
            ("gain-loss_renormalized_matches_balanced<=1e-6",
             dev <= 1e-6, f"{dev:.3e}"))

    qsl_kind = (GeneratorKind.LINDBLAD_LIKE if GeneratorKind.LINDBLAD_LIKE
                in config.generators else None)
    if qsl_kind is not None:
        record = result.records[qsl_kind.value]
    else:
        record = prescribed_record(traj, grid, tol=tol)
    result.qsl = qsl_report(record, provider.controls_at, tol)
    result.checks.extend(_qsl_checks(result.qsl, config.t_f))
    return result


def _tls_control_columns(stroke: tls_model.TlsStroke, times: np.ndarray) -> dict:
    cols = {name: np.empty(times.size) for name in
            ("detuning", "coupling", "beta", "lambda_ground",
             "lambda_excited", "gamma_pm", "gamma_mp")}
    for k, t in enumerate(times):
        t = float(t)
        cols["detuning"][k] = stroke.detuning(t)
        cols["coupling"][k] = stroke.coupling(t)
        cols["beta"][k] = stroke.beta(t)
        lam_g, lam_e = tls_model.tls_occupations(stroke, t)
        cols["lambda_ground"][k] = lam_g
        cols["lambda_excited"][k] = lam_e
        rate_pm, rate_mp = tls_model.tls_rates(stroke, t)
        cols["gamma_pm"][k] = rate_pm
        cols["gamma_mp"][k] = rate_mp
    return cols


def _run_atom_markov(config: RunConfig, tol: Tolerances) -> ScenarioResult:
    p = config.parameters
    spec = atom_model.AtomSpec(omega0=p["omega0"], beta_s0=p["beta_s0"],
                               beta_bath=p["beta_bath"],
                               base_rate=p["base_rate"])
    provider = StaticControls(atom_model.markov_controls(spec))
    grid = config.grid
    rho0 = atom_model.thermal_qubit(spec.omega0, spec.beta_s0)

    def closed_form_state(t: float) -> np.ndarray:
        return atom_model.thermal_qubit(spec.omega0, atom_model.atom_beta_of_t(spec, t))

    record = integrate(GeneratorKind.MARKOV_LINDBLAD, provider, grid, rho0,
                       target=closed_form_state, tol=tol)
    result = ScenarioResult(config=config)
    kind = GeneratorKind.MARKOV_LINDBLAD.value
    result.records[kind] = record
    summary = _record_summary(record)

    times = grid.nodes()
    beta_closed = np.array([atom_model.atom_beta_of_t(spec, float(t))
                            for t in times])
    off_diag = float(np.abs(record.states[:, 0, 1]).max())
    summary["maxOffDiagonal"] = off_diag
    # invert the populations back to an inverse temperature for comparison
    pops0 = np.real(record.states[:, 0, 0])
    pops1 = np.real(record.states[:, 1, 1])
    beta_prop = np.log(pops1 / pops0) / spec.omega0
    beta_dev = float(np.abs(beta_prop - beta_closed).max())
    summary["maxBetaDeviation"] = beta_dev
    result.summaries[kind] = summary
    result.checks += [
        ("thermal_form_off_diagonal<=1e-10", off_diag <= 1e-10,
         f"{off_diag:.3e}"),
        ("closed_form_beta_match<=1e-6", beta_dev <= 1e-6, f"{beta_dev:.3e}"),
        (f"{kind}:unit_trace<=1e-7", summary["maxTraceDefect"] <= 1e-7,
         f"{summary['maxTraceDefect']:.3e}"),
        (f"{kind}:min_eig>=-1e-6",
         summary["minEigenvalue"] >= -tol.pos_breach,
         f"{summary['minEigenvalue']:.3e}"),
    ]

    rate_down, rate_up = atom_model.markov_rates(spec)
    headers = ["t", "trace", "min_eigenvalue", "hermiticity_defect",
               "fidelity_to_target"]
    cols = [times, record.trace, record.min_eigenvalue,
            record.hermiticity_defect, record.fidelity_to_target]
    sh, sc = _state_columns(record.states)
    headers += sh + ["beta_closed_form", "rate_down", "rate_up"]
    cols += sc + [beta_closed, np.full(times.size, rate_down),
                  np.full(times.size, rate_up)]
    result.tables[f"timeseries_{kind}"] = (headers, cols)

    result.qsl = qsl_report(record, provider.controls_at, tol)
    result.checks.extend(_qsl_checks(result.qsl, config.t_f))
    return result


def _run_atom_sta(config: RunConfig, tol: Tolerances) -> ScenarioResult:
    p = config.parameters
    target = Schedule.polynomial5(p["beta_s0"], p["target_end"], config.t_f)
    spec = atom_model.AtomSpec(omega0=p["omega0"], beta_s0=p["beta_s0"],
                               beta_bath=p["beta_bath"],
                               base_rate=p["base_rate"], target=target)
    provider = atom_model.AtomStaControls(spec)
    traj = atom_model.atom_trajectory(spec, tol)
    grid = config.grid

    record = integrate(GeneratorKind.LINDBLAD_LIKE, provider, grid,
                       target=traj, tol=tol)
    result = ScenarioResult(config=config)
    kind = GeneratorKind.LINDBLAD_LIKE.value
    result.records[kind] = record
    summary = _record_summary(record)

    goal = atom_model.thermal_qubit(spec.omega0, p["target_end"])
    final_fid = fidelity(record.final_state, goal, tol, validate=False)
    summary["finalFidelityToGoal"] = float(final_fid)
    result.summaries[kind] = summary
    result.checks += [
        ("final_fidelity>=1-1e-6", final_fid >= 1.0 - 1e-6,
         f"{final_fid:.9f}"),
        (f"{kind}:unit_trace<=1e-7", summary["maxTraceDefect"] <= 1e-7,
         f"{summary['maxTraceDefect']:.3e}"),
        (f"{kind}:min_eig>=-1e-6",
         summary["minEigenvalue"] >= -tol.pos_breach,
         f"{summary['minEigenvalue']:.3e}"),
    ]

    times = grid.nodes()
    rates = np.array([atom_model.atom_sta_rates(spec, float(t)) for t in times])
    headers = ["t", "trace", "min_eigenvalue", "hermiticity_defect",
               "fidelity_to_target"]
    cols = [times, record.trace, record.min_eigenvalue,
            record.hermiticity_defect, record.fidelity_to_target]
    sh, sc = _state_columns(record.states)
    headers += sh + ["beta_target", "rate_up", "rate_down"]
    cols += sc + [np.array([target(float(t)) for t in times]),
                  rates[:, 0], rates[:, 1]]
    result.tables[f"timeseries_{kind}"] = (headers, cols)

    # speed-limit controls come from the prescribed trajectory so the
    # (H, Gamma) pair actually generates the reported motion
    qsl_provider = TrajectoryControls(traj, reference=atom_model.atom_reference(spec),
                                      tol=tol)
    result.qsl = qsl_report(record, qsl_provider.controls_at, tol)
    result.checks.extend(_qsl_checks(result.qsl, config.t_f))
    return result


def _osc_spec(config: RunConfig) -> osc_model.OscillatorSpec:
    p = config.parameters
    return osc_model.OscillatorSpec(
        mass=p["mass"],
        omega=Schedule.polynomial5(p["omega_start"], p["omega_end"], config.t_f),
        beta=Schedule.polynomial5(p["beta_start"], p["beta_end"], config.t_f),
        n_levels=p["n_levels"], t_f=config.t_f)


def _osc_control_columns(spec: osc_model.OscillatorSpec, times: np.ndarray,
                         tol: Tolerances) -> dict:
    names = ("omega", "beta", "u", "transport_rate", "squeeze_rate",
             "cd_frequency_sq", "dephasing_strength")
    cols = {name: np.empty(times.size) for name in names}
    for k, t in enumerate(times):
        c = osc_model.osc_controls(spec, float(t), tol)
        for name in names:
            cols[name][k] = getattr(c, name)
    om0 = spec.omega(0.0)
    cols["cd_frequency_sq_scaled"] = cols["cd_frequency_sq"] / om0**2
    cols["dephasing_strength_scaled"] = (cols["dephasing_strength"]
                                         / (spec.mass * om0))
    return cols


def _osc_qsl(spec: osc_model.OscillatorSpec, config: RunConfig,
             tol: Tolerances) -> tuple[QslReport, list]:
    steps = config.steps
    stride = max(1, int(np.ceil(steps / QSL_MAX_NODES)))
    while steps % stride:
        stride += 1
    coarse = TimeGrid(0.0, config.t_f, steps // stride)
    provider = osc_model.OscillatorSpectralControls(spec, coarse, tol=tol)
    record = prescribed_record(provider.traj, coarse, tol=tol)
    report = qsl_report(record, provider.controls_at, tol)
    return report, _qsl_checks(report, config.t_f)


def _run_osc_heat(config: RunConfig, tol: Tolerances) -> ScenarioResult:
    spec = _osc_spec(config)
    result = ScenarioResult(config=config)
    grid = config.grid
    times = grid.nodes()
    controls_cols = _osc_control_columns(spec, times, tol)
    gauss = osc_model.osc_gaussian_evolve(spec, grid, tol)

    if GeneratorKind.OSCILLATOR_DEPHASING in config.generators:
        model = osc_model.OscillatorDephasingModel(spec, tol=tol)
        record = integrate(GeneratorKind.OSCILLATOR_DEPHASING, model, grid,
                           tol=tol)
        kind = GeneratorKind.OSCILLATOR_DEPHASING.value
        result.records[kind] = record
        summary = _record_summary(record)
        summary["referenceFrequency"] = model.omega_ref

        goal = osc_model.thermal_fock_state(
            model.x, model.p, spec.mass, spec.omega(config.t_f),
            spec.beta(config.t_f))
        final_fid = fidelity(record.final_state, goal, tol, validate=False)
        summary["finalFidelityToGoal"] = float(final_fid)

        var_fock = osc_model.fock_position_variance(record.states, model.x)
        var_dev = float(np.abs(var_fock / gauss["position_variance"] - 1.0).max())
        summary["maxVarianceRelDeviation"] = var_dev
        result.summaries[kind] = summary
        result.checks += [
            ("final_fidelity>=0.999", final_fid >= 0.999, f"{final_fid:.6f}"),
            ("variance_rel_dev<=1e-3", var_dev <= 1e-3, f"{var_dev:.3e}"),
            (f"{kind}:unit_trace<=1e-7", summary["maxTraceDefect"] <= 1e-7,
             f"{summary['maxTraceDefect']:.3e}"),
            (f"{kind}:min_eig>=-1e-6",
             summary["minEigenvalue"] >= -tol.pos_breach,
             f"{summary['minEigenvalue']:.3e}"),
        ]

        headers = ["t", "trace", "min_eigenvalue", "hermiticity_defect",
                   "position_variance_fock", "position_variance_gaussian"]
        cols = [times, record.trace, record.min_eigenvalue,
                record.hermiticity_defect, var_fock,
                gauss["position_variance"]]
        headers += list(controls_cols)
        cols += list(controls_cols.values())
        result.tables[f"timeseries_{kind}"] = (headers, cols)

    result.qsl, qsl_checks = _osc_qsl(spec, config, tol)
    result.checks.extend(qsl_checks)
    return result


def _run_osc_cool(config: RunConfig, tol: Tolerances) -> ScenarioResult:
    """Cooling stroke: controls and Gaussian moments only.

    The dephasing strength is negative over most of the stroke; in a number
    basis that anti-dissipative window amplifies round-off exponentially, so
    the ladder propagation of this stroke is numerically meaningless at any
    resolution and is deliberately not offered. The prescribed trajectory
    carries the speed-limit report instead.
    """
    spec = _osc_spec(config)
    result = ScenarioResult(config=config)
    grid = config.grid
    times = grid.nodes()
    controls_cols = _osc_control_columns(spec, times, tol)
    gauss = osc_model.osc_gaussian_evolve(spec, grid, tol)

    result.summaries["prescribed"] = {
        "identityResiduals": [float(r) for r in gauss["identity_residuals"]],
        "minCdFrequencySq": float(controls_cols["cd_frequency_sq"].min()),
        "minDephasingStrength": float(controls_cols["dephasing_strength"].min()),
        "maxDephasingStrength": float(controls_cols["dephasing_strength"].max()),
    }
    result.checks.append(
        ("gaussian_identities<=1e-6",
         float(gauss["identity_residuals"].max()) <= 1e-6,
         f"{gauss['identity_residuals'].max():.3e}"))

    headers = (["t"] + list(controls_cols)
               + ["gaussian_a", "gaussian_c", "gaussian_norm",
                  "position_variance_gaussian"])
    cols = ([times] + list(controls_cols.values())
            + [gauss["a"], gauss["c"], gauss["norm"],
               gauss["position_variance"]])
    result.tables["timeseries_prescribed"] = (headers, cols)

    result.qsl, qsl_checks = _osc_qsl(spec, config, tol)
    result.checks.extend(qsl_checks)
    return result


def _run_custom(config: RunConfig, tol: Tolerances) -> ScenarioResult:
    p = config.parameters
    schedules = [Schedule.from_csv(path) for path in p["occupation_files"]]
    dim = len(schedules)
    if dim < 2:
        raise ValidationError("custom-trajectory needs at least 2 branches")

    def lambda_fn(t: float) -> np.ndarray:
        return np.array([s(t) for s in schedules])

    def lambda_dot_fn(t: float) -> np.ndarray:
        return np.array([s.derivative(t) for s in schedules])

    if p["basis"] == "static":
        eye = np.eye(dim, dtype=complex)
        basis_fn = lambda t: eye
        basis_dot_fn = lambda t: np.zeros((dim, dim), dtype=complex)
    else:
        if dim != 2:
            raise ValidationError("rotating basis is implemented for 2 branches")
        rate = float(p["rotation_rate"])

        def basis_fn(t: float) -> np.ndarray:
            c, s = np.cos(0.5 * rate * t), np.sin(0.5 * rate * t)
            return np.array([[c, -s], [s, c]], dtype=complex)

        def basis_dot_fn(t: float) -> np.ndarray:
            c, s = np.cos(0.5 * rate * t), np.sin(0.5 * rate * t)
            return 0.5 * rate * np.array([[-s, -c], [c, -s]], dtype=complex)

    traj = SpectralTrajectory(dim, config.t_f, lambda_fn, basis_fn,
                              lambda_dot_fn=lambda_dot_fn,
                              basis_dot_fn=basis_dot_fn, tol=tol)
    provider = TrajectoryControls(traj, tol=tol)
    grid = config.grid
    times = grid.nodes()
    result = ScenarioResult(config=config)

    for kind in config.generators:
        record = integrate(kind, provider, grid, target=traj, tol=tol)
        result.records[kind.value] = record
        summary = _record_summary(record)
        result.summaries[kind.value] = summary
        headers = ["t", "trace", "min_eigenvalue", "hermiticity_defect",
                   "fidelity_to_target"]
        cols = [times, record.trace, record.min_eigenvalue,
                record.hermiticity_defect, record.fidelity_to_target]
        for j in range(dim):
            headers.append(f"lambda_{j}")
            cols.append(np.array([traj.lambdas(float(t))[j] for t in times]))
        result.tables[f"timeseries_{kind.value}"] = (headers, cols)

    record = (result.records.get(GeneratorKind.LINDBLAD_LIKE.value)
              or prescribed_record(traj, grid, tol=tol))
    result.qsl = qsl_report(record, provider.controls_at, tol)
    result.checks.extend(_qsl_checks(result.qsl, config.t_f))
    return result


_RUNNERS: dict[str, Callable] = {
    "tls-isothermal": _run_tls,
    "tls-otto-cool": _run_tls,
    "tls-otto-heat": _run_tls,
    "tls-general": _run_tls,
    "atom-markov": _run_atom_markov,
    "atom-sta": _run_atom_sta,
    "osc-heat": _run_osc_heat,
    "osc-cool": _run_osc_cool,
    "custom-trajectory": _run_custom,
}


def run_scenario(config: RunConfig,
                 tol: Tolerances = DEFAULT_TOL) -> ScenarioResult:
    runner = _RUNNERS.get(config.scenario)
    if runner is None:
        raise ValidationError(f"unknown scenario {config.scenario!r}")
    result = runner(config, tol)
    for summary in result.summaries.values():
        result.warnings.extend(summary.get("warnings", []))
    return result
