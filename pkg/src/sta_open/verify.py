"""Self-check suites behind `sta-open verify`.

fast: reduced-resolution passes over every scenario family plus the
oscillator identity checks; stays well inside a minute. full: default
resolutions including the ladder propagation, plus an integrator
convergence-order probe.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, TimeGrid
from .controls import TrajectoryControls
from .models import tls as tls_model
from .propagator import GeneratorKind, integrate
from .scenarios import run_scenario, validate_config

FAST_SCENARIOS = [
    ("tls-isothermal", {"grid": {"steps": 400}}),
    ("tls-otto-cool", {"grid": {"steps": 400}}),
    ("tls-otto-heat", {"grid": {"steps": 400}}),
    ("tls-general", {"grid": {"steps": 400}}),
    ("atom-markov", {"grid": {"steps": 400}}),
    ("atom-sta", {"grid": {"steps": 400}}),
    ("osc-heat", {"grid": {"steps": 400}, "generators": []}),
    ("osc-cool", {"grid": {"steps": 400}}),
]

FULL_SCENARIOS = [
    ("tls-isothermal", {}),
    ("tls-otto-cool", {}),
    ("tls-otto-heat", {}),
    ("tls-general", {}),
    ("atom-markov", {}),
    ("atom-sta", {}),
    ("osc-heat", {}),
    ("osc-cool", {}),
]


@dataclass
class VerifyReport:
    level: str
    checks: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def counts(self) -> tuple[int, int]:
        good = sum(1 for _, ok, _ in self.checks if ok)
        return good, len(self.checks) - good


def _convergence_check() -> list:
    """Step-doubling error ratio of the integrator on a closed-form stroke.

    A fourth-order one-step method must show error(2 dt)/error(dt) near 16;
    the window is wide because the finest run sits close to round-off.
    """
    stroke = tls_model.isochore_stroke(2.0, 1.0, 1.0, 1.0, 1.0)
    traj = tls_model.tls_trajectory(stroke)
    prov = TrajectoryControls(traj, reference=tls_model.tls_reference(stroke))
    ref = integrate(GeneratorKind.LINDBLAD_LIKE, prov,
                    TimeGrid(0.0, 1.0, 320)).final_state
    errs = []
    for steps in (40, 80):
        rec = integrate(GeneratorKind.LINDBLAD_LIKE, prov,
                        TimeGrid(0.0, 1.0, steps))
        errs.append(np.linalg.norm(rec.final_state - ref))
    ratio = errs[0] / errs[1]
    return [("integrator_order_ratio_in_[4,64]", 4.0 <= ratio <= 64.0,
             f"ratio={ratio:.2f}")]


def run_verify(level: str = "fast") -> VerifyReport:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown verify level {level!r}")
    started = time.perf_counter()
    report = VerifyReport(level=level)
    plan = FAST_SCENARIOS if level == "fast" else FULL_SCENARIOS
    for name, overrides in plan:
        cfg = validate_config({"scenario": name, **overrides})
        result = run_scenario(cfg, DEFAULT_TOL)
        report.checks.extend(
            (f"{name}:{cname}", ok, detail)
            for cname, ok, detail in result.checks)
    report.checks.extend(_convergence_check())
    report.wall_time = time.perf_counter() - started
    return report


def format_report(report: VerifyReport) -> str:
    lines = []
    for name, ok, detail in report.checks:
        tag = "PASS" if ok else "FAIL"
        lines.append(f"[{tag}] {name}  ({detail})")
    good, bad = report.counts
    verdict = "OK" if bad == 0 else "FAILED"
    lines.append(f"verify {report.level}: {verdict} "
                 f"({good} passed, {bad} failed, {report.wall_time:.1f}s)")
    return "\n".join(lines)
