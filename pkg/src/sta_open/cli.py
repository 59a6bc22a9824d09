"""Command line front end.

sta-open run <config.json>      propagate one scenario, write CSVs + manifest
sta-open verify [--level ...]   self-check suite, table of PASS/FAIL lines
sta-open sweep <config.json> --axis <name> --values v1,v2,...

Exit codes: 0 ok, 1 verify failure, 2 bad config, 3 model/runtime error,
4 strict-threshold failure. Sweeps return the worst per-run code. CSV output
is deterministic for a fixed config (17 significant digits, LF endings);
manifests carry wall times and are not byte-stable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import StaOpenError, ValidationError
from .scenarios import RunConfig, ScenarioResult, run_scenario, validate_config
from .verify import format_report, run_verify

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_STRICT = 4


def _write_atomic(path: str, payload: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(out_dir: str, manifest: dict) -> None:
    payload = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    _write_atomic(os.path.join(out_dir, "manifest.json"), payload)


def _write_csv(path: str, headers: list, cols: list) -> None:
    rows = np.column_stack([np.asarray(c, dtype=float) for c in cols])
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(headers)
            for row in rows:
                writer.writerow([f"{v:.17g}" for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _manifest_base(config: RunConfig) -> dict:
    return {
        "schema": 1,
        "package": "sta-open",
        "version": __version__,
        "scenario": config.scenario,
        "config": {
            "scenario": config.scenario,
            "parameters": config.parameters,
            "grid": {"t_f": config.t_f, "steps": config.steps},
            "generators": [k.value for k in config.generators],
            "seed": config.seed,
        },
    }


def _result_manifest(config: RunConfig, result: ScenarioResult,
                     files: dict, wall: float, strict: bool) -> dict:
    manifest = _manifest_base(config)
    failed = result.failed_checks()
    manifest.update({
        "files": files,
        "summaries": result.summaries,
        "qsl": result.qsl.as_dict() if result.qsl is not None else None,
        "checks": [{"name": n, "passed": ok, "detail": d}
                   for n, ok, d in result.checks],
        "warnings": result.warnings,
        "status": "ok" if not failed else "checks-failed",
        "strict": strict,
        "wallTime": wall,
    })
    return manifest


def execute_run(raw_config: dict, out_dir: str | None,
                strict: bool) -> tuple[int, str]:
    """Validate, run, and persist one scenario. Returns (exit code, out dir).

    Self-contained (including error handling) so sweep workers can call it
    in a separate process.
    """
    try:
        config = validate_config(raw_config)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, out_dir or "."

    resolved_out = out_dir or os.path.join("runs", config.scenario)
    os.makedirs(resolved_out, exist_ok=True)
    started = time.perf_counter()
    try:
        result = run_scenario(config)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG, resolved_out
    except StaOpenError as exc:
        manifest = _manifest_base(config)
        manifest.update({"status": "error",
                         "errorType": type(exc).__name__,
                         "message": str(exc)})
        _write_manifest(resolved_out, manifest)
        print(f"run error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_RUNTIME, resolved_out

    files = {}
    for table_name, (headers, cols) in sorted(result.tables.items()):
        filename = f"{table_name}.csv"
        _write_csv(os.path.join(resolved_out, filename), headers, cols)
        files[table_name] = filename

    wall = time.perf_counter() - started
    manifest = _result_manifest(config, result, files, wall, strict)
    _write_manifest(resolved_out, manifest)

    failed = result.failed_checks()
    for name, _, detail in failed:
        print(f"check failed: {name} ({detail})", file=sys.stderr)
    if failed and strict:
        return EXIT_STRICT, resolved_out
    return EXIT_OK, resolved_out


def _sweep_worker(job: tuple) -> tuple[str, int, str]:
    label, raw_config, out_dir, strict = job
    code, resolved = execute_run(raw_config, out_dir, strict)
    return label, code, resolved


def _apply_axis(raw: dict, axis: str, value) -> dict:
    out = json.loads(json.dumps(raw))
    if axis in ("t_f", "steps"):
        out.setdefault("grid", {})[axis] = value
    else:
        out.setdefault("parameters", {})[axis] = value
    return out


def _parse_values(text: str) -> list:
    values = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            values.append(json.loads(piece))
        except json.JSONDecodeError:
            raise ValidationError(f"sweep value {piece!r} is not a number")
    if not values:
        raise ValidationError("sweep needs at least one value")
    return values


def _load_config(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}")


def _cmd_run(args) -> int:
    raw = _load_config(args.config)
    code, out_dir = execute_run(raw, args.out, args.strict)
    if code == EXIT_OK:
        print(f"wrote {out_dir}/manifest.json")
    return code


def _cmd_verify(args) -> int:
    report = run_verify(args.level)
    print(format_report(report))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _cmd_sweep(args) -> int:
    raw = _load_config(args.config)
    values = _parse_values(args.values)
    base_out = args.out or os.path.join(
        "runs", f"{raw.get('scenario', 'sweep')}-sweep")
    jobs = []
    for value in values:
        label = f"{args.axis}={value}"
        jobs.append((label, _apply_axis(raw, args.axis, value),
                     os.path.join(base_out, label), args.strict))

    workers = args.workers or int(os.environ.get("STA_OPEN_WORKERS", "1"))
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        outcomes = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_worker, jobs))

    rows = []
    worst = EXIT_OK
    for label, code, resolved in outcomes:
        worst = max(worst, code)
        status = "ok" if code == EXIT_OK else f"exit={code}"
        print(f"{label}: {status} -> {resolved}")
        rows.append({"point": label, "exit": code, "dir": resolved})
    os.makedirs(base_out, exist_ok=True)
    _write_atomic(os.path.join(base_out, "sweep.json"),
                  json.dumps({"axis": args.axis, "runs": rows},
                             indent=2, sort_keys=True) + "\n")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sta-open",
        description="Counterdiabatic driving of open systems: build the "
                    "controls for a prescribed mixed-state trajectory, "
                    "propagate the equivalent generators, check tracking "
                    "and speed limits.")
    parser.add_argument("--version", action="version",
                        version=f"sta-open {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario from a JSON config")
    run_p.add_argument("config", help="path to JSON config")
    run_p.add_argument("--out", default=None,
                       help="output directory (default runs/<scenario>)")
    run_p.add_argument("--strict", action="store_true",
                       help="exit 4 if any run-quality check fails")
    run_p.set_defaults(func=_cmd_run)

    verify_p = sub.add_parser("verify", help="run the self-check suite")
    verify_p.add_argument("--level", choices=("fast", "full"),
                          default="fast")
    verify_p.set_defaults(func=_cmd_verify)

    sweep_p = sub.add_parser("sweep",
                             help="run a config across an axis of values")
    sweep_p.add_argument("config", help="path to JSON config")
    sweep_p.add_argument("--axis", required=True,
                         help="t_f, steps, or a scenario parameter name")
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated numbers")
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--strict", action="store_true")
    sweep_p.add_argument("--workers", type=int, default=None,
                         help="process count (default STA_OPEN_WORKERS or 1)")
    sweep_p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StaOpenError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
