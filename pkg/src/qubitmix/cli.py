"""Command-line front end: ``qubitmix trajectory | sweep | validate``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical blow-up.
"""
from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__, validate
from .integrate import NonFiniteState, run
from .model import occupation_probability
from .presets import (
    PRESETS,
    ConfigError,
    build_drive,
    build_params,
    build_sim,
    build_sweep,
    parse_assignments,
    read_config_file,
    resolve,
)
from .sweep import run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NONFINITE = 0, 1, 2, 3

TRAJECTORY_COLUMNS = ("t", "pi_0x", "pi_0y", "pi_0z", "pi_x0", "pi_z0", "pi_zz", "p_upper_1")
SWEEP_COLUMNS = ("scan_value", "omega2", "phi", "mean_x1", "mean_z1", "p_upper",
                 "max_violation", "steps", "status")

log = logging.getLogger("qubitmix")


def fmt(value) -> str:
    """Round-trip exact decimal text for floats."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _resolve_args(args) -> dict[str, str]:
    file_values = read_config_file(args.config) if args.config else {}
    return resolve(args.preset, file_values, parse_assignments(args.set), args.full_scale)


def _manifest(command: str, values: dict[str, str], **extra) -> dict:
    """Reproducible part of the run description (no host timing)."""
    return {"tool": "qubitmix", "version": __version__, "command": command,
            "config": dict(sorted(values.items())), **extra}


@contextlib.contextmanager
def _open_output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write_header(fh, manifest: dict) -> None:
    fh.write("# " + json.dumps(manifest, sort_keys=True) + "\n")


def _write_sidecar(path, manifest: dict, runtime: dict) -> None:
    if path in (None, "-"):
        return
    full = dict(manifest, runtime=runtime)
    Path(str(path) + ".manifest.json").write_text(json.dumps(full, indent=2, sort_keys=True) + "\n",
                                                  encoding="utf-8")


def _runtime(**extra) -> dict:
    return {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"), **extra}


def cmd_trajectory(args) -> int:
    values = _resolve_args(args)
    params = build_params(values)
    drive = build_drive(values)
    sim = build_sim(values, params)
    manifest = _manifest("trajectory", values, effective={
        "integrator": sim.integrator.value, "dt": sim.dt, "t_burn": sim.t_burn,
        "t_avg": sim.t_avg, "steps": sim.total_steps, "stride": sim.observer_stride,
    })
    with _open_output(args.output) as fh:
        _write_header(fh, manifest)
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")

        def emit(t, state):
            z1 = state["0z"]
            row = (t, state["0x"], state["0y"], z1, state["x0"], state["z0"], state["zz"],
                   occupation_probability(z1, "upper"))
            fh.write(",".join(fmt(float(v)) for v in row) + "\n")

        summary = run(sim, params, drive, observers=[emit])
    _write_sidecar(args.output, manifest, _runtime(
        wall_seconds=summary.wall_seconds, means=summary.means,
        max_physicality_violation=summary.max_physicality_violation))
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = _resolve_args(args)
    spec = build_sweep(values)
    manifest = _manifest("sweep", values, effective={
        "kind": spec.kind.value, "integrator": spec.sim.integrator.value, "dt": spec.sim.dt,
        "t_burn": spec.sim.t_burn, "t_avg": spec.sim.t_avg, "steps": spec.sim.total_steps,
        "grid": list(spec.grid), "center_ratio": spec.center_ratio,
    })
    start = time.perf_counter()
    result = run_sweep(spec, workers=args.threads)
    columns = SWEEP_COLUMNS + (("wall_seconds",) if args.timing else ())
    with _open_output(args.output) as fh:
        _write_header(fh, manifest)
        fh.write(",".join(columns) + "\n")
        for r in result.records:
            row = [r.scan_value, r.omega2_effective, r.phi, r.mean_x1, r.mean_z1, r.p_upper,
                   r.max_physicality_violation, r.steps, r.status]
            if args.timing:
                row.append(r.wall_seconds)
            fh.write(",".join(fmt(v) for v in row) + "\n")
    _write_sidecar(args.output, manifest, _runtime(
        workers=args.threads, wall_seconds=time.perf_counter() - start,
        point_wall_seconds=[r.wall_seconds for r in result.records]))
    failed = [r for r in result.records if not r.ok]
    for r in failed:
        log.error("sweep point %s failed: %s", r.scan_value, r.status)
    if failed and len(failed) == len(result.records):
        return EXIT_NONFINITE
    return EXIT_OK


def cmd_validate(args) -> int:
    results = validate.run_all(oracle_tol=args.tolerance, samples=args.samples)
    for res in results:
        print(res.line())
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "VALIDATION FAILED")
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubitmix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="flat key=value config file")
        p.add_argument("--preset", metavar="NAME", help=f"one of: {', '.join(sorted(PRESETS))}")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="override one config key (repeatable)")
        p.add_argument("--output", metavar="PATH", help="CSV destination (default stdout)")
        p.add_argument("--full-scale", action="store_true",
                       help="Euler, dt=1.13e-5, averaging window 5.6e4 < omega1 t < 1.4e5")

    p_traj = sub.add_parser("trajectory", help="stream Bloch-tensor components as CSV")
    common(p_traj)
    p_traj.set_defaults(func=cmd_trajectory)

    p_sweep = sub.add_parser("sweep", help="ratio / phase / detuning scan as CSV")
    common(p_sweep)
    p_sweep.add_argument("--threads", type=int, default=1, metavar="N", help="worker processes")
    p_sweep.add_argument("--timing", action="store_true",
                         help="add a wall_seconds column (makes the CSV host dependent)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="run the built-in consistency checks")
    p_val.add_argument("--tolerance", type=float, default=1e-12,
                       help="relative tolerance for the oracle equivalence check")
    p_val.add_argument("--samples", type=int, default=1000)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteState as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_NONFINITE


if __name__ == "__main__":
    sys.exit(main())
