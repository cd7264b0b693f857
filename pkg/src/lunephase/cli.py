"""Command-line front end emitting deterministic CSV/JSON tables.

Subcommands: theory (closed-form phase ladder), sweep (full simulation grid
checked against theory), simulate (one grid point with state snapshots),
trace-path (idealized active-branch Bloch trajectory), check-transport
(geodesic and parallel-transport verification), parse (pulse-program
validation).  Exit codes: 0 success, 1 check or tolerance failure, 2 usage
or parse error.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys

import numpy as np

from .conventions import DEFAULT_CONVENTIONS, Conventions
from .errors import DomainError, SequenceSyntaxError
from .experiment import (
    DEFAULT_THETAS,
    MODELS,
    ExperimentConfig,
    idealized_eigenvector_path,
    record_values,
    records_to_csv,
    records_to_json,
    run_single,
    run_sweep,
    sweep_summary,
)
from .geometry import (
    BlochPath,
    StatePath,
    check_geodesic,
    dynamical_phase,
    pancharatnam_phase,
    solid_angle,
)
from .phases import theory_curve
from .pulseprog import parse_sequence, render_sequence

DYNAMICAL_TOL = 1e-9
GEODESIC_TOL = 1e-6

_PI_FORM = re.compile(r"^([+-]?)((?:\d+(?:\.\d+)?)?)pi(?:/(\d+(?:\.\d+)?))?$")


def parse_angle(text: str) -> float:
    """Angle in radians; symbolic pi multiples ('pi/8', '3pi/8', '2pi',
    '-pi') are evaluated in one deterministic form, anything else as a
    decimal radian literal."""
    t = text.strip().lower().replace(" ", "")
    m = _PI_FORM.match(t)
    if m is None:
        return float(t)
    sign = -1.0 if m.group(1) == "-" else 1.0
    num = float(m.group(2)) if m.group(2) else 1.0
    den = float(m.group(3)) if m.group(3) else 1.0
    if den == 0.0:
        raise ValueError("zero denominator in angle")
    return sign * num * math.pi / den


def _angle_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of angles")
    return tuple(parse_angle(p) for p in parts)


def _relaxation(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("expected t2a,t2b")
    return float(parts[0]), float(parts[1])


def _convention(text: str) -> Conventions:
    """Parse 'sense=-1,active=up' style overrides (keys: sense|s, active)."""
    sense = DEFAULT_CONVENTIONS.pulse_sense
    active_up = DEFAULT_CONVENTIONS.active_branch_up
    for item in text.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        key = key.strip().lower()
        value = value.strip().lower()
        if key in ("sense", "s"):
            if value not in ("+1", "1", "-1"):
                raise ValueError(f"sense must be +1 or -1, got {value!r}")
            sense = -1 if value == "-1" else 1
        elif key == "active":
            if value not in ("up", "down"):
                raise ValueError(f"active must be up or down, got {value!r}")
            active_up = value == "up"
        else:
            raise ValueError(f"unknown convention key {key!r}")
    return Conventions(pulse_sense=sense, active_branch_up=active_up)


def _f(value: float) -> str:
    return repr(float(value))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lunephase",
        description="Two-spin interferometry tables, simulations, and checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--format", choices=("csv", "json"), default="csv", help="output format"
        )
        p.add_argument("--output", default=None, help="write to a file, not stdout")
        p.add_argument(
            "--tolerance",
            type=float,
            default=1e-9,
            help="phase residual gate in rad (default 1e-9)",
        )
        p.add_argument(
            "--convention",
            type=_convention,
            default=DEFAULT_CONVENTIONS,
            help="sign-convention overrides, e.g. 'sense=-1,active=up'",
        )

    p_theory = sub.add_parser("theory", help="closed-form phase/visibility ladder")
    p_theory.add_argument("--omega", type=parse_angle, required=True,
                          help="loop solid angle in rad (symbolic pi forms ok)")
    p_theory.add_argument("--n-max", type=int, default=12,
                          help="ladder length (default 12)")
    add_common(p_theory)

    p_sweep = sub.add_parser("sweep", help="simulate the grid and gate against theory")
    p_sweep.add_argument("--theta", type=_angle_list, default=DEFAULT_THETAS,
                         help="comma-separated inclination angles")
    p_sweep.add_argument("--model", choices=MODELS, default="literal-sequence")
    p_sweep.add_argument("--relaxation", type=_relaxation, default=None,
                         help="transverse decay times t2a,t2b in seconds")
    p_sweep.add_argument("--tolerance-visibility", type=float, default=None,
                         help="visibility gate (defaults to --tolerance)")
    add_common(p_sweep)

    p_sim = sub.add_parser("simulate", help="one grid point with state snapshots")
    p_sim.add_argument("--theta", type=parse_angle, required=True)
    p_sim.add_argument("--n", type=int, required=True, help="purity index 0..11")
    p_sim.add_argument("--model", choices=MODELS, default="literal-sequence")
    p_sim.add_argument("--relaxation", type=_relaxation, default=None)
    add_common(p_sim)

    p_trace = sub.add_parser("trace-path", help="idealized active-branch Bloch path")
    p_trace.add_argument("--theta", type=parse_angle, required=True)
    p_trace.add_argument("--branch", choices=("plus", "minus"), default="plus")
    p_trace.add_argument("--samples", type=int, default=4096,
                         help="total samples along the loop")
    add_common(p_trace)

    p_check = sub.add_parser("check-transport",
                             help="verify geodesic segments and parallel transport")
    p_check.add_argument("--theta", type=parse_angle, required=True)
    p_check.add_argument("--samples", type=int, default=1024)
    p_check.add_argument("--perturb", type=float, default=0.0,
                         help="verification hook: tilt segment axes by this amount")
    add_common(p_check)

    p_parse = sub.add_parser("parse", help="validate and normalize a pulse program")
    p_parse.add_argument("file", help="pulse-program file")
    add_common(p_parse)

    return parser


def cmd_theory(args) -> tuple[str, int]:
    rows = theory_curve(args.omega, args.n_max, sign=args.convention.orientation)
    if args.format == "csv":
        lines = ["n,r,gamma_rad,visibility"]
        for row in rows:
            gamma = _f(row.gamma) if row.defined else "nan"
            lines.append(f"{row.n},{_f(row.r)},{gamma},{_f(row.visibility)}")
        return "\n".join(lines) + "\n", 0
    payload = {
        "omega_rad": args.omega,
        "rows": [
            {
                "n": row.n,
                "r": row.r,
                "gamma_rad": row.gamma if row.defined else None,
                "visibility": row.visibility,
                "defined": row.defined,
                "flipped": row.flipped,
            }
            for row in rows
        ],
    }
    return json.dumps(payload, indent=2) + "\n", 0


def cmd_sweep(args) -> tuple[str, int]:
    records = run_sweep(
        thetas=args.theta,
        model=args.model,
        relaxation=args.relaxation,
        conventions=args.convention,
    )
    text = records_to_csv(records) if args.format == "csv" else records_to_json(records)
    tol = args.tolerance
    tol_vis = args.tolerance_visibility if args.tolerance_visibility is not None else tol
    failed = any(
        (rec.defined and abs(rec.residual) > tol)
        or abs(rec.visibility_measured - rec.visibility_theory) > tol_vis
        for rec in records
    )
    return text, 1 if failed else 0


def _matrix_payload(matrix: np.ndarray) -> dict:
    return {
        "re": [[float(x.real) for x in row] for row in matrix],
        "im": [[float(x.imag) for x in row] for row in matrix],
    }


def cmd_simulate(args) -> tuple[str, int]:
    config = ExperimentConfig(
        args.theta, args.n, args.model, args.relaxation, args.convention
    )
    record = run_single(config, record_snapshots=True)
    code = 1 if record.defined and abs(record.residual) > args.tolerance else 0
    if args.format == "csv":
        return records_to_csv([record]), code
    payload = {
        "config": {
            "theta_rad": config.theta,
            "n": config.n,
            "model": config.model,
            "relaxation": list(config.relaxation) if config.relaxation else None,
            "conventions": {
                "pulse_sense": config.conventions.pulse_sense,
                "active_branch_up": config.conventions.active_branch_up,
            },
        },
        "result": record_values(record),
        "snapshots": [
            {"time_s": t, "state": _matrix_payload(state.matrix)}
            for t, state in (record.snapshots or ())
        ],
    }
    return json.dumps(payload, indent=2) + "\n", code


def _loop_segments(path: StatePath, per_segment: int):
    cuts = ((0, per_segment + 1), (per_segment, 2 * per_segment + 1))
    for lo, hi in cuts:
        yield StatePath(path.times[lo:hi], path.states[lo:hi], path.generators[lo:hi])


def _build_path(args, eigen_sign: int, perturb: float = 0.0):
    """Returns (path, per_segment) or raises; density problems exit 1."""
    per_segment = args.samples // 2
    if per_segment < 2:
        print(
            "error: need at least 4 samples to trace the loop; refine --samples",
            file=sys.stderr,
        )
        return None, per_segment
    try:
        path = idealized_eigenvector_path(
            args.theta,
            eigen_sign,
            conventions=args.convention,
            samples_per_segment=per_segment,
            perturb=perturb,
        )
    except DomainError as exc:
        if "refine" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return None, per_segment
        raise
    return path, per_segment


def cmd_trace_path(args) -> tuple[str | None, int]:
    eigen_sign = 1 if args.branch == "plus" else -1
    path, per_segment = _build_path(args, eigen_sign)
    if path is None:
        return None, 1
    bloch = path.to_bloch_path()
    area = solid_angle(bloch)
    deviations = [
        check_geodesic(BlochPath(seg.times, seg.bloch_points()))
        for seg in _loop_segments(path, per_segment)
    ]
    pan = pancharatnam_phase(path)
    dyn = dynamical_phase(path)
    if args.format == "csv":
        lines = ["time_s,x,y,z,branch"]
        for t, (x, y, z) in zip(path.times, bloch.points):
            lines.append(f"{_f(t)},{_f(x)},{_f(y)},{_f(z)},{args.branch}")
        lines.append(f"# solid_angle_rad = {_f(area)}")
        for k, dev in enumerate(deviations, start=1):
            lines.append(f"# geodesic_deviation_seg{k} = {_f(dev)}")
        lines.append(f"# pancharatnam_rad = {_f(pan)}")
        lines.append(f"# dynamical_rad = {_f(dyn)}")
        return "\n".join(lines) + "\n", 0
    payload = {
        "theta_rad": args.theta,
        "branch": args.branch,
        "points": [
            {"time_s": float(t), "x": float(x), "y": float(y), "z": float(z)}
            for t, (x, y, z) in zip(path.times, bloch.points)
        ],
        "solid_angle_rad": area,
        "geodesic_deviation_rad": deviations,
        "pancharatnam_rad": pan,
        "dynamical_rad": dyn,
    }
    return json.dumps(payload, indent=2) + "\n", 0


def cmd_check_transport(args) -> tuple[str | None, int]:
    path, per_segment = _build_path(args, 1, perturb=args.perturb)
    if path is None:
        return None, 1
    reports = []
    for k, seg in enumerate(_loop_segments(path, per_segment), start=1):
        dyn = dynamical_phase(seg)
        dev = check_geodesic(BlochPath(seg.times, seg.bloch_points()))
        reports.append(
            {
                "segment": k,
                "geodesic_deviation": dev,
                "dynamical_phase_rad": dyn,
                "pass": dev <= GEODESIC_TOL and abs(dyn) <= DYNAMICAL_TOL,
            }
        )
    ok = all(r["pass"] for r in reports)
    if args.format == "csv":
        lines = ["segment,geodesic_deviation,dynamical_phase_rad,pass"]
        for r in reports:
            lines.append(
                f"{r['segment']},{_f(r['geodesic_deviation'])},"
                f"{_f(r['dynamical_phase_rad'])},{'true' if r['pass'] else 'false'}"
            )
        lines.append(f"# transport = {'pass' if ok else 'fail'}")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps({"segments": reports, "pass": ok}, indent=2) + "\n"
    return text, 0 if ok else 1


def cmd_parse(args) -> tuple[str | None, int]:
    try:
        with open(args.file, encoding="utf-8") as handle:
            source = handle.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, 2
    try:
        prog = parse_sequence(source)
    except SequenceSyntaxError as exc:
        print(f"error: {args.file}:{exc}", file=sys.stderr)
        return None, 2
    rendered = render_sequence(prog)
    duration = float(prog.total_duration)
    if args.format == "csv":
        text = (
            rendered
            + f"# events = {len(prog.events)}\n"
            + f"# total_duration_s = {_f(duration)}\n"
        )
        return text, 0
    payload = {
        "events": rendered.strip().split("\n"),
        "event_count": len(prog.events),
        "total_duration_s": duration,
    }
    return json.dumps(payload, indent=2) + "\n", 0


_HANDLERS = {
    "theory": cmd_theory,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "trace-path": cmd_trace_path,
    "check-transport": cmd_check_transport,
    "parse": cmd_parse,
}


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        text, code = _HANDLERS[args.command](args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if text is not None:
        _emit(text, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
