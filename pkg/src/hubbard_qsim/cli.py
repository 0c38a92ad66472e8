"""Command-line entry point: ``hubbard-qsim <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 invalid input.
Data goes to ``--out`` (or stdout); summaries go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .compiler import METHODS, CompilationError, compile_term, signed_generator, template_is_exact
from .gates import Circuit, GateError
from .greens import (DEFAULT_ETA, DEFAULT_TAU_MAX, DEFAULT_TAU_STEP, all_pairs, run_pipeline,
                     spectral_peaks, sum_rule_error)
from .hamiltonian import ClusterSpec, GeometryError, ignored_fields, parse_geometry
from .pauli import DenseLimitError
from .resources import REFERENCE_ROWS, count_resources, format_table
from .simulator import circuit_unitary, controlled_matrix, exact_unitary
from .trotter import SCHEMES, power_law_fit, sweep

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
VERIFY_TOL = 1e-9
TERMS = ("local", "interaction", "hopping", "spair", "dpair", "all")
PARAM_FLAGS = (("t", "t"), ("U", "U"), ("mu-p", "mu_p"), ("M-p", "M_p"),
               ("delta-s", "delta_s"), ("delta-d", "delta_d"))
WORST_CASE = {"mu_p": 3.0, "M_p": 3.0, "delta_s": 3.0, "delta_d": 3.0}


class InputError(ValueError):
    """Bad command-line input (exit code 2)."""


# ---------------------------------------------------------------- helpers

def _num(x: float) -> str:
    return f"{x:.17g}"


def _header(args, fmt: str) -> str:
    if args.no_header:
        return ""
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = f"hubbard-qsim {__version__} {args.command} {stamp}"
    return f"# {text}\n" if fmt in ("csv", "table") else text


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _json_doc(args, payload: dict) -> str:
    doc = {}
    header = _header(args, "json")
    if header:
        doc["generated"] = header
    doc.update(payload)
    return json.dumps(doc, indent=2) + "\n"


def _csv_text(args, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(_header(args, "csv"))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _parse_sweep(text: str) -> np.ndarray:
    try:
        lo, hi, points = text.split(":")
        lo, hi, points = float(lo), float(hi), int(points)
    except ValueError as exc:
        raise InputError(f"--dt-sweep expects lo:hi:points, got {text!r}") from exc
    if not (0 < lo < hi) or points < 2:
        raise InputError("--dt-sweep needs 0 < lo < hi and at least 2 points")
    return np.geomspace(hi, lo, points)


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, points = text.split(":")
        lo, hi, points = float(lo), float(hi), int(points)
    except ValueError as exc:
        raise InputError(f"--omega expects lo:hi:points, got {text!r}") from exc
    if not lo < hi or points < 2:
        raise InputError("--omega needs lo < hi and at least 2 points")
    return np.linspace(lo, hi, points)


def _spec(args, defaults: dict | None = None) -> ClusterSpec:
    params = dict(defaults or {})
    params.update({key: getattr(args, key) for _, key in PARAM_FLAGS if getattr(args, key) is not None})
    spec = parse_geometry(args.cluster, **params)
    for name in ignored_fields(spec):
        _note(f"note: {name} has no effect on a {spec.dims}D cluster")
    return spec


# ---------------------------------------------------------------- commands

def cmd_compile(args) -> int:
    spec = _spec(args)
    if args.dt is None:
        raise InputError("compile needs --dt")
    circuits = compile_term(spec, args.term, args.dt, args.method)
    for name in ("kin", "d_pair"):
        if args.method == "template" and any(c.label == name for c in circuits) and not template_is_exact(spec, name):
            _note(f"note: the {name} template is a first-order product here; use --method auto for an exact circuit")
    payload = {"cluster": spec.to_dict(), "term": args.term, "method": args.method, "dt": args.dt,
               "circuits": [c.to_dict() for c in circuits]}
    _emit(_json_doc(args, payload), args.out)
    for c in circuits:
        _note(f"{c.label}: {len(c)} gates ({c.count_sqg()} c-SQG, {c.count_2q()} c-iSWAP)")
    _note(f"total: {sum(len(c) for c in circuits)} gates")
    return EXIT_OK


def verify_circuits(spec: ClusterSpec, circuits: list[Circuit]) -> list[tuple[str, int, float]]:
    """Frobenius distance between each circuit and its controlled exponential."""
    out = []
    for c in circuits:
        if c.dt is None:
            raise InputError(f"circuit {c.label!r} has no dt")
        target = controlled_matrix(exact_unitary(signed_generator(spec, c.label), c.dt))
        out.append((c.label, len(c), float(np.linalg.norm(circuit_unitary(c) - target))))
    return out


def cmd_verify(args) -> int:
    if args.circuit:
        try:
            doc = json.loads(Path(args.circuit).read_text())
            spec = ClusterSpec.from_dict(doc["cluster"])
            circuits = [Circuit.from_dict(c) for c in doc["circuits"]]
        except (OSError, KeyError, json.JSONDecodeError, GateError) as exc:
            raise InputError(f"cannot read circuit file: {exc}") from exc
    else:
        spec = _spec(args)
        circuits = compile_term(spec, args.term, 0.01 if args.dt is None else args.dt, args.method)
    rows = verify_circuits(spec, circuits)
    failed = [label for label, _, dist in rows if not dist <= VERIFY_TOL]
    if args.format == "json":
        text = _json_doc(args, {"cluster": spec.to_dict(), "tolerance": VERIFY_TOL, "blocks": [
            {"block": b, "gates": n, "distance": d, "pass": d <= VERIFY_TOL} for b, n, d in rows]})
    else:
        text = _csv_text(args, ["block", "gates", "distance", "pass"],
                         [[b, n, f"{d:.3e}", "yes" if d <= VERIFY_TOL else "no"] for b, n, d in rows])
    _emit(text, args.out)
    if failed:
        _note(f"FAIL: {', '.join(failed)} exceed {VERIFY_TOL:g}")
        return EXIT_FAIL
    _note(f"all {len(rows)} blocks within {VERIFY_TOL:g}")
    return EXIT_OK


def cmd_trotter_error(args) -> int:
    spec = _spec(args, WORST_CASE if args.worst_case else None)
    if args.tau <= 0:
        raise InputError("--tau must be positive")
    if args.dt is not None:
        if not args.dt > 0:
            raise InputError("--dt must be positive")
        dtaus = np.array([args.dt])
    else:
        dtaus = _parse_sweep(args.dt_sweep)
    schemes = SCHEMES if args.scheme == "both" else (args.scheme,)
    rows = sweep(spec, dtaus, schemes, args.tau, args.mode)
    cols = ["dtau", "scheme", "epsilon", "n_factors"] + (["wall_ms"] if args.timing else [])
    table = [[_num(r.dtau), r.scheme, _num(r.epsilon), r.n_factors] + ([f"{r.wall_ms:.1f}"] if args.timing else [])
             for r in rows]
    if args.format == "json":
        text = _json_doc(args, {"cluster": spec.to_dict(), "tau": args.tau,
                                "rows": [dict(zip(cols, row)) for row in table]})
    else:
        text = _csv_text(args, cols, table)
    _emit(text, args.out)
    if len(dtaus) >= 3:
        for s in schemes:
            sel = [r for r in rows if r.scheme == s]
            if min(r.epsilon for r in sel) < 1e-14:
                _note(f"{s}: error at rounding level, no power-law fit")
                continue
            slope, r2 = power_law_fit([r.dtau for r in sel], [r.epsilon for r in sel])
            _note(f"{s}: log-log slope {slope:.3f}, R^2 {r2:.4f}")
    return EXIT_OK


def cmd_resources(args) -> int:
    labels = list(REFERENCE_ROWS) if args.cluster == "reference" else [args.cluster]
    reports = [count_resources(parse_geometry(g)) for g in labels]
    if args.format == "json":
        text = _json_doc(args, {"rows": [r.to_dict() for r in reports]})
    elif args.format == "csv":
        rows = [r.to_dict() for r in reports]
        cols = [k for k in rows[0] if k != "block_gates"]
        text = _csv_text(args, cols, [["" if row[k] is None else row[k] for k in cols] for row in rows])
    else:
        text = _header(args, "table") + format_table(reports) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_correlate(args) -> int:
    spec = _spec(args)
    if args.beta < 0:
        raise InputError("--beta must be non-negative")
    if not args.eta > 0:
        raise InputError("--eta must be positive")
    if not (args.tau > 0 and args.tau_step > 0):
        raise InputError("--tau and --tau-step must be positive")
    n_tau = int(round(args.tau / args.tau_step))
    taus = np.arange(n_tau + 1) * args.tau_step
    omega = _parse_grid(args.omega)
    series, data = run_pipeline(spec, args.beta, taus, omega, args.eta, args.evolution, args.dt, args.method)

    corr_rows = []
    for (mu, nu), s in series.items():
        head = [mu.orbital.site, mu.orbital.spin.symbol, mu.kind, nu.orbital.site, nu.orbital.spin.symbol, nu.kind]
        corr_rows += [head + [_num(t), _num(v.real), _num(v.imag)] for t, v in zip(s.taus, s.values)]
    gf_rows = []
    for (i, j), g in data.retarded.items():
        head = ["GR", i.site, j.site, i.spin.symbol, j.spin.symbol]
        gf_rows += [head + [_num(w), _num(v.real), _num(v.imag)] for w, v in zip(omega, g)]

    prefix = args.out or "correlate"
    Path(f"{prefix}_correlations.csv").write_text(_csv_text(
        args, ["mu_site", "mu_spin", "mu_kind", "nu_site", "nu_spin", "nu_kind", "tau", "re", "im"], corr_rows))
    Path(f"{prefix}_greens.csv").write_text(_csv_text(
        args, ["component", "i", "j", "spin_i", "spin_j", "omega", "re", "im"], gf_rows))

    err = sum_rule_error(data)
    _note(f"wrote {prefix}_correlations.csv ({len(corr_rows)} rows) and {prefix}_greens.csv ({len(gf_rows)} rows)")
    first = next(k for k in data.retarded if k[0] == k[1])
    peaks = spectral_peaks(omega, data.retarded[first])
    _note(f"spectral peaks of G^R[{first[0]}]: {', '.join(f'{p:.3f}' for p in peaks)}")
    if not err <= 1e-10:
        _note(f"FAIL: sum rule error {err:.3e}")
        return EXIT_FAIL
    _note(f"sum rule error {err:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_cluster(p: argparse.ArgumentParser, default: str | None = "2x2") -> None:
    p.add_argument("--cluster", default=default, required=default is None,
                   help='geometry such as "1d:4", "2x2", "2x2x2" or a JSON cluster file')
    for flag, dest in PARAM_FLAGS:
        p.add_argument(f"--{flag}", dest=dest, type=float, default=None)


def _add_common(p: argparse.ArgumentParser, formats: tuple[str, ...] = ()) -> None:
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--no-header", action="store_true", help="omit the timestamp header line")
    if formats:
        p.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hubbard-qsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="emit controlled block circuits as JSON")
    _add_cluster(p)
    p.add_argument("--term", choices=TERMS, default="all")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--method", choices=METHODS, default="template")
    _add_common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="compare block circuits with exact controlled exponentials")
    _add_cluster(p)
    p.add_argument("--term", choices=TERMS, default="all")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--circuit", default=None, help="verify a circuit file written by compile")
    _add_common(p, ("csv", "json"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("trotter-error", help="splitting error against exact evolution")
    _add_cluster(p)
    p.add_argument("--tau", type=float, default=3.0)
    p.add_argument("--dt", type=float, default=None, help="single step size (overrides --dt-sweep)")
    p.add_argument("--dt-sweep", default="3e-3:3e-1:9", help="lo:hi:points, log spaced")
    p.add_argument("--scheme", choices=SCHEMES + ("both",), default="both")
    p.add_argument("--mode", choices=("exact", "compiled"), default="exact",
                   help="factor unitaries from exact exponentials or compiled circuits")
    p.add_argument("--worst-case", action="store_true", help="set mu-p, M-p, delta-s, delta-d to 3")
    p.add_argument("--timing", action="store_true", help="add a wall-clock column (not reproducible)")
    _add_common(p, ("csv", "json"))
    p.set_defaults(func=cmd_trotter_error)

    p = sub.add_parser("resources", help="qubit and gate counts")
    p.add_argument("--cluster", default="2x2", help='geometry, or "reference" for every reference row')
    _add_common(p, ("table", "json", "csv"))
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("correlate", help="probe correlations and G^R as CSV")
    _add_cluster(p, "1d:2")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=DEFAULT_ETA)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU_MAX, help="length of the time window")
    p.add_argument("--tau-step", type=float, default=DEFAULT_TAU_STEP)
    p.add_argument("--omega", default="-6:6:241", help="lo:hi:points frequency grid")
    p.add_argument("--evolution", choices=("exact", "ts2", "ruth"), default="exact")
    p.add_argument("--dt", type=float, default=0.01, help="split step for ts2/ruth evolution")
    p.add_argument("--method", choices=("circuit", "oracle"), default="circuit")
    p.add_argument("--out", default=None, help="prefix for the two CSV files")
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InputError, GeometryError, DenseLimitError, CompilationError, KeyError, ValueError) as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
