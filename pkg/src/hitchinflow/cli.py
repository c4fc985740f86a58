"""Command-line interface.

Exit codes: 0 success, 2 unreadable input (bad path, parse error, usage),
3 input that parses but violates an invariant (not half-flat, inadmissible
parameters, invalid witness, ...).  Data goes to stdout, diagnostics to stderr.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

log = logging.getLogger("hitchinflow")

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3
FIXTURES = Path(__file__).parent / "fixtures"
SCHEMAS = Path(__file__).parent / "schemas"
DEFAULT_SEED = 20240101


class InputError(Exception):
    """Unreadable input: exit code 2."""


class InvariantError(Exception):
    """Readable input violating an invariant: exit code 3."""


def resolve(path):
    """Existing path as given, else a shipped fixture of the same name under ``fixtures/``."""
    p = Path(path)
    if p.exists():
        return p
    if p.parts and p.parts[0] == "fixtures":
        q = FIXTURES.joinpath(*p.parts[1:])
        if q.exists():
            return q
    raise InputError(f"no such file: {path}")


def _read(path):
    try:
        return resolve(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _dump(obj, fh=None):
    json.dump(obj, fh or sys.stdout, indent=2, default=_json_default)
    (fh or sys.stdout).write("\n")


def _json_default(o):
    if isinstance(o, Fraction):
        return float(o)
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# --------------------------------------------------------------------------
# classify


def cmd_classify(args):
    from .lie import jacobi_check
    from .obstruct import WitnessError, classify_obstructions, parse_witness
    from .salamon import ParseError, parse_salamon

    try:
        g = parse_salamon(_read(args.algebra))
        witness = parse_witness(_read(args.witness), g.dim) if args.witness else None
    except ParseError as exc:
        raise InputError(str(exc)) from exc
    if not jacobi_check(g).ok:
        raise InvariantError("the structure constants violate the Jacobi identity")
    try:
        report = classify_obstructions(g, witness, args.assume_split_solvable)
    except WitnessError as exc:
        raise InvariantError(f"invalid witness: {exc}") from exc
    out = report.to_dict()
    out["algebra"] = str(args.algebra)
    if args.format == "text":
        inv = out["invariants"]
        print(f"dim {inv['dim']}, central series {inv['central_series_dims']}, "
              f"solvable {inv['solvable']}, nilpotent {inv['nilpotent']}")
        for s in out["matched"]:
            print(f"[{s['id']}] {s['structure']}: {s['verdict']}")
        for note in out["notes"]:
            print(f"note: {note}")
    else:
        _dump(out)
    return EXIT_OK


# --------------------------------------------------------------------------
# flow


def _flow_spec(kind, path, args):
    from .flow import FlowSpec
    from .lie import Subalgebra
    from .salamon import ParseError, parse_struct

    text = _read(path)
    try:
        sf = parse_struct(text, base_dir=resolve(path).parent)
    except (ParseError, OSError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if sf.kind != kind:
        raise InputError(f"{path} declares kind {sf.kind}, not {kind}")
    try:
        sym = Subalgebra(sf.algebra, sf.symmetry) if sf.symmetry else None
    except ValueError as exc:
        raise InvariantError(f"{path}: symmetry: {exc}") from exc
    tol = {k: v for k, v in (("rtol", args.rtol), ("atol", args.atol), ("event_tol", args.event_tol)) if v is not None}
    window = tuple(args.window) if args.window else None
    try:
        return FlowSpec(kind, sf.algebra, sf.forms, symmetry=sym, t0=args.t0, window=window, **tol)
    except ValueError as exc:
        raise InvariantError(f"{path}: {exc}") from exc


def _run_flow(kind, path, args):
    from .flow import FlowError, integrate
    from .gstruct import StabilityError

    spec = _flow_spec(kind, path, args)
    try:
        traj = integrate(spec)
    except (FlowError, StabilityError) as exc:
        raise InvariantError(f"{path}: {exc}") from exc
    return traj


def _flow_summary(path, traj):
    import numpy as np

    y = traj.y
    return {
        "file": str(path),
        "kind": traj.spec.kind,
        "samples": int(len(traj.t)),
        "window": list(traj.window),
        "termination": {k: v.to_dict() for k, v in traj.termination.items()},
        "events": [e.to_dict() for e in traj.events],
        "max_flow_residual": traj.max_residual("flow_residual"),
        "max_closure_residual": traj.max_residual("closure_residual"),
        "constant": bool(np.all(y == y[0])),
    }


def _sweep_job(job):
    kind, path, argv = job
    args = _parser().parse_args(argv)
    try:
        traj = _run_flow(kind, path, args)
        return {"ok": True, **_flow_summary(path, traj)}
    except (InputError, InvariantError) as exc:
        return {"ok": False, "file": str(path), "error": str(exc)}


def cmd_flow(args):
    paths = args.structs
    if len(paths) > 1 and not args.sweep:
        raise InputError("several structure files need --sweep")
    if args.sweep:
        if args.emit:
            raise InputError("--emit is not available with --sweep")
        ordered = sorted(paths)
        argv = _sweep_argv(args)
        jobs = [(args.kind, p, argv) for p in ordered]
        workers = args.jobs or os.cpu_count() or 1
        if workers == 1 or len(jobs) == 1:
            results = [_sweep_job(j) for j in jobs]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_sweep_job, jobs))
        _dump(results)
        return EXIT_OK if all(r["ok"] for r in results) else EXIT_INVARIANT
    traj = _run_flow(args.kind, paths[0], args)
    if args.emit:
        traj.write_csv(args.emit)
        header = args.header or str(Path(args.emit).with_suffix("")) + ".header.json"
        traj.write_header(header)
        log.info("wrote %s and %s", args.emit, header)
    _dump(_flow_summary(paths[0], traj))
    return EXIT_OK


def _sweep_argv(args):
    # rebuild a single-run command line for the workers
    argv = ["flow", args.kind, "-"]
    if args.window:
        argv += ["--window", *map(str, args.window)]
    argv += ["--t0", str(args.t0)]
    for name in ("rtol", "atol", "event_tol"):
        v = getattr(args, name)
        if v is not None:
            argv += ["--" + name.replace("_", "-"), repr(v)]
    return argv


# --------------------------------------------------------------------------
# sl2c


def _number(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text}") from None


def cmd_sl2c(args):
    from .sl2c import InadmissibleParameters, SL2CParams, extension_report

    try:
        params = SL2CParams(args.eps, args.b1, args.b2, args.b3)
    except InadmissibleParameters as exc:
        raise InvariantError(str(exc)) from exc
    report = extension_report(params)
    if args.emit:
        report.trajectory.write_csv(args.emit)
        report.trajectory.write_header(str(Path(args.emit).with_suffix("")) + ".header.json")
    out = report.to_dict()
    if args.report == "text":
        a, b = out["window"]
        print(f"window ({a:.12g}, {b:.12g})")
        for key, end in out["ends"].items():
            print(f"{key}: t = {end['time']:.12g}, x -> {end['x_limit']:.6g}, {end['behavior']}, "
                  f"extension possible: {end['extension_possible']}")
        if out["v_limit"] is not None:
            print(f"V-part limit: {out['v_limit']:.9f}")
    else:
        _dump(out)
    return EXIT_OK


# --------------------------------------------------------------------------
# selftest


def cmd_selftest(args):
    tests = Path(__file__).resolve().parents[2] / "tests"
    if not tests.is_dir():
        raise InputError("the test suite is not available next to this installation (source checkout needed)")
    try:
        import pytest
    except ImportError as exc:
        raise InputError("selftest needs pytest and hypothesis (install the 'test' extra)") from exc
    argv = [str(tests), "-q", f"--hypothesis-seed={args.seed}"]
    if args.fast:
        argv += ["-m", "not slow"]
    return int(pytest.main(argv))


# --------------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="hitchinflow", description="Invariant hypo and Hitchin flows on Lie algebras.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="which obstruction statements apply to an algebra")
    c.add_argument("algebra", help="Salamon-notation algebra file")
    c.add_argument("--witness", help="decomposition witness file (g = u ⋊ R or u ⊕ R)")
    c.add_argument("--assume-split-solvable", action="store_true", help="assert that g is split-solvable")
    c.add_argument("--format", choices=("json", "text"), default="json")
    c.set_defaults(func=cmd_classify)

    f = sub.add_parser("flow", help="integrate a flow from a structure file")
    f.add_argument("kind", choices=("hypo5", "hitchin6", "hitchin7"))
    f.add_argument("structs", nargs="+", metavar="struct", help="structure file(s)")
    f.add_argument("--emit", metavar="CSV", help="write the trajectory as CSV (plus a JSON header)")
    f.add_argument("--header", metavar="JSON", help="path of the JSON header (default: next to the CSV)")
    f.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
    f.add_argument("--t0", type=float, default=0.0)
    f.add_argument("--rtol", type=_positive)
    f.add_argument("--atol", type=_positive)
    f.add_argument("--event-tol", type=_positive)
    f.add_argument("--sweep", action="store_true", help="integrate every given file, in parallel")
    f.add_argument("--jobs", type=int, default=None, help="worker processes for --sweep")
    f.set_defaults(func=cmd_flow)

    s = sub.add_parser("sl2c", help="SU(2)-invariant half-flat flow on sl(2, C)")
    s.add_argument("--eps", type=int, choices=(1, -1), default=1)
    s.add_argument("--b1", type=_number, required=True)
    s.add_argument("--b2", type=_number, required=True)
    s.add_argument("--b3", type=_number, required=True)
    s.add_argument("--report", choices=("json", "text"), default="json")
    s.add_argument("--emit", metavar="CSV", help="write the trajectory as CSV")
    s.set_defaults(func=cmd_sl2c)

    t = sub.add_parser("selftest", help="run the property and acceptance suite")
    t.add_argument("--seed", type=int, default=DEFAULT_SEED)
    t.add_argument("--fast", action="store_true", help="skip tests marked slow")
    t.set_defaults(func=cmd_selftest)
    return p


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return v


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
