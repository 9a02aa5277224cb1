"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 invalid input or hypothesis violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import verify
from .functions import INF, InvalidLayout, InvalidStepFunction, rearrange, step_from_json, step_to_json
from .operators import H_profile, R_profile, T_profile, operator_from_json
from .optimal import HypothesisError, NoOptimalSpace
from .sampling import DEFAULT_RESOLUTION, discretize
from .spaces import UnsupportedDual, norm, space_from_json
from .weights import (
    DivergenceError,
    DomainError,
    bijection_from_json,
    check_averaging,
    check_delta,
    check_nondegenerate,
    check_quasiconcave,
    weight_from_json,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_OUT = "rikit-out"


class InputError(Exception):
    """Malformed or invalid input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# input loading
# ---------------------------------------------------------------------------

def _schema_root() -> dict:
    text = resources.files("rikit").joinpath("schemas/rikit.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


_ROOT = None


def validator_for(definition: str) -> jsonschema.Draft202012Validator:
    global _ROOT
    if _ROOT is None:
        _ROOT = _schema_root()
    schema = {"$defs": _ROOT["$defs"], "$ref": f"#/$defs/{definition}"}
    return jsonschema.Draft202012Validator(schema)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from None


def load_json(path: str, definition: str):
    """Parse and strictly validate ``path`` against ``$defs/<definition>``."""
    text = _read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    validate(data, definition, path)
    return data


def validate(data, definition: str, origin: str = "<input>"):
    errors = list(validator_for(definition).iter_errors(data))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise InputError(f"{origin}: field {where}: {err.message}")


def _length(x):
    if x is None or x == "inf":
        return INF
    return float(x)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def emit(obj) -> None:
    sys.stdout.write(json.dumps(verify._clean(obj), indent=2, sort_keys=True) + "\n")


def out_dir(args) -> Path:
    path = Path(args.out or os.environ.get("RIKIT_OUT") or DEFAULT_OUT).resolve()
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if x is None else (repr(float(x)) if isinstance(x, (float, np.floating)) else x) for x in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def scatter_svg(points: list[tuple[float, float]], title: str, xlabel: str, ylabel: str,
                band: tuple | None = None, width: int = 640, height: int = 400) -> str:
    """A self-contained SVG scatter plot."""
    pad = 56
    pts = [(x, y) for x, y in points if math.isfinite(x) and math.isfinite(y)]
    ys = [y for _, y in pts] + [b for b in (band or ()) if isinstance(b, (int, float)) and math.isfinite(b)]
    xs = [x for x, _ in pts]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 14}" text-anchor="middle">{_esc(xlabel)}</text>',
           f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" '
           f'transform="rotate(-90 16 {height / 2:.1f})">{_esc(ylabel)}</text>']
    for val, y in ((y0, sy(y0)), (y1, sy(y1))):
        out.append(f'<text x="{pad - 6}" y="{y + 4:.1f}" text-anchor="end">{val:.4g}</text>')
    for val, x in ((x0, sx(x0)), (x1, sx(x1))):
        out.append(f'<text x="{x:.1f}" y="{height - pad + 16}" text-anchor="middle">{val:.4g}</text>')
    for b in band or ():
        if isinstance(b, (int, float)) and math.isfinite(b):
            out.append(f'<line x1="{pad}" y1="{sy(b):.1f}" x2="{width - pad}" y2="{sy(b):.1f}" '
                       f'stroke="red" stroke-dasharray="4 3"/>')
    for x, y in pts:
        out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_rearrange(args) -> int:
    f = step_from_json(load_json(args.f, "step"))
    emit(step_to_json(rearrange(f)))
    return EXIT_OK


def cmd_norm(args) -> int:
    X = space_from_json(load_json(args.X, "space"))
    f = step_from_json(load_json(args.f, "step"), "inf" if math.isinf(X.L) else X.L)
    if f.L != X.L:
        raise InputError(f"function length {f.L} does not match the space length {X.L}")
    emit({"space": X.to_json(), "norm": norm(X, f)})
    return EXIT_OK


def cmd_apply(args) -> int:
    spec = operator_from_json(load_json(args.op, "operator"))
    f = step_from_json(load_json(args.f, "step"), "inf" if math.isinf(spec.L) else spec.L)
    if f.L != spec.L:
        raise InputError(f"function length {f.L} does not match the operator length {spec.L}")
    if spec.kind == "R":
        prof = R_profile(spec, f)
    elif spec.kind == "H":
        prof = H_profile(spec, f)
    else:
        prof = T_profile(spec.phi, f)
    d = discretize(prof, args.grid)
    t = d.nodes[:-1] if d.nodes.size > 1 else d.nodes
    values = np.asarray(prof(t), dtype=float) if t.size else np.zeros(0)
    result = {"operator": spec.to_json(), "hypotheses": spec.hypotheses(), "grid": args.grid,
              "trace": {"t": t.tolist(), "value": values.tolist()}, "sampled": step_to_json(d.step)}
    if args.out or os.environ.get("RIKIT_OUT"):
        path = out_dir(args) / "apply_trace.csv"
        write_csv(path, ["t", "value"], [[float(a), float(b)] for a, b in zip(t, values)])
        result["artifacts"] = [str(path)]
    emit(result)
    return EXIT_OK


def cmd_check(args) -> int:
    data = load_json(args.spec, f"check_{args.kind}")
    L = _length(data.get("L"))
    if args.kind == "delta":
        rep = check_delta(bijection_from_json(data["nu"]), data["endpoint"], data["mode"],
                          float(data.get("theta", 2.0)), L)
        out, ok = rep.to_json(), rep.verdict
    elif args.kind == "averaging":
        rep = check_averaging(weight_from_json(data["w"]), L)
        out, ok = rep.to_json(), rep.verdict
    elif args.kind == "quasiconcave":
        ok = check_quasiconcave(weight_from_json(data["psi"]), L)
        out = {"verdict": ok}
    else:
        ok = check_nondegenerate(weight_from_json(data["u"]), L)
        out = {"verdict": ok}
    emit({"check": args.kind, **out})
    return EXIT_OK if ok else EXIT_FAIL


def _params(args) -> dict | None:
    return load_json(args.params, "params") if args.params else None


def cmd_verify(args) -> int:
    if args.case == "all":
        if args.params:
            raise InputError("--params applies to a single case, not to 'verify all'")
        reports = verify.run_all(args.seed, args.grid, args.jobs, args.tol_rel)
    else:
        if args.case not in verify.CASES:
            raise InputError(f"unknown case {args.case!r}; known: all, {', '.join(verify.CASES)}")
        reports = [verify.run_case(args.case, _params(args), args.seed, args.grid, args.tol_rel)]
    out = out_dir(args)
    for r in reports:
        path = out / f"{r.case_id}.json"
        r.artifacts = [path.name]
        path.write_text(r.dumps(), encoding="utf-8")
        print(f"{r.case_id:26s} {r.verdict:15s} n={r.n_samples:<6d} worst={_fmt(r.worst_ratio)}")
    if len(reports) > 1:
        rows = [[r.case_id, r.verdict, r.n_samples, r.skipped, r.worst_ratio,
                 *(list(r.band) + [None, None])[:2]] for r in reports]
        write_csv(out / "summary.csv", ["case_id", "verdict", "n_samples", "skipped", "worst_ratio",
                                        "band_low", "band_high"], rows)
    return max(r.severity for r in reports)


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, (float, np.floating)) else str(x)


def _sweep_job(job):
    index, case_id, params, seed, grid, tol = job
    return index, verify.run_case(case_id, params, seed, grid, tol)


def cmd_sweep(args) -> int:
    plan = load_json(args.plan, "sweep")
    case_id = plan["case_id"]
    if case_id not in verify.CASES:
        raise InputError(f"{args.plan}: unknown case {case_id!r}")
    seeds = plan.get("seeds", [args.seed])
    vary = plan.get("vary", {})
    names = sorted(vary)
    combos = list(itertools.product(*(vary[n] for n in names))) or [()]
    jobs = []
    for seed in seeds:
        for combo in combos:
            params = dict(plan.get("params", {}))
            params.update(zip(names, combo))
            jobs.append((len(jobs), case_id, params, seed, args.grid, args.tol_rel))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    out = out_dir(args) / "sweep"
    out.mkdir(parents=True, exist_ok=True)
    rows, points = [], []
    for (index, report), job in sorted(zip(results, jobs)):
        seed, params = job[3], job[2]
        name = f"{index:04d}_{case_id}.json"
        report.artifacts = [name]
        (out / name).write_text(report.dumps(), encoding="utf-8")
        rows.append([index, seed, *[json.dumps(params.get(n)) for n in names], report.verdict, report.n_samples,
                     report.worst_ratio])
        x = params.get(names[0]) if len(names) == 1 and isinstance(params.get(names[0]), (int, float)) else index
        if isinstance(report.worst_ratio, (float, np.floating)):
            points.append((float(x), float(report.worst_ratio)))
    write_csv(out / "sweep.csv", ["index", "seed", *names, "verdict", "n_samples", "worst_ratio"], rows)
    band = results[0][1].band if results else None
    xlabel = names[0] if len(names) == 1 else "run"
    (out / "sweep.svg").write_text(scatter_svg(points, f"{case_id} sweep", xlabel, "worst ratio",
                                               tuple(band) if band else None), encoding="utf-8")
    for index, report in sorted(results, key=lambda r: r[0]):
        print(f"{index:4d} {report.verdict:15s} worst={_fmt(report.worst_ratio)}")
    return max(r.severity for _, r in results)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: $RIKIT_OUT or ./rikit-out)")
    common.add_argument("--grid", type=_positive_int, default=DEFAULT_RESOLUTION, help="sampling resolution")
    common.add_argument("--seed", type=_seed, default=verify.DEFAULT_SEED, help="random seed (u64)")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    common.add_argument("--tol-rel", type=float, default=None, help="override relative tolerances")

    p = argparse.ArgumentParser(prog="rikit", description="Hardy-type operators on rearrangement-invariant spaces.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("rearrange", parents=[common], help="nonincreasing rearrangement of a step function")
    s.add_argument("f")
    s.set_defaults(func=cmd_rearrange)
    s = sub.add_parser("norm", parents=[common], help="norm of a step function in a space")
    s.add_argument("X")
    s.add_argument("f")
    s.set_defaults(func=cmd_norm)
    s = sub.add_parser("apply", parents=[common], help="apply R, H or T to a step function")
    s.add_argument("op")
    s.add_argument("f")
    s.set_defaults(func=cmd_apply)
    s = sub.add_parser("check", parents=[common], help="probe a weight or bijection condition")
    s.add_argument("kind", choices=["delta", "averaging", "quasiconcave", "nondegenerate"])
    s.add_argument("spec")
    s.set_defaults(func=cmd_check)
    s = sub.add_parser("verify", parents=[common], help="run a verification case, or all of them")
    s.add_argument("case", help="case id or 'all'")
    s.add_argument("--params", help="JSON object overriding the case parameters")
    s.set_defaults(func=cmd_verify)
    s = sub.add_parser("sweep", parents=[common], help="run a case over a parameter/seed grid")
    s.add_argument("plan")
    s.set_defaults(func=cmd_sweep)
    return p


def _positive_int(x: str) -> int:
    n = int(x)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _seed(x: str) -> int:
    n = int(x)
    if not 0 <= n < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"rikit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except verify.ParamError as exc:
        print(f"rikit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidStepFunction, InvalidLayout, DomainError, DivergenceError, HypothesisError, NoOptimalSpace,
            UnsupportedDual, ValueError) as exc:
        print(f"rikit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
