"""Command-line interface.

Exit status: 0 when every verdict holds, 1 when any verdict fails or an
entry errors, 2 for usage or specification errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import calculus as calc
from . import inequalities as ineq
from .domains import domain_from_spec, extract_boundary, load_domain_spec
from .errors import GmtLabError, SpecError
from .hausdorff import build_partition, estimate_hm_detail, partition_defect, partition_to_json
from .suite import RunManifest, emit, hash_file, parse_suite, run_suite


def _load_domain(path, h_override=None):
    spec = load_domain_spec(path)
    return domain_from_spec(spec, h_override=h_override)


def _load_function(path, domain, cloud):
    with open(path, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    if spec == "indicator" or spec.get("expr") == "indicator":
        return calc.indicator_function(domain, cloud)
    unknown = set(spec) - {"expr", "lipschitz"}
    if unknown:
        raise SpecError(f"unknown function spec keys: {sorted(unknown)}")
    lips = spec.get("lipschitz")
    return calc.from_expression(
        domain, spec["expr"], cloud, lipschitz=None if lips is None else float(lips)
    )


def _emit_series(series, out_path):
    manifest = RunManifest(
        version=__version__, timestamp="", input_hash="", suite_name="",
        entries=[], passed=True, series=series,
    )
    emit(manifest, "tsv-plots", out_path)


def cmd_verify(args) -> int:
    spec = parse_suite(args.suite)
    manifest = run_suite(
        spec,
        h_override=args.h,
        tol_override=args.tol,
        input_hash=hash_file(args.suite),
    )
    if args.out:
        fmt = "csv" if args.out.endswith(".csv") else "json"
        emit(manifest, fmt, args.out)
    n_reports = sum(len(e["reports"]) for e in manifest.entries)
    n_failed = sum(
        1 for e in manifest.entries for r in e["reports"] if not r["holds"]
    )
    n_errors = sum(1 for e in manifest.entries if e["error"])
    for e in manifest.entries:
        for r in e["reports"]:
            status = "ok" if r["holds"] else "VIOLATED"
            print(
                f"[{status}] {r['inequality_id']} ({r['constant_mode']}) on {e['domain']}"
                f" / {e['function']}: lhs={r['lhs']:.6g} rhs={r['rhs']:.6g} ratio={r['ratio']:.4f}"
            )
        if e["error"]:
            print(f"[ERROR] entry {e['index']} ({e['domain']}): {e['error']}")
    print(
        f"suite '{spec.name}': {n_reports} checks, {n_failed} violations, "
        f"{n_errors} errors -> {'PASS' if manifest.passed else 'FAIL'}"
    )
    if not spec.entries:
        print("warning: suite has no entries")
    return 0 if manifest.passed else 1


def cmd_estimate_hm(args) -> int:
    domain = _load_domain(args.domain)
    cloud = extract_boundary(domain)
    est = estimate_hm_detail(cloud, args.d, args.delta)
    print(
        f"H_{args.d} estimate at delta={args.delta}: {est.value!r} "
        f"(upper bound via {est.method} covering, {est.n_cells} cells)"
    )
    return 0


def cmd_partition(args) -> int:
    domain = _load_domain(args.domain)
    cloud = extract_boundary(domain)
    deltas = [float(v) for v in args.delta.split(",")]
    rows = []
    last = None
    for delta in deltas:
        part = build_partition(cloud, domain.dim - 1, delta)
        defect = partition_defect(part, domain.dim - 1)
        rows.append((delta, defect))
        last = part
        print(f"delta={delta}: {len(part)} cells, rd_max={part.rd_max:.6g}, defect={defect:.6g}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(partition_to_json(last))
    if args.plot:
        _emit_series([("defect", ("delta", "defect"), rows)], args.plot)
    return 0


def cmd_trace(args) -> int:
    domain = _load_domain(args.domain)
    cloud = extract_boundary(domain)
    u = _load_function(args.function, domain, cloud)
    trace = ineq.proof_trace(domain, u, eps=args.eps, s=args.s)
    for step in trace.steps:
        mark = "ok" if step.holds else "VIOLATED"
        print(f"[{mark}] {step.label}: lhs={step.lhs:.6g} rhs={step.rhs:.6g}")
    print(f"trace: {'PASS' if trace.all_hold else 'FAIL'} ({trace.parameters['partition_cells']} cells)")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(trace.to_dict(), fh, indent=2)
            fh.write("\n")
    if args.plot:
        series = [
            (step.label, ("quantity", "value"),
             [("lhs", step.lhs), ("rhs", step.rhs), ("holds", int(step.holds))])
            for step in trace.steps
        ]
        _emit_series(series, args.plot)
    return 0 if trace.all_hold else 1


def cmd_search(args) -> int:
    domain = _load_domain(args.domain)
    cloud = extract_boundary(domain)
    u0 = _load_function(args.function, domain, cloud)
    best, q_best = ineq.quotient_search(domain, u0, iters=args.iters, step=args.step)
    history = best.metadata["sweep_history"]
    bound = ineq.iso_constant(domain.dim)
    print(f"best quotient {q_best!r} after {args.iters} sweeps (sharp constant {bound!r})")
    if args.plot:
        rows = list(enumerate(history))
        _emit_series([("quotient", ("sweep", "Q"), rows)], args.plot)
    return 0


def cmd_steiner(args) -> int:
    domain = _load_domain(args.domain)
    eps_list = [float(v) for v in args.eps.split(",")]
    result = calc.minkowski_steiner(domain, eps_list)
    for e, qv in result.quotients:
        print(f"eps={e}: quotient={qv!r}")
    if result.extrapolated is not None:
        print(f"extrapolated perimeter: {result.extrapolated!r}")
    if args.plot:
        _emit_series([("steiner", ("eps", "quotient"), result.quotients)], args.plot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmtlab",
        description="Verify isoperimetric and trace-type inequalities on rasterized domains.",
    )
    parser.add_argument("--version", action="version", version=f"gmtlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run a suite of inequality checks")
    p.add_argument("suite")
    p.add_argument("--out", help="write the manifest (.json or .csv)")
    p.add_argument("--h", type=float, default=None, help="override every domain spacing")
    p.add_argument("--tol", type=float, default=None, help="override the verdict tolerance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("estimate-hm", help="estimate a boundary measure by coverings")
    p.add_argument("domain")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_estimate_hm)

    p = sub.add_parser("partition", help="build a measured boundary partition")
    p.add_argument("domain")
    p.add_argument("--delta", required=True, help="scale, or comma list for a defect sweep")
    p.add_argument("--out", help="write the cells as JSON")
    p.add_argument("--plot", help="write (delta, defect) TSV series")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("trace", help="trace the truncation proof step by step")
    p.add_argument("domain")
    p.add_argument("function")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--out", help="write the trace report as JSON")
    p.add_argument("--plot", help="write one TSV series per step")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("search", help="coordinate-ascent search on the trace quotient")
    p.add_argument("domain")
    p.add_argument("function")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--plot", help="write the (sweep, Q) TSV series")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("steiner", help="volume-growth perimeter quotients")
    p.add_argument("domain")
    p.add_argument("--eps", required=True, help="comma-separated list, descending")
    p.add_argument("--plot", help="write the (eps, quotient) TSV series")
    p.set_defaults(func=cmd_steiner)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except GmtLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
