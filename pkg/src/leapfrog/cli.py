"""Command-line entry point: ``leapfrog {check,plan,simulate,factor}``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import goodmat as gm
from .io import (
    FormatError,
    instance_to_dict,
    load_instance,
    read_plan,
    verdict_to_dict,
    with_overrides,
    write_plan,
)
from .kinematics import compile_plan, export_csv, export_svg, simulate, verify
from .lattice import EffortExhausted, density_certificate
from .planner import InstanceError, estimated_moves, plan_certificate
from .scalar import PrecisionExhausted, ScalarSyntaxError

EXIT_OK, EXIT_FAIL, EXIT_NOT_DENSE, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3, 64
VERDICT_EXIT = {"dense": EXIT_OK, "not_dense": EXIT_NOT_DENSE, "unknown": EXIT_UNKNOWN}


def _parse_int_flag(text: str) -> int:
    # accept 2**40 style for big radii
    if "**" in text:
        base, exp = text.split("**", 1)
        return int(base) ** int(exp)
    return int(text)


def _load(path: str, args):
    inst = load_instance(path)
    return with_overrides(inst, eps=args.eps, precision=args.precision,
                          radius=args.effort_radius, steps=args.effort_steps)


def _check_one(payload):
    path, eps, precision, radius, steps = payload
    ns = argparse.Namespace(eps=eps, precision=precision, effort_radius=radius, effort_steps=steps)
    try:
        inst = _load(path, ns)
    except (FormatError, ScalarSyntaxError, OSError) as exc:
        return path, None, str(exc)
    if inst.n < 1:
        return path, None, "need at least two particles"
    # n <= d and rank deficiency are verdicts, not errors
    verdict = density_certificate(inst.P, inst.effort)
    return path, verdict, None


def cmd_check(args) -> int:
    payloads = [(p, args.eps, args.precision, args.effort_radius, args.effort_steps) for p in args.instances]
    if args.jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_check_one, payloads))
    else:
        results = [_check_one(p) for p in payloads]
    codes = []
    out = []
    for path, verdict, err in results:
        if err is not None:
            out.append({"instance": path, "error": err})
            codes.append(EXIT_USAGE)
            continue
        rec = verdict_to_dict(verdict)
        rec["instance"] = path
        out.append(rec)
        codes.append(VERDICT_EXIT[verdict.kind])
    print(json.dumps(out[0] if len(out) == 1 else out, indent=2))
    if EXIT_USAGE in codes:
        return EXIT_USAGE
    if EXIT_UNKNOWN in codes:
        return EXIT_UNKNOWN
    if EXIT_NOT_DENSE in codes:
        return EXIT_NOT_DENSE
    return EXIT_OK


def cmd_plan(args) -> int:
    inst = _load(args.instance, args)
    if inst.targets is None:
        print("error: the instance has no targets", file=sys.stderr)
        return EXIT_USAGE
    if inst.eps is None:
        print("error: no eps given (instance field or --eps)", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    try:
        cert = plan_certificate(inst.P, [list(q) for q in inst.targets.positions], inst.eps,
                                inst.effort, p0=inst.p0)
    except EffortExhausted as exc:
        print(f"error: effort exhausted: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    estimate = estimated_moves(cert, args.order)
    if estimate > args.max_moves:
        print(f"error: plan would need about {estimate} moves (limit {args.max_moves})", file=sys.stderr)
        return EXIT_FAIL
    plan = compile_plan(cert, args.order)
    with open(args.output, "w") as fh:
        count = write_plan(plan, fh)
    elapsed = time.perf_counter() - start
    summary = {
        "output": args.output,
        "moves": count,
        "counts": plan.counts(),
        "order": args.order,
        "w0": [str(x) for x in cert.w0],
        "A0_max_entry_digits": max(len(str(abs(x))) for row in cert.A0 for x in row),
        "translation_error": float(cert.budget["translation_achieved"]),
        "matrix_error": float(cert.budget["matrix_achieved"]),
        "recursion_eps": [float(x) for x in cert.budget["recursion_eps"]],
        "seconds": round(elapsed, 3),
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_simulate(args) -> int:
    with open(args.plan) as fh:
        pf = read_plan(fh)
    if args.export:
        target = open(args.output, "w") if args.output else sys.stdout
        try:
            if args.export == "csv":
                export_csv(pf.initial, pf.moves, target, digits=args.digits, stride=args.stride)
            else:
                export_svg(pf.initial, pf.moves, target, stride=args.stride)
        finally:
            if args.output:
                target.close()
    try:
        final = simulate(pf.initial, pf.moves)
    except IndexError as exc:
        print(json.dumps({"passed": False, "error": str(exc)}))
        return EXIT_FAIL
    report = {"moves": len(pf.moves)}
    code = EXIT_OK
    if pf.targets is not None and pf.eps is not None:
        eps = args.eps if args.eps is not None else pf.eps
        rep = verify(final, pf.targets, eps, args.verify_precision)
        report.update(rep.as_dict())
        if rep.passed is not True:
            code = EXIT_FAIL
            if rep.passed is None:
                report["note"] = "undecided at this precision; rerun with a larger --verify-precision"
    else:
        report["passed"] = None
        report["note"] = "plan carries no targets; nothing to verify"
    if pf.certificate is not None:
        report["matches_certificate"] = [list(p) for p in final.positions] == pf.certificate.predicted
    report["final"] = [[x.to_expr() for x in p] for p in final.positions]
    if len(report["final"][0][0]) > 400:
        report["final"] = "omitted (large expressions)"
    print(json.dumps(report, indent=2))
    return code


def _read_matrix(text: str):
    try:
        with open(text) as fh:
            text = fh.read()
    except OSError:
        pass
    data = json.loads(text)
    if isinstance(data, dict):
        data = data["matrix"]
    return [[int(x) for x in row] for row in data]


def cmd_factor(args) -> int:
    try:
        m = _read_matrix(args.matrix)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read matrix: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not gm.is_good(m):
        print("not good")
        return EXIT_FAIL
    runs = gm.factor_good(m, runs=True)
    print(json.dumps({"good": True, "length": str(gm.runs_length(runs)),
                      "steps": [{"row": s.row, "col": s.col, "value": s.value, "count": str(k)}
                                for s, k in runs]}, indent=2))
    return EXIT_OK


def cmd_show(args) -> int:
    inst = _load(args.instance, args)
    print(json.dumps(instance_to_dict(inst), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leapfrog", description="Jump-move reachability: density checks, plans, replay.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", default=None, help="target accuracy, any scalar expression (overrides the instance)")
    common.add_argument("--precision", type=int, default=None, help="working precision in bits")
    common.add_argument("--effort-radius", type=_parse_int_flag, default=None,
                        help="largest coefficient radius the lattice search may reach (e.g. 2**64)")
    common.add_argument("--effort-steps", type=int, default=None,
                        help="retries with a halved internal tolerance before giving up")
    common.add_argument("--seed", type=int, default=0, help="recorded for reproducibility; the pipeline is deterministic")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="decide whether G(P) is dense")
    c.add_argument("instances", nargs="+")
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_check)

    pl = sub.add_parser("plan", parents=[common], help="build a move plan reaching the targets")
    pl.add_argument("instance")
    pl.add_argument("-o", "--output", default="plan.json")
    pl.add_argument("--order", choices=["translate-first", "stationary-first"], default="translate-first")
    pl.add_argument("--max-moves", type=int, default=50_000_000)
    pl.set_defaults(func=cmd_plan)

    s = sub.add_parser("simulate", help="replay a plan exactly and verify the result")
    s.add_argument("plan")
    s.add_argument("--export", choices=["csv", "svg"], default=None)
    s.add_argument("--output", default=None, help="trajectory file (default: stdout)")
    s.add_argument("--stride", type=int, default=1, help="export every k-th configuration")
    s.add_argument("--digits", type=int, default=17)
    s.add_argument("--eps", default=None, help="override the plan's eps")
    s.add_argument("--verify-precision", type=int, default=256)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("factor", help="factor a good matrix into steps")
    f.add_argument("matrix", help="JSON file or literal such as '[[1,2],[2,5]]'")
    f.set_defaults(func=cmd_factor)

    sh = sub.add_parser("show", parents=[common], help="print an instance after parsing and overrides")
    sh.add_argument("instance")
    sh.set_defaults(func=cmd_show)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ScalarSyntaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionExhausted as exc:
        print(f"error: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
