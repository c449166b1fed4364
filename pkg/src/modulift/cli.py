"""Command-line front end.

Exit codes: 0 success / certified, 1 error, 2 rejected, 3 indeterminate.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .atsp_core import AtspInstance, OracleRangeError, Tour, exact_optimum, format_tsplib, parse_tsplib, random_instance, tour_cost
from .certifier import CertificationError, FilterSettings, certify, exit_code, serialize_report, summary_text
from .encoding import encode
from .modular_lift import LiftConfig, select_weight
from .selftest import run_selftest


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modulift", description="Modular-lift ATSP toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a random ATSP instance in TSPLIB format")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--cost-lo", type=int, default=1)
    gen.add_argument("--cost-hi", type=int, default=100)
    gen.add_argument("--out", type=Path)

    solve = sub.add_parser("solve", help="exact optimum of an instance")
    solve.add_argument("instance", type=Path)
    solve.add_argument("--method", choices=("held_karp", "brute_force"), default="held_karp")
    solve.add_argument("--format", choices=("text", "json"), default="text")

    enc = sub.add_parser("encode", help="complex encoding of a candidate tour")
    enc.add_argument("instance", type=Path)
    enc.add_argument("--tour", required=True, help="comma-separated 1-indexed visiting order")
    enc.add_argument("--mode", choices=("auto", "oracle", "self"), default="auto")
    enc.add_argument("--format", choices=("text", "json"), default="text")
    enc.add_argument("--dump-points", type=Path, help="write (Re, Im) of every s and tau as CSV")

    cert = sub.add_parser("certify", help="run the optimality certificate")
    cert.add_argument("instance", type=Path)
    cert.add_argument("--tour", required=True, help="comma-separated 1-indexed visiting order")
    cert.add_argument("--mode", choices=("oracle", "self"), default="oracle")
    cert.add_argument("--format", choices=("json", "text"), default="json")
    cert.add_argument("--out", type=Path)
    cert.add_argument("--weight-policy", choices=("min", "max_budget"), default="min")
    cert.add_argument("--weight", type=int)
    cert.add_argument("--H", type=int, dest="H")
    cert.add_argument("--M", type=int, dest="M")
    cert.add_argument("--y0", type=_positive_float, default=0.8)
    cert.add_argument("--zero-tol", type=_positive_float)
    cert.add_argument("--tail-tol", type=_positive_float)
    cert.add_argument("--sep-margin", type=_positive_float)

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def _load(path: Path) -> AtspInstance:
    try:
        return parse_tsplib(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_gen(args) -> int:
    inst = random_instance(args.n, args.cost_lo, args.cost_hi, args.seed)
    _write(format_tsplib(inst), args.out)
    return 0


def _cmd_solve(args) -> int:
    inst = _load(args.instance)
    result = exact_optimum(inst, args.method)
    if args.format == "json":
        payload = {
            "instance": inst.name,
            "method": result.method,
            "tour": result.optimal_tour.labels(),
            "cost": str(result.optimal_cost),
        }
        print(json.dumps(payload, indent=2))
    else:
        print(f"tour {','.join(map(str, result.optimal_tour.labels()))}")
        print(f"cost {result.optimal_cost}")
        print(f"method {result.method}")
    return 0


def _cmd_encode(args) -> int:
    inst = _load(args.instance)
    tour = Tour.from_labels(args.tour)
    mode = args.mode
    if mode == "auto":
        try:
            r_ref = exact_optimum(inst).optimal_cost
            mode = "oracle"
        except OracleRangeError:
            r_ref, mode = tour_cost(inst, tour), "self"
    elif mode == "oracle":
        r_ref = exact_optimum(inst).optimal_cost
    else:
        r_ref = tour_cost(inst, tour)
    enc = encode(inst, tour, r_ref)
    if args.dump_points:
        with args.dump_points.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["arc_from", "arc_to", "x", "kind", "re", "im"])
            for e in enc.arcs:
                for kind, z in (("s", e.s), ("tau", e.tau)):
                    writer.writerow([e.arc[0] + 1, e.arc[1] + 1, e.x, kind, repr(z.real), repr(z.imag)])
    if args.format == "json":
        payload = {"mode": "self-normalized" if mode == "self" else "oracle", **enc.to_dict()}
        print(json.dumps(payload, indent=2))
    else:
        flag = "  (self-normalized)" if mode == "self" else ""
        print(f"r_ref {enc.r_ref}  t {enc.t}{flag}")
        print(f"{'arc':>9} {'x':>2} {'Re s':>8} {'Im s':>12} {'Re tau':>8} {'Im tau':>12}")
        for e in enc.arcs:
            arc = f"{e.arc[0] + 1}->{e.arc[1] + 1}"
            print(f"{arc:>9} {e.x:>2} {e.s.real:>8.4f} {e.s.imag:>12.8f} {e.tau.real:>8.4f} {e.tau.imag:>12.8f}")
    return 0


def _cmd_certify(args) -> int:
    inst = _load(args.instance)
    tour = Tour.from_labels(args.tour)
    weight = args.weight
    if weight is None:
        weight = select_weight(inst.num_arcs, inst.n, args.weight_policy)
        if weight is None:
            raise CertificationError(f"no admissible weight for |A| = {inst.num_arcs}")
    if args.M is not None and args.M < 2 * inst.num_arcs:
        raise CertificationError(f"--M {args.M} violates the requirement M >= 2|A| = {2 * inst.num_arcs}")
    cfg = LiftConfig.for_weight(
        weight, H=args.H, zero_tol=args.zero_tol, tail_tol=args.tail_tol, sep_margin=args.sep_margin
    )
    settings = FilterSettings(M=args.M, y0=args.y0)
    mode = "self-normalized" if args.mode == "self" else "oracle"
    report = certify(inst, tour, cfg, mode, settings=settings)
    text = serialize_report(report) if args.format == "json" else summary_text(report)
    _write(text, args.out)
    return exit_code(report)


def _cmd_selftest(args) -> int:
    return 0 if run_selftest() else 1


COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "encode": _cmd_encode,
    "certify": _cmd_certify,
    "selftest": _cmd_selftest,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"modulift: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
