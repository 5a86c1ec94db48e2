"""Command-line front end.

Exit codes: 0 success, 1 check failure, 2 usage or config error, 3 aborted cell.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import vcp as _vcp
from . import verification as _ver
from .errors import ConfigError, VcpKnotError

AXIOM_TOL = _ver.CHECKS["axioms"].tolerance


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _header(extra=""):
    line = f"vcpknot defaults: h={_ver.DEFAULT_H:g} N={_ver.DEFAULT_N} seed={_ver.DEFAULT_SEED}"
    print(line + (f" | {extra}" if extra else ""))


def cmd_verify_vcp(kind, trials=1000, seed=0, m=None, corrupt=False):
    try:
        chi = _vcp.from_kind(kind, m)
    except (ValueError, VcpKnotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if corrupt:
        chi = _vcp.corrupted(chi)
    _header(f"kind={chi.kind.value} m={chi.m} r={chi.r} trials={trials} seed={seed}")
    report = _vcp.verify_vcp_axioms(chi, trials=trials, seed=seed)
    print(f"tuples checked   {report.tuples_checked}")
    print(f"orthogonality    {report.orthogonality:.3e}")
    print(f"norm             {report.norm:.3e}")
    print(f"alternation      {report.alternation:.3e}")
    ok = report.max_violation <= AXIOM_TOL
    print(f"max violation    {report.max_violation:.3e}  (tolerance {AXIOM_TOL:g})  {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _load(config_path, out_dir):
    if not os.path.isfile(config_path):
        print(f"error: config file not found: {config_path}", file=sys.stderr)
        return None
    if os.path.exists(out_dir) and not os.path.isdir(out_dir):
        print(f"error: output path exists and is not a directory: {out_dir}", file=sys.stderr)
        return None
    try:
        return _ver.ExperimentSpec.load(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None


def _fmt(x):
    if x is None:
        return "-"
    if isinstance(x, str):
        return x
    return f"{x:.3e}" if isinstance(x, float) else str(x)


def _rate_fmt(x):
    if x is None:
        return "n/a"
    return x if isinstance(x, str) else f"{x:.2f}"


def _print_verdicts(report):
    print(f"{'check':<14}{'tolerance':>11}{'finest':>12}{'rate_h':>8}{'rate_N':>8}  verdict")
    for name, s in report.checks.items():
        print(f"{name:<14}{s.tolerance:>11.0e}{_fmt(s.finest_defect):>12}{_rate_fmt(s.rate_h):>8}{_rate_fmt(s.rate_N):>8}  {s.verdict}")
        for note in s.notes:
            print(f"  note: {note}")


def _print_rates(report):
    spec = report.spec
    for name, s in report.checks.items():
        print(f"[{name}] tolerance {s.tolerance:g}, verdict {s.verdict}")
        print("  " + f"{'N':>6}" + "".join(f"{'h=' + format(h, 'g'):>12}" for h in spec.h))
        for N in spec.N:
            row = []
            for h in spec.h:
                entry = next(e for e in s.cells if e["N"] == N and e["h"] == h)
                row.append("ERR" if entry["error"] else _fmt(entry.get("max_defect")))
            print("  " + f"{N:>6}" + "".join(f"{v:>12}" for v in row))
        print(f"  rate in h: {_rate_fmt(s.rate_h)}   rate in 1/N: {_rate_fmt(s.rate_N)}   monotone: {s.monotone}")
        for note in s.notes:
            print(f"  note: {note}")


def _run(config_path, out_dir, rates_first):
    spec = _load(config_path, out_dir)
    if spec is None:
        return 2
    _header(
        f"experiment={spec.name} N={list(spec.N)} h={list(spec.h)} seed={spec.seed} "
        f"trials={spec.trials} richardson={spec.richardson} order={spec.order} "
        f"control={spec.control}"
    )
    try:
        report = _ver.run_experiment(spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report.write(out_dir)
    if rates_first:
        _print_rates(report)
    else:
        _print_verdicts(report)
    for c in report.cells:
        if c.error:
            print(f"cell N={c.N} h={c.h:g} aborted: {c.error}")
        for name, msg in c.errors.items():
            print(f"cell N={c.N} h={c.h:g} check {name} aborted: {msg}")
    print(f"wrote {os.path.join(out_dir, 'report.json')} and report.csv ({report.wall_time:.1f} s)")
    return report.exit_code


def cmd_run(config_path, out_dir):
    return _run(config_path, out_dir, rates_first=False)


def cmd_converge(config_path, out_dir):
    return _run(config_path, out_dir, rates_first=True)


def build_parser():
    parser = _Parser(prog="vcpknot", description="Vector cross products and the geometry of discretized knot spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-vcp", help="check the VCP axioms for one kind")
    p.add_argument("--kind", required=True, choices=[k.value for k in _vcp.VcpKind])
    p.add_argument("--m", type=int, default=None, help="ambient dimension (kaehler and volume only)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt", action="store_true", help="flip one structure coefficient (test hook)")

    for name, text in [("run", "run an experiment and print verdicts"), ("converge", "run an experiment and print rate tables")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("config_path")
        p.add_argument("out_dir", nargs="?", default="vcpknot-out")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify-vcp":
            if args.trials < 0:
                print("error: --trials must be non-negative", file=sys.stderr)
                return 2
            return cmd_verify_vcp(args.kind, args.trials, args.seed, args.m, args.corrupt)
        if args.command == "run":
            return cmd_run(args.config_path, args.out_dir)
        return cmd_converge(args.config_path, args.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
