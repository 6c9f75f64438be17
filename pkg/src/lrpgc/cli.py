"""Command-line interface: ``lrpgc <command> ...``.

Results go to standard output as TSV, diagnostics to standard error.
Exit codes: 0 success, 1 user error, 2 fuel exhausted, 3 blackhole.
"""

from __future__ import annotations

import argparse
import io
import os
import sys

from . import bench, check
from .reduce import BLACKHOLE, FUEL_EXHAUSTED, STUCK, evaluate
from .syntax import LRPError, PEANO_UNIT, PLAIN, parse_expr, parse_path, pretty, size
from .transform import RULE_GROUPS, TRANSFORM_RULES, apply_exhaustively, apply_rule, list_redexes, psi_translate

EXIT_OK, EXIT_USER, EXIT_FUEL, EXIT_BLACKHOLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def default_fuel() -> int:
    raw = os.environ.get("LRPGC_FUEL")
    if raw is None:
        return 10**6
    try:
        fuel = int(raw)
    except ValueError:
        raise UsageError(f"LRPGC_FUEL must be an integer, got {raw!r}") from None
    if fuel <= 0:
        raise UsageError("LRPGC_FUEL must be positive")
    return fuel


def int_list(text: str) -> list:
    """Parse "100,200" or "100..1000:100" into a list of integers."""
    try:
        if ".." in text:
            rng, _, stride = text.partition(":")
            lo, hi = rng.split("..")
            return list(range(int(lo), int(hi) + 1, int(stride or 1)))
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text}") from None


def _read_program(args):
    if getattr(args, "expr", None) is not None:
        src, name = args.expr, "<expr>"
    elif args.file == "-":
        src, name = sys.stdin.read(), "<stdin>"
    elif args.file is None:
        raise UsageError("give a program file or -e EXPR")
    else:
        try:
            with open(args.file) as fh:
                src = fh.read()
        except OSError as exc:
            raise UsageError(f"{args.file}: {exc.strerror}") from None
        name = args.file
    try:
        return parse_expr(src)
    except LRPError as exc:
        raise UsageError(f"{name}:{exc}") from None


def _status_code(status: str) -> int:
    return {FUEL_EXHAUSTED: EXIT_FUEL, BLACKHOLE: EXIT_BLACKHOLE, STUCK: EXIT_USER}.get(status, EXIT_OK)


def _opts(args):
    return PEANO_UNIT if args.peano_unit else PLAIN


def _fuel(args) -> int:
    return args.fuel if args.fuel is not None else default_fuel()


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args, out) -> int:
    r = evaluate(_read_program(args), fuel=_fuel(args), opts=_opts(args))
    out.write(r.summary() + "\n")
    if args.show_result and r.final is not None:
        out.write(pretty(r.final) + "\n")
    if r.stuck_reason:
        print(f"stuck: {r.stuck_reason}", file=sys.stderr)
    return _status_code(r.status)


def cmd_measure(args, out) -> int:
    e = _read_program(args)
    r = evaluate(e, fuel=_fuel(args), opts=_opts(args))
    out.write(r.summary() + "\n")
    out.write(f"size\t{size(e, _opts(args))}\n")
    return _status_code(r.status)


def cmd_trace(args, out) -> int:
    r = evaluate(_read_program(args), fuel=_fuel(args), opts=_opts(args), trace=True)
    for i, (rule, before) in enumerate(r.steps):
        out.write(f"{i}\t{rule}\t{before}\n")
    out.write(r.summary() + "\n")
    return _status_code(r.status)


def cmd_redexes(args, out) -> int:
    e = _read_program(args)
    rules = [args.rule] if args.rule else TRANSFORM_RULES
    for r in rules:
        for inst in list_redexes(e, r):
            out.write(inst.describe() + "\n")
    return EXIT_OK


def cmd_transform(args, out) -> int:
    e = _read_program(args)
    if args.rule == "caseId" and not args.assume_typed:
        raise UsageError("caseId is only correct for typed programs; pass --assume-typed")
    if args.all:
        out.write(pretty(apply_exhaustively(e, args.rule, assume_typed=args.assume_typed)) + "\n")
        return EXIT_OK
    if args.pos is None:
        raise UsageError("transform needs --pos or --all")
    pos = parse_path(args.pos)
    insts = [i for i in list_redexes(e, args.rule) if i.position == pos]
    if not insts:
        raise UsageError(f"{args.rule} does not match at {args.pos}")
    if not 0 <= args.index < len(insts):
        raise UsageError(f"--index must be below {len(insts)} at this position")
    t = apply_rule(e, insts[args.index], assume_typed=args.assume_typed)
    out.write(pretty(t) + "\n")
    return EXIT_OK


def cmd_psi(args, out) -> int:
    out.write(pretty(psi_translate(_read_program(args))) + "\n")
    return EXIT_OK


def cmd_check_table(args, out) -> int:
    rows = check.THEOREM_ROWS
    if args.rows:
        wanted = args.rows.split(",")
        known = {r.name for r in rows}
        unknown = [w for w in wanted if w not in known]
        if unknown:
            raise UsageError(f"unknown rows: {', '.join(unknown)}")
        rows = [r for r in rows if r.name in wanted]
    verdicts = check.check_theorem_table(rows, args.ns, args.depth, args.families, _fuel(args))
    out.write(check.TABLE_HEADER + "\n")
    for v in verdicts:
        out.write(v.tsv() + "\n")
    return EXIT_OK


def cmd_check_pair(args, out) -> int:
    def load(path):
        try:
            with open(path) as fh:
                return parse_expr(fh.read())
        except OSError as exc:
            raise UsageError(f"{path}: {exc.strerror}") from None
        except LRPError as exc:
            raise UsageError(f"{path}:{exc}") from None

    v = check.check_pair(load(args.before), load(args.after), args.role, args.ns, args.depth,
                         args.families, _fuel(args), rule=args.name)
    out.write(check.TABLE_HEADER + "\n" + v.tsv() + "\n")
    if v.counterexample:
        inst, ctx, delta = v.counterexample
        print(f"largest increase {delta} in context {ctx[0]}/{ctx[1]} n={ctx[2]}", file=sys.stderr)
    return EXIT_OK


def cmd_check_cp(args, out) -> int:
    rows = check.cp_bound_sample(args.samples, args.seed, _fuel(args))
    rows += check.cps_bounds(_fuel(args))
    out.write("rule\trln_s\tspmax_s\tspmax_t\tsize_v\tgeneral\tsurface\n")
    for r in rows:
        tight = "-" if r.tight_ok is None else str(r.tight_ok).lower()
        out.write(f"{r.rule}\t{r.rln_s}\t{r.spmax_s}\t{r.spmax_t}\t{r.size_v}\t"
                  f"{str(r.general_ok).lower()}\t{tight}\n")
    return EXIT_OK if all(r.ok for r in rows) else EXIT_USER


def cmd_bench_fold(args, out) -> int:
    variants = [args.variant] if args.variant else list(bench.VARIANTS)
    inl = {"plain": (False,), "inlined": (True,), "both": (False, True)}[args.inline]
    rows = bench.fold_table(variants, inl, args.k, _fuel(args), args.jobs)
    out.write("variant\tinlined\tk\trln\tspmax\n")
    for r in rows:
        out.write(r.tsv() + "\n")
    return EXIT_OK


def cmd_bench_cse(args, out) -> int:
    out.write("n\tbefore\tafter\n")
    for n in args.n:
        before, after = bench.cse_demo(n, _fuel(args))
        out.write(f"{n}\t{before}\t{after}\n")
    return EXIT_OK


def cmd_bench_append(args, out) -> int:
    out.write("n\tcontext\tleft\tright\tdelta\n")
    for ctx in ("last", "seq"):
        for n in args.n:
            r = bench.append_assoc(n, ctx, _fuel(args))
            out.write(f"{n}\t{ctx}\t{r.left}\t{r.right}\t{r.delta}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Flag errors are user errors (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lrpgc", description="Call-by-need LRPgc interpreter and space checker.")
    p.add_argument("--fuel", type=int, help="maximal number of non-gc steps (default 10^6 or $LRPGC_FUEL)")
    sub = p.add_subparsers(dest="command", required=True)

    def program_cmd(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file", nargs="?", help="program file, - for standard input")
        sp.add_argument("-e", "--expr", help="program text instead of a file")
        sp.set_defaults(fn=fn)
        return sp

    for name, fn, help_ in (("eval", cmd_eval, "evaluate and print the measures"),
                            ("measure", cmd_measure, "measures and the size of the program"),
                            ("trace", cmd_trace, "print every step")):
        sp = program_cmd(name, fn, help_)
        sp.add_argument("--peano-unit", action="store_true", help="count closed numerals as size 1")
        if name == "eval":
            sp.add_argument("--show-result", action="store_true", help="also print the final term")

    sp = program_cmd("redexes", cmd_redexes, "list transformation instances")
    sp.add_argument("--rule", choices=sorted(set(TRANSFORM_RULES) | set(RULE_GROUPS)))

    sp = program_cmd("transform", cmd_transform, "apply a transformation")
    sp.add_argument("--rule", required=True, choices=sorted(set(TRANSFORM_RULES) | set(RULE_GROUPS)))
    sp.add_argument("--pos", help="path of the instance, e.g. 1.0 (. for the root)")
    sp.add_argument("--index", type=int, default=0, help="which instance at --pos")
    sp.add_argument("--all", action="store_true", help="rewrite until no instance is left")
    sp.add_argument("--assume-typed", action="store_true", help="allow caseId")

    program_cmd("psi", cmd_psi, "translate into machine expressions")

    cp = sub.add_parser("check", help="empirical space-improvement checks")
    csub = cp.add_subparsers(dest="check_command", required=True)

    def family_flags(sp):
        sp.add_argument("--depth", type=int, default=3)
        sp.add_argument("--ns", type=int_list, default=list(check.DEFAULT_NS))
        sp.add_argument("--families", type=lambda s: s.split(","), default=["reduction", "list-driver"])

    sp = csub.add_parser("table", help="the theorem table over the shipped instances")
    family_flags(sp)
    sp.add_argument("--rows", help="comma separated row names")
    sp.set_defaults(fn=cmd_check_table)

    sp = csub.add_parser("pair", help="one transformation step before -> after")
    sp.add_argument("before")
    sp.add_argument("after")
    sp.add_argument("--role", choices=check.ROLES, default="any")
    sp.add_argument("--name", default="pair")
    family_flags(sp)
    sp.set_defaults(fn=cmd_check_pair)

    sp = csub.add_parser("cp-bound", help="the space bound for copying abstractions")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_check_cp)

    bp = sub.add_parser("bench", help="experiments on the shipped programs")
    bsub = bp.add_subparsers(dest="bench_command", required=True)
    sp = bsub.add_parser("fold", help="fold variants with and without inlining")
    sp.add_argument("--variant", choices=bench.VARIANTS)
    sp.add_argument("--inline", choices=("plain", "inlined", "both"), default="both")
    sp.add_argument("--k", type=int_list, default=list(bench.DEFAULT_KS), help="e.g. 100 or 100..1000:100")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(fn=cmd_bench_fold)
    sp = bsub.add_parser("cse", help="common subexpression elimination demo")
    sp.add_argument("--n", type=int_list, default=[10, 20, 30])
    sp.set_defaults(fn=cmd_bench_cse)
    sp = bsub.add_parser("append", help="associativity of append")
    sp.add_argument("--n", type=int_list, default=[2, 5, 10])
    sp.set_defaults(fn=cmd_bench_append)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.fuel is not None and args.fuel <= 0:
            raise UsageError("--fuel must be positive")
        buf = io.StringIO()
        code = args.fn(args, buf)
        out.write(buf.getvalue())
        return code
    except bench.OutOfFuel as exc:
        print(f"lrpgc: {exc}", file=sys.stderr)
        return EXIT_FUEL
    except UsageError as exc:
        print(f"lrpgc: {exc}", file=sys.stderr)
        return EXIT_USER
    except LRPError as exc:
        print(f"lrpgc: {exc}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
