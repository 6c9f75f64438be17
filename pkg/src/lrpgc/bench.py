"""Shipped programs and the experiments run on them.

The fold programs compute ``fold xor False (take k lst)`` where ``lst`` is a
single True followed by infinitely many Falses.  They are stored with a small
numeral for ``k`` that is replaced before evaluation.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

from .reduce import FUEL_EXHAUSTED, WHNF, evaluate
from .syntax import (
    App,
    Binding,
    Con,
    Expr,
    Letrec,
    LRPError,
    PEANO_UNIT,
    PLAIN,
    Seq,
    SizeOptions,
    Var,
    parse_expr,
    positions,
    numeral,
    subterm,
)
from .transform import apply_rule, inline, list_redexes

VARIANTS = ("foldl", "foldl-strict", "foldr")
_FILES = {"foldl": "foldl", "foldl-strict": "foldl_strict", "foldr": "foldr"}
_FOLD_BINDER = {"foldl": "foldl", "foldl-strict": "foldl'", "foldr": "foldr"}
DEFAULT_KS = tuple(range(100, 1001, 100))


class BenchError(LRPError):
    pass


class OutOfFuel(BenchError):
    """An experiment program did not reach a WHNF within the fuel."""


def _require_whnf(r, what: str):
    if r.status == FUEL_EXHAUSTED:
        raise OutOfFuel(f"{what}: fuel exhausted")
    if r.status != WHNF:
        raise BenchError(f"{what}: {r.status}")


@dataclass(frozen=True)
class BenchRow:
    variant: str
    inlined: bool
    k: int
    rln: int
    spmax: int

    def tsv(self) -> str:
        return f"{self.variant}\t{str(self.inlined).lower()}\t{self.k}\t{self.rln}\t{self.spmax}"


def data_text(name: str) -> str:
    return resources.files("lrpgc").joinpath("data", name).read_text()


@functools.lru_cache(maxsize=None)
def load(name: str) -> Expr:
    """Parse a shipped program by file stem."""
    return parse_expr(data_text(name + ".lrp"))


@functools.lru_cache(maxsize=None)
def library() -> tuple:
    """Bindings of the shared helper library."""
    return load("library").bindings


def library_bindings(*names: str) -> list:
    """The named helpers plus everything they refer to."""
    env = {b.var: b for b in library()}
    want, out, seen = list(names), [], set()
    while want:
        x = want.pop()
        if x in seen or x not in env:
            continue
        seen.add(x)
        out.append(env[x])
        want.extend(env[x].rhs.free_vars)
    order = [b.var for b in library()]
    return sorted(out, key=lambda b: order.index(b.var))


def rebind(program: Letrec, **values: Expr) -> Letrec:
    """Replace the right-hand sides of the named top-level bindings."""
    missing = set(values) - set(program.binders)
    if missing:
        raise BenchError(f"program has no binding for {', '.join(sorted(missing))}")
    bs = [Binding(b.var, values.get(b.var, b.rhs)) for b in program.bindings]
    return Letrec(bs, program.body)


def bool_list(n: int) -> Expr:
    e: Expr = Con("Nil")
    for _ in range(n):
        e = Con("Cons", [Con("True"), e])
    return e


# ---------------------------------------------------------------------------
# fold experiments


def _call_site(program: Letrec, fold: str) -> tuple:
    """Path of the applied occurrence of the parameter f in the fold definition."""
    i = program.binders.index(fold)
    rhs = program.bindings[i].rhs
    for path, node in positions(rhs):
        if isinstance(node, Var) and node.name == "f" and path and path[-1] == 0:
            if isinstance(subterm(rhs, path[:-1]), App):
                return (i,) + path
    raise BenchError(f"no call of f in {fold}")


def fold_program(variant: str, inlined: bool = False, k: int | None = None) -> Expr:
    if variant not in _FILES:
        raise BenchError(f"unknown variant {variant}; expected one of {', '.join(VARIANTS)}")
    prog = load(_FILES[variant])
    if inlined:
        site = _call_site(prog, _FOLD_BINDER[variant])
        prog = inline(prog, "xor", site, assume_bound=True)
    if k is not None:
        if k < 1:
            raise BenchError("k must be at least 1")
        prog = rebind(prog, k=numeral(k))
    return prog


def fold_experiment(variant: str, inlined: bool, k: int, fuel: int = 10**6) -> BenchRow:
    r = evaluate(fold_program(variant, inlined, k), fuel=fuel, opts=PEANO_UNIT)
    _require_whnf(r, f"{variant} k={k}")
    return BenchRow(variant, inlined, k, r.measures.rln, int(r.measures.spmax))


def _row(args):
    return fold_experiment(*args)


def fold_table(variants=VARIANTS, inlined=(False, True), ks=DEFAULT_KS,
               fuel: int = 10**6, jobs: int = 1) -> list:
    """Rows in the order variant, inlining, k."""
    tasks = [(v, i, k, fuel) for v in variants for i in inlined for k in sorted(ks)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_row, tasks))
    return [_row(t) for t in tasks]


# ---------------------------------------------------------------------------
# common subexpression elimination


def cse_programs(n: int) -> tuple:
    """The program with two copies of the list generator, and after (cse)."""
    if n < 1:
        raise BenchError("n must be at least 1")
    gen = App(Var("countdown"), numeral(n))
    before = rebind(load("cse_before"), x=gen, y=gen)
    insts = list_redexes(before, "cse")
    if not insts:
        raise BenchError("no cse instance in the shipped program")
    return before, apply_rule(before, insts[0])


def cse_demo(n: int, fuel: int = 10**6, opts: SizeOptions = PEANO_UNIT) -> tuple:
    """(spmax before, spmax after) the elimination."""
    out = []
    for prog in cse_programs(n):
        r = evaluate(prog, fuel=fuel, opts=opts)
        _require_whnf(r, f"cse demo n={n}")
        out.append(int(r.measures.spmax))
    return tuple(out)


# ---------------------------------------------------------------------------
# associativity of append


@dataclass(frozen=True)
class AppendRow:
    n: int
    context: str
    left: int  # spmax with ((xs ++ ys) ++ zs)
    right: int  # spmax with (xs ++ (ys ++ zs))

    @property
    def delta(self) -> int:
        return self.left - self.right


def _nested(left: bool) -> Expr:
    a = lambda s, t: App(App(Var("append"), s), t)  # noqa: E731
    xs, ys, zs = Var("xs"), Var("ys"), Var("zs")
    return a(a(xs, ys), zs) if left else a(xs, a(ys, zs))


def append_programs(n: int, context: str = "last", big: int | None = None) -> tuple:
    """Both bracketings in the last-context or the seq-dominator context."""
    if n < 1:
        raise BenchError("n must be at least 1")
    base = load("append")
    lists = {"xs": bool_list(n), "ys": bool_list(n), "zs": bool_list(n)}
    progs = []
    for left in (True, False):
        body: Expr = App(Var("last"), _nested(left))
        bindings = list(rebind(base, **lists).bindings)
        if context == "seq":
            m = big if big is not None else 20 * n + 50
            extra = [b for b in library_bindings("foldl", "xor", "take", "lst")
                     if b.var not in {x.var for x in bindings}]
            bindings += extra + [Binding("m", numeral(m))]
            dominator = App(App(App(Var("foldl"), Var("xor")), Con("False")),
                            App(App(Var("take"), Var("m")), Var("lst")))
            body = Seq(body, dominator)
        elif context != "last":
            raise BenchError(f"unknown context {context}")
        progs.append(Letrec(bindings, body))
    return tuple(progs)


def append_assoc(n: int, context: str = "last", fuel: int = 10**6,
                 opts: SizeOptions = PLAIN) -> AppendRow:
    vals = []
    for prog in append_programs(n, context):
        r = evaluate(prog, fuel=fuel, opts=opts)
        _require_whnf(r, f"append n={n}")
        vals.append(int(r.measures.spmax))
    return AppendRow(n, context, vals[0], vals[1])
