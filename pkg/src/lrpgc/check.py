"""Empirical space-improvement checking.

A transformation s -> t is run inside many closing contexts and the
difference Delta = spmax(C[t]) - spmax(C[s]) is recorded for each.  The
contexts come from three families:

* ``reduction``: reduction contexts built from a few frames, nested up to a
  depth d.  Each frame expects a value of some role (bool, list, nat, fun)
  for its hole and produces one, which keeps the filled programs well typed.
* ``list-driver``: contexts that share the hole value across a list of
  length n and then walk that list, so a transformation that duplicates
  work or keeps data alive shows a Delta that grows with n.
* ``seq-dominator``: ``seq (consume [.]) s`` where s alone needs more space
  than anything the hole does, so small differences vanish.

All of this is finite evidence.  A verdict never proves a property.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import bench
from .reduce import BLACKHOLE, FUEL_EXHAUSTED, STUCK, WHNF, evaluate
from .syntax import (
    Expr,
    Letrec,
    LRPError,
    PEANO_UNIT,
    SizeOptions,
    Var,
    numeral,
    occurrences,
    parse_expr,
    parse_path,
    pretty,
    replace_at,
    size,
    subterm,
    substitute_vars,
)
from .transform import (
    RULE_GROUPS,
    ContextClass,
    RuleInstance,
    apply_rule,
    list_redexes,
    seq_insert,
)

ROLES = ("bool", "list", "nat", "fun", "any")
FAMILIES = ("reduction", "list-driver", "seq-dominator")
HOLE = "[·]"
SIZE_PARAM = "n"
DEFAULT_NS = (5, 10, 20)


class CheckError(LRPError):
    pass


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class ContextTemplate:
    family: str
    name: str
    body: Expr
    hole_path: tuple
    n: int | None = None

    def fill(self, e: Expr) -> Expr:
        return replace_at(self.body, self.hole_path, e)

    def __str__(self):
        return pretty(self.body)


def _template(family: str, name: str, text: str, n=None) -> ContextTemplate:
    body = substitute_vars(parse_expr(text), {"hole": HOLE})
    occ = occurrences(body, HOLE)
    if len(occ) != 1:
        raise CheckError(f"context {name} must have exactly one hole")
    return ContextTemplate(family, name, body, occ[0], n)


# (name, accepted role, produced role, text); "same" passes the role through
_FRAMES = (
    ("seq", "any", "bool", "seq hole True"),
    ("bind", "any", "same", "letrec cx{i} = hole, cy{i} = cx{i} in cy{i}"),
    ("app", "fun", "any", "hole True"),
    ("case-bool", "bool", "bool", "case hole of {True -> False; False -> True}"),
    ("case-list", "list", "any", "case hole of {Nil -> True; Cons ca{i} cb{i} -> ca{i}}"),
    ("case-nat", "nat", "bool", "case hole of {Zero -> True; Succ cp{i} -> False}"),
)


def _accepts(frame_role: str, role: str) -> bool:
    return frame_role == "any" or frame_role == role


def frame_chains(role: str, depth: int) -> list:
    """Frame sequences, innermost first, whose roles line up."""
    out = [()]
    frontier = [((), role)]
    for _ in range(depth):
        nxt = []
        for chain, r in frontier:
            for name, acc, prod, _ in _FRAMES:
                if _accepts(acc, r):
                    nxt.append((chain + (name,), r if prod == "same" else prod))
        out.extend(c for c, _ in nxt)
        frontier = nxt
    return out


def _reduction_contexts(role: str, depth: int) -> list:
    texts = {name: text for name, _, _, text in _FRAMES}
    out = []
    for chain in frame_chains(role, depth):
        text = "hole"
        for i, name in enumerate(chain):
            text = texts[name].replace("{i}", str(i)).replace("hole", f"({text})")
        out.append(_template("reduction", "/".join(reversed(chain)) or "hole", text))
    return out


def _list_text(items: Sequence[str]) -> str:
    text = "Nil"
    for item in reversed(items):
        text = f"Cons ({item}) ({text})"
    return text


def _driver_contexts(role: str, n: int) -> list:
    walk = "case all {z} of {{True -> last {z}; False -> last {z}}}"
    if role == "list":
        return [
            _template("list-driver", "last", "last hole", n),
            _template("list-driver", "keep-walk",
                      "letrec cy = hole in " + walk.format(z="cy"), n),
        ]
    item = "cy Zero" if role == "fun" else "cy"
    text = (f"letrec cy = hole, cz = {_list_text([item] * n)} in "
            "case all cz of {True -> last cz; False -> False}")
    return [_template("list-driver", "shared-" + role, text, n)]


def _consume(role: str) -> str:
    return {"list": "last hole", "fun": "hole Zero"}.get(role, "hole")


def _dominator_contexts(role: str, n: int) -> list:
    text = (f"letrec cm = {pretty(numeral(20 * n + 50))} in "
            f"seq ({_consume(role)}) (foldl xor False (take cm lst))")
    return [_template("seq-dominator", "dominated", text, n)]


def generate_contexts(family: str, n: int = 3, d: int = 3, role: str = "any") -> list:
    if n < 0 or d < 0:
        raise CheckError("n and d must be non-negative")
    if role not in ROLES:
        raise CheckError(f"unknown role {role}")
    if family == "reduction":
        return _reduction_contexts(role, d)
    if family == "list-driver":
        return _driver_contexts(role, n)
    if family == "seq-dominator":
        return _dominator_contexts(role, n)
    raise CheckError(f"unknown family {family}; expected one of {', '.join(FAMILIES)}")


# ---------------------------------------------------------------------------
# closing programs


def instantiate(e: Expr, n: int) -> Expr:
    """Replace the free size parameter by the numeral n."""
    for p in occurrences(e, SIZE_PARAM):
        e = replace_at(e, p, numeral(n))
    return e


def close(e: Expr) -> Expr:
    """Bind the free helper names of e to their library definitions."""
    fv = e.free_vars
    if not fv:
        return e
    lib = bench.library_bindings(*fv)
    missing = fv - {b.var for b in lib}
    if missing:
        raise CheckError(f"unbound names: {', '.join(sorted(missing))}")
    return Letrec(lib, e)


@dataclass(frozen=True)
class Outcome:
    status: str
    spmax: float


def _run(e: Expr, fuel: int, opts: SizeOptions) -> Outcome:
    r = evaluate(close(e), fuel=fuel, opts=opts)
    return Outcome(r.status, r.measures.spmax)


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Growth:
    kind: str  # constant, linear, superlinear or irregular
    value: Fraction | None = None

    def __str__(self):
        if self.kind in ("constant", "linear"):
            v = self.value
            v = v.numerator if v.denominator == 1 else float(v)
            return f"{self.kind.capitalize()}({v})"
        return self.kind.capitalize()

    @property
    def is_leak(self) -> bool:
        return self.kind == "superlinear" or (self.kind == "linear" and self.value > 0)


def fit_growth(ns: Sequence[int], values: Sequence[float]) -> Growth | None:
    """Growth of a value sequence over increasing size parameters."""
    pts = [(n, v) for n, v in zip(ns, values) if v is not None]
    if len(pts) < 2:
        return None
    if any(v in (float("inf"), float("-inf")) for _, v in pts):
        return Growth("irregular")
    vs = [Fraction(v) for _, v in pts]
    if all(v == vs[0] for v in vs):
        return Growth("constant", vs[0])
    slopes = [(vs[i + 1] - vs[i]) / (pts[i + 1][0] - pts[i][0]) for i in range(len(pts) - 1)]
    if len(pts) >= 3 and all(s == slopes[0] for s in slopes):
        return Growth("linear", slopes[0])
    if len(pts) >= 3 and all(s > 0 for s in slopes):
        return Growth("superlinear")
    return Growth("irregular")


@dataclass
class Verdict:
    rule: str
    classification: str
    observed: str
    expected: str | None
    max_delta: float | None
    min_delta: float | None
    growth: Growth | None
    instances_tested: int
    contexts_tested: int
    counterexample: tuple | None = None
    warnings: int = 0
    notes: list = field(default_factory=list)

    def tsv(self) -> str:
        def num(v):
            if v is None:
                return "-"
            if v in (float("inf"), float("-inf")):
                return "inf" if v > 0 else "-inf"
            return str(int(v))

        return "\t".join([
            self.rule, self.classification, num(self.max_delta), num(self.min_delta),
            str(self.growth) if self.growth else "-", str(self.contexts_tested),
            str(self.warnings),
        ])


def observed_class(max_delta, min_delta, growth: Growth | None) -> str:
    if max_delta is None:
        return "NoData"
    if growth is not None and growth.is_leak:
        return "LeakEvidence"
    if max_delta == 0 and min_delta == 0:
        return "EquivalenceConsistent"
    if max_delta <= 0:
        return "ImprovementConsistent"
    return f"SafeUpTo({num_str(max_delta)})"


def num_str(v) -> str:
    return "inf" if v == float("inf") else str(int(v))


@dataclass
class PairResult:
    """Per-context Deltas of one pair; keys are (family, context name, n)."""

    deltas: dict = field(default_factory=dict)
    excluded: int = 0
    divergent: list = field(default_factory=list)

    def merge(self, other: "PairResult"):
        self.deltas.update(other.deltas)
        self.excluded += other.excluded
        self.divergent.extend(other.divergent)


def pair_deltas(s: Expr, t: Expr, contexts: Iterable[ContextTemplate],
                fuel: int = 10**6, opts: SizeOptions = PEANO_UNIT) -> PairResult:
    """Delta for every context; contexts where either side runs out of fuel are excluded."""
    out = PairResult()
    for c in contexts:
        a = _run(c.fill(s), fuel, opts)
        b = _run(c.fill(t), fuel, opts)
        key = (c.family, c.name, c.n)
        if FUEL_EXHAUSTED in (a.status, b.status):
            out.excluded += 1
            continue
        if (a.status == WHNF) != (b.status == WHNF):
            out.divergent.append((key, a.status, b.status))
            out.deltas[key] = float("inf") if b.status != WHNF else float("-inf")
            continue
        if a.status != WHNF:
            out.deltas[key] = 0  # both diverge the same way
            continue
        out.deltas[key] = b.spmax - a.spmax
    return out


def _family_contexts(role: str, ns: Sequence[int], depth: int, families) -> list:
    """(n, context) pairs; the reduction family is used at the smallest n only."""
    out = []
    for fam in families:
        if fam == "reduction":
            out += [(min(ns), c) for c in generate_contexts(fam, min(ns), depth, role)]
        else:
            for n in ns:
                out += [(n, c) for c in generate_contexts(fam, n, depth, role)]
    return out


def _aggregate(results: list, ns: Sequence[int]):
    """max/min Delta, growth of the per-n maximum over sized families, worst key."""
    all_d = [(d, key, label) for label, r in results for key, d in r.deltas.items()]
    if not all_d:
        return None, None, None, None
    hi = max(all_d, key=lambda x: x[0])
    lo = min(d for d, _, _ in all_d)
    per_n = []
    for n in ns:
        vs = [d for d, key, _ in all_d if key[0] != "reduction" and key[2] == n]
        per_n.append(max(vs) if vs else None)
    growth = fit_growth(list(ns), per_n) if len(ns) > 1 else None
    return hi[0], lo, growth, (hi[2], hi[1], hi[0])


def check_pair(s: Expr, t: Expr, role: str = "any", ns: Sequence[int] = DEFAULT_NS,
               depth: int = 3, families=("reduction", "list-driver"),
               fuel: int = 10**6, opts: SizeOptions = PEANO_UNIT, rule: str = "pair",
               expected: str | None = None) -> Verdict:
    """Verdict for the single transformation step s -> t.

    s and t may use the library helpers and the size parameter n freely.
    """
    results = []
    warnings = 0
    ctxs = _family_contexts(role, ns, depth, families)
    for n, c in ctxs:
        r = pair_deltas(instantiate(s, n), instantiate(t, n), [c], fuel, opts)
        results.append(("pair", r))
        warnings += r.excluded
    return _verdict(rule, results, ns, len(ctxs), 1, warnings, expected, [])


def _verdict(rule, results, ns, n_ctx, n_inst, warnings, expected, notes,
             bounds: dict | None = None) -> Verdict:
    hi, lo, growth, worst = _aggregate(results, ns)
    obs = observed_class(hi, lo, growth)
    divergent = [d for _, r in results for d in r.divergent]
    ok = True
    if divergent:
        ok = False
        notes.append(f"convergence changed in {len(divergent)} contexts")
    if expected is None:
        cls = obs
    else:
        if expected == "improvement":
            ok = ok and hi is not None and hi <= 0
            label = "ImprovementConsistent"
        elif expected == "equivalence":
            ok = ok and hi == 0 and lo == 0
            label = "EquivalenceConsistent"
        elif expected == "leak":
            ok = ok and obs == "LeakEvidence"
            label = "LeakEvidence"
        elif expected.startswith("safe:"):
            bound = expected.split(":", 1)[1]
            if bounds is not None:
                # per-instance bounds
                for label_, r in results:
                    b = bounds[label_]
                    if any(d > b for d in r.deltas.values()):
                        ok = False
            else:
                ok = ok and hi is not None and hi <= int(bound)
            ok = ok and obs != "LeakEvidence"
            label = f"SafeUpTo({bound})"
        else:
            raise CheckError(f"unknown expectation {expected}")
        cls = label if ok else "Violation"
    return Verdict(rule, cls, obs, expected, hi, lo, growth, n_inst, n_ctx,
                   worst if worst and worst[2] > 0 else None, warnings, notes)


# ---------------------------------------------------------------------------
# the instance corpus and the theorem table


@dataclass(frozen=True)
class Seed:
    name: str
    role: str
    rows: tuple
    expr: Expr
    insert: tuple | None = None  # (path, variable) for seq insertion


_HEADER = re.compile(r"^-- @seed (\S+) (\S+) rows=(\S+)(?: insert=(\S+):(\S+))?\s*$")


def parse_seeds(text: str) -> list:
    seeds, cur, lines = [], None, []

    def flush():
        if cur is not None:
            name, role, rows, ins = cur
            seeds.append(Seed(name, role, rows, parse_expr("\n".join(lines)), ins))

    for line in text.splitlines():
        m = _HEADER.match(line)
        if m:
            flush()
            name, role, rows, p, v = m.groups()
            if role not in ROLES:
                raise CheckError(f"seed {name}: unknown role {role}")
            ins = (parse_path(p), v) if p else None
            cur, lines = (name, role, tuple(rows.split(",")), ins), []
        elif cur is not None:
            lines.append(line)
    flush()
    return seeds


def load_seeds() -> list:
    return parse_seeds(bench.data_text("instances.lrp"))


@dataclass(frozen=True)
class Row:
    name: str
    rules: tuple
    expect: str | None
    top_only: bool = False
    assume_typed: bool = False
    size_bound: bool = False  # safe up to the size of the copied abstraction


THEOREM_ROWS = (
    Row("lbeta", ("lbeta",), "improvement"),
    Row("case", RULE_GROUPS["case"], "improvement"),
    Row("seq", RULE_GROUPS["seq"], "improvement"),
    Row("lll", RULE_GROUPS["lll"], "improvement"),
    Row("gc", RULE_GROUPS["gc"], "improvement"),
    Row("case*", ("caseStar",), "improvement"),
    Row("caseId", ("caseId",), "improvement", assume_typed=True),
    Row("cpx", RULE_GROUPS["cpx"], "equivalence"),
    Row("abs", ("abs",), "equivalence"),
    Row("abse", ("abse",), "equivalence"),
    Row("xch", ("xch",), "equivalence"),
    Row("ucp", RULE_GROUPS["ucp"], "equivalence"),
    Row("case-cx", ("case-cx",), "equivalence"),
    Row("cpxT", RULE_GROUPS["cpx"], "equivalence", top_only=True),
    Row("gcEq", ("gcEq",), "equivalence"),
    Row("cpcx", RULE_GROUPS["cpcx"], None),
    Row("cpS", ("cpS",), None),
    Row("T-cpcxT", ("cpcxT",), "safe:1"),
    Row("S-cpS", ("cpS",), "safe:size(v)", size_bound=True),
    Row("cp", RULE_GROUPS["cp"], "leak"),
    Row("cse", ("cse",), "leak"),
    Row("soec", (), "leak"),
)


@dataclass(frozen=True)
class Instance:
    row: str
    seed: str
    role: str
    before: Expr
    after: Expr
    description: str
    copied_size: int | None = None


def copied_abstraction(e: Expr, inst: RuleInstance) -> Expr:
    """The abstraction v that a cp-like instance copies."""
    let = subterm(e, inst.position)
    for b in let.bindings:
        if b.var == inst.details["binder"]:
            return b.rhs
    raise CheckError("binder of the instance not found")


def row_instances(row: Row, seeds: Sequence[Seed] | None = None, per_seed: int = 2) -> list:
    out = []
    for seed in seeds if seeds is not None else load_seeds():
        if row.name not in seed.rows:
            continue
        if not row.rules:
            if seed.insert is None:
                raise CheckError(f"seed {seed.name} has no insertion point")
            path, var = seed.insert
            after = seq_insert(seed.expr, path, var)
            out.append(Instance(row.name, seed.name, seed.role, seed.expr, after,
                                f"seqInsert {'.'.join(map(str, path))} {var}"))
            continue
        found = []
        for r in row.rules:
            found += list_redexes(seed.expr, r)
        if row.top_only:
            found = [i for i in found if i.details.get("target_class") == ContextClass.TOP]
        for inst in found[:per_seed]:
            after = apply_rule(seed.expr, inst, assume_typed=row.assume_typed)
            sz = size(copied_abstraction(seed.expr, inst)) if row.size_bound else None
            out.append(Instance(row.name, seed.name, seed.role, seed.expr, after,
                                inst.describe(), sz))
    return out


def side_conditions(inst: Instance, expect: str | None) -> int:
    """Number of violated side conditions of the context lemma (0 or more)."""
    s, t = inst.before, inst.after
    bad = 0
    if expect == "equivalence":
        bad += size(s) != size(t)
        bad += s.free_vars != t.free_vars
    elif expect == "improvement":
        bad += size(t) > size(s)
        bad += not t.free_vars <= s.free_vars
    return bad


def check_row(row: Row, seeds=None, ns: Sequence[int] = DEFAULT_NS, depth: int = 3,
              families=("reduction", "list-driver"), fuel: int = 10**6,
              opts: SizeOptions = PEANO_UNIT) -> Verdict:
    insts = row_instances(row, seeds)
    if not insts:
        raise CheckError(f"no corpus instance for row {row.name}")
    results, warnings, n_ctx, bounds = [], 0, 0, {}
    for k, inst in enumerate(insts):
        warnings += side_conditions(inst, row.expect)
        label = f"{inst.seed}: {inst.description}"
        r = PairResult()
        for n, c in _family_contexts(inst.role, ns, depth, families):
            part = pair_deltas(instantiate(inst.before, n), instantiate(inst.after, n),
                               [c], fuel, opts)
            r.merge(part)
            n_ctx += 1
        warnings += r.excluded
        results.append((label, r))
        if inst.copied_size is not None:
            bounds[label] = inst.copied_size
    notes = []
    return _verdict(row.name, results, ns, n_ctx, len(insts), warnings, row.expect, notes,
                    bounds if row.size_bound else None)


def check_theorem_table(rows: Sequence[Row] = THEOREM_ROWS, ns: Sequence[int] = DEFAULT_NS,
                        depth: int = 3, families=("reduction", "list-driver"),
                        fuel: int = 10**6, opts: SizeOptions = PEANO_UNIT) -> list:
    seeds = load_seeds()
    return [check_row(r, seeds, ns, depth, families, fuel, opts) for r in rows]


TABLE_HEADER = "rule\tclassification\tmaxDelta\tminDelta\tgrowth\tcontextsTested\twarnings"


# ---------------------------------------------------------------------------
# the copy bound


@dataclass(frozen=True)
class CpBound:
    rule: str
    rln_s: int
    spmax_s: int
    spmax_t: int
    size_v: int
    general_ok: bool
    tight_ok: bool | None  # only for surface copies

    @property
    def ok(self) -> bool:
        return self.general_ok and self.tight_ok is not False


def check_cp_bound(s: Expr, inst: RuleInstance, fuel: int = 10**6,
                   opts: SizeOptions = PEANO_UNIT, _base=None) -> CpBound:
    """Check how much one copy of an abstraction can raise spmax."""
    if inst.rule not in ("cp-in", "cp-e", "cpS"):
        raise CheckError(f"{inst.rule} does not copy an abstraction")
    t = apply_rule(s, inst)
    rs = _base or evaluate(s, fuel=fuel, opts=opts)
    if rs.status != WHNF:
        raise CheckError(f"source program does not converge ({rs.status})")
    rt = evaluate(t, fuel=fuel, opts=opts)
    v = copied_abstraction(s, inst)
    sv = v.psize if opts.peano_as_unit else v.size
    a, b = rs.measures.spmax, rt.measures.spmax
    general = b <= (rs.measures.rln + 2) * sv + a
    tight = b <= sv + a if inst.rule == "cpS" else None
    return CpBound(inst.rule, rs.measures.rln, int(a), b if b == float("inf") else int(b),
                   sv, general, tight)


def corpus_programs(n: int = 3) -> list:
    """Closed, convergent programs used for random copy instances."""
    progs = [close(instantiate(s.expr, n)) for s in load_seeds()]
    for v in bench.VARIANTS:
        progs.append(bench.fold_program(v, False, 5))
        progs.append(bench.fold_program(v, True, 5))
    progs += list(bench.cse_programs(n))
    progs += list(bench.append_programs(n))
    return progs


def cp_bound_sample(count: int = 100, seed: int = 0, fuel: int = 10**6,
                    opts: SizeOptions = PEANO_UNIT) -> list:
    """check_cp_bound on randomly drawn copy instances of the corpus."""
    pool = []
    for p in corpus_programs():
        for r in ("cp-in", "cp-e"):
            pool += [(p, i) for i in list_redexes(p, r)]
    if not pool:
        raise CheckError("the corpus has no copy instances")
    rng = random.Random(seed)
    picks = rng.sample(pool, count) if len(pool) >= count else [rng.choice(pool) for _ in range(count)]
    base = {}
    out = []
    for p, inst in picks:
        if id(p) not in base:
            base[id(p)] = evaluate(p, fuel=fuel, opts=opts)
        out.append(check_cp_bound(p, inst, fuel, opts, base[id(p)]))
    return out


def cps_bounds(fuel: int = 10**6, opts: SizeOptions = PEANO_UNIT) -> list:
    """check_cp_bound on every surface copy instance of the corpus."""
    out = []
    for p in corpus_programs():
        insts = list_redexes(p, "cpS")
        if not insts:
            continue
        base = evaluate(p, fuel=fuel, opts=opts)
        out += [check_cp_bound(p, i, fuel, opts, base) for i in insts]
    return out


__all__ = [
    "BLACKHOLE", "STUCK", "CheckError", "ContextTemplate", "CpBound", "FAMILIES", "Growth",
    "Instance", "ROLES", "Row", "Seed", "THEOREM_ROWS", "TABLE_HEADER", "Verdict",
    "check_cp_bound", "check_pair", "check_row", "check_theorem_table", "close",
    "corpus_programs", "cp_bound_sample", "cps_bounds", "fit_growth", "frame_chains",
    "generate_contexts", "instantiate", "load_seeds", "pair_deltas", "parse_seeds",
    "row_instances",
]
