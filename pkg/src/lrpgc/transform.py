"""Program transformations used as rewrites at arbitrary positions.

Every rule is anchored at one node (the letrec for environment rules, the
redex node otherwise).  ``list_redexes`` finds all instances in pre-order and
``apply_rule`` rewrites one of them.  Details that pick a particular binding or
occurrence are stored in ``RuleInstance.details`` with paths relative to the
anchor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .reduce import demand_positions, gc_max
from .syntax import (
    Alt,
    App,
    Binding,
    Case,
    Con,
    Expr,
    Lam,
    Letrec,
    LRPError,
    NameSupply,
    Seq,
    Var,
    alpha_equal,
    apps,
    binders_at,
    children,
    occurrences,
    positions,
    rename,
    replace_at,
    substitute_vars,
    subterm,
)


class TransformError(LRPError):
    pass


class ContextClass(IntEnum):
    """Position classes; a larger value is a more restrictive class."""

    GENERAL = 0
    SURFACE = 1
    TOP = 2
    REDUCTION = 3

    def __str__(self):
        return self.name.capitalize()


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    position: tuple
    context_class: ContextClass
    details: dict = field(default_factory=dict, compare=False)

    def describe(self) -> str:
        from .syntax import format_path

        extra = ", ".join(
            f"{k}={format_path(v) if k == 'occurrence' else v}"
            for k, v in sorted(self.details.items())
            if k not in ("target_class",)
        )
        pos = format_path(self.position)
        return f"{self.rule}\t{pos}\t{self.context_class}\t{extra}"


RULE_GROUPS = {
    "cp": ("cp-in", "cp-e"),
    "cpx": ("cpx-in", "cpx-e"),
    "cpcx": ("cpcx-in", "cpcx-e"),
    "case": ("case-c", "case-in", "case-e"),
    "seq": ("seq-c", "seq-in", "seq-e"),
    "lll": ("llet-in", "llet-e", "lapp", "lcase", "lseq"),
    "llet": ("llet-in", "llet-e"),
    "gc": ("gc1", "gc2"),
    "ucp": ("ucp1", "ucp2", "ucp3"),
}

TRANSFORM_RULES = (
    "lbeta", "cp-in", "cp-e", "llet-in", "llet-e", "lapp", "lcase", "lseq",
    "seq-c", "seq-in", "seq-e", "case-c", "case-in", "case-e", "gc1", "gc2",
    "cpx-in", "cpx-e", "cpcx-in", "cpcx-e", "abs", "abse", "xch",
    "ucp1", "ucp2", "ucp3", "case-cx", "caseStar", "gcEq", "caseId", "cse",
    "cpS", "cpcxT",
)


def expand_rule(rule: str) -> tuple:
    if rule in RULE_GROUPS:
        return RULE_GROUPS[rule]
    if rule in TRANSFORM_RULES:
        return (rule,)
    raise TransformError(f"unknown rule {rule}")


# ---------------------------------------------------------------------------
# Context classification


def _relative_class(e: Expr, path) -> ContextClass:
    cls = ContextClass.TOP
    t = e
    for i in path:
        if isinstance(t, Lam):
            return ContextClass.GENERAL
        if isinstance(t, Case) and i > 0:
            cls = ContextClass.SURFACE
        t = children(t)[i]
    return cls


def _binders_below(e: Expr, path) -> set:
    """Names bound strictly between e (exclusive) and the node at path."""
    out = set()
    t = e
    for k, i in enumerate(path):
        if k > 0:
            out.update(binders_at(t, i))
        t = children(t)[i]
    return out


def classify_context(e: Expr, p, _demand=None) -> ContextClass:
    p = tuple(p)
    subterm(e, p)  # validates the path
    cls = _relative_class(e, p)
    if cls == ContextClass.TOP:
        demand = _demand if _demand is not None else _safe_demand(e)
        if p in demand:
            return ContextClass.REDUCTION
    return cls


def _safe_demand(e: Expr) -> set:
    try:
        return set(demand_positions(e))
    except LRPError:
        return set()


# ---------------------------------------------------------------------------
# Matching helpers


def _slot_occurrences(let: Letrec, name: str):
    """(relative path, slot binder or None for the body) of free occurrences."""
    n = len(let.bindings)
    for i, b in enumerate(let.bindings):
        for p in occurrences(b.rhs, name):
            yield (i,) + p, b.var
    for p in occurrences(let.body, name):
        yield (n,) + p, None


def _chain(env: dict, x: str):
    """Follow x = x', x' = x'' ... inside one environment.

    Returns (chain from x to the end, rhs of the end) or None on a cycle.
    """
    chain = [x]
    seen = {x}
    rhs = env[x]
    while isinstance(rhs, Var) and rhs.name in env:
        y = rhs.name
        if y in seen:
            return None
        seen.add(y)
        chain.append(y)
        rhs = env[y]
    return chain, rhs


def _distinct_vars(args) -> bool:
    names = [a.name for a in args if isinstance(a, Var)]
    return len(names) == len(args) and len(set(names)) == len(names)


def _match_letrec(let: Letrec, rule: str):
    env = {b.var: b.rhs for b in let.bindings}
    n = len(let.bindings)
    binders = set(env)

    if rule == "llet-in":
        if isinstance(let.body, Letrec):
            yield {}
        return
    if rule == "llet-e":
        for b in let.bindings:
            if isinstance(b.rhs, Letrec):
                yield {"binder": b.var}
        return
    if rule in ("gc1", "gc2"):
        new, changed = gc_max(let)
        if changed and (new is let.body) == (rule == "gc2"):
            yield {}
        return
    if rule == "abs":
        for b in let.bindings:
            if isinstance(b.rhs, Con) and b.rhs.args:
                yield {"binder": b.var}
        return
    if rule == "xch":
        for b in let.bindings:
            if isinstance(b.rhs, Var) and b.rhs.name in env and b.rhs.name != b.var:
                yield {"binder": b.var, "source": b.rhs.name}
        return
    if rule == "gcEq":
        for b in let.bindings:
            x = b.var
            if not isinstance(b.rhs, Var):
                continue
            y = b.rhs.name
            if y == x or y not in env:
                continue
            if any(x in c.rhs.free_vars for c in let.bindings) or x in let.body.free_vars:
                continue
            rest = Letrec([c for c in let.bindings if c.var != x], let.body)
            kept, _ = gc_max(rest)
            if isinstance(kept, Letrec) and kept.body is rest.body and y in kept.binders:
                yield {"binder": x, "target": y}
        return
    if rule == "cse":
        bs = let.bindings
        for i in range(n):
            for j in range(i + 1, n):
                x, y = bs[i].var, bs[j].var
                s = bs[i].rhs
                if x in s.free_vars or y in s.free_vars:
                    continue
                if x in bs[j].rhs.free_vars or y in bs[j].rhs.free_vars:
                    continue
                if alpha_equal(s, bs[j].rhs):
                    yield {"binder": x, "duplicate": y}
        return
    if rule in ("ucp1", "ucp2", "ucp3"):
        for b in let.bindings:
            x = b.var
            if x in b.rhs.free_vars:
                continue
            occ = list(_slot_occurrences(let, x))
            if len(occ) != 1:
                continue
            path, slot = occ[0]
            if _relative_class(children(let)[path[0]], path[1:]) == ContextClass.GENERAL:
                continue
            if b.rhs.free_vars & _binders_below(let, path):
                continue
            if slot is None:
                kind = "ucp3" if n == 1 else "ucp1"
            else:
                kind = "ucp2"
            if kind == rule:
                yield {"binder": x, "occurrence": path}
        return

    # occurrence-based rules
    for x in env:
        for path, slot in _slot_occurrences(let, x):
            in_body = slot is None
            suffix = "-in" if in_body else "-e"
            tclass = _relative_class(children(let)[path[0]], path[1:])
            res = _chain(env, x)
            if res is None:
                continue
            chain, rhs = res
            if slot is not None and slot in chain:
                continue
            base = {"binder": chain[-1], "chain": tuple(chain), "occurrence": path,
                    "target_class": tclass}
            if rule in ("cp-in", "cp-e", "cpS") and isinstance(rhs, Lam):
                if rule != "cpS" and rule != "cp" + suffix:
                    continue
                if rule == "cpS" and tclass == ContextClass.GENERAL:
                    continue
                if rhs.free_vars & _binders_below(let, path):
                    continue
                yield base
            elif rule in ("cpx-in", "cpx-e"):
                if rule != "cpx" + suffix or not isinstance(env[x], Var):
                    continue
                y = env[x].name
                if y == x or y in _binders_below(let, path):
                    continue
                yield {"binder": x, "occurrence": path, "target_class": tclass}
            elif rule in ("cpcx-in", "cpcx-e", "cpcxT"):
                if not isinstance(env[x], Con):
                    continue
                if rule == "cpcxT":
                    if tclass != ContextClass.TOP:
                        continue
                elif rule != "cpcx" + suffix:
                    continue
                yield {"binder": x, "occurrence": path, "target_class": tclass}
            elif rule in ("seq-in", "seq-e", "case-in", "case-e", "case-cx", "caseStar"):
                if not isinstance(rhs, Con):
                    continue
                parent = subterm(let, path[:-1])
                last = path[-1]
                if rule.startswith("seq"):
                    if rule == "seq" + suffix and isinstance(parent, Seq) and last == 0:
                        yield base
                    continue
                if not (isinstance(parent, Case) and last == 0):
                    continue
                try:
                    alt = parent.alt_for(rhs.name)
                except KeyError:
                    continue
                if rule == "case-cx":
                    if len(chain) != 1 or not _distinct_vars(rhs.args):
                        continue
                    names = {a.name for a in rhs.args}
                    if names & _binders_below(let, path[:-1]):
                        continue
                    yield dict(base, form="case-cx")
                elif rule == "caseStar":
                    if len(chain) == 1 and _distinct_vars(rhs.args) and not (
                        {a.name for a in rhs.args} & _binders_below(let, path[:-1])
                    ):
                        yield dict(base, form="case-cx")
                    else:
                        yield dict(base, form="case" + suffix)
                elif rule == "case" + suffix:
                    yield base


def _match(node: Expr, rule: str):
    if isinstance(node, Letrec):
        yield from _match_letrec(node, rule)
    if rule == "lbeta":
        if isinstance(node, App) and isinstance(node.fun, Lam):
            yield {}
    elif rule == "lapp":
        if isinstance(node, App) and isinstance(node.fun, Letrec):
            yield {}
    elif rule == "lcase":
        if isinstance(node, Case) and isinstance(node.scrut, Letrec):
            yield {}
    elif rule == "lseq":
        if isinstance(node, Seq) and isinstance(node.first, Letrec):
            yield {}
    elif rule == "seq-c":
        if isinstance(node, Seq) and isinstance(node.first, (Lam, Con)):
            yield {}
    elif rule in ("case-c", "caseStar"):
        if isinstance(node, Case) and isinstance(node.scrut, Con):
            try:
                node.alt_for(node.scrut.name)
            except KeyError:
                return
            yield {"form": "case-c"} if rule == "caseStar" else {}
    elif rule == "abse":
        if isinstance(node, Con) and node.args:
            yield {}
    elif rule == "caseId":
        if isinstance(node, Case) and all(
            a.rhs == Con(a.con, [Var(v) for v in a.vars]) for a in node.alts
        ):
            yield {}


def list_redexes(e: Expr, rule: str) -> list:
    """All instances of rule (or rule group) in e, in pre-order."""
    rules = expand_rule(rule)
    demand = None
    out = []
    for path, node in positions(e):
        for r in rules:
            for details in _match(node, r):
                if demand is None:
                    demand = _safe_demand(e)
                cls = classify_context(e, path, demand)
                out.append(RuleInstance(r, path, cls, details))
    return out


# ---------------------------------------------------------------------------
# Application


def _avoid(let: Letrec, names, supply: NameSupply) -> Letrec:
    """Rename the binders of let that clash with names."""
    clash = set(let.binders) & set(names)
    if not clash:
        return let
    mapping = {x: supply.fresh(x) for x in clash}
    return Letrec(
        [Binding(mapping.get(b.var, b.var), substitute_vars(b.rhs, mapping)) for b in let.bindings],
        substitute_vars(let.body, mapping),
    )


def _with_slot(let: Letrec, i: int, new: Expr) -> Letrec:
    n = len(let.bindings)
    if i == n:
        return Letrec(let.bindings, new)
    bs = list(let.bindings)
    bs[i] = Binding(bs[i].var, new)
    return Letrec(bs, let.body)


def _slot_of(let: Letrec, var: str) -> int:
    for i, b in enumerate(let.bindings):
        if b.var == var:
            return i
    raise TransformError(f"no binding for {var}")


def _bind_alt(alt: Alt, args, supply: NameSupply) -> Expr:
    """letrec {z_i = a_i} in rhs, renaming pattern variables that would capture."""
    if not alt.vars:
        return alt.rhs
    fv = set()
    for a in args:
        fv |= a.free_vars
    clash = set(alt.vars) & fv
    vars_, rhs = list(alt.vars), alt.rhs
    if clash:
        mapping = {z: supply.fresh(z) for z in clash}
        vars_ = [mapping.get(z, z) for z in vars_]
        rhs = substitute_vars(rhs, mapping)
    return Letrec([Binding(z, a) for z, a in zip(vars_, args)], rhs)


def _apply_local(node: Expr, inst: RuleInstance, supply: NameSupply) -> Expr:
    rule = inst.rule
    d = inst.details
    if rule == "lbeta":
        lam, arg = node.fun, node.arg
        x, body = lam.param, lam.body
        if x in arg.free_vars:
            x2 = supply.fresh(x)
            body = substitute_vars(body, {x: x2})
            x = x2
        return Letrec([Binding(x, arg)], body)
    if rule == "lapp":
        let = _avoid(node.fun, node.arg.free_vars, supply)
        return Letrec(let.bindings, App(let.body, node.arg))
    if rule == "lcase":
        alts_fv = Case(node.tycon, Var("_"), node.alts).free_vars - {"_"}
        let = _avoid(node.scrut, alts_fv, supply)
        return Letrec(let.bindings, Case(node.tycon, let.body, node.alts))
    if rule == "lseq":
        let = _avoid(node.first, node.second.free_vars, supply)
        return Letrec(let.bindings, Seq(let.body, node.second))
    if rule == "seq-c":
        return node.second
    if rule == "case-c" or (rule == "caseStar" and d.get("form") == "case-c"):
        con = node.scrut
        return _bind_alt(node.alt_for(con.name), con.args, supply)
    if rule == "abse":
        ys = [supply.fresh("x") for _ in node.args]
        return Letrec([Binding(y, a) for y, a in zip(ys, node.args)], Con(node.name, [Var(y) for y in ys]))
    if rule == "caseId":
        return node.scrut
    if not isinstance(node, Letrec):
        raise TransformError(f"{rule} is not applicable here")
    let = node
    n = len(let.bindings)
    if rule == "llet-in":
        outer = set(let.binders)
        for b in let.bindings:
            outer |= b.rhs.free_vars
        inner = _avoid(let.body, outer, supply)
        return Letrec(list(let.bindings) + list(inner.bindings), inner.body)
    if rule == "llet-e":
        x = d["binder"]
        i = _slot_of(let, x)
        names = set(let.binders) | let.body.free_vars
        for b in let.bindings:
            if b.var != x:
                names |= b.rhs.free_vars
        inner = _avoid(let.bindings[i].rhs, names, supply)
        bs = list(let.bindings)
        bs[i] = Binding(x, inner.body)
        return Letrec(bs + list(inner.bindings), let.body)
    if rule in ("gc1", "gc2"):
        return gc_max(let)[0]
    if rule == "abs":
        i = _slot_of(let, d["binder"])
        con = let.bindings[i].rhs
        ys = [supply.fresh("x") for _ in con.args]
        out = _with_slot(let, i, Con(con.name, [Var(y) for y in ys]))
        return Letrec(list(out.bindings) + [Binding(y, a) for y, a in zip(ys, con.args)], out.body)
    if rule == "xch":
        y, x = d["binder"], d["source"]
        i, j = _slot_of(let, x), _slot_of(let, y)
        t = let.bindings[i].rhs
        bs = list(let.bindings)
        bs[i] = Binding(x, Var(y))
        bs[j] = Binding(y, t)
        return Letrec(bs, let.body)
    if rule == "gcEq":
        return Letrec([b for b in let.bindings if b.var != d["binder"]], let.body)
    if rule == "cse":
        x, y = d["binder"], d["duplicate"]
        m = {y: x}
        bs = [Binding(b.var, substitute_vars(b.rhs, m)) for b in let.bindings if b.var != y]
        return Letrec(bs, substitute_vars(let.body, m))
    if rule in ("ucp1", "ucp2", "ucp3"):
        x = d["binder"]
        t = let.bindings[_slot_of(let, x)].rhs
        rest = replace_at(let, d["occurrence"], t)
        if rule == "ucp3":
            return rest.body
        return Letrec([b for b in rest.bindings if b.var != x], rest.body)
    occ = d["occurrence"]
    if rule in ("cp-in", "cp-e", "cpS"):
        v = let.bindings[_slot_of(let, d["binder"])].rhs
        return replace_at(let, occ, rename(v, supply))
    if rule in ("cpx-in", "cpx-e"):
        y = let.bindings[_slot_of(let, d["binder"])].rhs
        return replace_at(let, occ, y)
    if rule in ("cpcx-in", "cpcx-e", "cpcxT"):
        i = _slot_of(let, d["binder"])
        con = let.bindings[i].rhs
        ys = [supply.fresh("y") for _ in con.args]
        copy = Con(con.name, [Var(y) for y in ys])
        out = replace_at(let, occ, copy)
        if not ys:
            return out
        out = _with_slot(out, i, copy)
        return Letrec(list(out.bindings) + [Binding(y, a) for y, a in zip(ys, con.args)], out.body)
    if rule in ("seq-in", "seq-e"):
        seq = subterm(let, occ[:-1])
        return replace_at(let, occ[:-1], seq.second)
    if rule in ("case-in", "case-e", "case-cx", "caseStar"):
        form = d.get("form", rule)
        case = subterm(let, occ[:-1])
        i = _slot_of(let, d["binder"])
        con = let.bindings[i].rhs
        alt = case.alt_for(con.name)
        if form == "case-cx":
            return replace_at(let, occ[:-1], _bind_alt(alt, con.args, supply))
        if not con.args:
            return replace_at(let, occ[:-1], alt.rhs)
        ys = [supply.fresh("y") for _ in con.args]
        out = replace_at(let, occ[:-1], _bind_alt(alt, [Var(y) for y in ys], supply))
        out = _with_slot(out, i, Con(con.name, [Var(y) for y in ys]))
        return Letrec(list(out.bindings) + [Binding(y, a) for y, a in zip(ys, con.args)], out.body)
    raise TransformError(f"cannot apply {rule}")


def apply_rule(e: Expr, inst: RuleInstance, assume_typed: bool = False,
               supply: NameSupply | None = None) -> Expr:
    if inst.rule == "caseId" and not assume_typed:
        raise TransformError("caseId is only correct for typed programs; pass assume_typed")
    try:
        node = subterm(e, inst.position)
    except LRPError as exc:
        raise TransformError(str(exc)) from None
    matches = list(_match(node, inst.rule))
    if not any(_same_details(m, inst.details) for m in matches):
        raise TransformError(f"{inst.rule} does not match at the given position")
    supply = supply or NameSupply.for_term(e)
    return replace_at(e, inst.position, _apply_local(node, inst, supply))


def _same_details(a: dict, b: dict) -> bool:
    keys = set(a) | set(b)
    return all(a.get(k) == b.get(k) for k in keys if k != "target_class")


def apply_exhaustively(e: Expr, rule: str, limit: int = 1000, assume_typed: bool = False) -> Expr:
    """Apply the first instance of rule until none is left."""
    for _ in range(limit):
        insts = list_redexes(e, rule)
        if not insts:
            return e
        e = apply_rule(e, insts[0], assume_typed)
    raise TransformError(f"{rule} still applicable after {limit} rewrites")


# ---------------------------------------------------------------------------
# seq insertion, translation into machine expressions, inlining


def seq_insert(e: Expr, p, var: str) -> Expr:
    """Replace the subterm t at p by (seq var t).

    That var is really demanded by t is the caller's claim.
    """
    p = tuple(p)
    t = subterm(e, p)
    scope = set()
    node = e
    for i in p:
        scope.update(binders_at(node, i))
        node = children(node)[i]
    if var not in scope and var not in e.free_vars:
        raise TransformError(f"{var} is not in scope at the given position")
    return replace_at(e, p, Seq(Var(var), t))


def psi_translate(e: Expr, supply: NameSupply | None = None) -> Expr:
    """Name every non-variable argument of applications and constructors."""
    supply = supply or NameSupply.for_term(e)

    def go(t):
        if isinstance(t, Var):
            return t
        if isinstance(t, Lam):
            return Lam(t.param, go(t.body))
        if isinstance(t, App):
            fun = go(t.fun)
            if isinstance(t.arg, Var):
                return App(fun, t.arg)
            y = supply.fresh("y")
            return Letrec([Binding(y, go(t.arg))], App(fun, Var(y)))
        if isinstance(t, Con):
            if all(isinstance(a, Var) for a in t.args):
                return t
            binds, args = [], []
            for a in t.args:
                if isinstance(a, Var):
                    args.append(a)
                else:
                    y = supply.fresh("y")
                    binds.append(Binding(y, go(a)))
                    args.append(Var(y))
            return Letrec(binds, Con(t.name, args))
        if isinstance(t, Seq):
            return Seq(go(t.first), go(t.second))
        if isinstance(t, Case):
            return Case(t.tycon, go(t.scrut), [Alt(a.con, a.vars, go(a.rhs)) for a in t.alts])
        if isinstance(t, Letrec):
            return Letrec([Binding(b.var, go(b.rhs)) for b in t.bindings], go(t.body))
        raise TypeError(t)

    return go(e)


def _find_binding(e: Expr, binder: str, occurrence: tuple):
    """Innermost letrec above occurrence that binds binder (without shadowing)."""
    for k in range(len(occurrence) - 1, -1, -1):
        node = subterm(e, occurrence[:k])
        if isinstance(node, Letrec) and binder in node.binders:
            below = _binders_below(node, occurrence[k:])
            if binder in below:
                return None
            return occurrence[:k], node
    return None


def inline(e: Expr, binder: str, occurrence, assume_bound: bool = False) -> Expr:
    """Copy the abstraction bound to binder into an applied occurrence.

    The copy is beta-reduced against the arguments of the call and the
    parameter bindings created this way are cleaned up: variable bindings are
    copied and dropped, bindings used once in a surface position are copied
    into that position, unused ones are collected.  If the occurrence is a
    different variable (e.g. a function parameter known to be bound to
    binder's value), ``assume_bound`` must be set.
    """
    occurrence = tuple(occurrence)
    occ = subterm(e, occurrence)
    if not isinstance(occ, Var):
        raise TransformError("occurrence does not address a variable")
    if occ.name != binder and not assume_bound:
        raise TransformError(f"occurrence is {occ.name}, not {binder}")
    if not occurrence or occurrence[-1] != 0 or not isinstance(subterm(e, occurrence[:-1]), App):
        raise TransformError("occurrence is not applied")
    search = occurrence if occ.name == binder else occurrence
    found = _find_binding(e, binder, search)
    if found is None:
        raise TransformError(f"{binder} is not bound by an enclosing letrec")
    let_path, let = found
    v = let.bindings[_slot_of(let, binder)].rhs
    if not isinstance(v, Lam):
        raise TransformError(f"{binder} is not bound to an abstraction")
    if v.free_vars & _binders_below(let, occurrence[len(let_path):]):
        raise TransformError("copying would capture a free variable of the abstraction")

    # the whole application spine headed by the occurrence
    site = occurrence[:-1]
    while site and site[-1] == 0 and isinstance(subterm(e, site[:-1]), App):
        site = site[:-1]
    args = []
    node = subterm(e, site)
    while isinstance(node, App):
        args.append(node.arg)
        node = node.fun
    args.reverse()

    supply = NameSupply.for_term(e)
    head = rename(v, supply)
    # (lbeta) on each argument, with (lapp)/(llet) merging the environments
    bindings = []
    while isinstance(head, Lam) and args:
        bindings.append(Binding(head.param, args.pop(0)))
        head = head.body
    body = apps(head, *args)
    bindings, body = _cleanup(bindings, body)
    result = Letrec(bindings, body) if bindings else body
    return replace_at(e, site, result)


def _cleanup(bindings: list, body: Expr):
    """(cpx), (ucp) and (gc) restricted to the given bindings."""
    changed = True
    while changed and bindings:
        changed = False
        let = Letrec(bindings, body)
        for i, b in enumerate(let.bindings):
            x = b.var
            occ = list(_slot_occurrences(let, x))
            if not occ:
                bindings = [c for c in let.bindings if c.var != x]
                changed = True
                break
            if isinstance(b.rhs, Var) and b.rhs.name != x:
                y = b.rhs.name
                if any(y in _binders_below(let, p) for p, _ in occ):
                    continue
                out = let
                for p, _ in occ:
                    out = replace_at(out, p, b.rhs)
                bindings = [c for c in out.bindings if c.var != x]
                body = out.body
                changed = True
                break
            if len(occ) == 1 and x not in b.rhs.free_vars:
                p, slot = occ[0]
                if slot == x:
                    continue
                if _relative_class(children(let)[p[0]], p[1:]) == ContextClass.GENERAL:
                    continue
                if b.rhs.free_vars & _binders_below(let, p):
                    continue
                out = replace_at(let, p, b.rhs)
                bindings = [c for c in out.bindings if c.var != x]
                body = out.body
                changed = True
                break
    return bindings, body
