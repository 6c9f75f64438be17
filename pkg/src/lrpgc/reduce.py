"""Normal-order reduction with eager garbage collection of the top letrec.

The evaluator keeps the top letrec environment as a mutable heap (name ->
right-hand side) next to the body.  Everything below the top level stays an
immutable term.  Garbage is found incrementally: every heap name knows which
bindings (or the body) mention it, and only names that lost a referrer during
a step are re-examined.  The resulting reduction sequence is exactly the
LRPgc sequence; the slow reference path (``step`` on whole terms, with a
forward reachability sweep) is kept for tests and tracing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .syntax import (
    App,
    Binding,
    Case,
    Con,
    Expr,
    Lam,
    Letrec,
    LRPError,
    NameSupply,
    PLAIN,
    Seq,
    SizeOptions,
    Var,
    children,
    freshen,
    rename,
    replace_at,
    subterm,
)

UNBOUNDED = math.inf

REDUCTION_RULES = (
    "lbeta", "cp-in", "cp-e", "llet-in", "llet-e", "lapp", "lcase", "lseq",
    "seq-c", "seq-in", "seq-e", "case-c", "case-in", "case-e", "gc1", "gc2",
)
GC_RULES = frozenset(("gc1", "gc2"))
RLN_RULES = frozenset(
    ("lbeta", "case-c", "case-in", "case-e", "seq-c", "seq-in", "seq-e")
)
LCSC_RULES = RLN_RULES | {"cp-in", "cp-e"}

WHNF = "WHNF"
BLACKHOLE = "Blackhole"
FUEL_EXHAUSTED = "FuelExhausted"
STUCK = "Stuck"


class OpenTermError(LRPError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"free variable {name} is demanded")


class Loc(NamedTuple):
    where: str | None  # None: the body; otherwise a heap binder
    path: tuple


class Redex(NamedTuple):
    """Outcome of the labeling pass over a machine state."""

    rule: str | None  # reduction rule, or None for a terminal outcome
    outcome: str | None  # WHNF / Blackhole / Stuck for terminal states
    focus: Loc | None  # position of the sub-labelled expression
    site: Loc | None  # position rewritten by the rule
    chain: tuple = ()  # ((binder, occurrence Loc), ...) from x1 to x_m
    target: Loc | None = None  # vis-marked occurrence for cp/seq/case rules


@dataclass(frozen=True)
class Labeling:
    """Labeling result with paths into the whole term."""

    rule: str | None
    outcome: str | None
    focus_path: tuple | None
    chain: tuple  # ((name, occurrence path), ...)
    target_path: tuple | None


@dataclass
class Measures:
    rln: int = 0
    rlnall: int = 0
    rln_lcsc: int = 0
    spmax: float = 0

    def summary(self) -> str:
        sp = "inf" if self.spmax == UNBOUNDED else str(int(self.spmax))
        return f"{self.rln}\t{self.rlnall}\t{self.rln_lcsc}\t{sp}"


@dataclass
class EvalResult:
    steps: list
    final: Expr
    status: str
    measures: Measures
    stuck_reason: str | None = None

    def summary(self) -> str:
        return f"{self.status}\t{self.measures.summary()}"


BODY = None  # referrer key for occurrences in the body


def _has_alt(case: Case, con: str) -> bool:
    return any(a.con == con for a in case.alts)


class Machine:
    """An LRPgc state split into top-level heap and body."""

    def __init__(self, e: Expr, supply: NameSupply | None = None):
        self.supply = supply or NameSupply.for_term(e)
        self.heap: dict = {}
        self.refs: dict = {}
        self.body: Expr = e
        self.size = 0
        self.psize = 0
        self._pending: set = set()
        self._full = False
        # demand path of the last labeling: hops and binder -> hop index.
        # Bindings on it are reachable from the body.
        self._hops: list = []
        self._onpath: dict = {}
        self._resume: Loc | None = None
        # var -> end of its chain of variable-to-variable bindings.  Such
        # bindings never change until collected, so the cache stays valid.
        self._end: dict = {}
        if isinstance(e, Letrec):
            self.body = Var("_")  # placeholder without free names
            self._add_bindings(e.bindings)
            self._set_body(e.body)
            self._full = True
        else:
            self.size = e.size
            self.psize = e.psize

    # -- term views -------------------------------------------------------

    def to_expr(self) -> Expr:
        if not self.heap:
            return self.body
        return Letrec([Binding(k, v) for k, v in self.heap.items()], self.body)

    def tree(self, where):
        return self.body if where is None else self.heap[where]

    def expr_path(self, loc: Loc) -> tuple:
        if not self.heap:
            return loc.path
        if loc.where is None:
            return (len(self.heap),) + loc.path
        return (list(self.heap).index(loc.where),) + loc.path

    def measure(self, opts: SizeOptions) -> int:
        return self.psize if opts.peano_as_unit else self.size

    # -- mutation with referrer bookkeeping -----------------------------

    def _add_bindings(self, bindings) -> None:
        heap, refs = self.heap, self.refs
        for var, rhs in bindings:
            if var in heap:
                raise LRPError(f"binder {var} clashes with the top environment")
            heap[var] = rhs
            refs[var] = set()
            self.size += rhs.size
            self.psize += rhs.psize
        for var, rhs in bindings:
            for y in rhs.free_vars:
                r = refs.get(y)
                if r is not None:
                    r.add(var)
            self._pending.add(var)

    def _retarget(self, key, old: Expr, new: Expr) -> None:
        ofv, nfv = old.free_vars, new.free_vars
        if ofv is nfv:
            return
        refs = self.refs
        for y in ofv - nfv:
            r = refs.get(y)
            if r is not None:
                r.discard(key)
                self._pending.add(y)
        for y in nfv - ofv:
            r = refs.get(y)
            if r is not None:
                r.add(key)

    def _set_rhs(self, var: str, new: Expr) -> None:
        old = self.heap[var]
        self.heap[var] = new
        self.size += new.size - old.size
        self.psize += new.psize - old.psize
        self._retarget(var, old, new)

    def _set_body(self, new: Expr) -> None:
        old = self.body
        self.body = new
        self.size += new.size - old.size
        self.psize += new.psize - old.psize
        self._retarget(BODY, old, new)

    def _set_tree(self, where, new: Expr) -> None:
        if where is None:
            self._set_body(new)
        else:
            self._set_rhs(where, new)

    def _rewrite(self, loc: Loc, new: Expr) -> None:
        tree = self.tree(loc.where)
        self._set_tree(loc.where, replace_at(tree, loc.path, new))

    # -- garbage collection ---------------------------------------------

    def _reachable(self) -> set:
        heap = self.heap
        seen = set()
        stack = [y for y in self.body.free_vars if y in heap]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(y for y in heap[x].free_vars if y in heap and y not in seen)
        return seen

    def _find_garbage(self) -> set:
        if self._full:
            self._full = False
            self._pending.clear()
            live = self._reachable()
            return set(self.heap).difference(live)
        heap, refs, onpath = self.heap, self.refs, self._onpath
        garbage = set()
        work = list(self._pending)
        self._pending.clear()
        while work:
            x = work.pop()
            if x in garbage or x not in heap:
                continue
            # x is live iff the body reaches it; search backwards along referrers
            seen = {x}
            frontier = [x]
            live = False
            while frontier and not live:
                y = frontier.pop()
                for r in refs[y]:
                    if r is BODY or r in onpath:
                        live = True
                        break
                    if r not in seen and r not in garbage:
                        seen.add(r)
                        frontier.append(r)
            if live:
                continue
            garbage |= seen
            for g in seen:
                for y in heap[g].free_vars:
                    if y in heap and y not in garbage:
                        work.append(y)
        return garbage

    def gc(self) -> str | None:
        """Perform one maximal (gc) step on the top letrec, if applicable."""
        if not self.heap:
            return None
        garbage = self._find_garbage()
        if not garbage:
            return None
        heap, refs = self.heap, self.refs
        for g in garbage:
            rhs = heap[g]
            for y in rhs.free_vars:
                r = refs.get(y)
                if r is not None:
                    r.discard(g)
        end = self._end
        for g in garbage:
            rhs = heap.pop(g)
            del refs[g]
            end.pop(g, None)
            self.size -= rhs.size
            self.psize -= rhs.psize
        if heap:
            return "gc1"
        self._promote()
        return "gc2"

    def _promote(self) -> None:
        # with an empty heap a letrec body is itself the top letrec
        body = self.body
        if not self.heap and isinstance(body, Letrec):
            self._forget_path()
            self.body = Var("_")
            self.size -= body.size
            self.psize -= body.psize
            self._add_bindings(body.bindings)
            self._set_body(body.body)

    # -- labeling -------------------------------------------------------

    def _forget_path(self) -> None:
        self._hops.clear()
        self._onpath.clear()
        self._resume = None

    def _truncate_path(self, where) -> None:
        # keep the demand path up to (and including) the hop into ``where``
        hops, onpath = self._hops, self._onpath
        if where is not None and where not in onpath:
            self._forget_path()
            return
        keep = 0 if where is None else onpath[where] + 1
        for _, v in hops[keep:]:
            del onpath[v]
        del hops[keep:]

    def _chain_end(self, x: str):
        """First binder along x = y, y = z, ... whose rhs is not a variable."""
        heap, end = self.heap, self._end
        seen = []
        members = set()
        y = x
        while True:
            if y not in heap:
                raise OpenTermError(y)
            rhs = heap[y]
            if type(rhs) is not Var:
                break
            if y in members:
                return None  # a cycle of indirections
            members.add(y)
            seen.append(y)
            nxt = end.get(y)
            y = rhs.name if nxt is None else nxt
        for v in seen:
            end[v] = y
        return y

    def label(self, full_chain: bool = False, trail: list | None = None) -> Redex:
        """Find the normal-order redex.

        With ``full_chain`` every binding of an indirection chain is recorded;
        otherwise chains are skipped and only their end points are kept.
        Visited positions are appended to ``trail`` when given.
        """
        heap = self.heap
        hops, visited = self._hops, self._onpath
        if self._resume is not None:
            where, path = self._resume
            self._resume = None
            tree = self.tree(where)
            node = subterm(tree, path)
            parent = subterm(tree, path[:-1]) if path else None
        else:
            hops.clear()
            visited.clear()
            where, path, node = None, (), self.body
            parent = None
        while True:
            if trail is not None:
                trail.append(Loc(where, path))
            cls = type(node)
            if cls is App:
                parent, node, path = node, node.fun, path + (0,)
            elif cls is Seq:
                parent, node, path = node, node.first, path + (0,)
            elif cls is Case:
                parent, node, path = node, node.scrut, path + (0,)
            elif cls is Var:
                x = node.name
                if x not in heap:
                    raise OpenTermError(x)
                if not full_chain and type(heap[x]) is Var:
                    x = self._chain_end(x)
                    if x is None:
                        return Redex(None, BLACKHOLE, Loc(where, path), None)
                if x in visited:
                    return Redex(None, BLACKHOLE, Loc(where, path), None)
                visited[x] = len(hops)
                hops.append((Loc(where, path), x))
                where, path, node, parent = x, (), heap[x], None
            else:
                break
        focus = Loc(where, path)
        if cls is Letrec:
            if not path:
                if where is None:
                    return Redex("llet-in", None, focus, focus)
                return Redex("llet-e", None, focus, focus)
            site = Loc(where, path[:-1])
            rule = {App: "lapp", Case: "lcase", Seq: "lseq"}[type(parent)]
            return Redex(rule, None, focus, site)
        # node is a value
        if path:
            site = Loc(where, path[:-1])
            pcls = type(parent)
            if pcls is App:
                if cls is Lam:
                    return Redex("lbeta", None, focus, site)
                return Redex(None, STUCK, focus, site)
            if pcls is Seq:
                return Redex("seq-c", None, focus, site)
            if cls is Con and _has_alt(parent, node.name):
                return Redex("case-c", None, focus, site)
            return Redex(None, STUCK, focus, site)
        if where is None:
            return Redex(None, WHNF, focus, None)
        # reached through variables: find the indirection chain x1 ... x_m
        j = len(hops) - 1
        chain = [(hops[j][1], hops[j][0])]
        while hops[j][0].where is not None and not hops[j][0].path:
            j -= 1
            chain.append((hops[j][1], hops[j][0]))
        target = hops[j][0]
        suffix = "-in" if target.where is None else "-e"
        if cls is Lam:
            return Redex("cp" + suffix, None, focus, target, tuple(chain), target)
        if not target.path:
            return Redex(None, WHNF, focus, None, tuple(chain), target)
        site = Loc(target.where, target.path[:-1])
        pnode = subterm(self.tree(target.where), site.path)
        if type(pnode) is Seq:
            return Redex("seq" + suffix, None, focus, site, tuple(chain), target)
        if type(pnode) is Case and _has_alt(pnode, node.name):
            return Redex("case" + suffix, None, focus, site, tuple(chain), target)
        return Redex(None, STUCK, focus, site, tuple(chain), target)

    # -- rule application -----------------------------------------------

    def apply(self, rx: Redex) -> None:
        rule = rx.rule
        if rule == "lbeta":
            app = subterm(self.tree(rx.site.where), rx.site.path)
            lam = app.fun
            self._rewrite(rx.site, Letrec([Binding(lam.param, app.arg)], lam.body))
        elif rule in ("cp-in", "cp-e"):
            v = self.heap[rx.focus.where]
            self._rewrite(rx.target, rename(v, self.supply))
        elif rule == "llet-in":
            inner = self.body
            self._add_bindings(inner.bindings)
            self._set_body(inner.body)
        elif rule == "llet-e":
            x = rx.focus.where
            inner = self.heap[x]
            self._add_bindings(inner.bindings)
            self._set_rhs(x, inner.body)
        elif rule == "lapp":
            node = subterm(self.tree(rx.site.where), rx.site.path)
            let = node.fun
            self._rewrite(rx.site, Letrec(let.bindings, App(let.body, node.arg)))
        elif rule == "lcase":
            node = subterm(self.tree(rx.site.where), rx.site.path)
            let = node.scrut
            self._rewrite(rx.site, Letrec(let.bindings, Case(node.tycon, let.body, node.alts)))
        elif rule == "lseq":
            node = subterm(self.tree(rx.site.where), rx.site.path)
            let = node.first
            self._rewrite(rx.site, Letrec(let.bindings, Seq(let.body, node.second)))
        elif rule in ("seq-c", "seq-in", "seq-e"):
            node = subterm(self.tree(rx.site.where), rx.site.path)
            self._rewrite(rx.site, node.second)
        elif rule == "case-c":
            node = subterm(self.tree(rx.site.where), rx.site.path)
            con = node.scrut
            alt = node.alt_for(con.name)
            if con.args:
                new = Letrec(list(zip(alt.vars, con.args)), alt.rhs)
            else:
                new = alt.rhs
            self._rewrite(rx.site, new)
        elif rule in ("case-in", "case-e"):
            node = subterm(self.tree(rx.site.where), rx.site.path)
            x1 = rx.focus.where
            con = self.heap[x1]
            try:
                alt = node.alt_for(con.name)
            except KeyError:
                raise LRPError(f"no alternative for {con.name}") from None
            if not con.args:
                self._rewrite(rx.site, alt.rhs)
            else:
                ys = [self.supply.fresh("y") for _ in con.args]
                self._add_bindings(list(zip(ys, con.args)))
                self._set_rhs(x1, Con(con.name, [Var(y) for y in ys]))
                new = Letrec([Binding(z, Var(y)) for z, y in zip(alt.vars, ys)], alt.rhs)
                self._rewrite(rx.site, new)
        else:
            raise LRPError(f"cannot apply {rule}")
        self._truncate_path(rx.site.where)
        if self._hops or rx.site.where is None:
            self._resume = rx.site
        self._promote_if_needed()

    def _promote_if_needed(self) -> None:
        if not self.heap and isinstance(self.body, Letrec):
            self._promote()


# ---------------------------------------------------------------------------
# Whole-term operations


def gc_max(e: Expr):
    """Remove every unreachable binding of the top letrec.

    Returns (new term, changed).
    """
    if not isinstance(e, Letrec):
        return e, False
    rhs = {b.var: b.rhs for b in e.bindings}
    seen = set()
    stack = [y for y in e.body.free_vars if y in rhs]
    while stack:
        x = stack.pop()
        if x not in seen:
            seen.add(x)
            stack.extend(y for y in rhs[x].free_vars if y in rhs)
    if len(seen) == len(rhs):
        return e, False
    kept = [b for b in e.bindings if b.var in seen]
    if not kept:
        return e.body, True
    return Letrec(kept, e.body), True


def is_whnf(e: Expr) -> bool:
    if isinstance(e, (Lam, Con)):
        return True
    if not isinstance(e, Letrec):
        return False
    if isinstance(e.body, (Lam, Con)):
        return True
    if not isinstance(e.body, Var):
        return False
    env = {b.var: b.rhs for b in e.bindings}
    x = e.body.name
    seen = set()
    while x in env and x not in seen:
        seen.add(x)
        rhs = env[x]
        if isinstance(rhs, Con):
            return True
        if not isinstance(rhs, Var):
            return False
        x = rhs.name
    return False


def is_lrpgc_whnf(e: Expr) -> bool:
    return is_whnf(e) and not gc_max(e)[1]


def _loc_path(m: Machine, loc: Loc | None):
    return None if loc is None else m.expr_path(loc)


def label(e: Expr) -> Labeling:
    """Locate the normal-order redex of a closed term (gc not considered)."""
    m = Machine(e)
    rx = m.label(full_chain=True)
    chain = tuple((name, m.expr_path(occ)) for name, occ in rx.chain)
    return Labeling(rx.rule, rx.outcome, _loc_path(m, rx.focus), chain, _loc_path(m, rx.target))


def demand_positions(e: Expr) -> list:
    """Paths of e visited by the labeling descent (the demanded positions)."""
    m = Machine(e)
    trail = []
    try:
        m.label(full_chain=True, trail=trail)
    except OpenTermError:
        pass
    out = [()]
    for loc in trail:
        p = m.expr_path(loc) if isinstance(e, Letrec) else loc.path
        if p not in out:
            out.append(p)
    return out


def has_distinct_binders(e: Expr) -> bool:
    """True if no name is bound twice and no binder is also free somewhere."""
    seen = set()
    free = e.free_vars
    stack = [e]
    while stack:
        t = stack.pop()
        if not t.free_vars and type(t) is Con and t.numeral:
            continue
        names = ()
        if type(t) is Lam:
            names = (t.param,)
        elif type(t) is Letrec:
            names = t.binders
        elif type(t) is Case:
            names = [v for a in t.alts for v in a.vars]
        for n in names:
            if n in seen or n in free:
                return False
            seen.add(n)
        stack.extend(children(t))
    return True


class Done(NamedTuple):
    status: str


def step(e: Expr, supply: NameSupply | None = None):
    """One LRPgc step: (new term, rule) or Done(status)."""
    if supply is None and not has_distinct_binders(e):
        e = freshen(e)
    new, changed = gc_max(e)
    if changed:
        return new, ("gc2" if new is e.body else "gc1")
    m = Machine(e, supply)
    rx = m.label(full_chain=True)
    if rx.rule is None:
        return Done(rx.outcome)
    m.apply(rx)
    return m.to_expr(), rx.rule


def evaluate(
    e: Expr,
    fuel: int = 10**6,
    opts: SizeOptions = PLAIN,
    trace: bool = False,
    supply: NameSupply | None = None,
) -> EvalResult:
    """Run LRPgc reduction and collect rln, rlnall, rln_LCSC and spmax."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    if supply is None and not has_distinct_binders(e):
        e = freshen(e)
    m = Machine(e, supply)
    unit = opts.peano_as_unit
    steps = []
    meas = Measures()
    spmax = 0
    used = 0
    status = None
    reason = None
    while True:
        while True:
            before = m.psize if unit else m.size
            g = m.gc()
            if g is None:
                break
            if trace:
                steps.append((g, before))
        cur = m.psize if unit else m.size
        rx = m.label()
        if rx.rule is None:
            status = rx.outcome
            if status == WHNF:
                spmax = max(spmax, cur)
            else:
                spmax = UNBOUNDED
                if status == STUCK:
                    reason = "no rule applies to a non-WHNF"
            break
        if used >= fuel:
            status = FUEL_EXHAUSTED
            spmax = max(spmax, cur)
            break
        if cur > spmax:
            spmax = cur
        if trace:
            steps.append((rx.rule, cur))
        m.apply(rx)
        used += 1
        rule = rx.rule
        if rule in RLN_RULES:
            meas.rln += 1
            meas.rln_lcsc += 1
        elif rule == "cp-in" or rule == "cp-e":
            meas.rln_lcsc += 1
    meas.rlnall = used
    meas.spmax = spmax
    return EvalResult(steps, m.to_expr(), status, meas, reason)


def trace_reference(e: Expr, fuel: int = 10**6, opts: SizeOptions = PLAIN):
    """Evaluate by iterating ``step`` on whole terms.

    Slow; an independent route used to cross-check ``evaluate``.
    """
    if not has_distinct_binders(e):
        e = freshen(e)
    supply = NameSupply.for_term(e)
    steps = []
    meas = Measures()
    spmax = 0
    used = 0
    unit = opts.peano_as_unit
    while True:
        sz = e.psize if unit else e.size
        r = step(e, supply)
        if isinstance(r, Done):
            if r.status == WHNF:
                spmax = max(spmax, sz)
            else:
                spmax = UNBOUNDED
            status = r.status
            break
        new, rule = r
        if rule not in GC_RULES:
            if used >= fuel:
                status = FUEL_EXHAUSTED
                spmax = max(spmax, sz)
                break
            spmax = max(spmax, sz)
            used += 1
            if rule in RLN_RULES:
                meas.rln += 1
            if rule in LCSC_RULES:
                meas.rln_lcsc += 1
        steps.append((rule, sz))
        e = new
    meas.rlnall = used
    meas.spmax = spmax
    return EvalResult(steps, e, status, meas)
