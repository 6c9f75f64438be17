"""Abstract and concrete syntax of the untyped core calculus.

Terms are immutable trees.  Every node caches its two size measures at
construction time (plain and with Peano numerals counted as one) and its
free-variable set on first use, so the evaluator can keep running totals
without re-walking terms.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

Path = tuple  # tuple[int, ...]; child indices from the root


class LRPError(Exception):
    """Base class for every error raised by this package."""


class ParseError(LRPError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


class WellFormednessError(LRPError):
    pass


class PathError(LRPError):
    pass


# ---------------------------------------------------------------------------
# Terms


class Expr:
    __slots__ = ("size", "psize", "_fv")

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"<{type(self).__name__} {pretty(self)}>"

    def __str__(self):
        return pretty(self)

    @property
    def free_vars(self) -> frozenset:
        fv = self._fv
        if fv is None:
            fv = self._fv = self._compute_fv()
        return fv


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.size = 0
        self.psize = 0
        self._fv = None

    def _key(self):
        return (self.name,)

    def _compute_fv(self):
        return frozenset((self.name,))


class App(Expr):
    __slots__ = ("fun", "arg")

    def __init__(self, fun: Expr, arg: Expr):
        self.fun = fun
        self.arg = arg
        self.size = 1 + fun.size + arg.size
        self.psize = 1 + fun.psize + arg.psize
        self._fv = None

    def _key(self):
        return (self.fun, self.arg)

    def _compute_fv(self):
        return self.fun.free_vars | self.arg.free_vars


class Lam(Expr):
    __slots__ = ("param", "body")

    def __init__(self, param: str, body: Expr):
        self.param = param
        self.body = body
        self.size = 1 + body.size
        self.psize = 1 + body.psize
        self._fv = None

    def _key(self):
        return (self.param, self.body)

    def _compute_fv(self):
        return self.body.free_vars - {self.param}


class Seq(Expr):
    __slots__ = ("first", "second")

    def __init__(self, first: Expr, second: Expr):
        self.first = first
        self.second = second
        self.size = 1 + first.size + second.size
        self.psize = 1 + first.psize + second.psize
        self._fv = None

    def _key(self):
        return (self.first, self.second)

    def _compute_fv(self):
        return self.first.free_vars | self.second.free_vars


_EMPTY = frozenset()


class Con(Expr):
    """Saturated constructor application."""

    __slots__ = ("name", "args", "numeral")

    def __init__(self, name: str, args: Sequence[Expr] = ()):
        args = tuple(args)
        self.name = name
        self.args = args
        self.size = 1 + sum(a.size for a in args)
        if name == "Zero" and not args:
            self.numeral = True
        elif name == "Succ" and len(args) == 1 and getattr(args[0], "numeral", False):
            self.numeral = True
        else:
            self.numeral = False
        self.psize = 1 if self.numeral else 1 + sum(a.psize for a in args)
        self._fv = _EMPTY if self.numeral else None

    def _key(self):
        return (self.name, self.args)

    def _compute_fv(self):
        if not self.args:
            return _EMPTY
        return frozenset().union(*(a.free_vars for a in self.args))


class Alt(NamedTuple):
    con: str
    vars: tuple
    rhs: Expr


class Case(Expr):
    __slots__ = ("tycon", "scrut", "alts")

    def __init__(self, tycon: str, scrut: Expr, alts: Sequence[Alt]):
        self.tycon = tycon
        self.scrut = scrut
        self.alts = tuple(alts)
        self.size = 1 + scrut.size + sum(1 + a.rhs.size for a in self.alts)
        self.psize = 1 + scrut.psize + sum(1 + a.rhs.psize for a in self.alts)
        self._fv = None

    def _key(self):
        return (self.tycon, self.scrut, self.alts)

    def _compute_fv(self):
        fv = set(self.scrut.free_vars)
        for alt in self.alts:
            fv |= alt.rhs.free_vars - set(alt.vars)
        return frozenset(fv)

    def alt_for(self, con: str) -> Alt:
        for alt in self.alts:
            if alt.con == con:
                return alt
        raise KeyError(con)


class Binding(NamedTuple):
    var: str
    rhs: Expr


class Letrec(Expr):
    __slots__ = ("bindings", "body")

    def __init__(self, bindings: Sequence[Binding], body: Expr):
        bindings = tuple(Binding(*b) for b in bindings)
        if not bindings:
            raise WellFormednessError("letrec needs at least one binding")
        self.bindings = bindings
        self.body = body
        self.size = body.size + sum(b.rhs.size for b in bindings)
        self.psize = body.psize + sum(b.rhs.psize for b in bindings)
        self._fv = None

    def _key(self):
        return (self.bindings, self.body)

    def _compute_fv(self):
        fv = set(self.body.free_vars)
        for b in self.bindings:
            fv |= b.rhs.free_vars
        return frozenset(fv.difference(b.var for b in self.bindings))

    @property
    def binders(self) -> tuple:
        return tuple(b.var for b in self.bindings)


def mk_letrec(bindings: Sequence[Binding], body: Expr) -> Expr:
    """Letrec that collapses to its body when there are no bindings."""
    return Letrec(bindings, body) if bindings else body


def lams(params: Iterable[str], body: Expr) -> Expr:
    for p in reversed(list(params)):
        body = Lam(p, body)
    return body


def apps(fun: Expr, *args: Expr) -> Expr:
    for a in args:
        fun = App(fun, a)
    return fun


def numeral(k: int) -> Con:
    e = Con("Zero")
    for _ in range(k):
        e = Con("Succ", (e,))
    return e


def is_value(e: Expr) -> bool:
    return isinstance(e, (Lam, Con))


# ---------------------------------------------------------------------------
# Data declarations


@dataclass(frozen=True)
class DataDecl:
    tycon: str
    constructors: tuple  # of (name, arity)


PRELUDE = (
    DataDecl("Bool", (("True", 0), ("False", 0))),
    DataDecl("List", (("Nil", 0), ("Cons", 2))),
    DataDecl("Nat", (("Zero", 0), ("Succ", 1))),
)


@dataclass
class Signature:
    """Constructor table built from data declarations."""

    decls: list = field(default_factory=list)
    arity: dict = field(default_factory=dict)
    tycon_of: dict = field(default_factory=dict)

    @classmethod
    def prelude(cls) -> Signature:
        sig = cls()
        for d in PRELUDE:
            sig.add(d)
        return sig

    def add(self, decl: DataDecl) -> None:
        if any(d.tycon == decl.tycon for d in self.decls):
            raise WellFormednessError(f"duplicate data type {decl.tycon}")
        for name, ar in decl.constructors:
            if name in self.arity:
                raise WellFormednessError(f"duplicate constructor {name}")
            if ar < 0:
                raise WellFormednessError(f"negative arity for {name}")
        for name, ar in decl.constructors:
            self.arity[name] = ar
            self.tycon_of[name] = decl.tycon
        self.decls.append(decl)

    def constructors(self, tycon: str) -> tuple:
        for d in self.decls:
            if d.tycon == tycon:
                return d.constructors
        raise WellFormednessError(f"unknown type {tycon}")

    def copy(self) -> Signature:
        return Signature(list(self.decls), dict(self.arity), dict(self.tycon_of))


# ---------------------------------------------------------------------------
# Children and paths


def children(e: Expr) -> tuple:
    if isinstance(e, App):
        return (e.fun, e.arg)
    if isinstance(e, Lam):
        return (e.body,)
    if isinstance(e, Seq):
        return (e.first, e.second)
    if isinstance(e, Con):
        return e.args
    if isinstance(e, Case):
        return (e.scrut,) + tuple(a.rhs for a in e.alts)
    if isinstance(e, Letrec):
        return tuple(b.rhs for b in e.bindings) + (e.body,)
    return ()


def with_child(e: Expr, i: int, new: Expr) -> Expr:
    if isinstance(e, App):
        return App(new, e.arg) if i == 0 else App(e.fun, new)
    if isinstance(e, Lam):
        return Lam(e.param, new)
    if isinstance(e, Seq):
        return Seq(new, e.second) if i == 0 else Seq(e.first, new)
    if isinstance(e, Con):
        args = list(e.args)
        args[i] = new
        return Con(e.name, args)
    if isinstance(e, Case):
        if i == 0:
            return Case(e.tycon, new, e.alts)
        alts = list(e.alts)
        alts[i - 1] = alts[i - 1]._replace(rhs=new)
        return Case(e.tycon, e.scrut, alts)
    if isinstance(e, Letrec):
        n = len(e.bindings)
        if i == n:
            return Letrec(e.bindings, new)
        bs = list(e.bindings)
        bs[i] = bs[i]._replace(rhs=new)
        return Letrec(bs, e.body)
    raise PathError(f"{type(e).__name__} has no children")


def subterm(e: Expr, path: Sequence[int]) -> Expr:
    for i in path:
        ch = children(e)
        if not 0 <= i < len(ch):
            raise PathError(f"invalid path {format_path(path)}")
        e = ch[i]
    return e


def replace_at(e: Expr, path: Sequence[int], new: Expr) -> Expr:
    if not path:
        return new
    ch = children(e)
    i = path[0]
    if not 0 <= i < len(ch):
        raise PathError(f"invalid path {format_path(path)}")
    return with_child(e, i, replace_at(ch[i], path[1:], new))


def binders_at(e: Expr, i: int) -> tuple:
    """Names bound by node e over its child i."""
    if isinstance(e, Lam):
        return (e.param,)
    if isinstance(e, Case) and i > 0:
        return e.alts[i - 1].vars
    if isinstance(e, Letrec):
        return e.binders
    return ()


def parse_path(text: str) -> Path:
    text = text.strip()
    if text in ("", "."):
        return ()
    try:
        return tuple(int(p) for p in text.split("."))
    except ValueError:
        raise PathError(f"malformed position {text!r}") from None


def format_path(path: Sequence[int]) -> str:
    return ".".join(str(i) for i in path) if path else "."


def positions(e: Expr, prefix: Path = ()) -> Iterator[tuple]:
    """Pre-order (path, subterm) pairs."""
    stack = [(prefix, e)]
    while stack:
        p, t = stack.pop()
        yield p, t
        ch = children(t)
        for i in range(len(ch) - 1, -1, -1):
            stack.append((p + (i,), ch[i]))


# ---------------------------------------------------------------------------
# Measures and binding analysis


@dataclass(frozen=True)
class SizeOptions:
    peano_as_unit: bool = False


PLAIN = SizeOptions()
PEANO_UNIT = SizeOptions(peano_as_unit=True)


def size(e: Expr, opts: SizeOptions = PLAIN) -> int:
    return e.psize if opts.peano_as_unit else e.size


def free_vars(e: Expr) -> frozenset:
    return e.free_vars


def bound_vars(e: Expr) -> set:
    out = set()
    for _, t in positions(e):
        if isinstance(t, Lam):
            out.add(t.param)
        elif isinstance(t, Case):
            for a in t.alts:
                out.update(a.vars)
        elif isinstance(t, Letrec):
            out.update(t.binders)
    return out


def all_names(e: Expr) -> set:
    names = bound_vars(e)
    names |= e.free_vars
    return names


def occurrences(e: Expr, name: str) -> list:
    """Paths of the free occurrences of name in e."""
    out = []

    def go(t, path):
        if name not in t.free_vars:
            return
        if isinstance(t, Var):
            out.append(path)
            return
        for i, c in enumerate(children(t)):
            if name not in binders_at(t, i):
                go(c, path + (i,))

    go(e, ())
    return out


_SUFFIX = re.compile(r"\d+$")


class NameSupply:
    """Suffix-counter fresh names with one global counter per run."""

    def __init__(self, reserved: Iterable[str] = (), start: int = 0):
        self.reserved = set(reserved)
        self.counter = start

    @classmethod
    def for_term(cls, e: Expr) -> NameSupply:
        return cls(all_names(e))

    def fresh(self, hint: str = "v") -> str:
        base = _SUFFIX.sub("", hint) or "v"
        while True:
            name = f"{base}{self.counter}"
            self.counter += 1
            if name not in self.reserved:
                self.reserved.add(name)
                return name


def rename(e: Expr, supply: NameSupply, env: dict | None = None) -> Expr:
    """Alpha-rename every binder of e to a fresh name.

    env maps free names to replacement names (used when the caller has
    already renamed an enclosing binder).
    """
    env = env or {}

    def go(t, env):
        if isinstance(t, Var):
            n = env.get(t.name)
            return t if n is None else Var(n)
        if isinstance(t, Con):
            if t.numeral or not t.args:
                return t
            return Con(t.name, [go(a, env) for a in t.args])
        if isinstance(t, App):
            return App(go(t.fun, env), go(t.arg, env))
        if isinstance(t, Seq):
            return Seq(go(t.first, env), go(t.second, env))
        if isinstance(t, Lam):
            p = supply.fresh(t.param)
            return Lam(p, go(t.body, {**env, t.param: p}))
        if isinstance(t, Case):
            alts = []
            for a in t.alts:
                new = [supply.fresh(v) for v in a.vars]
                inner = {**env, **dict(zip(a.vars, new))}
                alts.append(Alt(a.con, tuple(new), go(a.rhs, inner)))
            return Case(t.tycon, go(t.scrut, env), alts)
        if isinstance(t, Letrec):
            new = {b.var: supply.fresh(b.var) for b in t.bindings}
            inner = {**env, **new}
            return Letrec(
                [Binding(new[b.var], go(b.rhs, inner)) for b in t.bindings],
                go(t.body, inner),
            )
        raise TypeError(t)

    return go(e, env)


def freshen(e: Expr, supply: NameSupply | None = None) -> Expr:
    """Alpha-equivalent copy of e whose binders are pairwise distinct and
    distinct from its free variables."""
    if supply is None:
        supply = NameSupply(e.free_vars)
    return rename(e, supply)


def substitute_vars(e: Expr, mapping: dict) -> Expr:
    """Replace free variables by variables (no capture checks beyond
    stopping under shadowing binders)."""
    if not mapping or not (e.free_vars & mapping.keys()):
        return e
    if isinstance(e, Var):
        return Var(mapping[e.name])
    ch = children(e)
    out = e
    for i, c in enumerate(ch):
        bound = binders_at(e, i)
        m = {k: v for k, v in mapping.items() if k not in bound} if bound else mapping
        if bound and set(bound) & set(m.values()) and c.free_vars & m.keys():
            raise WellFormednessError("variable capture during substitution")
        new = substitute_vars(c, m)
        if new is not c:
            out = with_child(out, i, new)
    return out


def alpha_equal(a: Expr, b: Expr) -> bool:
    def go(s, t, env_s, env_t, depth):
        if type(s) is not type(t):
            return False
        if isinstance(s, Var):
            ds, dt = env_s.get(s.name), env_t.get(t.name)
            if ds is None and dt is None:
                return s.name == t.name
            return ds == dt
        if isinstance(s, Con):
            if s.name != t.name or len(s.args) != len(t.args):
                return False
            return all(go(x, y, env_s, env_t, depth) for x, y in zip(s.args, t.args))
        if isinstance(s, App):
            return go(s.fun, t.fun, env_s, env_t, depth) and go(
                s.arg, t.arg, env_s, env_t, depth
            )
        if isinstance(s, Seq):
            return go(s.first, t.first, env_s, env_t, depth) and go(
                s.second, t.second, env_s, env_t, depth
            )
        if isinstance(s, Lam):
            return go(
                s.body,
                t.body,
                {**env_s, s.param: depth},
                {**env_t, t.param: depth},
                depth + 1,
            )
        if isinstance(s, Case):
            if s.tycon != t.tycon or len(s.alts) != len(t.alts):
                return False
            if not go(s.scrut, t.scrut, env_s, env_t, depth):
                return False
            for x, y in zip(s.alts, t.alts):
                if x.con != y.con or len(x.vars) != len(y.vars):
                    return False
                k = len(x.vars)
                es = {**env_s, **{v: depth + i for i, v in enumerate(x.vars)}}
                et = {**env_t, **{v: depth + i for i, v in enumerate(y.vars)}}
                if not go(x.rhs, y.rhs, es, et, depth + k):
                    return False
            return True
        if isinstance(s, Letrec):
            # binding order matters here; environments are compared as written
            if len(s.bindings) != len(t.bindings):
                return False
            k = len(s.bindings)
            es = {**env_s, **{b.var: depth + i for i, b in enumerate(s.bindings)}}
            et = {**env_t, **{b.var: depth + i for i, b in enumerate(t.bindings)}}
            return all(
                go(x.rhs, y.rhs, es, et, depth + k)
                for x, y in zip(s.bindings, t.bindings)
            ) and go(s.body, t.body, es, et, depth + k)
        raise TypeError(s)

    return go(a, b, {}, {}, 0)


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<arrow>->)
  | (?P<nat>\d+)
  | (?P<upper>[A-Z][A-Za-z0-9_']*)
  | (?P<lower>[a-z_][A-Za-z0-9_']*)
  | (?P<sym>[\\=;|{}(),])
    """,
    re.VERBOSE,
)

KEYWORDS = {"letrec", "in", "case", "of", "seq", "data"}


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok = m.group()
            if kind == "lower" and tok in KEYWORDS:
                kind = tok
            toks.append(Token(kind, tok, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.toks = tokenize(text)
        self.i = 0
        self.sig = sig

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            want = text or kind
            raise self.error(f"expected {want!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind: str, text: str | None = None) -> bool:
        if self.at(kind, text):
            self.i += 1
            return True
        return False

    # prog := datadecl* expr
    def program(self):
        decls = []
        while self.at("data"):
            decls.append(self.datadecl())
        e = self.expr()
        if not self.at("eof"):
            raise self.error(f"unexpected {self.tok.text!r}")
        return decls, e

    def datadecl(self) -> DataDecl:
        self.expect("data")
        tycon = self.expect("upper")
        self.expect("sym", "=")
        cons = [self.con_decl()]
        while self.accept("sym", "|"):
            cons.append(self.con_decl())
        self.expect("sym", ";")
        decl = DataDecl(tycon.text, tuple(cons))
        try:
            self.sig.add(decl)
        except WellFormednessError as exc:
            raise ParseError(str(exc), tycon.line, tycon.col) from None
        return decl

    def con_decl(self):
        name = self.expect("upper").text
        arity = int(self.expect("nat").text) if self.at("nat") else 0
        return (name, arity)

    def expr(self) -> Expr:
        t = self.tok
        if self.accept("letrec"):
            binds = [self.bind()]
            while self.accept("sym", ","):
                binds.append(self.bind())
            self.expect("in")
            seen = set()
            for b, tok in binds:
                if b.var in seen:
                    raise self.error(f"duplicate letrec binder {b.var}", tok)
                seen.add(b.var)
            return Letrec([b for b, _ in binds], self.expr())
        if self.accept("sym", "\\"):
            params = [self.expect("lower").text]
            while self.at("lower"):
                params.append(self.expect("lower").text)
            self.expect("arrow")
            return lams(params, self.expr())
        if self.accept("case"):
            scrut = self.expr()
            self.expect("of")
            self.expect("sym", "{")
            alts = [self.alt()]
            while self.accept("sym", ";"):
                alts.append(self.alt())
            self.expect("sym", "}")
            return self.build_case(scrut, alts, t)
        if self.accept("seq"):
            a = self.aexpr()
            b = self.aexpr()
            return Seq(a, b)
        return self.appexpr()

    def bind(self):
        tok = self.expect("lower")
        self.expect("sym", "=")
        return Binding(tok.text, self.expr()), tok

    def alt(self):
        tok = self.expect("upper")
        vs = []
        while self.at("lower"):
            vs.append(self.expect("lower").text)
        self.expect("arrow")
        return tok, vs, self.expr()

    def build_case(self, scrut, alts, tok):
        first = alts[0][0]
        if first.text not in self.sig.arity:
            raise self.error(f"unknown constructor {first.text}", first)
        tycon = self.sig.tycon_of[first.text]
        by_con = {}
        for ctok, vs, rhs in alts:
            c = ctok.text
            if c not in self.sig.arity:
                raise self.error(f"unknown constructor {c}", ctok)
            if self.sig.tycon_of[c] != tycon:
                raise self.error(f"constructor {c} is not of type {tycon}", ctok)
            if c in by_con:
                raise self.error(f"duplicated case alternative {c}", ctok)
            if len(vs) != self.sig.arity[c]:
                raise self.error(
                    f"pattern {c} needs {self.sig.arity[c]} variables, got {len(vs)}", ctok
                )
            if len(set(vs)) != len(vs):
                raise self.error(f"repeated pattern variable in {c}", ctok)
            by_con[c] = Alt(c, tuple(vs), rhs)
        ordered = []
        for c, _ in self.sig.constructors(tycon):
            if c not in by_con:
                raise self.error(f"incomplete case: missing alternative {c}", tok)
            ordered.append(by_con[c])
        return Case(tycon, scrut, ordered)

    def appexpr(self) -> Expr:
        t = self.tok
        if self.at("upper"):
            self.i += 1
            name = t.text
            if name not in self.sig.arity:
                raise self.error(f"unknown constructor {name}", t)
            ar = self.sig.arity[name]
            args = []
            while len(args) < ar and self.starts_aexpr():
                args.append(self.aexpr())
            if len(args) < ar:
                raise self.error(
                    f"unsaturated constructor {name}: needs {ar} arguments, got {len(args)}", t
                )
            head = Con(name, args)
            if self.starts_aexpr():
                raise self.error(f"constructor {name} applied to too many arguments", t)
            return head
        head = self.aexpr()
        while self.starts_aexpr():
            head = App(head, self.aexpr())
        return head

    def starts_aexpr(self) -> bool:
        t = self.tok
        return t.kind in ("lower", "upper") or (t.kind == "sym" and t.text == "(")

    def aexpr(self) -> Expr:
        t = self.tok
        if self.accept("lower"):
            return Var(t.text)
        if self.at("upper"):
            self.i += 1
            if t.text not in self.sig.arity:
                raise self.error(f"unknown constructor {t.text}", t)
            if self.sig.arity[t.text] != 0:
                raise self.error(
                    f"unsaturated constructor {t.text}: needs {self.sig.arity[t.text]} arguments",
                    t,
                )
            return Con(t.text)
        if self.accept("sym", "("):
            e = self.expr()
            self.expect("sym", ")")
            return e
        raise self.error(f"expected an expression, found {t.text or 'end of input'!r}")


def parse_program(text: str, sig: Signature | None = None):
    """Parse declarations and one expression.

    Returns (decls, expr, signature); the signature is the given one (or
    the prelude) extended with the parsed declarations.
    """
    sig = (sig or Signature.prelude()).copy()
    decls, e = _Parser(text, sig).program()
    return decls, e, sig


def parse(text: str, sig: Signature | None = None):
    decls, e, _ = parse_program(text, sig)
    return decls, e


def parse_expr(text: str, sig: Signature | None = None) -> Expr:
    return parse(text, sig)[1]


# ---------------------------------------------------------------------------
# Printing

_ATOM, _APP, _EXPR = 0, 1, 2


def pretty(e: Expr) -> str:
    out = []
    _emit(e, _EXPR, out)
    return "".join(out)


def _emit(e, ctx, out):
    if isinstance(e, Var):
        out.append(e.name)
        return
    if isinstance(e, Con) and not e.args:
        out.append(e.name)
        return
    level = _APP if isinstance(e, (App, Con)) else _EXPR
    paren = level > ctx
    if paren:
        out.append("(")
    if isinstance(e, App):
        if isinstance(e.fun, Con):
            # a constructor head would swallow the argument when reparsed
            out.append("(")
            _emit(e.fun, _EXPR, out)
            out.append(")")
        else:
            _emit(e.fun, _APP, out)
        out.append(" ")
        _emit(e.arg, _ATOM, out)
    elif isinstance(e, Con):
        out.append(e.name)
        for a in e.args:
            out.append(" ")
            _emit(a, _ATOM, out)
    elif isinstance(e, Lam):
        out.append("\\" + e.param + " -> ")
        _emit(e.body, _EXPR, out)
    elif isinstance(e, Seq):
        out.append("seq ")
        _emit(e.first, _ATOM, out)
        out.append(" ")
        _emit(e.second, _ATOM, out)
    elif isinstance(e, Case):
        out.append("case ")
        _emit(e.scrut, _EXPR, out)
        out.append(" of {")
        for i, a in enumerate(e.alts):
            if i:
                out.append("; ")
            out.append(" ".join((a.con,) + tuple(a.vars)) + " -> ")
            _emit(a.rhs, _EXPR, out)
        out.append("}")
    elif isinstance(e, Letrec):
        out.append("letrec ")
        for i, b in enumerate(e.bindings):
            if i:
                out.append(", ")
            out.append(b.var + " = ")
            _emit(b.rhs, _EXPR, out)
        out.append(" in ")
        _emit(e.body, _EXPR, out)
    if paren:
        out.append(")")


def print_expr(e: Expr) -> str:
    return pretty(e)


def print_decls(decls: Iterable[DataDecl]) -> str:
    lines = []
    for d in decls:
        cons = " | ".join(f"{c} {a}" if a else c for c, a in d.constructors)
        lines.append(f"data {d.tycon} = {cons};")
    return "\n".join(lines)


def print_program(decls: Sequence[DataDecl], e: Expr) -> str:
    head = print_decls(decls)
    return (head + "\n" if head else "") + pretty(e)
