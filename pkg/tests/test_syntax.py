import pytest
from hypothesis import given, settings

from lrpgc import bench
from lrpgc.syntax import (
    App, Binding, Case, Con, Lam, Letrec, ParseError, PathError, PEANO_UNIT, Seq, Var,
    all_names, alpha_equal, format_path, free_vars, freshen, numeral, parse, parse_expr,
    parse_path, positions, pretty, replace_at, size, subterm,
)
from strategies import closed_terms


def test_parse_smallest_terms():
    assert parse_expr(r"\x -> x") == Lam("x", Var("x"))
    assert parse_expr("letrec x = True in x") == Letrec([Binding("x", Con("True"))], Var("x"))


def test_print_smallest_terms():
    assert pretty(Lam("x", Var("x"))) == r"\x -> x"
    assert pretty(Con("True")) == "True"


def test_multi_parameter_lambda_sugar():
    assert parse_expr(r"\x y -> x") == Lam("x", Lam("y", Var("x")))


def test_data_declarations():
    decls, e = parse("data T = A | B 2; case A of {B x y -> False; A -> True}")
    assert decls[0].constructors == (("A", 0), ("B", 2))
    # alternatives are put in declaration order
    assert [a.con for a in e.alts] == ["A", "B"]


@pytest.mark.parametrize("text, fragment", [
    ("True True", "too many arguments"),
    ("Cons True", "unsaturated"),
    ("case True of {True -> False}", "missing alternative False"),
    ("case True of {True -> True; True -> True; False -> False}", "duplicated"),
    ("letrec x = True, x = False in x", "duplicate letrec binder"),
    ("Foo", "unknown constructor"),
    ("(", "expected an expression"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_expr(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError, match=r"^2:\d+:"):
        parse_expr("letrec x = True\n in in")


@pytest.mark.parametrize("name", ["foldl", "foldl_strict", "foldr", "foldl_inlined",
                                  "foldr_inlined", "library", "append", "cse_before"])
def test_round_trip_on_corpus(name):
    e = bench.load(name)
    assert alpha_equal(parse_expr(pretty(e)), e)


def test_free_vars():
    assert free_vars(Lam("x", Var("x"))) == set()
    assert free_vars(Letrec([Binding("x", Var("y"))], Var("x"))) == {"y"}


def test_free_vars_case_scoping():
    e = parse_expr("case zs of {Nil -> a; Cons h t -> App h t b}".replace("App ", ""))
    # hand computed: h and t are bound by the pattern only
    assert free_vars(e) == {"zs", "a", "b"}


def test_free_vars_letrec_is_recursive():
    e = parse_expr("letrec f = \\x -> f (g x), g = \\y -> y in f u")
    assert free_vars(e) == {"u"}


def test_size_clauses():
    assert size(Var("x")) == 0
    assert size(Lam("x", Var("x"))) == 1
    assert size(Letrec([Binding("x", Con("Cons", [Var("y"), Con("Nil")]))], Var("x"))) == 2
    assert size(App(Var("f"), Var("x"))) == 1
    assert size(Seq(Var("f"), Con("True"))) == 2
    # case: 1 + scrutinee + each alternative 1 + rhs
    assert size(parse_expr("case x of {True -> False; False -> x}")) == 1 + 0 + 2 + 1


def test_size_peano_unit():
    assert size(parse_expr("Succ (Succ Zero)"), PEANO_UNIT) == 1
    assert size(parse_expr("Succ (Succ Zero)")) == 3
    assert size(numeral(500), PEANO_UNIT) == 1
    # only closed numerals are compressed
    assert size(parse_expr("Succ (Succ n)"), PEANO_UNIT) == 2
    assert size(parse_expr("Cons (Succ Zero) Nil"), PEANO_UNIT) == 3


def test_size_zero_iff_variables_only():
    assert size(parse_expr("letrec x = y, y = z in x")) == 0
    assert size(parse_expr("letrec x = y in True")) == 1


def test_freshen_resolves_shadowing():
    assert pretty(freshen(parse_expr(r"\x -> \x -> x"))) == r"\x0 -> \x1 -> x1"


def test_freshen_is_deterministic():
    e = bench.load("foldl")
    assert pretty(freshen(e)) == pretty(freshen(e))


@settings(max_examples=150, deadline=None)
@given(closed_terms)
def test_freshen_preserves_size_and_free_vars(e):
    f = freshen(e)
    assert size(f) == size(e)
    assert size(f, PEANO_UNIT) == size(e, PEANO_UNIT)
    assert free_vars(f) == free_vars(e)
    assert alpha_equal(f, e)
    binders = [n for p, t in positions(f) for n in _binders(t)]
    assert len(binders) == len(set(binders))


def _binders(t):
    if isinstance(t, Lam):
        return [t.param]
    if isinstance(t, Letrec):
        return list(t.binders)
    if isinstance(t, Case):
        return [v for a in t.alts for v in a.vars]
    return []


@settings(max_examples=150, deadline=None)
@given(closed_terms)
def test_round_trip_random(e):
    assert alpha_equal(parse_expr(pretty(e)), e)


def test_paths():
    e = parse_expr("letrec x = True, y = Cons x Nil in y")
    assert subterm(e, (1, 1)) == Con("Nil")
    assert subterm(e, (2,)) == Var("y")
    assert pretty(replace_at(e, (2,), Var("x"))) == "letrec x = True, y = Cons x Nil in x"
    assert parse_path("1.0") == (1, 0)
    assert format_path(()) == "."
    with pytest.raises(PathError):
        subterm(e, (5,))


def test_alpha_equal_distinguishes_free_names():
    assert alpha_equal(parse_expr(r"\x -> x"), parse_expr(r"\y -> y"))
    assert not alpha_equal(parse_expr(r"\x -> a"), parse_expr(r"\x -> b"))
    assert "a" in all_names(parse_expr(r"\x -> a"))
