import math

import pytest
from hypothesis import given, settings

from lrpgc import bench
from lrpgc.reduce import (
    BLACKHOLE, FUEL_EXHAUSTED, STUCK, WHNF, Done, OpenTermError, demand_positions,
    evaluate, gc_max, is_lrpgc_whnf, is_whnf, label, step, trace_reference,
)
from lrpgc.syntax import (
    App, Binding, Con, Lam, Letrec, PEANO_UNIT, Var, alpha_equal, freshen, numeral,
    parse_expr, pretty, size,
)
from strategies import closed_terms

P = parse_expr


# -- labeling --------------------------------------------------------------

def test_label_lbeta():
    lab = label(P(r"(\x -> x) True"))
    assert lab.rule == "lbeta"
    # the abstraction carries the sub label; its parent is the application
    assert lab.focus_path == (0,)


def test_label_cp_in():
    lab = label(P(r"letrec x = \y -> y in x"))
    assert lab.rule == "cp-in"
    assert [x for x, _ in lab.chain] == ["x"]
    assert lab.target_path == (1,)


def test_label_blackhole():
    assert label(P("letrec x = x in x")).outcome == BLACKHOLE
    assert label(P("letrec x = y, y = x in x")).outcome == BLACKHOLE


def test_label_records_indirection_chain():
    lab = label(P("letrec x = True, y = x in case y of {True -> False; False -> True}"))
    assert lab.rule == "case-in"
    assert [x for x, _ in lab.chain] == ["x", "y"]


def test_open_term_is_an_error():
    with pytest.raises(OpenTermError):
        evaluate(P("f True"))


# -- gc --------------------------------------------------------------------

def test_gc1():
    new, changed = gc_max(P("letrec x = True, y = Nil in x"))
    assert changed and pretty(new) == "letrec x = True in x"


def test_gc2():
    new, changed = gc_max(P("letrec x = True in Nil"))
    assert changed and new == Con("Nil")


def test_gc_keeps_reachable():
    e = P("letrec x = Cons y Nil, y = True in x")
    assert gc_max(e) == (e, False)


def test_gc_ignores_inner_letrec():
    e = P(r"\z -> letrec x = True in z")
    assert gc_max(e) == (e, False)


# -- single steps ----------------------------------------------------------

def test_step_lbeta():
    new, rule = step(P(r"(\x -> x) True"))
    assert rule == "lbeta" and pretty(new) == "letrec x = True in x"


def test_step_seq_c():
    assert step(P("seq True Nil")) == (Con("Nil"), "seq-c")


def test_step_gc_has_priority():
    new, rule = step(P(r"letrec x = True in \y -> y"))
    assert rule == "gc2" and new == Lam("y", Var("y"))


def test_step_done():
    assert step(P(r"\x -> x")) == Done(WHNF)
    assert step(P("letrec x = x in x")) == Done(BLACKHOLE)
    assert step(P("case Nil of {True -> True; False -> False}")) == Done(STUCK)


def test_case_in_creates_fresh_bindings():
    e = P("letrec x = Cons True Nil in case x of {Nil -> False; Cons h t -> h}")
    new, rule = step(e)
    assert rule == "case-in"
    # x = Cons y0 y1 with the arguments moved into new bindings; the case
    # (size 4) is replaced by letrec h = y0, t = y1 in h (size 0)
    assert size(e) == 7 and size(new) == 3
    assert pretty(new) == "letrec x = Cons y0 y1, y0 = True, y1 = Nil in letrec h = y0, t = y1 in h"


# -- WHNF ------------------------------------------------------------------

@pytest.mark.parametrize("text, whnf, gc_whnf", [
    (r"\x -> x", True, True),
    ("letrec x = Cons y z, y = True, z = Nil in x", True, True),
    (r"letrec x = \y -> y in x", False, False),
    ("letrec x = True, y = Nil in x", True, False),
    ("letrec x = Cons y Nil, y = True in x", True, True),
    ("letrec x = True in y", False, False),
])
def test_whnf_shapes(text, whnf, gc_whnf):
    e = P(text)
    assert is_whnf(e) == whnf
    assert is_lrpgc_whnf(e) == gc_whnf


# -- evaluation and measures ------------------------------------------------

def test_identity_application():
    r = evaluate(P(r"(\x -> x) True"))
    assert r.status == WHNF
    assert (r.measures.rln, r.measures.rlnall, r.measures.rln_lcsc, r.measures.spmax) == (1, 1, 1, 3)
    assert pretty(r.final) == "letrec x = True in x"
    assert r.summary() == "WHNF\t1\t1\t1\t3"


def test_blackhole_is_unbounded():
    r = evaluate(P("letrec x = x in x"))
    assert r.status == BLACKHOLE and r.measures.spmax == math.inf
    assert r.summary().endswith("\tinf")


def test_fuel_exhaustion():
    r = evaluate(P(r"letrec f = \x -> f x in f True"), fuel=10)
    assert r.status == FUEL_EXHAUSTED
    assert r.measures.rlnall == 10


def test_stuck_on_type_error():
    r = evaluate(P("case (\\x -> x) of {True -> True; False -> False}"))
    assert r.status == STUCK and r.stuck_reason


def test_hand_trace_cp_and_case():
    # cp-in copies the abstraction, lbeta, then the body is a constructor
    r = evaluate(P(r"letrec i = \y -> y in i (Cons True Nil)"), trace=True)
    rules = [s for s, _ in r.steps if s not in ("gc1", "gc2")]
    assert rules[:2] == ["cp-in", "lbeta"]
    assert r.measures.rln == 1 and r.measures.rln_lcsc == 2


def test_trace_records_sizes_before_steps():
    e = P(r"(\x -> x) True")
    r = evaluate(e, trace=True)
    assert r.steps[0] == ("lbeta", size(e))


def test_gc_steps_are_not_sampled():
    # the initial state is garbage heavy but its outgoing step is gc
    e = P("letrec junk = Cons True (Cons True (Cons True Nil)), x = True in seq x x")
    r = evaluate(e)
    assert r.measures.spmax < size(e)


def test_extra_garbage_does_not_change_spmax():
    e = P(r"letrec f = \a -> a in f (f True)")
    junk = Letrec(list(e.bindings) + [Binding("junk", numeral(20))], e.body)
    assert evaluate(junk).measures == evaluate(e).measures


def test_peano_unit_changes_only_sizes():
    e = P("seq (Succ (Succ Zero)) True")
    a, b = evaluate(e), evaluate(e, opts=PEANO_UNIT)
    assert a.measures.rlnall == b.measures.rlnall == 1
    assert (a.measures.spmax, b.measures.spmax) == (5, 3)


def test_demand_positions_start_at_root():
    assert demand_positions(P(r"(\x -> x) True")) == [(), (0,)]


def test_repeated_evaluation_is_identical():
    e = bench.fold_program("foldr", k=5)
    a, b = evaluate(e, trace=True), evaluate(e, trace=True)
    assert a.steps == b.steps and pretty(a.final) == pretty(b.final)


# -- properties ------------------------------------------------------------

FUEL = 300


@settings(max_examples=200, deadline=None)
@given(closed_terms)
def test_machine_agrees_with_whole_term_stepping(e):
    a = evaluate(e, fuel=FUEL, trace=True)
    b = trace_reference(e, fuel=FUEL)
    assert a.summary() == b.summary()
    assert [s for s, _ in a.steps] == [s for s, _ in b.steps]
    if a.status == WHNF:
        assert alpha_equal(a.final, b.final)


@settings(max_examples=200, deadline=None)
@given(closed_terms)
def test_measure_laws(e):
    r = evaluate(e, fuel=FUEL)
    m = r.measures
    assert m.rln <= m.rln_lcsc <= m.rlnall
    if r.status == WHNF:
        assert m.spmax >= size(r.final)
        assert is_lrpgc_whnf(r.final)
    if r.status in (BLACKHOLE, STUCK):
        assert m.spmax == math.inf


@settings(max_examples=150, deadline=None)
@given(closed_terms)
def test_alpha_invariance(e):
    a = evaluate(e, fuel=FUEL)
    b = evaluate(freshen(e), fuel=FUEL)
    assert a.status == b.status and a.measures == b.measures


@settings(max_examples=150, deadline=None)
@given(closed_terms)
def test_step_is_deterministic(e):
    a, b = step(e), step(e)
    if isinstance(a, Done):
        assert a == b
    else:
        assert a[1] == b[1] and pretty(a[0]) == pretty(b[0])
        assert (step(e) == Done(WHNF)) == is_lrpgc_whnf(e)


def test_whnf_stability_examples():
    for text in (r"\x -> x", "letrec x = True, y = Nil in x", "True",
                 "letrec x = Cons x x in x"):
        e = P(text)
        assert (step(e) == Done(WHNF)) == is_lrpgc_whnf(e)


def test_app_of_constructor_is_stuck():
    assert evaluate(App(Con("True"), Con("True"))).status == STUCK
