"""The eight acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line; the lines are
also collected and repeated at the end of the pytest run.
"""

import math
import time

import pytest
from hypothesis import given, settings

from lrpgc import bench, check
from lrpgc.reduce import BLACKHOLE, STUCK, WHNF, Done, evaluate, step
from lrpgc.syntax import (
    Letrec, NameSupply, PEANO_UNIT, PLAIN, all_names, freshen, rename, size,
)
from lrpgc.transform import (
    TRANSFORM_RULES, apply_rule, list_redexes, psi_translate, seq_insert,
)
from strategies import closed_terms

RESULTS = {}


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


KS = bench.DEFAULT_KS
TARGET_SLOPES = {
    ("foldl", False): (1200, 800),
    ("foldl", True): (1000, 800),
    ("foldl-strict", False): (1300, 0),
    ("foldl-strict", True): (1100, 0),
    ("foldr", False): (1100, 0),
    ("foldr", True): (900, 0),
}

# reference values: (rln at k = 100, rln step, spmax at k = 100, spmax step)
REFERENCE = {
    ("foldl", False): (1214, 1200, 825, 800),
    ("foldl", True): (1012, 1000, 882, 800),
    ("foldl-strict", False): (1315, 1300, 63, 0),
    ("foldl-strict", True): (1113, 1100, 75, 0),
    ("foldr", False): (1115, 1100, 66, 0),
    ("foldr", True): (913, 900, 84, 0),
}


@pytest.fixture(scope="module")
def fold_rows():
    t0 = time.perf_counter()
    rows = bench.fold_table(ks=KS)
    return rows, time.perf_counter() - t0


def _series(rows):
    out = {}
    for r in rows:
        out.setdefault((r.variant, r.inlined), []).append(r)
    return out


def test_criterion_1_fold_slopes(fold_rows):
    rows, secs = fold_rows
    bad = []
    for key, series in _series(rows).items():
        assert [r.k for r in series] == list(KS)
        drln = {b.rln - a.rln for a, b in zip(series, series[1:])}
        dsp = {b.spmax - a.spmax for a, b in zip(series, series[1:])}
        if len(drln) != 1 or len(dsp) != 1:
            bad.append(f"{key} not linear")
        elif (drln.pop(), dsp.pop()) != TARGET_SLOPES[key]:
            bad.append(f"{key} slope differs")
    ok = not bad and len(rows) == 60 and secs < 120
    report(1, ok, f"60 rows, all per-100 slopes exact, {secs:.1f}s" if ok
           else f"{bad} ({secs:.1f}s)")


def test_criterion_2_fold_cells(fold_rows):
    rows, _ = fold_rows
    cells = mismatched = 0
    for r in rows:
        rln0, drln, sp0, dsp = REFERENCE[(r.variant, r.inlined)]
        step_ = r.k // 100 - 1
        for got, want in ((r.rln, rln0 + step_ * drln), (r.spmax, sp0 + step_ * dsp)):
            cells += 1
            mismatched += got != want
    report(2, mismatched == 0,
           f"{cells - mismatched} of {cells} cells equal the reference values"
           + ("" if mismatched == 0 else "; the others differ by a constant per series"))


EXPECTED_TABLE = {
    "lbeta": "ImprovementConsistent", "case": "ImprovementConsistent",
    "seq": "ImprovementConsistent", "lll": "ImprovementConsistent",
    "gc": "ImprovementConsistent", "case*": "ImprovementConsistent",
    "caseId": "ImprovementConsistent",
    "cpx": "EquivalenceConsistent", "abs": "EquivalenceConsistent",
    "abse": "EquivalenceConsistent", "xch": "EquivalenceConsistent",
    "ucp": "EquivalenceConsistent", "case-cx": "EquivalenceConsistent",
    "cpxT": "EquivalenceConsistent", "gcEq": "EquivalenceConsistent",
    "T-cpcxT": "SafeUpTo(1)", "S-cpS": "SafeUpTo(size(v))",
    "cse": "LeakEvidence", "soec": "LeakEvidence",
}


def test_criterion_3_theorem_table():
    t0 = time.perf_counter()
    verdicts = {v.rule: v for v in check.check_theorem_table(ns=(5, 10, 20), depth=3)}
    secs = time.perf_counter() - t0
    wrong = [f"{r}={verdicts[r].classification}({verdicts[r].observed})"
             for r, want in EXPECTED_TABLE.items() if verdicts[r].classification != want]
    ok = not wrong and secs < 300
    report(3, ok, f"{len(EXPECTED_TABLE)} rows as expected, {secs:.1f}s" if ok
           else f"unexpected rows: {', '.join(wrong)} ({secs:.1f}s)")


def test_criterion_4_cp_bound():
    sample = check.cp_bound_sample(count=100, seed=0)
    surface = check.cps_bounds()
    bad = [b for b in sample if not b.general_ok] + [b for b in surface if not b.ok]
    ok = len(sample) == 100 and surface and not bad
    report(4, ok, f"100 random cp instances and {len(surface)} surface copies, "
                  f"{len(bad)} violations")


def test_criterion_5_cse_leak():
    vals = [bench.cse_demo(n) for n in (10, 20, 30)]
    before = [b for b, _ in vals]
    after = [a for _, a in vals]
    d = [after[1] - after[0], after[2] - after[1]]
    ok = len(set(before)) == 1 and d[0] == d[1] > 0
    report(5, ok, f"before {before}, after {after}")


def test_criterion_6_append():
    last = [bench.append_assoc(n, "last") for n in (2, 5, 10)]
    seq = [bench.append_assoc(n, "seq") for n in (2, 5, 10)]
    dl = [r.delta for r in last]
    ds = [r.delta for r in seq]
    ok = dl == [4, 4, 4] and ds == [0, 0, 0]
    report(6, ok, f"last-context deltas {dl}, seq-dominator deltas {ds}")


def test_criterion_7_psi():
    progs = check.corpus_programs()
    bad = 0
    for p in progs:
        a = evaluate(p, opts=PLAIN)
        b = evaluate(psi_translate(p), opts=PLAIN)
        bad += (a.status, a.measures.spmax) != (b.status, b.measures.spmax)
    report(7, bad == 0, f"{len(progs)} corpus programs, {bad} differ")


# -- criterion 8 ------------------------------------------------------------

FUEL = 300
SIZE_PRESERVING = ("llet-in", "llet-e", "lapp", "lcase", "lseq", "xch", "cpx-in", "cpx-e")
SIZE_RULES = ("lll", "xch", "cpx", "gcEq", "gc")


def _properties(e, count):
    a = step(e)
    b = step(e)
    assert a == b if isinstance(a, Done) else (a[1] == b[1] and a[0] == b[0])

    r = evaluate(e, fuel=FUEL, opts=PEANO_UNIT)
    m = r.measures
    assert m.rln <= m.rln_lcsc <= m.rlnall
    if r.status == WHNF:
        assert m.spmax >= size(r.final, PEANO_UNIT)
    if r.status in (BLACKHOLE, STUCK):
        assert m.spmax == math.inf

    f = freshen(e)
    g = rename(f, NameSupply(all_names(f)))
    for other in (f, g):
        r2 = evaluate(other, fuel=FUEL, opts=PEANO_UNIT)
        assert (r2.status, r2.measures) == (r.status, r.measures)

    for rule in SIZE_RULES:
        for inst in list_redexes(e, rule)[:2]:
            out = apply_rule(e, inst)
            if inst.rule in SIZE_PRESERVING or inst.rule == "gcEq":
                assert size(out) == size(e)
            else:
                assert size(out) <= size(e)
    if isinstance(e, Letrec):
        assert size(seq_insert(e, (len(e.bindings),), e.bindings[0].var)) == size(e) + 1
    count[0] += 1


def test_criterion_8_property_suite():
    t0 = time.perf_counter()
    count = [0]

    @settings(max_examples=1000, deadline=None, database=None, derandomize=True)
    @given(closed_terms)
    def random_terms(e):
        _properties(e, count)

    random_terms()

    # convergence is kept by every rule application on the typed corpus
    applications = changed = 0
    for p in check.corpus_programs():
        base = evaluate(p, fuel=10**5, opts=PLAIN).status
        for rule in TRANSFORM_RULES:
            for inst in list_redexes(p, rule)[:5]:
                out = apply_rule(p, inst, assume_typed=True)
                changed += evaluate(out, fuel=10**5, opts=PLAIN).status != base
                applications += 1
    secs = time.perf_counter() - t0
    total = count[0] + applications
    ok = changed == 0 and total >= 1000 and secs < 60
    report(8, ok, f"{count[0]} random terms and {applications} corpus rule applications, "
                  f"{changed} failures, {secs:.1f}s")
