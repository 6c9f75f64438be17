import io
import subprocess
import sys

import pytest

from lrpgc import cli


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out)
    return code, out.getvalue()


def test_eval_identity():
    assert run("eval", "-e", r"(\x -> x) True") == (0, "WHNF\t1\t1\t1\t3\n")


def test_eval_and_measure_agree(tmp_path):
    f = tmp_path / "p.lrp"
    f.write_text(r"letrec f = \a -> a in f (f True)")
    _, a = run("eval", str(f))
    _, b = run("measure", str(f))
    assert b.splitlines()[0] == a.strip()
    assert b.splitlines()[1].startswith("size\t")


def test_exit_codes():
    assert run("eval", "-e", "letrec x = x in x")[0] == 3
    assert run("--fuel", "5", "eval", "-e", r"letrec f = \x -> f x in f True")[0] == 2
    assert run("eval", "-e", "((")[0] == 1
    assert run("eval", "-e", "case Nil of {True -> True; False -> False}")[0] == 1
    assert run("eval", "missing-file.lrp")[0] == 1


def test_bad_flags_are_user_errors():
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval", "--bogus"])
    assert exc.value.code == 1


def test_fuel_from_environment(monkeypatch):
    monkeypatch.setenv("LRPGC_FUEL", "5")
    assert run("eval", "-e", r"letrec f = \x -> f x in f True")[0] == 2


def test_trace():
    code, out = run("trace", "-e", r"(\x -> x) True")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "0\tlbeta\t3" and lines[-1] == "WHNF\t1\t1\t1\t3"


def test_redexes():
    code, out = run("redexes", "-e", "letrec x = y, z = Cons x Nil in z", "--rule", "cpx-e")
    assert code == 0 and out.startswith("cpx-e\t.\t")


def test_transform():
    assert run("transform", "-e", "letrec x = True in seq x Nil", "--rule", "ucp3", "--pos", ".") \
        == (0, "seq True Nil\n")


def test_transform_case_id_needs_flag():
    text = "case s of {True -> True; False -> False}"
    assert run("transform", "-e", text, "--rule", "caseId", "--pos", ".")[0] == 1
    assert run("transform", "-e", text, "--rule", "caseId", "--pos", ".", "--assume-typed") \
        == (0, "s\n")


def test_transform_no_match():
    assert run("transform", "-e", "True", "--rule", "lbeta", "--pos", ".")[0] == 1


def test_psi():
    assert run("psi", "-e", r"(\x -> x) True") == (0, "letrec y0 = True in (\\x -> x) y0\n")


def test_bench_fold_row():
    code, out = run("bench", "fold", "--variant", "foldl", "--k", "100", "--inline", "plain")
    assert code == 0
    assert out.splitlines() == ["variant\tinlined\tk\trln\tspmax", "foldl\tfalse\t100\t1206\t811"]


def test_int_list():
    assert cli.int_list("100..300:100") == [100, 200, 300]
    assert cli.int_list("2,5") == [2, 5]


def test_bench_cse_and_append():
    assert run("bench", "cse", "--n", "10,20")[1] == "n\tbefore\tafter\n10\t39\t53\n20\t39\t73\n"
    out = run("bench", "append", "--n", "2")[1].splitlines()
    assert out[1] == "2\tlast\t56\t52\t4" and out[2].endswith("\t0")


def test_check_table_rows():
    code, out = run("check", "table", "--rows", "gc,ucp")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("rule\tclassification")
    assert lines[1].split("\t")[:2] == ["gc", "ImprovementConsistent"]
    assert lines[2].split("\t")[:2] == ["ucp", "EquivalenceConsistent"]


def test_check_pair(tmp_path):
    a, b = tmp_path / "a.lrp", tmp_path / "b.lrp"
    a.write_text("letrec a = Cons True Nil, b = a in last b")
    b.write_text("letrec a = Cons True Nil, b = a in last a")
    code, out = run("check", "pair", str(a), str(b), "--role", "bool", "--families", "reduction")
    assert code == 0 and out.splitlines()[1].split("\t")[1] == "EquivalenceConsistent"


def test_output_is_byte_identical():
    argv = ("check", "cp-bound", "--samples", "5", "--seed", "3")
    assert run(*argv) == run(*argv)


def test_console_script():
    p = subprocess.run([sys.executable, "-m", "lrpgc.cli", "eval", "-e", r"(\x -> x) True"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout == "WHNF\t1\t1\t1\t3\n"
