import json

import pytest

from oracles import PROGRAMS
from sdt import datastring as ds, machine as mc
from sdt.cli import main
from sdt.func import check_single_pass, parse_func
from sdt.run import run_sdst

P = PROGRAMS


def sdt(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out + out.err


def report(capsys, *args):
    code = main(["--json"] + [str(a) for a in args])
    doc = json.loads(capsys.readouterr().out)
    return code, doc


@pytest.fixture
def pair(tmp_path):
    path = tmp_path / "input.json"
    ds.dump((("a", 1), ("a", 2)), path)
    return path


@pytest.fixture
def empty(tmp_path):
    path = tmp_path / "empty.json"
    ds.dump((), path)
    return path


def test_run_reverse_imp(capsys, pair):
    code, out = sdt(capsys, "run", P / "reverse.imp", pair)
    assert code == 0
    assert json.loads(out) == [["a", 2], ["a", 1]]


def test_run_insert_on_empty(capsys, empty):
    code, out = sdt(capsys, "run", P / "s4.sdst", empty)
    assert code == 1
    assert out.strip() == "undefined (no output at state q0)"


def test_run_broken_machine(capsys, pair):
    code, out = sdt(capsys, "run", P / "broken.sdst", pair)
    assert code == 2
    assert "copyless" in out and "unknown-state" in out


def test_run_with_parameters(capsys, tmp_path):
    w = tmp_path / "w.json"
    ds.dump((("a", 1), ("a", 2), ("a", 1)), w)
    code, doc = report(capsys, "run", P / "delete.imp", w, "--param", "v=1")
    assert code == 0 and doc["output"] == [["a", 2]]
    assert doc["transcript"] == ["outputs: b=True"]
    code, _ = sdt(capsys, "run", P / "delete.imp", w)
    assert code == 2


def test_run_encoded(capsys, tmp_path):
    w = tmp_path / "w.json"
    ds.dump((("param", 1), ("a", 1)), w)
    code, doc = report(capsys, "run", P / "delete.imp", w, "--encoded")
    assert code == 0 and doc["output"] == [["true", 1]]


def test_language_override(capsys, tmp_path, pair):
    src = tmp_path / "reverse.txt"
    src.write_text((P / "reverse.fun").read_text())
    assert sdt(capsys, "run", src, pair)[0] == 2
    assert sdt(capsys, "run", src, pair, "--lang", "fun")[0] == 0


def test_bad_input_file(capsys, tmp_path):
    w = tmp_path / "w.json"
    w.write_text("not json")
    assert sdt(capsys, "run", P / "s1.sdst", w)[0] == 2
    assert sdt(capsys, "run", P / "s1.sdst", tmp_path / "missing.json")[0] == 2


def test_compile_delete(capsys, tmp_path):
    out = tmp_path / "delete.sdst"
    code, _ = sdt(capsys, "compile", P / "delete.imp", "--to", "sdst", "-o", out)
    assert code == 0
    S = mc.load(out)
    assert len(S.data_vars) == 1 + 3
    assert mc.validate_sdst(S) == []
    assert run_sdst(S, (("param", 1), ("a", 1))) == (("true", 1),)


def test_compile_eliminate_eps(capsys, tmp_path):
    out = tmp_path / "r.sdst"
    assert sdt(capsys, "compile", P / "reverse.imp", "--eliminate-eps", "-o", out)[0] == 0
    assert not mc.load(out).has_eps


def test_codegen_to_fun_passes_restrictions(capsys, tmp_path):
    out = tmp_path / "s1.fun"
    assert sdt(capsys, "codegen", P / "s1.sdst", "--to", "fun", "-o", out)[0] == 0
    assert check_single_pass(parse_func(out.read_text())).ok
    assert sdt(capsys, "check-restrictions", out)[0] == 0


def test_codegen_to_imp(capsys, tmp_path):
    out = tmp_path / "s4.imp"
    assert sdt(capsys, "codegen", P / "s4.sdst", "--to", "imp", "-o", out)[0] == 0
    assert sdt(capsys, "equiv", out, P / "s4.sdst")[0] == 0


def test_compile_bad_fun(capsys):
    code, out = sdt(capsys, "compile", P / "bad.fun")
    assert code == 2
    assert "recursion (i)" in out


def test_check_restrictions_verdicts(capsys):
    assert sdt(capsys, "check-restrictions", P / "bad.fun")[0] == 1
    assert sdt(capsys, "check-restrictions", P / "delete.imp")[0] == 0


def test_equiv_reverse_programs(capsys):
    code, out = sdt(capsys, "equiv", P / "reverse.imp", P / "reverse.fun")
    assert code == 0 and out.strip() == "Equivalent"


def test_equiv_insert_mutant_witness(capsys, tmp_path):
    wpath = tmp_path / "witness.json"
    code, doc = report(capsys, "equiv", P / "s4.sdst", P / "s4_mutant.sdst", "--witness", wpath)
    assert code == 1 and doc["verdict"].startswith("NotEquivalent")
    w = ds.load(wpath)
    assert [list(s) for s in w] == doc["witnesses"][0]
    c1, d1 = report(capsys, "run", P / "s4.sdst", wpath)
    c2, d2 = report(capsys, "run", P / "s4_mutant.sdst", wpath)
    assert (c1, d1["output"]) != (c2, d2["output"])


def test_equiv_mixed_languages_with_parameters(capsys, tmp_path):
    assert sdt(capsys, "equiv", P / "delete_list.imp", P / "delete.fun")[0] == 0
    wpath = tmp_path / "w.json"
    assert sdt(capsys, "equiv", P / "delete.imp", P / "delete.fun", "--witness", wpath)[0] == 1
    c1, d1 = report(capsys, "run", P / "delete.imp", wpath, "--encoded")
    c2, d2 = report(capsys, "run", P / "delete.fun", wpath, "--encoded")
    assert (c1, d1["output"]) != (c2, d2["output"])


def test_equiv_alphabet_mismatch(capsys):
    assert sdt(capsys, "equiv", P / "s1.sdst", P / "delete.fun", "--alphabet", "b")[0] == 2


def test_hoare(capsys, tmp_path):
    assert sdt(capsys, "hoare", P / "s4.sdst", "--post", P / "l1.sdsa")[0] == 0
    wpath = tmp_path / "w.json"
    code, doc = report(capsys, "hoare", P / "s1.sdst", "--post", P / "l1.sdsa", "--witness", wpath)
    assert code == 1 and len(ds.load(wpath)) == 2
    code, doc = report(capsys, "hoare", P / "s4.sdst", "--total", "--mode", "bounded")
    assert code == 1 and doc["witnesses"] == [[]]
    assert sdt(capsys, "hoare", P / "s1.sdst", "--pre", P / "s1.sdst")[0] == 2


def test_assert(capsys, tmp_path):
    code, out = sdt(capsys, "assert", "--kind", "cycle", P / "reverse.imp", "--pre", P / "all.sdsa")
    assert code == 0 and out.strip() == "Safe"
    wpath = tmp_path / "w.json"
    assert sdt(capsys, "assert", "--kind", "nil", "--x", "prev", P / "nilderef.imp", "--witness", wpath)[0] == 1
    code, out = sdt(capsys, "run", P / "nilderef.imp", wpath, "--encoded")
    assert code == 1 and "prev" in out
    assert sdt(capsys, "assert", "--kind", "alias", "--x", "result", "--y", "nope", P / "reverse.imp")[0] == 2


def test_usage_errors(capsys):
    assert sdt(capsys)[0] == 2
    assert sdt(capsys, "frobnicate")[0] == 2
    assert sdt(capsys, "run", P / "s1.sdst")[0] == 2


def test_reports_are_deterministic(capsys):
    args = ("equiv", P / "s4.sdst", P / "s4_mutant.sdst")
    _, a = report(capsys, *args)
    _, b = report(capsys, *args)
    a.pop("timing"), b.pop("timing")
    assert a == b


CORPUS_FILES = sorted(p.name for p in P.iterdir() if p.suffix in (".imp", ".fun", ".sdst", ".sdsa"))
INVALID = {"broken.sdst", "bad.fun"}


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_exit_codes_on_corpus(capsys, name, pair, empty):
    code, _ = sdt(capsys, "validate", P / name)
    assert code == (1 if name in INVALID else 0)
    params = {"delete.imp": ["v=1"], "delete_list.imp": ["v=1"], "delete.fun": ["d=1"], "delete_flag.fun": ["d=1"],
              "retag.imp": ["t=a", "keep=1"], "first_big.fun": ["t=1", "s=a", "keep=0"],
              "parity.fun": ["t=1", "p=0"]}.get(name, [])
    flags = [x for v in params for x in ("--param", v)]
    for w in (pair, empty):
        code, doc = report(capsys, "run", P / name, w, *flags)
        if name in INVALID:
            assert code == 2
        else:
            assert code in (0, 1)
            assert (code == 0) == (doc["output"] is not None)
