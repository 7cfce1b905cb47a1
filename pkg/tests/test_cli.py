import json

import pytest

from roundcheck.cli import main

from conftest import CORPUS


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_nfz_check(capsys):
    code, out, _ = run(capsys, "nfz", "check", CORPUS / "nfz" / "ma.nfz")
    assert code == 0
    assert "MA : num ⊸ num ⊸ num ⊸ M[2u]num" in out and "2u (4.44e-16)" in out


def test_nfz_check_json(capsys):
    code, out, _ = run(capsys, "nfz", "check", "--json", CORPUS / "nfz" / "horner2_with_error.nfz")
    assert code == 0
    doc = json.loads(out)
    assert any(d["decl"] == "Horner2_with_error" for d in doc["decls"])


def test_type_error_location(capsys):
    path = CORPUS / "negative" / "exp2_foo.nfz"
    code, _, err = run(capsys, "nfz", "check", path)
    assert code == 1
    assert f"{path}:10:3:" in err and "expected 1.11e-16 ≤ 2.17e-19" in err


def test_bean_check(capsys):
    code, out, _ = run(capsys, "bean", "check", CORPUS / "bean" / "smatvecmul.bean")
    assert code == 0
    assert "SMatVecMul" in out and "M: 4eps" in out and "v: discrete" in out


def test_bean_linearity_error(capsys):
    path = CORPUS / "negative" / "dup_linear.bean"
    code, _, err = run(capsys, "bean", "check", path)
    assert code == 1 and "4:12:" in err and "'x' is used more than once" in err


def test_nfz_validate(capsys):
    code, out, _ = run(capsys, "nfz", "validate", CORPUS / "nfz" / "horner2.nfz",
                       "--samples", 50, "--seed", 3, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and doc["seed"] == 3


def test_bean_validate(capsys):
    code, out, _ = run(capsys, "bean", "validate", CORPUS / "bean" / "dotprod2.bean",
                       "--samples", 50)
    assert code == 0 and out.startswith("DotProd2: ok")


def test_bean_witness(capsys, tmp_path):
    data = tmp_path / "in.json"
    data.write_text('{"x": [1, 2], "y": [3, 4]}')
    code, out, _ = run(capsys, "bean", "witness", CORPUS / "bean" / "dotprod2.bean",
                       "--input", f"@{data}")
    assert code == 0 and json.loads(out)["passed"]


def test_bench_markdown(capsys):
    code, out, _ = run(capsys, "bench", "--suite", "fz", "--family", "PolyVal",
                       "--format", "markdown", "--no-timing")
    assert code == 0
    assert "| PolyVal100 | 5150 | 2.24e-14 | rel(101eps) | 2.24e-14 | ✓ |" in out


def test_bench_sizes(capsys):
    code, out, _ = run(capsys, "bench", "--suite", "std", "--family", "Horner", "--sizes", 3, 4,
                       "--no-timing")
    assert code == 0
    assert [r["benchmark"] for r in json.loads(out)["results"]] == ["Horner3", "Horner4"]


def test_missing_file(capsys):
    code, _, err = run(capsys, "nfz", "check", "/nonexistent.nfz")
    assert code == 2 and err


def test_bad_box():
    with pytest.raises(SystemExit):
        main(["nfz", "validate", str(CORPUS / "nfz" / "ma.nfz"), "--box", "5,1"])
