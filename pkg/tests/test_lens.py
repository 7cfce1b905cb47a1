from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roundcheck.grades import BEAN_CONFIG
from roundcheck.interp import InlV, PairV
from roundcheck.lens import (
    LensError, check_lens_laws, compose, identity, prim_backward, prim_lens, tensor, witness,
    witness_from_json, witness_sweep,
)

from conftest import bean_file

eps = BEAN_CONFIG.eps
F = Fraction


@pytest.mark.parametrize("name", ["add", "sub", "dmul"])
def test_rational_primitives_are_exact(name):
    report = check_lens_laws(prim_lens(name), samples=2000, seed=3)
    assert report.passed and report.exact


@pytest.mark.parametrize("name", ["mul", "div"])
def test_root_primitives_within_tolerance(name):
    report = check_lens_laws(prim_lens(name), samples=2000, seed=3)
    assert report.passed
    assert report.max_residual <= 1e-30


def test_prim_bounds():
    assert prim_lens("add").bounds == (eps, eps)
    assert prim_lens("mul").bounds == (eps / 2, eps / 2)
    assert prim_lens("dmul").bounds == (0, eps)
    assert prim_lens("dmul").discrete == (True, False)


nonzero = st.fractions(F(1, 100), F(100), max_denominator=1000)


@given(nonzero, nonzero, nonzero)
def test_backward_hits_the_target(a, b, y):
    x1, x2 = prim_backward("add", (a, b), y)
    assert x1 + x2 == y and x1 / x2 == a / b
    x1, x2 = prim_backward("dmul", (a, b), y)
    assert x1 == a and x1 * x2 == y


def test_composition_adds_bounds():
    lens = compose(tensor(prim_lens("dmul"), prim_lens("dmul")), prim_lens("add"))
    assert lens.bounds == (eps, 2 * eps, eps, 2 * eps)
    report = check_lens_laws(lens, samples=500, seed=1)
    assert report.passed and report.exact


def test_identity_laws():
    assert check_lens_laws(identity(3), samples=100).exact


def test_composition_checks_arity():
    with pytest.raises(LensError):
        compose(prim_lens("add"), prim_lens("add"))


def test_dotprod_witness():
    # mul splits its error through a square root, so equality holds to working precision
    program = bean_file("dotprod2.bean")
    rep = witness_from_json(program, "DotProd2", {"x": ["1.5", "2.25"], "y": ["0.1", "3"]})
    assert rep.passed and rep.residual <= 1e-100
    assert rep.slot_rp["x"] > 0 and rep.slot_rp["y"] > 0


def test_dotprod_sweep():
    failures, worst, ratios = witness_sweep(bean_file("dotprod2.bean"), "DotProd2", samples=300, seed=2)
    assert failures == 0 and worst <= 1e-100
    assert set(ratios) == {"x", "y"} and max(ratios.values()) <= 1


@pytest.mark.parametrize("file, decl", [
    ("horner.bean", "Horner'"),
    ("polyval.bean", "PolyVal"),
    ("smatvecmul.bean", "SMatVecMul"),
    ("svecadd.bean", "SVecAdd"),
])
def test_corpus_sweeps(file, decl):
    failures, _, ratios = witness_sweep(bean_file(file), decl, samples=100, seed=4)
    assert failures == 0
    assert all(r <= 1 for r in ratios.values())


def test_linsolve_sweep_on_positive_inputs():
    failures, _, _ = witness_sweep(bean_file("linsolve.bean"), "LinSolve", samples=100, seed=4,
                                   signed=False)
    assert failures == 0


def test_division_by_zero_witness():
    program = bean_file("linsolve.bean")
    rep = witness(program, "LinSolve", {
        "_arg1": PairV(PairV(F(0), F(0)), PairV(F(1), F(2))),
        "_arg2": PairV(F(1), F(1)),
    })
    assert rep.passed and not isinstance(rep.fp_result, InlV)


def test_json_report():
    rep = witness_from_json(bean_file("dotprod2.bean"), "DotProd2", {"x": [1, 2], "y": [3, 4]})
    out = rep.to_json()
    assert out["passed"] and out["params"]["x"]["bound"] == "3/2eps (1.67e-16)"
    assert out["discrete_unchanged"] == []


def test_bad_witness_input():
    with pytest.raises(LensError):
        witness_from_json(bean_file("dotprod2.bean"), "DotProd2", {"x": 1, "y": [3, 4]})


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_witness_is_seed_independent(seed):
    failures, _, _ = witness_sweep(bean_file("dotprod2.bean"), "DotProd2", samples=5, seed=seed)
    assert failures == 0
