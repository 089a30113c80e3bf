from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from f2deform.groebner import (buchberger, certify_empty, normal_form, s_polynomial_residuals)
from f2deform.symbolic import SparseExpr, mono, parse


def gens(*texts):
    return [parse(s) for s in texts]


def test_textbook_grevlex_basis():
    gb = buchberger(gens("x^3 - 2 x y", "x^2 y - 2 y^2 + x"))
    assert sorted(map(str, gb.generators)) == sorted(
        ["1 * x^2", "1 * y^1 x^1", "1 * y^2 + -1/2 * x^1"])


def test_textbook_lex_basis():
    gb = buchberger(gens("x^3 - 2 x y", "x^2 y - 2 y^2 + x"), order="lex")
    assert gb.generators == gens("x - 2 y^2", "y^3")


def test_linear_system_reduces_to_solution():
    gb = buchberger(gens("x + y - 3", "x - y - 1"), order="lex")
    assert gb.generators == gens("x - 2", "y - 1")


def test_certify_empty_inconsistent():
    cert = certify_empty(gens("x y - 1", "x"))
    assert cert.empty and cert.basis.is_unit()
    assert certify_empty([SparseExpr.const(Fraction(1, 2)), SparseExpr.const(-3)]).empty


def test_certify_empty_is_about_complex_points():
    # no rational (or real) root, but complex roots exist: not certified empty
    assert not certify_empty(gens("x^2 + 1")).empty
    assert not certify_empty(gens("x^2 - 2", "y - x")).empty


def test_zero_system_is_not_empty():
    assert not certify_empty([SparseExpr()]).empty


def test_normal_form_and_membership():
    gb = buchberger(gens("x^2 + y^2 - 1", "x - y"))
    assert normal_form(parse("x^2 - y^2"), gb) == 0
    r = normal_form(parse("x^3"), gb)
    assert normal_form(r, gb) == r


def test_unknown_order():
    with pytest.raises(ValueError):
        buchberger(gens("x"), order="deglex")


@st.composite
def polys(draw, names=("x", "y", "z")):
    terms = draw(st.dictionaries(st.tuples(*[st.integers(0, 2)] * len(names)),
                                 st.integers(-3, 3).filter(bool), min_size=1, max_size=3))
    return SparseExpr({mono(dict(zip(names, e))): c for e, c in terms.items()})


systems = st.lists(polys(), min_size=1, max_size=3)


@given(systems, st.sampled_from(["grevlex", "lex"]))
def test_s_polynomials_reduce_to_zero(system, order):
    gb = buchberger(system, order=order, variables=("x", "y", "z"))
    assert all(r == 0 for r in s_polynomial_residuals(gb))
    for g in system:
        assert normal_form(g, gb) == 0


@given(systems, polys())
def test_normal_form_idempotent(system, p):
    gb = buchberger(system, variables=("x", "y", "z"))
    r = normal_form(p, gb)
    assert normal_form(r, gb) == r


@given(systems)
def test_emptiness_is_order_independent(system):
    assert certify_empty(system, "grevlex").empty == certify_empty(system, "lex").empty
