import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from f2deform.symbolic import (LaurentViolation, NegativeTExponent, NonInvertibleSubstitution,
                               ParseError, SparseExpr, canonical_string, mono, parse,
                               partial_derivative, substitute, t_valuation)

t = SparseExpr.var("t")
v = SparseExpr.var("v")
y = SparseExpr.var("y")


# strategies ----------------------------------------------------------------------

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def exprs(draw, laurent_v=False, max_terms=4):
    lo = -2 if laurent_v else 0
    terms = draw(st.dictionaries(
        st.tuples(st.integers(0, 3), st.integers(lo, 3), st.integers(0, 2)),
        coeffs, max_size=max_terms))
    return SparseExpr({mono(t=a, v=b, y=c): x for (a, b, c), x in terms.items()},
                      laurent=("v",) if laurent_v else ())


# examples ------------------------------------------------------------------------

def test_canonical_string_order():
    p = v * v * y - t * v
    assert canonical_string(p) == "-1 * t^1 v^1 + 1 * v^2 y^1"
    assert canonical_string(SparseExpr()) == "0"
    assert canonical_string(SparseExpr.const(Fraction(-3, 2))) == "-3/2"


def test_parse_known_strings():
    assert parse("1 * v^2 y^1 + -1 * t^1 v^1") == v * v * y - t * v
    assert parse("y v^2 - t v") == v * v * y - t * v
    assert parse("1/2 * v^-1") == SparseExpr.var("v", -1).scale(Fraction(1, 2))
    assert "v" in parse("v^-2").laurent


def test_parse_rejects_garbage():
    with pytest.raises(ParseError):
        parse("v ** 2 ?")
    with pytest.raises(ParseError):
        parse("1 * ")


def test_laurent_flags_are_enforced():
    with pytest.raises(LaurentViolation):
        SparseExpr({mono(v=-1): 1})
    with pytest.raises(LaurentViolation):
        SparseExpr({mono(y=1): 1}, laurent=("y",))
    assert SparseExpr({mono(v=-1): 1}, laurent=("v",)) * v == 1


def test_truncation_drops_high_orders():
    p = SparseExpr({mono(t=k): 1 for k in range(5)}, truncation=2)
    assert p == 1 + t + t * t
    q = (1 + t).with_truncation(2) ** 3
    assert q == 1 + t.scale(3) + (t * t).scale(3)


def test_inverse_of_unit_series():
    u = (1 + t).with_truncation(3)
    inv = u.inverse()
    assert inv == 1 - t + t * t - t ** 3
    assert (u * inv) == 1
    assert v.inverse() == SparseExpr.var("v", -1)


def test_inverse_rejects_non_units():
    with pytest.raises(NonInvertibleSubstitution):
        (1 + v).inverse()
    with pytest.raises(NonInvertibleSubstitution):
        SparseExpr().inverse()
    with pytest.raises(NonInvertibleSubstitution):
        y.inverse()


def test_substitution_by_inverse_rule():
    # the gluing y' = y v^2 - t v followed by v -> 1/v' , y -> y'... inverse round trip
    vinv = SparseExpr.var("v", -1)
    forward = {"v": vinv, "y": y * v * v - t * v}
    back = {"v": vinv, "y": y * v * v + t * v}
    for z in ("v", "y"):
        assert substitute(forward[z], back) == SparseExpr.var(z)


def test_substitute_negative_power_needs_unit():
    p = SparseExpr.var("v", -1)
    with pytest.raises(NonInvertibleSubstitution):
        substitute(p, {"v": 1 + y})


def test_t_valuation():
    assert t_valuation(t * t * v + t ** 3) == 2
    assert t_valuation(SparseExpr()) == math.inf
    with pytest.raises(NegativeTExponent):
        t_valuation(SparseExpr.var("t", -1))


def test_partial_derivative_examples():
    p = v * v * y - t * v
    assert partial_derivative(p, "v") == (v * y).scale(2) - t
    assert partial_derivative(p, "t") == -v
    assert partial_derivative(SparseExpr.var("v", -2), "v") == SparseExpr.var("v", -3).scale(-2)


def test_coefficient_and_collect():
    p = t * v * y + (t * t).scale(3) + v
    assert p.coefficient("t", 1) == v * y
    groups = p.collect(["t"])
    assert groups[(2,)] == 3 and groups[(0,)] == v


def test_equality_with_integers():
    assert SparseExpr.const(0) == 0
    assert SparseExpr.const(4) == 4
    assert v != 1


# properties ----------------------------------------------------------------------

@given(exprs(True), exprs(True), exprs(True))
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0
    assert a * 1 == a and a + 0 == a


@given(exprs(True), exprs(True), st.sampled_from(["t", "v", "y"]))
def test_leibniz_rule(a, b, x):
    lhs = partial_derivative(a * b, x)
    assert lhs == partial_derivative(a, x) * b + a * partial_derivative(b, x)


@given(exprs(), exprs(), exprs(max_terms=2), exprs(max_terms=2))
def test_substitution_is_ring_homomorphism(a, b, r1, r2):
    rules = {"v": r1, "y": r2}
    assert substitute(a * b, rules) == substitute(a, rules) * substitute(b, rules)
    assert substitute(a + b, rules) == substitute(a, rules) + substitute(b, rules)


@given(exprs(True), exprs(True), st.integers(0, 3))
def test_truncation_compatible_with_ring_ops(a, b, n):
    ta, tb = a.with_truncation(n), b.with_truncation(n)
    assert ta * tb == (a * b).with_truncation(n)
    assert ta + tb == (a + b).with_truncation(n)


@given(exprs(True))
def test_parse_round_trip(a):
    text = canonical_string(a)
    assert parse(text) == a
    assert canonical_string(parse(text)) == text
