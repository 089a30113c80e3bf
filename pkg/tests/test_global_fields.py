import pytest

from f2deform.charts import VectorField, pushforward, regularity_check
from f2deform.global_fields import (DEFAULT_WINDOWS, CechCocycle, GlobalField, extract_parameters, family_transition,
                                    fiber_field_dimension, field_from_parameters,
                                    global_field_dimensions, h0_dimension, h1_dimension,
                                    h1_window, is_coboundary, kodaira_spencer_cocycle, mixed_form,
                                    solve_global_fields, transformation_residuals,
                                    verify_field_shape)
from f2deform.symbolic import SparseExpr

t = SparseExpr.var("t")
v = SparseExpr.var("v")
y = SparseExpr.var("y")


def test_central_fiber_has_seven_fields():
    assert global_field_dimensions(0, 5) == (7, 7)


def test_order_two_dimension():
    assert global_field_dimensions(2, 5) == (21, 21)


@pytest.mark.parametrize("order", [0, 1, 3])
@pytest.mark.parametrize("degree", [2, 4, 7])
def test_dimension_formula(order, degree):
    d1, d2 = global_field_dimensions(order, degree)
    assert d1 == d2 == 7 * (order + 1)


def test_small_degree_rejected():
    with pytest.raises(ValueError):
        solve_global_fields(0, 1)
    with pytest.raises(ValueError):
        solve_global_fields(-1, 5)


def test_basis_has_closed_form_shape():
    basis = solve_global_fields(2, 5)
    rep = verify_field_shape(basis)
    assert rep.passed, rep.first_failure()
    for gf in basis:
        assert regularity_check(gf.field_W) and regularity_check(gf.field_Wprime)


def test_parameter_round_trip():
    f = field_from_parameters({"A": 1, "e": 2, "b": t}, 3)
    p = extract_parameters(f)
    assert p["A"] == 1 and p["e"] == 2 and p["b"] == t
    assert p["k"] == (t * t * t) + t.scale(2)


def test_transformation_laws_on_generic_field():
    f = field_from_parameters({"A": 1 + t, "B": 2, "C": t, "a": -1, "b": 3, "c": t * t, "e": 5}, 3)
    gf = GlobalField(f, pushforward(f, family_transition()), 3)
    assert all(r == 0 for r in transformation_residuals(gf).values())


def test_field_outside_shape_is_not_global():
    bad = field_from_parameters({"A": 1}, 2)
    bad = VectorField("W", dict(bad.components, y=bad.coeff_y + v ** 3))
    assert not regularity_check(pushforward(bad, family_transition()))


@pytest.mark.parametrize("tau", [1, 2, -3])
def test_generic_fiber_has_six_fields(tau):
    assert fiber_field_dimension(tau) == 6


def test_fiber_at_zero_is_rejected():
    with pytest.raises(ValueError):
        fiber_field_dimension(0)


def test_h0_is_seven():
    assert h0_dimension() == 7


def test_h1_is_one_and_stable():
    res = h1_dimension()
    assert res.dimensions == [1, 1, 1]
    assert res.stabilized and res.dimension == 1


def test_single_window_does_not_stabilize():
    res = h1_dimension([(-3, 3)])
    assert res.dimensions == [1] and not res.stabilized


def test_window_must_contain_core():
    with pytest.raises(ValueError):
        h1_dimension([(-2, 2)])


def test_kodaira_spencer_cocycle():
    ks = kodaira_spencer_cocycle()
    f = ks.in_chart("W'")
    assert f.coeff_v == 0 and f.coeff_t == 0
    assert f.coeff_y == -SparseExpr.var("v", -1)
    assert mixed_form(ks) == -v
    assert not is_coboundary(ks)
    # it spans H^1
    assert h1_window(*DEFAULT_WINDOWS[0], extra=[f]) == 0


def test_literal_w_chart_reading_would_be_trivial():
    # -v d/dy written on W is a coboundary, so it cannot be the class
    c = CechCocycle(VectorField("W", {"y": -v}))
    assert is_coboundary(c)
