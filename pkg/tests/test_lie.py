import random

import pytest
from hypothesis import given, strategies as st

from f2deform.charts import VectorField, pushforward, random_chart_field, stock_family
from f2deform.global_fields import solve_global_fields
from f2deform.lie import (StructureConstants, base_component, bracket, change_of_basis,
                          generate_fundamental_fields, jacobi_residual, load_structure_constants,
                          parse_structure_constants, verify_bracket_table,
                          verify_filtration_facts)
from f2deform.symbolic import SparseExpr

t = SparseExpr.var("t")
v = SparseExpr.var("v")
y = SparseExpr.var("y")


@pytest.fixture(scope="module")
def fields():
    return generate_fundamental_fields()


def field(v_coeff="0", y_coeff="0"):
    return VectorField.from_coeffs("W", v=v_coeff, y=y_coeff)


EXPECTED = {
    1: field(y_coeff="-1 * v^2 y^2"),
    2: field(y_coeff="-1 * y^2"),
    3: field(v_coeff="1"),
    4: field(y_coeff="-1 * v^1 y^2"),
    5: field(v_coeff="-1 * v^1", y_coeff="2 * y^1"),
    6: field(v_coeff="1 * v^1"),
    7: field(v_coeff="-1 * v^2", y_coeff="2 * v^1 y^1"),
}


def test_fundamental_fields_closed_forms(fields):
    for i, f in EXPECTED.items():
        assert fields[i] == f, i
    assert not fields.sign_flipped
    assert fields.chart_agreement.passed


def test_bracket_table_holds(fields):
    rep = verify_bracket_table(fields, load_structure_constants())
    assert len(rep.checks) == 21 and rep.passed


def test_corrupted_table_fails_once(fields, fixtures_dir):
    bad = load_structure_constants(fixtures_dir / "corrupted_table.txt")
    rep = verify_bracket_table(fields, bad)
    assert sum(c.passed for c in rep.checks) == 20
    assert rep.first_failure().name == "[E3,E4]"


def test_structure_constants_text_round_trip():
    S = load_structure_constants()
    assert parse_structure_constants(S.to_text()).table == S.table
    assert S.bracket(3, 7) == {5: 1, 6: -1}
    assert S.bracket(7, 3) == {5: -1, 6: 1}
    assert S.jacobi_violations() == []


def test_structure_constants_parse_errors():
    with pytest.raises(ValueError):
        parse_structure_constants("[E1,E2] = E9")
    with pytest.raises(ValueError):
        parse_structure_constants("E1 E2")
    with pytest.raises(ValueError):
        StructureConstants(2, {(1, 1): {1: 1}})


def test_broken_table_violates_jacobi():
    S = StructureConstants(3, {(1, 2): {3: 1}, (2, 3): {1: 1}, (1, 3): {1: 1}})
    assert S.jacobi_violations()


def test_bracket_examples():
    dv = field(v_coeff="1")
    assert bracket(dv, field(v_coeff="1 * v^1")) == dv
    assert bracket(field(v_coeff="1 * v^1"), field(y_coeff="1 * y^1")).is_zero()


def test_fields_lie_in_global_span(fields):
    basis = [gf.field_W for gf in solve_global_fields(0, 5)]
    f0 = [VectorField("W", {k: c.with_truncation(0) for k, c in fields[i].components.items()})
          for i in sorted(EXPECTED)]
    assert change_of_basis(f0, basis) is not None


def test_base_projection_is_homomorphism():
    basis = [gf.field_W for gf in solve_global_fields(3, 5)]
    for f in basis:
        for g in basis:
            kf, kg = base_component(f), base_component(g)
            lhs = base_component(bracket(f, g))
            rhs = bracket(VectorField("W", {"t": kf}), VectorField("W", {"t": kg})).coeff_t
            assert lhs == rhs


def test_filtration_bounds():
    assert verify_filtration_facts().passed


def test_every_global_field_has_no_constant_base_term():
    for gf in solve_global_fields(3, 5):
        assert base_component(gf.field_W).coefficient("t", 0) == 0


# properties ----------------------------------------------------------------------

seeds = st.integers(0, 10 ** 6)


@given(seeds)
def test_bracket_antisymmetry(seed):
    rng = random.Random(seed)
    f, g = random_chart_field(rng), random_chart_field(rng)
    assert bracket(f, g) == -bracket(g, f)
    assert bracket(f, f).is_zero()


@given(seeds)
def test_jacobi_identity(seed):
    rng = random.Random(seed)
    f, g, h = (random_chart_field(rng, terms=2) for _ in range(3))
    assert jacobi_residual(f, g, h).is_zero()


@given(seeds)
def test_pushforward_preserves_brackets(seed):
    rng = random.Random(seed)
    tr = stock_family().primary
    f, g = random_chart_field(rng), random_chart_field(rng)
    assert pushforward(bracket(f, g), tr) == bracket(pushforward(f, tr), pushforward(g, tr))


@given(st.lists(st.fractions(-3, 3, max_denominator=3), min_size=7, max_size=7),
       st.lists(st.fractions(-3, 3, max_denominator=3), min_size=7, max_size=7))
def test_structure_constants_match_field_brackets(x, z):
    # bracket of combinations equals the combination given by the table
    fields = generate_fundamental_fields()
    S = load_structure_constants()
    X = dict(enumerate(x, 1))
    Z = dict(enumerate(z, 1))
    comb = lambda c: sum((fields[i].scale(a) for i, a in c.items() if a), VectorField("W"))
    assert bracket(comb(X), comb(Z)) == comb(S.bracket_vectors(X, Z))
