import random

import pytest
from hypothesis import given, strategies as st

from f2deform.charts import (ChartMismatch, ManifestError, VectorField, identity_transition,
                             load_manifest, parse_manifest, projective_equal, pushforward,
                             random_chart_field, regularity_check, stock_family,
                             verify_surface_models, verify_transition_consistency)
from f2deform.symbolic import SparseExpr, parse

t = SparseExpr.var("t")
v = SparseExpr.var("v")
y = SparseExpr.var("y")


@pytest.fixture(scope="module")
def family():
    return stock_family()


def test_stock_manifest_contents(family):
    assert set(family.charts) == {"W", "W'"}
    tr = family.primary
    assert tr.source == "W" and tr.target == "W'"
    assert tr.rules["y"] == v * v * y - t * v
    assert tr.inverse_rules["y"] == v * v * y + t * v
    assert set(family.models) == {"X", "F2", "Pstar"}


def test_rules_and_inverse_rules_are_inverse(family):
    tr = family.primary
    rep = verify_transition_consistency(tr)
    assert rep.passed and len(rep.checks) >= 6


def test_corrupted_transition_residual(fixtures_dir):
    fam = load_manifest(fixtures_dir / "corrupted_transition.manifest")
    rep = verify_transition_consistency(fam.primary)
    assert not rep.passed
    bad = rep.first_failure()
    assert bad.residual in ("2 * t^1 v^1", "-2 * t^1 v^1")


def test_empty_manifest_rejected(fixtures_dir):
    with pytest.raises(ManifestError):
        load_manifest(fixtures_dir / "empty.manifest")
    with pytest.raises(ManifestError):
        parse_manifest("transition W -> W'\n  t = t\n")


def test_surface_models_all_zero(family):
    rep = verify_surface_models(family)
    assert rep.passed
    names = [c.name for c in rep.checks]
    assert "t=0 slice of X is F2" in names
    assert any("phi" in n for n in names) and any("rho1" in n for n in names)


def test_trivialization_lands_in_product(family):
    # over t != 0 the chart maps (t, [1:v], [ty : vy - t]) glue to P^1 x P^1
    emb = family.embeddings["phi"]
    assert emb.images["b1"] == v * y - t


def test_pushforward_of_basic_fields(family):
    tr = family.primary
    dv = pushforward(VectorField("W", {"v": SparseExpr.const(1)}), tr)
    assert dv.coeff_v == -(v * v)
    dy = pushforward(VectorField("W", {"y": SparseExpr.const(1)}), tr)
    assert dy.coeff_y == SparseExpr.var("v", -2)
    assert dy.coeff_v == 0


def test_pushforward_of_d_dt(family):
    tr = family.primary
    dt = pushforward(VectorField("W", {"t": SparseExpr.const(1)}), tr)
    assert dt.coeff_t == 1
    assert dt.coeff_y == -SparseExpr.var("v", -1)


def test_pushforward_identity():
    rng = random.Random(3)
    f = random_chart_field(rng)
    assert pushforward(f, identity_transition()) == f


def test_chart_mismatch():
    f = VectorField("W'", {"v": SparseExpr.const(1)})
    with pytest.raises(ChartMismatch):
        pushforward(f, stock_family().primary)
    with pytest.raises(ChartMismatch):
        f + VectorField("W", {})


def test_regularity_check():
    assert regularity_check(VectorField("W", {"y": y * y * v, "v": v * v, "t": t}))
    assert not regularity_check(VectorField("W", {"y": y ** 3}))
    assert not regularity_check(VectorField("W", {"v": y}))
    assert not regularity_check(VectorField("W", {"t": v}))
    assert not regularity_check(VectorField("W", {"v": SparseExpr.var("v", -1)}))


def test_projective_equal():
    assert projective_equal([v, v * v], [SparseExpr.const(1), v]) == 0
    assert projective_equal([v, y], [SparseExpr.const(1), v]) != 0


@given(st.integers(0, 10 ** 6))
def test_pushforward_round_trip(seed):
    rng = random.Random(seed)
    tr = stock_family().primary
    f = random_chart_field(rng)
    assert pushforward(pushforward(f, tr), tr.inverted()) == f


def test_vector_field_from_strings():
    f = VectorField.from_coeffs("W", v="v^2", y="-2 * v^1 y^1")
    assert f.coeff_v == v * v and f.coeff_y == parse("-2 v y")
    # v^2 * y + (-2 v y) * v
    assert f(v * y) == -(v * v * y)
