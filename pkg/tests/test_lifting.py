import itertools

import pytest

from f2deform.lifting import (OBSTRUCTED, SOLVABLE, LiftError, LiftProblem,
                              assemble_order_equations, base_component_analysis,
                              degenerate_problem, initial_lift, order_zero_residuals,
                              relation_residuals, run_lift, sample_obstruction, solve_order,
                              stock_problem)
from f2deform.charts import VectorField
from f2deform.lie import load_structure_constants
from f2deform.symbolic import SparseExpr


@pytest.fixture(scope="module")
def problem():
    return stock_problem(2)


@pytest.fixture(scope="module")
def report(problem):
    return run_lift(problem, 2)


def test_order0_parameters(problem):
    assert problem.base_params[3] == {"C": 1}
    assert problem.base_params[5] == {"B": -1, "e": 2}
    assert problem.base_params[7] == {"A": -1}


def test_order0_relations_hold(problem):
    assert all(r.is_zero() for r in order_zero_residuals(problem).values())


def test_directions_are_global(problem):
    assert problem.directions_are_global(2)


def test_order_zero_lift_is_trivially_solvable(problem):
    rep = run_lift(problem, 0)
    assert rep.status == SOLVABLE and rep.outcomes == []
    assert rep.lift.parameters == {}


def test_order_one_solvable(report):
    first = report.outcomes[0]
    assert first.status == SOLVABLE
    assert first.rank == first.rank_oracle == 42
    assert first.unknowns == 49 and first.new_parameters == 7


def test_order_one_residuals_vanish(report):
    lift1 = report.outcomes[0].lift
    for lift in (lift1, lift1.particular()):
        assert all(r.is_zero() for r in relation_residuals(lift).values())


def test_order_two_obstructed(report):
    assert report.status == OBSTRUCTED and report.obstructed_at == 2
    cert = report.certificate
    assert cert.valid
    assert [str(g) for g in cert.groebner_certificate.generators] == ["1"]
    # the solvability conditions do not even depend on the order-one parameters
    assert all(p.is_constant() and p != 0 for p in cert.parameter_system)
    assert len(cert.left_null_rows) == len(cert.parameter_system)


def test_order_two_obstruction_is_sound(problem, report):
    lower = report.outcomes[0].lift
    assert all(sample_obstruction(problem, lower, 2, samples=20, seed=7))


def test_obstruction_uses_only_lower_parameters(report):
    lower = report.outcomes[0].lift
    used = {x for p in report.certificate.parameter_system for x in p.variables()}
    assert all(lower.parameters[x] == 1 for x in used)


def test_left_null_rows_annihilate(problem, report):
    lower = report.outcomes[0].lift
    eq = assemble_order_equations(problem, 2, lower)
    for row in report.certificate.left_null_rows:
        assert all(x == 0 for x in eq.matrix.left_apply(row))


def test_run_lift_stops_at_obstruction():
    rep = run_lift(stock_problem(3), 3)
    assert [o.status for o in rep.outcomes] == [SOLVABLE, OBSTRUCTED]
    assert rep.lift.order == 1


def test_base_component_forced_vanishing(report):
    bc = base_component_analysis(report.outcomes[0].lift)
    for i in range(1, 8):
        assert bc.vanishes(i, 0)
    for i in (1, 2, 4):
        assert bc.vanishes(i, 1)
    assert not bc.vanishes(5, 1) and not bc.vanishes(6, 1)
    assert bc.coefficients["a_1^5"] == "1"


def test_degenerate_problem_lifts_with_zero_corrections():
    for n in (1, 2):
        rep = run_lift(degenerate_problem(n), n)
        assert rep.status == SOLVABLE and len(rep.outcomes) == n
        part = rep.lift.particular()
        for s in part.series.values():
            for x in s.values():
                assert all(x.coefficient("t", m) == 0 for m in range(1, n + 1))
        assert all(r.is_zero() for r in relation_residuals(part).values())
        bc = base_component_analysis(rep.lift)
        assert bc.forced_by_brackets == []


def test_solve_order_requires_previous_order(problem):
    with pytest.raises(LiftError):
        solve_order(problem, 2, initial_lift(problem), itertools.count(1))


def test_problem_rejects_non_global_order0():
    S = load_structure_constants()
    fields = {i: VectorField("W", {"v": SparseExpr.const(1)}) for i in range(1, 8)}
    fields[1] = VectorField("W", {"y": SparseExpr.var("y") ** 2 * SparseExpr.var("v") ** 3})
    with pytest.raises(LiftError):
        LiftProblem(S, fields, 1)


def test_negative_order_rejected(problem):
    with pytest.raises(LiftError):
        run_lift(problem, -1)
