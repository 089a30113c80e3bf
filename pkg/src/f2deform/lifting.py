"""Order-by-order extension of the fundamental fields to the family.

Every global field is determined by seven parameter series
``A, B, C, a, b, c, e`` in ``t`` (see :func:`field_from_parameters`), so the
order-``m`` unknowns of ``E_i`` are the seven ``t^m`` coefficients of its
series.  Those directions ``t^m G_l`` are global by construction; the only
constraints left are the bracket relations.

At order ``m`` the ``t^m`` coefficient of ``[E_i, E_j] - sum c E_k`` is linear
in the order-``m`` unknowns, with a right-hand side polynomial in the free
parameters of lower orders.  Lower orders are carried symbolically (never
fixed greedily), so an inconsistent system whose solvability conditions have
Gröbner basis ``{1}`` rules out every choice of lower-order data.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .charts import VectorField, pushforward, regularity_check
from .global_fields import (PARAMS, extract_parameters, family_transition,
                            field_from_parameters, global_field_dimensions)
from .groebner import GroebnerBasis, buchberger, certify_empty, normal_form
from .lie import StructureConstants, bracket, generate_fundamental_fields, load_structure_constants
from .linalg import RationalMatrix, rank_reversed, rref, solve_affine, solve_operator
from .symbolic import SparseExpr, canonical_string

SERIES = PARAMS[:-1]          # A B C a b c e; k is determined by them
SOLVABLE, OBSTRUCTED = "SOLVABLE", "OBSTRUCTED"


class LiftError(ValueError):
    pass


def _unknown(i: int, p: str, m: int) -> str:
    return f"z_{i}_{p}_{m}"


def _is_unknown(name: str) -> bool:
    return name.startswith("z_")


@dataclass
class LiftProblem:
    structure_constants: StructureConstants
    order0: dict                 # i -> VectorField on W, t-free
    target_order: int = 2
    degree: int = 5

    def __post_init__(self):
        if self.target_order < 0:
            raise LiftError("target order must be >= 0")
        self.order0 = {i: self.order0[i] for i in sorted(self.order0)}
        if sorted(self.order0) != list(range(1, self.structure_constants.dim + 1)):
            raise LiftError("need one order-0 field per basis element")
        self.base_params = {}
        for i, f in self.order0.items():
            params = {p: x for p, x in extract_parameters(f).items() if p in SERIES}
            rebuilt = field_from_parameters(params, 0)
            if any(not x.is_constant() for x in params.values()) or \
                    (rebuilt - f.truncate(0)).truncate(0) != VectorField("W"):
                raise LiftError(f"order-0 field E{i} is not the restriction of a global field")
            self.base_params[i] = {p: x.constant_term() for p, x in params.items() if x}

    @property
    def pairs(self):
        return self.structure_constants.pairs()

    def directions_are_global(self, order: int | None = None) -> bool:
        """The ``t^m G_l`` span the global fields mod ``t^(order+1)``."""
        order = self.target_order if order is None else order
        tr = family_transition()
        t = SparseExpr.var("t")
        for m in range(order + 1):
            for p in SERIES:
                g = field_from_parameters({p: t ** m}, order)
                if not regularity_check(pushforward(g, tr)):
                    return False
        dims = global_field_dimensions(order, self.degree)
        return dims == (len(SERIES) * (order + 1),) * 2


def stock_problem(target_order: int = 2) -> LiftProblem:
    S = load_structure_constants()
    ff = generate_fundamental_fields(S)
    return LiftProblem(S, dict(ff.fields), target_order)


def degenerate_problem(target_order: int = 2, dim: int = 7) -> LiftProblem:
    """Zero brackets, order-0 fields ``i * d/dv`` (pairwise commuting)."""
    fields = {i: VectorField("W", {"v": SparseExpr.const(i)}) for i in range(1, dim + 1)}
    return LiftProblem(StructureConstants.zero(dim), fields, target_order)


@dataclass
class ParametricLift:
    """Parameter series of every ``E_i`` modulo ``t^(order+1)``.

    ``series[i][p]`` is a polynomial in ``t`` and the free parameters;
    ``parameters`` maps each free parameter to the order that introduced it.
    ``constraints`` are leftover nonlinear conditions on the parameters.
    """

    problem: LiftProblem
    order: int
    series: dict
    parameters: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)

    def field(self, i: int, values: dict | None = None) -> VectorField:
        params = self.series[i]
        if values:
            params = {p: x.subs(values) for p, x in params.items()}
        return field_from_parameters(params, self.order)

    def fields(self, values: dict | None = None) -> dict:
        return {i: self.field(i, values) for i in self.series}

    def specialize(self, values: dict) -> "ParametricLift":
        series = {i: {p: x.subs(values) for p, x in s.items()} for i, s in self.series.items()}
        left = {q: m for q, m in self.parameters.items() if q not in values}
        cons = [c.subs(values) for c in self.constraints]
        return ParametricLift(self.problem, self.order, series, left, [c for c in cons if c])

    def particular(self) -> "ParametricLift":
        return self.specialize({q: 0 for q in self.parameters})

    def parameters_of_order(self, m: int) -> list:
        return [q for q, k in self.parameters.items() if k == m]

    def to_json(self) -> dict:
        return {"order": self.order,
                "parameters": {q: m for q, m in self.parameters.items()},
                "constraints": [canonical_string(c) for c in self.constraints],
                "series": {f"E{i}": {p: canonical_string(x) for p, x in s.items() if x}
                           for i, s in self.series.items()}}


def initial_lift(P: LiftProblem) -> ParametricLift:
    series = {i: {p: SparseExpr.const(P.base_params[i].get(p, 0)) for p in SERIES}
              for i in P.order0}
    return ParametricLift(P, 0, series)


@dataclass
class OrderEquations:
    """``matrix @ z + rhs == 0`` for the order-``m`` unknowns ``z``."""

    order: int
    matrix: RationalMatrix
    rhs: list                   # SparseExpr in lower-order parameters
    unknowns: list
    row_labels: list

    def numeric_rhs(self) -> list:
        out = []
        for r in self.rhs:
            if not r.is_constant():
                raise LiftError("right-hand side still depends on parameters")
            out.append(r.constant_term())
        return out


def _relation_residuals(fields: dict, S: StructureConstants, truncation: int):
    for i, j in S.pairs():
        res = bracket(fields[i], fields[j])
        for k, c in S.bracket(i, j).items():
            res = res - fields[k].scale(c)
        yield (i, j), res.truncate(truncation)


def assemble_order_equations(P: LiftProblem, m: int, lower: ParametricLift) -> OrderEquations:
    if lower.order != m - 1:
        raise LiftError(f"need a lift through order {m - 1}, got {lower.order}")
    t = SparseExpr.var("t")
    unknowns = [_unknown(i, p, m) for i in P.order0 for p in SERIES]
    col = {z: c for c, z in enumerate(unknowns)}
    fields = {}
    for i, s in lower.series.items():
        params = {p: s[p] + SparseExpr.var(_unknown(i, p, m)) * t ** m for p in SERIES}
        fields[i] = field_from_parameters(params, m)
    rows, rhs, labels = [], [], []
    for (i, j), res in _relation_residuals(fields, P.structure_constants, m):
        for comp in ("v", "y", "t"):
            top = res.coeff(comp).coefficient("t", m)
            for (dv, dy), c in sorted(top.collect(("v", "y")).items()):
                row, rest = {}, {}
                for mm, a in c.items():
                    zs = [k for k, _ in mm if _is_unknown(k)]
                    if not zs:
                        rest[mm] = a
                        continue
                    if len(mm) != 1 or mm[0][1] != 1:
                        raise LiftError("order-m unknowns must enter linearly")
                    row[col[zs[0]]] = a
                labels.append(f"[E{i},E{j}] d/d{comp} v^{dv} y^{dy}")
                rows.append(row)
                rhs.append(SparseExpr(rest))
    return OrderEquations(m, RationalMatrix(len(rows), len(unknowns), rows), rhs,
                          unknowns, labels)


@dataclass
class ObstructionCertificate:
    """Proof that no choice of lower-order data extends to ``order``.

    Each row ``r`` of ``left_null_rows`` satisfies ``r @ matrix == 0``; the
    matching entry of ``parameter_system`` is ``r @ target`` (then any
    leftover constraints).  The system is inconsistent iff its reduced
    Gröbner basis is ``{1}``.
    """

    order: int
    left_null_rows: list
    parameter_system: list
    groebner_certificate: GroebnerBasis
    row_labels: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.groebner_certificate.is_unit()

    def _label(self, k: int) -> str:
        return self.row_labels[k] if k < len(self.row_labels) else str(k)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "left_null_rows": [{self._label(k): str(x) for k, x in enumerate(r) if x}
                               for r in self.left_null_rows],
            "parameter_system": [canonical_string(p) for p in self.parameter_system],
            "groebner_basis": self.groebner_certificate.to_json(),
        }


@dataclass
class OrderOutcome:
    order: int
    status: str
    lift: ParametricLift | None = None
    certificate: ObstructionCertificate | None = None
    new_parameters: int = 0
    rank: int = 0
    rank_oracle: int = 0
    equations: int = 0
    unknowns: int = 0

    def to_json(self) -> dict:
        out = {"order": self.order, "status": self.status, "equations": self.equations,
               "unknowns": self.unknowns, "rank": self.rank, "rank_oracle": self.rank_oracle}
        if self.status == SOLVABLE:
            out["new_parameters"] = self.new_parameters
            out["total_parameters"] = len(self.lift.parameters)
        else:
            out["certificate"] = self.certificate.to_json()
        return out


def _dot(row, exprs) -> SparseExpr:
    acc = SparseExpr()
    for x, e in zip(row, exprs):
        if x and e:
            acc = acc + e.scale(x)
    return acc


def _linear_rules(conds: list, params: list) -> dict | None:
    """Solve affine-linear conditions for some parameters; None if any is nonlinear."""
    if any(sum(e for _, e in m) > 1 for c in conds for m, _ in c.items()):
        return None
    pos = {q: k for k, q in enumerate(params)}
    rows = []
    for c in conds:
        row = {}
        for mm, a in c.items():
            row[pos[mm[0][0]] if mm else len(params)] = a
        rows.append(row)
    aug = RationalMatrix(len(rows), len(params) + 1, rows)
    red, pivots = rref(aug)
    rules = {}
    for r, c in enumerate(pivots):
        row = red.row(r)
        expr = SparseExpr.const(-row.get(len(params), 0))
        for k, a in row.items():
            if k != c and k < len(params):
                expr = expr - SparseExpr.var(params[k]).scale(a)
        rules[params[c]] = expr
    return rules


def _zero_is_solution(system: list) -> bool:
    return all(p.constant_term() == 0 for p in system)


def solve_order(P: LiftProblem, m: int, lower: ParametricLift, fresh: "itertools.count"):
    """Extend ``lower`` by one order or certify that no extension exists."""
    eq = assemble_order_equations(P, m, lower)
    op = solve_operator(eq.matrix)
    target = [-r for r in eq.rhs]
    # keep the annihilating rows that give nonzero conditions, paired with them
    paired = [(row, c) for row, c in ((row, _dot(row, target)) for row in op.left_null) if c]
    conds = [c for _, c in paired]
    outcome = OrderOutcome(m, SOLVABLE, rank=op.rank, rank_oracle=rank_reversed(eq.matrix),
                           equations=eq.matrix.nrows, unknowns=eq.matrix.ncols)
    current = lower
    if conds:
        system = conds + list(lower.constraints)
        # all parameters zero is a witness when no condition has a constant term;
        # only otherwise is a Groebner certificate worth computing
        cert = None if _zero_is_solution(system) else certify_empty(system)
        if cert is not None and cert.empty:
            outcome.status = OBSTRUCTED
            outcome.certificate = ObstructionCertificate(m, [row for row, _ in paired], system,
                                                         cert.basis, eq.row_labels)
            return outcome
        rules = _linear_rules(conds, list(lower.parameters))
        if rules is None:
            current = ParametricLift(P, lower.order, lower.series, dict(lower.parameters),
                                     list(lower.constraints) + conds)
        else:
            current = lower.specialize(rules)
            target = [r.subs(rules) for r in target]
    # particular solution plus kernel directions with fresh parameters
    z = [_dot([op.particular_map[c, r] for r in range(eq.matrix.nrows)], target)
         for c in range(eq.matrix.ncols)]
    params = dict(current.parameters)
    for vec in op.kernel:
        name = f"p{next(fresh)}"
        params[name] = m
        q = SparseExpr.var(name)
        z = [zc + q.scale(x) if x else zc for zc, x in zip(z, vec)]
    value = dict(zip(eq.unknowns, z))
    t_m = SparseExpr.var("t") ** m
    series = {i: {p: s[p] + value[_unknown(i, p, m)] * t_m for p in SERIES}
              for i, s in current.series.items()}
    outcome.lift = ParametricLift(P, m, series, params, current.constraints)
    outcome.new_parameters = len(op.kernel)
    return outcome


@dataclass
class LiftReport:
    target_order: int
    outcomes: list
    lift: ParametricLift          # deepest solvable lift

    @property
    def status(self) -> str:
        return self.outcomes[-1].status if self.outcomes else SOLVABLE

    @property
    def obstructed_at(self) -> int | None:
        return self.outcomes[-1].order if self.status == OBSTRUCTED else None

    @property
    def certificate(self) -> ObstructionCertificate | None:
        return self.outcomes[-1].certificate if self.status == OBSTRUCTED else None

    def to_json(self) -> dict:
        return {"target_order": self.target_order, "status": self.status,
                "orders": [o.to_json() for o in self.outcomes],
                "lift": self.lift.to_json()}


def run_lift(P: LiftProblem, n: int | None = None) -> LiftReport:
    n = P.target_order if n is None else n
    if n < 0:
        raise LiftError("order must be >= 0")
    lift = initial_lift(P)
    fresh = itertools.count(1)
    outcomes = []
    for m in range(1, n + 1):
        out = solve_order(P, m, lift, fresh)
        outcomes.append(out)
        if out.status == OBSTRUCTED:
            break
        lift = out.lift
    return LiftReport(n, outcomes, lift)


# soundness checks -----------------------------------------------------------------

def relation_residuals(lift: ParametricLift, values: dict | None = None) -> dict:
    """Bracket-relation residuals of a lift, modulo ``t^(order+1)``."""
    fields = lift.fields(values)
    return {pair: res for pair, res in
            _relation_residuals(fields, lift.problem.structure_constants, lift.order)}


def order_zero_residuals(P: LiftProblem) -> dict:
    return relation_residuals(initial_lift(P))


def _random_values(rng: random.Random, names) -> dict:
    return {q: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for q in names}


def sample_obstruction(P: LiftProblem, lower: ParametricLift, m: int,
                       samples: int = 20, seed: int = 0) -> list:
    """For random lower-order parameter values, is the order-``m`` system inconsistent?"""
    rng = random.Random(seed)
    out = []
    for _ in range(samples):
        values = _random_values(rng, sorted(lower.parameters))
        special = lower.specialize(values)
        if special.constraints:
            raise LiftError("sampling does not handle nonlinear constraints")
        eq = assemble_order_equations(P, m, special)
        sol = solve_affine(eq.matrix, [-x for x in eq.numeric_rhs()])
        out.append(not sol.consistent)
    return out


def solution_order_check(outcome: OrderOutcome) -> bool:
    return outcome.rank == outcome.rank_oracle and \
        outcome.new_parameters == outcome.unknowns - outcome.rank


# base projection ------------------------------------------------------------------

def k_coefficients(lift: ParametricLift, i: int) -> list:
    """``t^m`` coefficients of the base component ``k_i`` for ``m <= order``."""
    k = lift.field(i).coeff_t
    return [k.coefficient("t", m) for m in range(lift.order + 1)]


def _free_k_coefficient(i: int, m: int, base: dict) -> SparseExpr:
    """``t^m`` coefficient of ``k_i`` with all corrections left as free unknowns."""
    t = SparseExpr.var("t")
    params = {p: SparseExpr.const(base.get(p, 0)) +
              sum((SparseExpr.var(_unknown(i, p, r)) * t ** r for r in range(1, m + 1)),
                  SparseExpr())
              for p in SERIES}
    return field_from_parameters(params, m).coeff_t.coefficient("t", m)


@dataclass
class BaseComponentReport:
    order: int
    coefficients: dict            # "a_m^i" -> canonical string
    vanishing: list               # zero on the whole solution space
    structural: list              # zero for every global lift, brackets or not
    forced_by_brackets: list      # vanishing but not structural

    def vanishes(self, i: int, m: int) -> bool:
        return _kname(i, m) in self.vanishing

    def to_json(self) -> dict:
        return {"order": self.order, "coefficients": self.coefficients,
                "vanishing": self.vanishing, "structural": self.structural,
                "forced_by_brackets": self.forced_by_brackets}


def _kname(i: int, m: int) -> str:
    return f"a_{m}^{i}"


def base_component_analysis(lift: ParametricLift, max_constraints: int = 4) -> BaseComponentReport:
    """Which coefficients of ``k_i(t)`` vanish on the entire solution space.

    Linear conditions have already been substituted into the lift.  Leftover
    nonlinear constraints are used through ideal membership only when there
    are at most ``max_constraints`` of them; otherwise a coefficient counts as
    vanishing only if it is identically zero (a conservative answer).
    """
    gb = None
    if lift.constraints and len(lift.constraints) <= max_constraints:
        gb = buchberger(lift.constraints)
    coeffs, vanishing, structural, forced = {}, [], [], []
    for i in lift.series:
        for m, c in enumerate(k_coefficients(lift, i)):
            if gb is not None and c:
                c = normal_form(c, gb)
            name = _kname(i, m)
            coeffs[name] = canonical_string(c)
            if c:
                continue
            vanishing.append(name)
            if _free_k_coefficient(i, m, lift.problem.base_params[i]).is_zero():
                structural.append(name)
            else:
                forced.append(name)
    return BaseComponentReport(lift.order, coeffs, vanishing, structural, forced)
