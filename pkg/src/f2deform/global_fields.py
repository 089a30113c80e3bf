"""Global formal vector fields on the family and Čech cohomology of F2.

A global field is a regular field on chart W whose pushforward to W' is
again regular.  Because pushforward is linear, the matching condition is a
linear system: every ansatz monomial field is pushed forward once, and every
coefficient that would make the pushed field irregular (negative powers of
``v``, ``y`` in the ``d/dv`` slot, non-``t`` terms in the ``d/dt`` slot)
becomes one equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .charts import Report, Transition, VectorField, pushforward, stock_family
from .linalg import RationalMatrix, kernel_basis, rank, rank_reversed, solve_affine
from .symbolic import SparseExpr, canonical_string, mono, substitute

FUNCS = ("g", "alpha", "beta", "gamma")
PARAMS = ("A", "B", "C", "a", "b", "c", "e", "k")

# which slot of the field each ansatz function fills: (component, y-exponent)
_SLOT = {"g": ("v", 0), "alpha": ("y", 2), "beta": ("y", 1), "gamma": ("y", 0)}


def family_transition() -> Transition:
    # never truncate the rules themselves: d/dt of a t^(N+1) term lands at t^N
    return stock_family().primary


def central_transition() -> Transition:
    return stock_family().primary.specialize({"t": 0})


@dataclass(frozen=True)
class GlobalFieldAnsatz:
    degree: int          # v-degree bound D
    order: int | None    # t-order N; None for a single fiber (no t, no d/dt)
    chart: str = "W"

    def unknowns(self) -> list:
        """Ordered unknown labels ``(function, v-degree, t-order)``."""
        orders = range(self.order + 1) if self.order is not None else (0,)
        out = [(f, d, m) for f in FUNCS for d in range(self.degree + 1) for m in orders]
        if self.order is not None:
            out += [("k", 0, m) for m in orders]
        return out

    def field_for(self, label) -> VectorField:
        f, d, m = label
        trunc = self.order
        if f == "k":
            return VectorField(self.chart, {"t": SparseExpr({mono(t=m): 1}, truncation=trunc)})
        comp, ye = _SLOT[f]
        return VectorField(self.chart, {comp: SparseExpr({mono(t=m, v=d, y=ye): 1},
                                                         truncation=trunc)})

    def combine(self, vec) -> VectorField:
        out = VectorField(self.chart)
        for label, x in zip(self.unknowns(), vec):
            if x:
                out = out + self.field_for(label).scale(x)
        return out


def _irregular_slots(f: VectorField) -> dict:
    """Coefficients of ``f`` (on the target chart) that must vanish for regularity."""
    out = {}
    for comp, c in f.components.items():
        for m, a in c.items():
            d = dict(m)
            bad = d.get("v", 0) < 0 or d.get("t", 0) < 0
            if comp == "v":
                bad = bad or d.get("y", 0) != 0
            elif comp == "y":
                bad = bad or d.get("y", 0) > 2
            elif comp == "t":
                bad = bad or d.get("v", 0) != 0 or d.get("y", 0) != 0
            if bad:
                out[(comp, m)] = a
    return out


@dataclass
class MatchingSystem:
    ansatz: GlobalFieldAnsatz
    matrix: RationalMatrix
    slots: list
    pushed: list


def matching_system(ansatz: GlobalFieldAnsatz, tr: Transition) -> MatchingSystem:
    labels = ansatz.unknowns()
    pushed = [pushforward(ansatz.field_for(lab), tr) for lab in labels]
    cols = [_irregular_slots(p) for p in pushed]
    slots = sorted({s for c in cols for s in c}, key=lambda s: (s[0], s[1]))
    index = {s: i for i, s in enumerate(slots)}
    rows = [dict() for _ in slots]
    for j, c in enumerate(cols):
        for s, a in c.items():
            rows[index[s]][j] = a
    return MatchingSystem(ansatz, RationalMatrix(len(slots), len(labels), rows), slots, pushed)


@dataclass
class GlobalField:
    field_W: VectorField
    field_Wprime: VectorField
    order: int | None

    @property
    def parameters(self) -> dict:
        return extract_parameters(self.field_W)

    def to_json(self) -> dict:
        return {"W": self.field_W.to_json(), "W'": self.field_Wprime.to_json(),
                "parameters": {k: canonical_string(v) for k, v in self.parameters.items()}}


def extract_parameters(f: VectorField) -> dict:
    """Read ``A, B, C, a, b, c, e, k`` off a field on chart W."""
    g = f.coeff_v
    y = f.coeff_y
    alpha, beta = y.coefficient("y", 2), y.coefficient("y", 1)
    return {"A": g.coefficient("v", 2), "B": g.coefficient("v", 1), "C": g.coefficient("v", 0),
            "a": alpha.coefficient("v", 2), "b": alpha.coefficient("v", 1),
            "c": alpha.coefficient("v", 0), "e": beta.coefficient("v", 0), "k": f.coeff_t}


def field_from_parameters(params: dict, order: int | None, chart: str = "W") -> VectorField:
    """Build the W-chart field of the given parameter series (k from the constraint)."""
    z = SparseExpr()
    P = {k: params.get(k, z) for k in PARAMS[:-1]}
    P = {k: (v if isinstance(v, SparseExpr) else SparseExpr.const(v)) for k, v in P.items()}
    if order is not None:
        P = {k: v.with_truncation(order) for k, v in P.items()}
    t = SparseExpr.var("t", truncation=order) if order is not None else SparseExpr.var("t")
    v = SparseExpr.var("v")
    y = SparseExpr.var("y")
    g = P["A"] * v * v + P["B"] * v + P["C"]
    alpha = P["a"] * v * v + P["b"] * v + P["c"]
    beta = (P["a"] * t + P["A"]) * v * (-2) + P["e"]
    gamma = P["a"] * t * t + P["A"] * t
    k = P["b"] * t * t + P["e"] * t + P["B"] * t
    return VectorField(chart, {"v": g, "y": alpha * y * y + beta * y + gamma, "t": k})


def solve_global_fields(order: int, degree: int) -> list:
    """Exact basis of global fields modulo ``t^(order+1)`` with v-degree <= degree."""
    if degree < 2 or order < 0:
        raise ValueError("need degree >= 2 and order >= 0")
    ansatz = GlobalFieldAnsatz(degree, order)
    tr = family_transition()
    system = matching_system(ansatz, tr)
    out = []
    for vec in kernel_basis(system.matrix):
        fw = ansatz.combine(vec)
        out.append(GlobalField(fw, pushforward(fw, tr), order))
    return out


def global_field_dimensions(order: int, degree: int) -> tuple:
    """Solution-space dimension by two independent elimination orders."""
    system = matching_system(GlobalFieldAnsatz(degree, order), family_transition())
    n = system.matrix.ncols
    return n - rank(system.matrix), n - rank_reversed(system.matrix)


def _residual(report: Report, name: str, expr: SparseExpr):
    report.add(name, expr)


def verify_field_shape(basis: list, order: int | None = None) -> Report:
    """Check the closed-form shape and the base constraint on every element.

    Per element: degree bounds of g and alpha, the forms of beta and gamma,
    ``b t^2 + e t + B t - k = 0`` and the four W'-chart transformation laws.
    """
    report = Report()
    for n, gf in enumerate(basis):
        N = gf.order if order is None else order
        f = gf.field_W
        P = extract_parameters(f)
        trunc = N
        t = SparseExpr.var("t", truncation=trunc)
        v = SparseExpr.var("v")
        g, Y = f.coeff_v, f.coeff_y
        alpha, beta, gamma = Y.coefficient("y", 2), Y.coefficient("y", 1), Y.coefficient("y", 0)
        _residual(report, f"#{n} g = Av^2+Bv+C", g - (P["A"] * v * v + P["B"] * v + P["C"]))
        _residual(report, f"#{n} alpha = av^2+bv+c",
                  alpha - (P["a"] * v * v + P["b"] * v + P["c"]))
        _residual(report, f"#{n} beta = -2(at+A)v+e",
                  beta - ((P["a"] * t + P["A"]) * v * (-2) + P["e"]))
        _residual(report, f"#{n} gamma = t^2 a + t A", gamma - (P["a"] * t * t + P["A"] * t))
        _residual(report, f"#{n} b t^2 + e t + B t - k = 0",
                  P["b"] * t * t + P["e"] * t + P["B"] * t - P["k"])
        if Y.degree("y") > 2:
            report.add(f"#{n} fiber degree <= 2", passed=False)
        for name, res in transformation_residuals(gf).items():
            _residual(report, f"#{n} {name}", res)
    return report


def transformation_residuals(gf: GlobalField) -> dict:
    """Residuals of the four W -> W' coefficient transformation laws."""
    f, h = gf.field_W, gf.field_Wprime
    N = gf.order
    t = SparseExpr.var("t", truncation=N) if N is not None else SparseExpr.var("t")
    vp = SparseExpr.var("v")
    vinv = SparseExpr.var("v", -1)
    flip = {"v": vinv}

    def at_inverse(p):
        return substitute(p, flip)

    Y1, Y2 = f.coeff_y, h.coeff_y
    g1, k1 = f.coeff_v, f.coeff_t
    a1, b1, c1 = (Y1.coefficient("y", j) for j in (2, 1, 0))
    g2 = h.coeff_v
    a2, b2, c2 = (Y2.coefficient("y", j) for j in (2, 1, 0))
    return {
        "g2 = -v'^2 g1(1/v')": g2 + vp * vp * at_inverse(g1),
        "alpha2 = v'^2 alpha1(1/v')": a2 - vp * vp * at_inverse(a1),
        "beta2 = 2tv' alpha1 + beta1 + 2v' g1": b2 - (t * vp * at_inverse(a1) * 2 + at_inverse(b1)
                                                     + vp * at_inverse(g1) * 2),
        "gamma2 = t^2 alpha1 + (t/v') beta1 + gamma1/v'^2 + t g1 - k1/v'":
            c2 - (t * t * at_inverse(a1) + t * vinv * at_inverse(b1)
                  + vinv * vinv * at_inverse(c1) + t * at_inverse(g1) - k1 * vinv),
    }


def fiber_field_dimension(tau, degree: int = 5) -> int:
    """Dimension of fields on the single fiber ``t = tau`` (tau != 0)."""
    tau = Fraction(tau)
    if tau == 0:
        raise ValueError("tau must be nonzero; use solve_global_fields(0, D) for t = 0")
    return len(fiber_fields(tau, degree))


def fiber_fields(tau, degree: int = 5) -> list:
    tr = stock_family().primary.specialize({"t": Fraction(tau)})
    ansatz = GlobalFieldAnsatz(degree, None)
    system = matching_system(ansatz, tr)
    return [ansatz.combine(vec) for vec in kernel_basis(system.matrix)]


# Čech cohomology of the central fiber -------------------------------------------

@dataclass
class CechCocycle:
    """A field on the overlap ``W0 ∩ W0'`` written in the coordinates of ``chart``."""

    overlap_field: VectorField
    cover: tuple = ("W", "W'")
    note: str = ""

    @property
    def chart(self) -> str:
        return self.overlap_field.chart

    def in_chart(self, chart: str) -> VectorField:
        if chart == self.chart:
            return self.overlap_field
        tr = central_transition()
        if self.chart == tr.source:
            return pushforward(self.overlap_field, tr)
        return pushforward(self.overlap_field, tr.inverted())

    def to_json(self) -> dict:
        return {"cover": list(self.cover), "field": self.overlap_field.to_json(),
                "note": self.note}


def kodaira_spencer_cocycle() -> CechCocycle:
    """First-order gluing difference of the lifts of ``d/dt`` at ``t = 0``.

    The family is restricted to dual numbers by renaming ``t`` to ``eps``
    with ``eps^2 = 0``; the lift ``d/deps`` on W is pushed to W' and the lift
    ``d/deps`` there is subtracted.  The result is a fiber field.
    """
    tr = stock_family().primary
    eps = SparseExpr.var("eps", truncation={"eps": 1})

    def dual(rules):
        out = {("eps" if k == "t" else k): substitute(r, {"t": eps}) for k, r in rules.items()}
        return out
    dual_tr = Transition(tr.source, tr.target, dual(tr.rules), dual(tr.inverse_rules))
    lift = VectorField(tr.source, {"eps": SparseExpr.const(1)})
    diff = pushforward(lift, dual_tr) - VectorField(tr.target, {"eps": SparseExpr.const(1)})
    comps = {k: substitute(c, {"eps": 0}).without_truncation()
             for k, c in diff.components.items()}
    return CechCocycle(VectorField(tr.target, comps), (tr.source, tr.target),
                       "d/deps(W) - d/deps(W') in W' coordinates")


def mixed_form(c: CechCocycle) -> SparseExpr:
    """Fiber coefficient of the cocycle with ``v'`` rewritten as ``1/v`` (W' fiber direction)."""
    f = c.in_chart("W'")
    return substitute(f.coeff_y, {"v": SparseExpr.var("v", -1)})


def _regular_basis(degree: int, chart: str) -> list:
    ansatz = GlobalFieldAnsatz(degree, None, chart)
    return [ansatz.field_for(lab) for lab in ansatz.unknowns()]


def _slot_vector(f: VectorField) -> dict:
    return {(x, m): a for x, c in f.components.items() for m, a in c.items()}


def _coboundary_columns(degree: int) -> list:
    """Columns of ``(V, V') -> push(V) - V'`` in W' coordinates, as slot dicts."""
    tr = central_transition()
    cols = [_slot_vector(pushforward(f, tr)) for f in _regular_basis(degree, "W")]
    cols += [{s: -a for s, a in _slot_vector(f).items()} for f in _regular_basis(degree, "W'")]
    return cols


def _matrix(cols: list, slots: list) -> RationalMatrix:
    index = {s: i for i, s in enumerate(slots)}
    rows = [dict() for _ in slots]
    for j, c in enumerate(cols):
        for s, a in c.items():
            rows[index[s]][j] = a
    return RationalMatrix(len(slots), len(cols), rows)


def is_coboundary(c: CechCocycle, degree: int = 6) -> bool:
    """Whether ``c = push(V) - V'`` for regular V on W0, V' on W0' of v-degree <= degree."""
    target = _slot_vector(c.in_chart("W'"))
    cols = _coboundary_columns(degree)
    slots = sorted({s for col in cols for s in col} | set(target))
    mat = _matrix(cols, slots)
    rhs = [target.get(s, Fraction(0)) for s in slots]
    return solve_affine(mat, rhs).consistent


def h0_dimension(degree: int = 5) -> int:
    """Global fields on F2: kernel of the coboundary map."""
    cols = _coboundary_columns(degree)
    slots = sorted({s for col in cols for s in col})
    mat = _matrix(cols, slots)
    return mat.ncols - rank(mat)


def window_slots(lo: int, hi: int) -> list:
    out = [("v", mono(v=i)) for i in range(lo, hi + 1)]
    out += [("y", mono(v=i, y=j)) for i in range(lo, hi + 1) for j in range(3)]
    return out


@dataclass
class H1Result:
    windows: list
    dimensions: list
    stabilized: bool
    details: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return self.dimensions[-1]

    def to_json(self) -> dict:
        return {"windows": [list(w) for w in self.windows], "dimensions": self.dimensions,
                "stabilized": self.stabilized, "dimension": self.dimension}


def h1_window(lo: int, hi: int, extra: list = ()) -> int:
    """``dim Z / (Z ∩ B)`` for the window space Z of overlap fields.

    B is spanned by coboundaries (plus ``extra`` overlap fields, in W'
    coordinates).  The ansatz degree is large enough that every coboundary
    landing in the window is produced.
    """
    degree = max(abs(lo), abs(hi)) + 4
    cols = _coboundary_columns(degree) + [_slot_vector(f) for f in extra]
    window = set(window_slots(lo, hi))
    slots = sorted({s for col in cols for s in col} | window)
    mat = _matrix(cols, slots)
    outside = [i for i, s in enumerate(slots) if s not in window]
    out_mat = RationalMatrix(len(outside), mat.ncols, [mat.row(i) for i in outside])
    dim_b = rank(mat)
    dim_b_in_window = dim_b - rank(out_mat)
    return len(window) - dim_b_in_window


DEFAULT_WINDOWS = ((-3, 3), (-4, 4), (-5, 5))


def h1_dimension(windows=DEFAULT_WINDOWS, extra: list = ()) -> H1Result:
    """H^1(F2, T) in nested Laurent windows; stabilized iff >= 3 windows agree."""
    windows = [tuple(w) for w in windows]
    for lo, hi in windows:
        if lo > -3 or hi < 3:
            raise ValueError("window must contain [-3, 3]")
    dims = [h1_window(lo, hi, extra) for lo, hi in windows]
    stable = len(windows) >= 3 and len(set(dims)) == 1
    return H1Result(windows, dims, stable)
