"""Lie brackets of chart fields and the seven fundamental fields on F2.

The fundamental fields come from differentiating the action of
``H = C^3 x| GL(2)`` on ``F2 in P^2 x P^1`` along one-parameter subgroups,
on both affine charts, to first order in a dual-number symbol ``eps``.
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .charts import ChartMismatch, Report, VectorField, pushforward, regularity_check, stock_family
from .linalg import RationalMatrix, solve_affine
from .symbolic import SparseExpr, t_valuation

EPS = "eps"


def bracket(f: VectorField, g: VectorField) -> VectorField:
    """Commutator ``f g - g f`` of two derivations on the same chart."""
    if f.chart != g.chart:
        raise ChartMismatch(f"{f.chart} vs {g.chart}")
    comps = {}
    for x in set(f.components) | set(g.components):
        c = f(g.coeff(x)) - g(f.coeff(x))
        if c:
            comps[x] = c
    return VectorField(f.chart, comps)


# Lie(G) basis ------------------------------------------------------------------

@dataclass(frozen=True)
class Generator:
    index: int
    translation: tuple   # (a0, a1, a2)
    matrix: tuple        # ((a, b), (c, d))


LIE_BASIS = (
    Generator(1, (1, 0, 0), ((0, 0), (0, 0))),
    Generator(2, (0, 0, 1), ((0, 0), (0, 0))),
    Generator(3, (0, 0, 0), ((0, 0), (1, 0))),
    Generator(4, (0, 1, 0), ((0, 0), (0, 0))),
    Generator(5, (0, 0, 0), ((1, 0), (0, 0))),
    Generator(6, (0, 0, 0), ((0, 0), (0, 1))),
    Generator(7, (0, 0, 0), ((0, 1), (0, 0))),
)


def _act(gen: Generator, point: dict, chart: str) -> dict:
    """First-order image ``exp(eps*gen) . point`` in homogeneous coordinates."""
    e = SparseExpr.var(EPS, truncation={EPS: 1})
    one = SparseExpr.const(1, truncation={EPS: 1})
    a0, a1, a2 = (e.scale(x) for x in gen.translation)
    (ma, mb), (mc, md) = gen.matrix
    a, b, c, d = one + e.scale(ma), e.scale(mb), e.scale(mc), one + e.scale(md)
    px, py, pz, pu, pv = (point[k] for k in ("px", "py", "pz", "pu", "pv"))
    quad = a0 * pv * pv + a1 * pu * pv + a2 * pu * pu
    lin1 = a * pu + b * pv
    lin2 = c * pu + d * pv
    if chart == "W":         # u != 0
        return {"px": px * pu * pu + py * quad, "py": py * lin1 * lin1,
                "pz": py * lin2 * lin2, "pu": lin1, "pv": lin2}
    return {"px": px * pv * pv + pz * quad, "py": pz * lin1 * lin1,  # v != 0
            "pz": pz * lin2 * lin2, "pu": lin1, "pv": lin2}


_CHART_POINT = {
    "W": {"px": "1", "py": "y", "pz": "y v^2", "pu": "1", "pv": "v"},
    "W'": {"px": "1", "py": "y v^2", "pz": "y", "pu": "v", "pv": "1"},
}


def _chart_coords(image: dict, chart: str) -> dict:
    if chart == "W":
        return {"v": image["pv"] / image["pu"], "y": image["py"] / image["px"]}
    return {"v": image["pu"] / image["pv"], "y": image["pz"] / image["px"]}


def fundamental_field(gen: Generator, chart: str = "W") -> VectorField:
    from .symbolic import parse
    point = {k: parse(s) for k, s in _CHART_POINT[chart].items()}
    coords = _chart_coords(_act(gen, point, chart), chart)
    comps = {x: expr.coefficient(EPS, 1).without_truncation() for x, expr in coords.items()}
    return VectorField(chart, comps)


@dataclass
class FundamentalFields:
    fields: dict                      # index -> VectorField on chart W (t = 0)
    sign_flipped: bool = False
    chart_agreement: Report = field(default_factory=Report)

    def __getitem__(self, i: int) -> VectorField:
        return self.fields[i]

    def __iter__(self):
        return iter(sorted(self.fields))

    def to_json(self) -> dict:
        return {"sign_flipped": self.sign_flipped,
                "fields": {f"E{i}'": self.fields[i].to_json() for i in sorted(self.fields)}}


def generate_fundamental_fields(structure: "StructureConstants | None" = None) -> FundamentalFields:
    """Differentiate the group action along each basis element.

    Both charts are computed independently and compared through the
    ``t = 0`` gluing.  If the bracket table only holds after negating every
    field, the negated fields are returned and ``sign_flipped`` is set.
    """
    tr0 = stock_family().primary.specialize({"t": 0})
    report = Report()
    fields = {}
    for gen in LIE_BASIS:
        fw = fundamental_field(gen, "W")
        fw2 = fundamental_field(gen, "W'")
        pushed = pushforward(fw, tr0)
        diff = pushed - fw2
        report.add(f"E{gen.index}' charts agree", next(iter(diff.components.values()), None))
        report.add(f"E{gen.index}' regular on W", passed=regularity_check(fw))
        report.add(f"E{gen.index}' regular on W'", passed=regularity_check(pushed))
        fields[gen.index] = fw
    ff = FundamentalFields(fields, False, report)
    structure = structure or load_structure_constants()
    if not verify_bracket_table(ff, structure).passed:
        flipped = FundamentalFields({i: f.scale(-1) for i, f in fields.items()}, True, report)
        if verify_bracket_table(flipped, structure).passed:
            return flipped
    return ff


# structure constants --------------------------------------------------------------

class StructureConstants:
    """Brackets ``[e_i, e_j] = sum_k c_k e_k`` stored for ``i < j``."""

    def __init__(self, dim: int, table: dict):
        self.dim = dim
        self.table = {}
        for (i, j), combo in table.items():
            combo = {k: Fraction(c) for k, c in combo.items() if c}
            if i == j:
                if combo:
                    raise ValueError("[e_i, e_i] must vanish")
                continue
            if i > j:
                i, j = j, i
                combo = {k: -c for k, c in combo.items()}
            self.table[(i, j)] = combo

    def bracket(self, i: int, j: int) -> dict:
        if i == j:
            return {}
        if i < j:
            return dict(self.table.get((i, j), {}))
        return {k: -c for k, c in self.table.get((j, i), {}).items()}

    def pairs(self):
        return list(itertools.combinations(range(1, self.dim + 1), 2))

    def bracket_vectors(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.bracket(i, j).items():
                    out[k] = out.get(k, 0) + a * b * c
        return {k: c for k, c in out.items() if c}

    def jacobi_violations(self) -> list:
        bad = []
        rng = range(1, self.dim + 1)
        for i, j, k in itertools.combinations(rng, 3):
            total: dict = {}
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                inner = self.bracket(a, b)
                for kk, v in self.bracket_vectors(inner, {c: 1}).items():
                    total[kk] = total.get(kk, 0) + v
            if any(total.values()):
                bad.append((i, j, k))
        return bad

    def is_zero(self) -> bool:
        return not any(self.table.values())

    @classmethod
    def zero(cls, dim: int = 7) -> "StructureConstants":
        return cls(dim, {})

    def to_text(self) -> str:
        lines = []
        for i, j in self.pairs():
            combo = self.bracket(i, j)
            lines.append(f"[E{i},E{j}] = {_combo_text(combo)}")
        return "\n".join(lines) + "\n"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


_REL = re.compile(r"^\[\s*E(\d+)\s*,\s*E(\d+)\s*\]\s*=\s*(.*)$")
_TERM = re.compile(r"([+-]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*E(\d+)")


def parse_structure_constants(text: str, dim: int = 7) -> StructureConstants:
    """Parse lines like ``[E3,E7] = E5 - E6`` (``#`` starts a comment)."""
    table = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _REL.match(line)
        if not m:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
        i, j, rhs = int(m.group(1)), int(m.group(2)), m.group(3).strip()
        combo: dict = {}
        if rhs != "0":
            pos = 0
            rhs = rhs.replace(" ", "")
            for tm in _TERM.finditer(rhs):
                if tm.start() != pos:
                    raise ValueError(f"line {lineno}: cannot parse {rhs!r}")
                pos = tm.end()
                c = Fraction(tm.group(2)) if tm.group(2) else Fraction(1)
                if tm.group(1) == "-":
                    c = -c
                k = int(tm.group(3))
                combo[k] = combo.get(k, 0) + c
            if pos != len(rhs):
                raise ValueError(f"line {lineno}: trailing text in {rhs!r}")
        if max(i, j, *combo.keys(), 0) > dim or min(i, j) < 1:
            raise ValueError(f"line {lineno}: index out of range")
        table[(i, j)] = combo
    return StructureConstants(dim, table)


def load_structure_constants(path: str | Path | None = None) -> StructureConstants:
    if path is None:
        text = resources.files("f2deform").joinpath("fixtures/structure_constants.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_structure_constants(text)


def verify_bracket_table(fields, structure: StructureConstants) -> Report:
    """Compare every bracket ``[E_i, E_j]`` with the tabulated combination."""
    report = Report()
    for i, j in structure.pairs():
        lhs = bracket(fields[i], fields[j])
        rhs = VectorField(lhs.chart)
        for k, c in structure.bracket(i, j).items():
            rhs = rhs + fields[k].scale(c)
        diff = lhs - rhs
        residual = None
        if not diff.is_zero():
            residual = next(iter(diff.components.values()))
        report.add(f"[E{i},E{j}]", residual, expected=_combo_text(structure.bracket(i, j)))
    return report


def _combo_text(combo: dict) -> str:
    """``{5: 1, 6: -1}`` -> ``"E5 - E6"``; ``{4: -2}`` -> ``"-2 E4"``."""
    parts = []
    for k, c in sorted(combo.items()):
        mag = "" if abs(c) == 1 else f"{_fmt(abs(c))} "
        if not parts:
            parts.append(f"{'-' if c < 0 else ''}{mag}E{k}")
        else:
            parts.append(f"{'-' if c < 0 else '+'} {mag}E{k}")
    return " ".join(parts) or "0"


# base projection and filtration --------------------------------------------------

def base_component(f: VectorField) -> SparseExpr:
    """The ``d/dt`` coefficient ``k(t)`` of a field on the total space."""
    return f.coeff_t


def base_field(k: SparseExpr, chart: str = "W") -> VectorField:
    return VectorField(chart, {"t": k})


def verify_filtration_facts(orders=(1, 2, 3, 4), samples: int = 3, seed: int = 0,
                            extra_terms: int = 3) -> Report:
    """Check the valuation bounds for brackets of ``k(t) d/dt`` fields.

    ``val [f, g] >= p + q - 1`` and ``>= 2p`` when ``p == q``.
    """
    rng = random.Random(seed)
    report = Report()
    for p in orders:
        for q in orders:
            for s in range(samples):
                f = base_field(_series(rng, p, extra_terms))
                g = base_field(_series(rng, q, extra_terms))
                val = t_valuation(bracket(f, g).coeff_t)
                bound = 2 * p if p == q else p + q - 1
                report.add(f"p={p} q={q} #{s}", passed=val >= bound,
                           valuation=val if val != math.inf else "inf", bound=bound)
    return report


def _series(rng: random.Random, order: int, extra: int) -> SparseExpr:
    lead = rng.choice([c for c in range(-4, 5) if c])
    terms = {(("t", order),): lead}
    for j in range(order + 1, order + 1 + extra):
        c = rng.randint(-4, 4)
        if c:
            terms[(("t", j),)] = c
    return SparseExpr(terms)


def jacobi_residual(f: VectorField, g: VectorField, h: VectorField) -> VectorField:
    return bracket(bracket(f, g), h) + bracket(bracket(g, h), f) + bracket(bracket(h, f), g)


def change_of_basis(fields: list, basis: list) -> list | None:
    """Coordinates of each field in ``basis`` (None if some field is outside the span)."""
    slots = sorted({(x, m) for f in basis + fields for x, c in f.components.items() for m in c._terms})
    index = {s: r for r, s in enumerate(slots)}

    def column(f):
        col = [Fraction(0)] * len(slots)
        for x, c in f.components.items():
            for m, a in c.items():
                col[index[(x, m)]] = a
        return col

    cols = [column(b) for b in basis]
    mat = RationalMatrix.from_dense([[cols[j][r] for j in range(len(basis))]
                                     for r in range(len(slots))], len(basis))
    out = []
    for f in fields:
        sol = solve_affine(mat, column(f))
        if not sol.consistent:
            return None
        out.append(sol.particular)
    return out
