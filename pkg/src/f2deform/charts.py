"""Charts, transition maps and vector fields on the two-chart family.

Both charts are affine slices ``x = 1`` of ``C_t x C_v x P^1``; they use the
same coordinate names ``t, v, y`` and are told apart by the chart label.  A
transition stores the target coordinates as expressions in the source
coordinates (``rules``) together with the reverse substitution
(``inverse_rules``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping

from .symbolic import (CORE_VARS, SparseExpr, canonical_string, mono, parse,
                       partial_derivative, substitute)

COORDS = ("t", "v", "y")


class ChartMismatch(ValueError):
    pass


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple = COORDS
    fiber_coord: str = "y"
    fiber_degree: int = 2


@dataclass(frozen=True)
class VectorField:
    """A derivation ``sum_x components[x] * d/dx`` on one chart.

    Components are keyed by coordinate name; missing ones are zero.  The same
    class carries raw (possibly Laurent) derivations on overlaps.
    """

    chart: str
    components: Mapping[str, SparseExpr] = field(default_factory=dict)

    def __post_init__(self):
        clean = {k: c for k, c in dict(self.components).items() if c}
        object.__setattr__(self, "components", clean)

    @classmethod
    def from_coeffs(cls, chart: str, v=None, y=None, t=None) -> "VectorField":
        comps = {}
        for name, c in (("v", v), ("y", y), ("t", t)):
            if c is None:
                continue
            comps[name] = c if isinstance(c, SparseExpr) else parse(c) if isinstance(c, str) else SparseExpr.const(c)
        return cls(chart, comps)

    def coeff(self, name: str) -> SparseExpr:
        return self.components.get(name, SparseExpr())

    @property
    def coeff_v(self) -> SparseExpr:
        return self.coeff("v")

    @property
    def coeff_y(self) -> SparseExpr:
        return self.coeff("y")

    @property
    def coeff_t(self) -> SparseExpr:
        return self.coeff("t")

    def __call__(self, p: SparseExpr) -> SparseExpr:
        """Apply the derivation to an expression."""
        out = SparseExpr()
        for name, c in self.components.items():
            d = partial_derivative(p, name)
            if d:
                out = out + c * d
        return out

    def _check(self, other: "VectorField"):
        if self.chart != other.chart:
            raise ChartMismatch(f"{self.chart} vs {other.chart}")

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        keys = set(self.components) | set(other.components)
        return VectorField(self.chart, {k: self.coeff(k) + other.coeff(k) for k in keys})

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(-1)

    def __neg__(self) -> "VectorField":
        return self.scale(-1)

    def scale(self, c) -> "VectorField":
        if isinstance(c, SparseExpr):
            return VectorField(self.chart, {k: v * c for k, v in self.components.items()})
        return VectorField(self.chart, {k: v.scale(c) for k, v in self.components.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and self.components == other.components

    def __hash__(self):
        return hash((self.chart, frozenset(self.components.items())))

    def is_zero(self) -> bool:
        return not self.components

    def map_coeffs(self, fn) -> "VectorField":
        return VectorField(self.chart, {k: fn(v) for k, v in self.components.items()})

    def truncate(self, order: int) -> "VectorField":
        return self.map_coeffs(lambda c: c.with_truncation(order))

    def subs(self, rules) -> "VectorField":
        return self.map_coeffs(lambda c: substitute(c, rules))

    def on(self, chart: str) -> "VectorField":
        return VectorField(chart, self.components)

    def to_json(self) -> dict:
        return {"chart": self.chart,
                "components": {k: canonical_string(self.coeff(k)) for k in ("v", "y", "t")
                               if k in self.components}}

    def __str__(self) -> str:
        parts = [f"({canonical_string(self.coeff(k))}) d/d{k}" for k in ("v", "y", "t")
                 if k in self.components]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    rules: Mapping[str, SparseExpr]
    inverse_rules: Mapping[str, SparseExpr]

    def inverted(self) -> "Transition":
        return Transition(self.target, self.source, self.inverse_rules, self.rules)

    def specialize(self, values: Mapping[str, SparseExpr | int | Fraction]) -> "Transition":
        """Fix some coordinates (e.g. ``t``) to constants on both sides."""
        def fix(rules):
            return {k: substitute(r, values) for k, r in rules.items() if k not in values}
        return Transition(self.source, self.target, fix(self.rules), fix(self.inverse_rules))

    def truncate(self, order: int) -> "Transition":
        def cut(rules):
            return {k: r.with_truncation(order) for k, r in rules.items()}
        return Transition(self.source, self.target, cut(self.rules), cut(self.inverse_rules))

    def to_target(self, p: SparseExpr) -> SparseExpr:
        """Rewrite a source-coordinate expression in target coordinates."""
        return substitute(p, self.inverse_rules)

    def to_source(self, p: SparseExpr) -> SparseExpr:
        return substitute(p, self.rules)


def identity_transition(chart: str = "W") -> Transition:
    ident = {x: SparseExpr.var(x) for x in COORDS}
    return Transition(chart, chart, ident, ident)


def pushforward(f: VectorField, tr: Transition) -> VectorField:
    """Express a source-chart derivation in target coordinates (chain rule)."""
    if f.chart != tr.source:
        raise ChartMismatch(f"field on {f.chart}, transition from {tr.source}")
    comps = {}
    for z, expr in tr.rules.items():
        acc = SparseExpr()
        for x, c in f.components.items():
            d = partial_derivative(expr, x)
            if d:
                acc = acc + c * d
        if acc:
            comps[z] = tr.to_target(acc)
    return VectorField(tr.target, comps)


def regularity_check(f: VectorField, chart: Chart | None = None) -> bool:
    """True iff ``f`` has the shape of a regular field on ``C x C x P^1``.

    Auxiliary symbols (parameters) count as constants.
    """
    chart = chart or Chart(f.chart)
    fiber = chart.fiber_coord
    for name, c in f.components.items():
        if name not in chart.coords:
            return False
        for m in c._terms:
            d = dict(m)
            if any(d.get(x, 0) < 0 for x in chart.coords):
                return False
            if name == fiber:
                if d.get(fiber, 0) > chart.fiber_degree:
                    return False
            elif name == "t":
                if any(d.get(x, 0) for x in chart.coords if x != "t"):
                    return False
            elif d.get(fiber, 0):
                return False
    return True


def random_chart_field(rng: random.Random, chart: str = "W", degree: int = 2,
                       t_order: int = 2, with_t: bool = True, terms: int = 3,
                       truncation: int | None = None) -> VectorField:
    """Random regular field with small integer coefficients (test helper)."""
    def poly(allow_y: bool, only_t: bool = False):
        out = {}
        for _ in range(rng.randint(0, terms)):
            e = {"t": rng.randint(0, t_order)}
            if not only_t:
                e["v"] = rng.randint(0, degree)
                if allow_y:
                    e["y"] = rng.randint(0, 2)
            out[mono(e)] = Fraction(rng.randint(-3, 3), rng.choice((1, 1, 2)))
        return SparseExpr(out, truncation=truncation)
    comps = {"v": poly(False), "y": poly(True)}
    if with_t:
        comps["t"] = poly(False, only_t=True)
    return VectorField(chart, comps)


# verification reports -----------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: str = "0"
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "residual": self.residual}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> CheckResult | None:
        return next((c for c in self.checks if not c.passed), None)

    def add(self, name: str, residual: SparseExpr | None = None, passed: bool | None = None,
            **detail) -> CheckResult:
        if passed is None:
            passed = residual is None or residual.is_zero()
        res = CheckResult(name, passed, canonical_string(residual) if residual is not None else "0",
                          detail)
        self.checks.append(res)
        return res

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}


def verify_transition_consistency(tr: Transition, samples: int = 5, seed: int = 0) -> Report:
    """Check that rules and inverse rules are mutually inverse.

    Residuals are reported in source coordinates.  Also pushes a few random
    chart fields forward and back and compares with the original.
    """
    report = Report()
    for z, expr in sorted(tr.rules.items()):
        back = tr.to_target(expr) - SparseExpr.var(z)
        report.add(f"rules∘inverse[{z}]", tr.to_source(back) if back else back)
    for x, expr in sorted(tr.inverse_rules.items()):
        back = tr.to_source(expr) - SparseExpr.var(x)
        report.add(f"inverse∘rules[{x}]", back)
    if not report.passed:
        return report
    rng = random.Random(seed)
    inv = tr.inverted()
    for k in range(samples):
        f = random_chart_field(rng, tr.source)
        g = pushforward(pushforward(f, tr), inv)
        diff = g - f
        worst = next(iter(diff.components.values()), SparseExpr())
        report.add(f"pushforward round trip #{k}", worst)
    return report


# glued family and embedded models -----------------------------------------------

@dataclass(frozen=True)
class ProjectiveModel:
    """A hypersurface in a product of projective spaces (and possibly ``C_t``)."""

    name: str
    factors: tuple            # tuple of tuples of homogeneous coordinate names
    equation: SparseExpr
    base_value: Fraction | None = None   # set for a single fiber, e.g. t = 0


@dataclass(frozen=True)
class Embedding:
    name: str
    chart: str
    model: str
    images: Mapping[str, SparseExpr]   # homogeneous coordinate -> chart expression


@dataclass
class GluedFamily:
    charts: dict
    transitions: list
    models: dict = field(default_factory=dict)
    embeddings: dict = field(default_factory=dict)
    base_variable: str = "t"

    def transition(self, source: str, target: str) -> Transition:
        for tr in self.transitions:
            if tr.source == source and tr.target == target:
                return tr
            if tr.source == target and tr.target == source:
                return tr.inverted()
        raise KeyError(f"no transition {source} -> {target}")

    @property
    def primary(self) -> Transition:
        return self.transitions[0]


def _parse_rule(line: str, where: str) -> tuple:
    if "=" not in line:
        raise ManifestError(f"{where}: expected 'name = expression', got {line!r}")
    lhs, rhs = line.split("=", 1)
    return lhs.strip(), parse(rhs)


def parse_manifest(text: str) -> GluedFamily:
    """Read the plain-text family manifest.

    Blocks::

        chart NAME: t v y
        transition SRC -> DST        (followed by 'name = expr' lines,
        inverse                       then the inverse rules, then 'end')
        model NAME: X Y Z | U V      ('equation = expr', optional 'base = c', 'end')
        embedding NAME: CHART -> MODEL   ('coord = expr' lines, then 'end')
    """
    charts: dict = {}
    transitions: list = []
    models: dict = {}
    embeddings: dict = {}
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    i = 0

    def block(start):
        out = []
        j = start
        while j < len(lines) and lines[j] not in ("end", "inverse"):
            out.append(lines[j])
            j += 1
        if j == len(lines):
            raise ManifestError("unterminated block")
        return out, j

    while i < len(lines):
        head = lines[i]
        kw, _, rest = head.partition(" ")
        if kw == "chart":
            name, _, coords = rest.partition(":")
            cs = tuple(coords.split())
            if cs != COORDS:
                raise ManifestError(f"chart {name.strip()}: coordinates must be t v y")
            charts[name.strip()] = Chart(name.strip(), cs)
            i += 1
        elif kw == "transition":
            src, _, dst = rest.partition("->")
            fwd, j = block(i + 1)
            if lines[j] != "inverse":
                raise ManifestError(f"transition {rest}: missing inverse rules")
            inv, j = block(j + 1)
            if lines[j] != "end":
                raise ManifestError(f"transition {rest}: missing end")
            where = f"transition {rest.strip()}"
            transitions.append(Transition(src.strip(), dst.strip(),
                                          dict(_parse_rule(ln, where) for ln in fwd),
                                          dict(_parse_rule(ln, where) for ln in inv)))
            i = j + 1
        elif kw == "model":
            name, _, facs = rest.partition(":")
            factors = tuple(tuple(f.split()) for f in facs.split("|"))
            body, j = block(i + 1)
            rules = dict(_parse_rule(ln, f"model {name}") for ln in body)
            if "equation" not in rules:
                raise ManifestError(f"model {name}: missing equation")
            base = rules.get("base")
            if base is not None and not base.is_constant():
                raise ManifestError(f"model {name}: base must be a constant")
            models[name.strip()] = ProjectiveModel(
                name.strip(), factors, rules["equation"],
                base.constant_term() if base is not None else None)
            i = j + 1
        elif kw == "embedding":
            name, _, arrow = rest.partition(":")
            chart, _, model = arrow.partition("->")
            body, j = block(i + 1)
            embeddings[name.strip()] = Embedding(name.strip(), chart.strip(), model.strip(),
                                                 dict(_parse_rule(ln, f"embedding {name}")
                                                      for ln in body))
            i = j + 1
        else:
            raise ManifestError(f"unknown directive {kw!r}")
    if not charts or not transitions:
        raise ManifestError("manifest declares no charts or transitions")
    for tr in transitions:
        for c in (tr.source, tr.target):
            if c not in charts:
                raise ManifestError(f"transition refers to unknown chart {c}")
    return GluedFamily(charts, transitions, models, embeddings)


def load_manifest(path: str | Path | None = None) -> GluedFamily:
    if path is None:
        text = resources.files("f2deform").joinpath("fixtures/w_family.manifest").read_text()
    else:
        text = Path(path).read_text()
    return parse_manifest(text)


def stock_family() -> GluedFamily:
    return load_manifest()


def monomial_ratio(p: SparseExpr, q: SparseExpr) -> SparseExpr | None:
    """Return ``c*m`` with ``p == c*m*q`` when such a monomial multiple exists."""
    if not p or not q:
        return None
    lp = max(p._terms, key=_order_key)
    lq = max(q._terms, key=_order_key)
    exps = dict(lp)
    for k, e in lq:
        exps[k] = exps.get(k, 0) - e
    if exps.get("y", 0) < 0:
        return None
    ratio = SparseExpr({mono(exps): p._terms[lp] / q._terms[lq]},
                       {k for k, e in exps.items() if e < 0})
    return ratio if ratio * q == p else None


def _order_key(m):
    d = dict(m)
    return tuple(d.get(x, 0) for x in CORE_VARS) + tuple(sorted(m))


def projective_equal(p: list, q: list) -> SparseExpr:
    """Largest 2x2 minor residual ``p_i q_j - p_j q_i`` (zero iff proportional)."""
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            r = p[i] * q[j] - p[j] * q[i]
            if r:
                return r
    return SparseExpr()


def verify_surface_models(family: GluedFamily | None = None) -> Report:
    """Symbolic identities of the embedded models.

    (a) every embedding lands on its model's hypersurface;
    (b) embeddings of the two charts agree on the overlap, factor by factor
        up to a common monomial;
    (c) the ``t = 0`` slice of the deformed model is the central model.
    """
    family = family or stock_family()
    report = Report()
    for name, emb in sorted(family.embeddings.items()):
        model = family.models[emb.model]
        residual = substitute(model.equation, emb.images)
        report.add(f"{name} lands on {model.name}", residual)
    by_model: dict = {}
    for emb in family.embeddings.values():
        by_model.setdefault(emb.model, []).append(emb)
    for model_name, embs in sorted(by_model.items()):
        model = family.models[model_name]
        embs = sorted(embs, key=lambda e: e.name)
        for a_i in range(len(embs)):
            for b_i in range(a_i + 1, len(embs)):
                a, b = embs[a_i], embs[b_i]
                if a.chart == b.chart:
                    continue
                tr = family.transition(a.chart, b.chart)
                if model.base_value is not None:
                    tr = tr.specialize({family.base_variable: model.base_value})
                ratios = []
                ok = True
                for fac in model.factors:
                    pa = [a.images[c] for c in fac]
                    pb = [tr.to_source(b.images[c]) for c in fac]
                    res = projective_equal(pa, pb)
                    ratio = None
                    if not res:
                        k = next(i for i, x in enumerate(pb) if x)
                        ratio = monomial_ratio(pb[k], pa[k])
                    ratios.append(canonical_string(ratio) if ratio is not None else None)
                    if res or ratio is None:
                        ok = False
                        report.add(f"{a.name} = {b.name} on overlap", res if res else None,
                                   passed=False, factor=list(fac))
                        break
                if ok:
                    report.add(f"{a.name} = {b.name} on overlap", None, passed=True,
                               factor_ratios=ratios)
    if "X" in family.models and "F2" in family.models:
        sliced = substitute(family.models["X"].equation, {"t": 0})
        report.add("t=0 slice of X is F2", sliced - family.models["F2"].equation)
    return report
