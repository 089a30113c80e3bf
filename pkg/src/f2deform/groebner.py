"""Buchberger's algorithm over the rationals.

Polynomials are :class:`SparseExpr` values in parameter symbols.  Internally
they are converted to ``{exponent tuple: Fraction}`` over a fixed variable
order.  A reduced basis equal to ``{1}`` certifies, by the weak
Nullstellensatz, that the system has no solution over any algebraically
closed field containing Q (in particular over C).  It says nothing weaker
about rational points alone: ``x^2 + 1`` is not certified empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .symbolic import SparseExpr, canonical_string, mono

ORDERS = ("grevlex", "lex")


def _key(order: str):
    if order == "grevlex":
        return lambda e: (sum(e), tuple(-x for x in reversed(e)))
    if order == "lex":
        return lambda e: e
    raise ValueError(f"unknown monomial order {order!r}")


class _Ring:
    def __init__(self, variables, order):
        self.vars = tuple(variables)
        self.order = order
        self.key = _key(order)

    def to_dict(self, p: SparseExpr) -> dict:
        out = {}
        pos = {v: i for i, v in enumerate(self.vars)}
        for m, c in p.items():
            e = [0] * len(self.vars)
            for k, x in m:
                if x < 0:
                    raise ValueError("negative exponents are not polynomial")
                e[pos[k]] = x
            out[tuple(e)] = c
        return out

    def to_expr(self, d: dict) -> SparseExpr:
        return SparseExpr({mono(dict(zip(self.vars, e))): c for e, c in d.items()})

    def lead(self, p: dict):
        return max(p, key=self.key)


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _sub_mono(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _add_scaled(p: dict, q: dict, c: Fraction, shift) -> None:
    """``p -= c * x^shift * q`` in place."""
    for e, a in q.items():
        m = tuple(x + y for x, y in zip(e, shift))
        s = p.get(m, 0) - c * a
        if s:
            p[m] = s
        else:
            p.pop(m, None)


def _reduce(p: dict, basis: list, ring: _Ring) -> dict:
    """Full multivariate division remainder."""
    p = dict(p)
    rem: dict = {}
    leads = [(ring.lead(g), g) for g in basis]
    while p:
        lm = ring.lead(p)
        lc = p[lm]
        for glm, g in leads:
            if _divides(glm, lm):
                _add_scaled(p, g, lc / g[glm], _sub_mono(lm, glm))
                break
        else:
            rem[lm] = lc
            del p[lm]
    return rem


def _monic(p: dict, ring: _Ring) -> dict:
    lc = p[ring.lead(p)]
    return {e: c / lc for e, c in p.items()}


def _spoly(f: dict, g: dict, ring: _Ring) -> dict:
    lf, lg = ring.lead(f), ring.lead(g)
    lcm = _lcm(lf, lg)
    out: dict = {}
    _add_scaled(out, f, Fraction(-1) / f[lf], _sub_mono(lcm, lf))
    _add_scaled(out, g, Fraction(1) / g[lg], _sub_mono(lcm, lg))
    return out


@dataclass
class GroebnerBasis:
    generators: list            # SparseExpr, monic, reduced
    order: str = "grevlex"
    variables: tuple = ()

    def is_unit(self) -> bool:
        return len(self.generators) == 1 and self.generators[0] == 1

    def to_json(self) -> dict:
        return {"order": self.order, "variables": list(self.variables),
                "generators": [canonical_string(g) for g in self.generators]}


def _variables(polys) -> tuple:
    return tuple(sorted({k for p in polys for k in p.variables()}))


def buchberger(gens: list, order: str = "grevlex", variables=None) -> GroebnerBasis:
    """Reduced Gröbner basis.

    Pair selection is the normal strategy (smallest lcm degree first, ties by
    generator index), with the coprime-leading-monomial criterion.
    """
    if not gens:
        raise ValueError("need at least one generator")
    variables = tuple(variables) if variables is not None else _variables(gens)
    ring = _Ring(variables, order)
    G = [_monic(d, ring) for d in (ring.to_dict(g) for g in gens) if d]
    if not G:
        return GroebnerBasis([SparseExpr()], order, variables)
    pairs = {(i, j) for i in range(len(G)) for j in range(i + 1, len(G))}
    while pairs:
        i, j = min(pairs, key=lambda p: (sum(_lcm(ring.lead(G[p[0]]), ring.lead(G[p[1]]))),
                                          p[0], p[1]))
        pairs.discard((i, j))
        li, lj = ring.lead(G[i]), ring.lead(G[j])
        if all(a == 0 or b == 0 for a, b in zip(li, lj)):
            continue
        h = _reduce(_spoly(G[i], G[j], ring), G, ring)
        if not h:
            continue
        h = _monic(h, ring)
        if all(x == 0 for x in ring.lead(h)):
            G = [h]
            pairs = set()
            break
        n = len(G)
        G.append(h)
        pairs |= {(k, n) for k in range(n)}
    return GroebnerBasis([ring.to_expr(g) for g in _interreduce(G, ring)], order, variables)


def _interreduce(G: list, ring: _Ring) -> list:
    G = sorted(G, key=lambda g: ring.key(ring.lead(g)))
    minimal = []
    for g in G:
        lg = ring.lead(g)
        if not any(_divides(ring.lead(h), lg) for h in minimal):
            minimal = [h for h in minimal if not _divides(lg, ring.lead(h))]
            minimal.append(g)
    out = []
    for k, g in enumerate(minimal):
        others = minimal[:k] + minimal[k + 1:]
        r = _reduce(g, others, ring)
        out.append(_monic(r, ring))
    return sorted(out, key=lambda g: ring.key(ring.lead(g)), reverse=True)


def normal_form(p: SparseExpr, gb: GroebnerBasis) -> SparseExpr:
    variables = tuple(sorted(set(gb.variables) | p.variables()))
    ring = _Ring(variables, gb.order)
    basis = [d for d in (ring.to_dict(g) for g in gb.generators) if d]
    return ring.to_expr(_reduce(ring.to_dict(p), basis, ring))


def s_polynomial_residuals(gb: GroebnerBasis) -> list:
    """Normal forms of all S-polynomials (all zero for a Gröbner basis)."""
    ring = _Ring(gb.variables, gb.order)
    basis = [ring.to_dict(g) for g in gb.generators if g]
    out = []
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            out.append(ring.to_expr(_reduce(_spoly(basis[i], basis[j], ring), basis, ring)))
    return out


@dataclass
class EmptinessCertificate:
    empty: bool
    basis: GroebnerBasis
    system: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.empty

    def to_json(self) -> dict:
        return {"empty": self.empty, "system": [canonical_string(p) for p in self.system],
                "groebner_basis": self.basis.to_json()}


def certify_empty(gens: list, order: str = "grevlex") -> EmptinessCertificate:
    """True iff the reduced basis is ``{1}`` (no common zero over C)."""
    gens = [g for g in gens]
    if not any(gens):
        return EmptinessCertificate(False, GroebnerBasis([SparseExpr()], order, ()), gens)
    gb = buchberger([g for g in gens if g], order)
    return EmptinessCertificate(gb.is_unit(), gb, gens)
