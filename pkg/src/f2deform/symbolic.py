"""Exact-rational sparse multivariate expressions.

A :class:`SparseExpr` is a finite sum of rational multiples of monomials in
named variables.  The chart coordinates are ``t``, ``v`` and ``y``; any other
name is an auxiliary symbol (``eps``, lifting parameters, ambient projective
coordinates).  Negative exponents are opt-in per variable (Laurent flags), and
an expression may carry truncation orders, e.g. ``{"t": 2}`` drops every term
with ``t``-exponent above 2.

All values are immutable; every operation returns a new expression.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

CORE_VARS = ("t", "v", "y")

Monomial = tuple  # tuple of (name, exponent) pairs sorted by name, no zero exponents
Scalar = Union[int, Fraction]

ONE_MONO: Monomial = ()


class SymbolicError(ArithmeticError):
    pass


class NonInvertibleSubstitution(SymbolicError):
    """A negative power of a non-unit was requested."""


class NegativeTExponent(SymbolicError):
    pass


class LaurentViolation(SymbolicError, ValueError):
    """Negative exponent on a variable that is not Laurent-flagged."""


class ParseError(ValueError):
    pass


def mono(exps: Mapping[str, int] | None = None, **kw: int) -> Monomial:
    d = dict(exps or {})
    d.update(kw)
    return tuple(sorted((k, e) for k, e in d.items() if e != 0))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        s = d.get(k, 0) + e
        if s:
            d[k] = s
        else:
            del d[k]
    return tuple(sorted(d.items()))


def mono_inv(a: Monomial) -> Monomial:
    return tuple((k, -e) for k, e in a)


def mono_exp(a: Monomial, name: str) -> int:
    for k, e in a:
        if k == name:
            return e
    return 0


def mono_degree(a: Monomial) -> int:
    return sum(e for _, e in a)


def _merge_trunc(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b or a == b:
        return a
    d = dict(a)
    for k, n in b:
        d[k] = min(n, d[k]) if k in d else n
    return tuple(sorted(d.items()))


def _as_trunc(truncation) -> tuple:
    if truncation is None:
        return ()
    if isinstance(truncation, int):
        if truncation < 0:
            raise ValueError("truncation order must be nonnegative")
        return (("t", truncation),)
    items = dict(truncation)
    for n in items.values():
        if n < 0:
            raise ValueError("truncation order must be nonnegative")
    return tuple(sorted(items.items()))


class SparseExpr:
    """Immutable exact sparse (Laurent) polynomial with optional truncation."""

    __slots__ = ("_terms", "laurent", "truncation", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None,
                 laurent: Iterable[str] = (), truncation=None):
        self.laurent = frozenset(laurent)
        if "y" in self.laurent:
            raise LaurentViolation("y never carries negative exponents")
        self.truncation = _as_trunc(truncation)
        self._hash = None
        clean = {}
        trunc = dict(self.truncation)
        for m, c in (terms or {}).items():
            if c == 0:
                continue
            if trunc and any(e > trunc[k] for k, e in m if k in trunc):
                continue
            for k, e in m:
                if e < 0 and k not in self.laurent:
                    raise LaurentViolation(f"negative exponent of {k} without Laurent flag")
            clean[m] = c if isinstance(c, Fraction) else Fraction(c)
        self._terms = clean

    @classmethod
    def _raw(cls, terms: dict, laurent: frozenset, truncation: tuple) -> "SparseExpr":
        # trusted constructor: terms already clean
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.laurent = laurent
        obj.truncation = truncation
        obj._hash = None
        return obj

    # construction helpers

    @classmethod
    def const(cls, c: Scalar, laurent=(), truncation=None) -> "SparseExpr":
        return cls({ONE_MONO: c}, laurent, truncation)

    @classmethod
    def var(cls, name: str, power: int = 1, laurent=(), truncation=None) -> "SparseExpr":
        flags = set(laurent)
        if power < 0:
            flags.add(name)
        return cls({mono({name: power}): 1}, flags, truncation)

    # basic protocol

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = SparseExpr.const(other)
        if not isinstance(other, SparseExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"SparseExpr({canonical_string(self)!r})"

    def __str__(self) -> str:
        return canonical_string(self)

    @property
    def t_truncation(self) -> int | None:
        return dict(self.truncation).get("t")

    def variables(self) -> set:
        return {k for m in self._terms for k, _ in m}

    def is_constant(self) -> bool:
        return all(m == ONE_MONO for m in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get(ONE_MONO, Fraction(0))

    def degree(self, name: str) -> int:
        """Largest exponent of ``name`` (0 for the zero expression)."""
        return max((mono_exp(m, name) for m in self._terms), default=0)

    def min_degree(self, name: str) -> int:
        return min((mono_exp(m, name) for m in self._terms), default=0)

    # arithmetic

    def _coerce(self, other) -> "SparseExpr":
        if isinstance(other, SparseExpr):
            return other
        if isinstance(other, (int, Fraction)):
            return SparseExpr._raw({ONE_MONO: Fraction(other)} if other else {},
                                   frozenset(), ())
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self) -> "SparseExpr":
        return SparseExpr._raw({m: -c for m, c in self._terms.items()},
                               self.laurent, self.truncation)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(other, -self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, SparseExpr):
            return mul(self, other.inverse())
        return NotImplemented

    def __pow__(self, n: int) -> "SparseExpr":
        if n < 0:
            return self.inverse() ** (-n)
        result = SparseExpr._raw({ONE_MONO: Fraction(1)}, self.laurent, self.truncation)
        base = self
        while n:
            if n & 1:
                result = mul(result, base)
            n >>= 1
            if n:
                base = mul(base, base)
        return result

    def scale(self, c: Scalar) -> "SparseExpr":
        if c == 0:
            return SparseExpr._raw({}, self.laurent, self.truncation)
        c = Fraction(c)
        return SparseExpr._raw({m: c * a for m, a in self._terms.items()},
                               self.laurent, self.truncation)

    def mul_monomial(self, m: Monomial, c: Scalar = 1) -> "SparseExpr":
        return mul(self, SparseExpr({m: c}, {k for k, e in m if e < 0}))

    # structure

    def with_truncation(self, truncation) -> "SparseExpr":
        """Return a copy truncated at (the minimum of) the given orders."""
        merged = _merge_trunc(self.truncation, _as_trunc(truncation))
        return SparseExpr(self._terms, self.laurent, merged)

    def without_truncation(self) -> "SparseExpr":
        return SparseExpr._raw(dict(self._terms), self.laurent, ())

    def with_laurent(self, names: Iterable[str]) -> "SparseExpr":
        return SparseExpr._raw(dict(self._terms), self.laurent | frozenset(names),
                               self.truncation)

    def coefficient(self, name: str, exp: int) -> "SparseExpr":
        """Coefficient of ``name**exp``, as an expression in the other variables."""
        out = {}
        for m, c in self._terms.items():
            if mono_exp(m, name) == exp:
                out[tuple((k, e) for k, e in m if k != name)] = c
        return SparseExpr._raw(out, self.laurent, self.truncation)

    def collect(self, names: Iterable[str]) -> dict:
        """Group terms by their exponents in ``names``.

        Returns ``{exponent tuple: coefficient expression}`` where the
        coefficient no longer involves ``names``.
        """
        names = tuple(names)
        out: dict = {}
        for m, c in self._terms.items():
            key = tuple(mono_exp(m, n) for n in names)
            rest = tuple((k, e) for k, e in m if k not in names)
            out.setdefault(key, {})[rest] = c
        return {k: SparseExpr._raw(v, self.laurent, self.truncation) for k, v in out.items()}

    def diff(self, name: str) -> "SparseExpr":
        return partial_derivative(self, name)

    def subs(self, rules: Mapping[str, "SparseExpr | Scalar"]) -> "SparseExpr":
        return substitute(self, rules)

    def inverse(self) -> "SparseExpr":
        """Multiplicative inverse of a unit.

        Units are single monomials (whose variables become Laurent-flagged)
        and, when some variable is truncated, ``c*m*(1 + r)`` with ``r``
        nilpotent modulo the truncation.
        """
        if not self._terms:
            raise NonInvertibleSubstitution("zero is not invertible")
        if len(self._terms) == 1:
            (m, c), = self._terms.items()
            inv = mono_inv(m)
            flags = self.laurent | {k for k, e in inv if e < 0}
            if "y" in flags:
                raise NonInvertibleSubstitution("cannot invert y")
            return SparseExpr._raw({inv: 1 / c}, frozenset(flags), self.truncation)
        trunc = dict(self.truncation)
        if not trunc:
            raise NonInvertibleSubstitution(f"{canonical_string(self)} is not a unit")
        lead = None
        for m in self._terms:
            if all(self._nilpotent_ratio(q, m, trunc) for q in self._terms if q != m):
                lead = m
                break
        if lead is None:
            raise NonInvertibleSubstitution(f"{canonical_string(self)} is not a unit")
        c = self._terms[lead]
        lead_inv = SparseExpr({ONE_MONO: 1}).mul_monomial(lead).inverse()
        lead_inv = SparseExpr._raw(lead_inv._terms, lead_inv.laurent | self.laurent,
                                   self.truncation)
        r = mul(self.scale(1 / c), lead_inv) - 1
        # r is nilpotent: every term has positive degree in truncated variables
        bound = sum(trunc.values()) + len(trunc) + 1
        series = SparseExpr._raw({ONE_MONO: Fraction(1)}, r.laurent, self.truncation)
        power = series
        for _ in range(bound):
            power = mul(power, -r)
            if not power:
                break
            series = series + power
        return mul(series, lead_inv).scale(1 / c)

    @staticmethod
    def _nilpotent_ratio(q: Monomial, m: Monomial, trunc: dict) -> bool:
        ratio = dict(mono_mul(q, mono_inv(m)))
        exps = [ratio.get(k, 0) for k in trunc]
        return all(e >= 0 for e in exps) and any(e > 0 for e in exps)


# module-level operations -------------------------------------------------------

def const(c: Scalar, **kw) -> SparseExpr:
    return SparseExpr.const(c, **kw)


def var(name: str, power: int = 1, **kw) -> SparseExpr:
    return SparseExpr.var(name, power, **kw)


ZERO = SparseExpr()
ONE = SparseExpr.const(1)


def add(a: SparseExpr, b: SparseExpr) -> SparseExpr:
    trunc = _merge_trunc(a.truncation, b.truncation)
    flags = a.laurent | b.laurent
    if len(b._terms) > len(a._terms):
        a, b = b, a
    out = dict(a._terms)
    for m, c in b._terms.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    if trunc and (trunc != a.truncation or trunc != b.truncation):
        return SparseExpr(out, flags, trunc)
    return SparseExpr._raw(out, flags, trunc)


def mul(a: SparseExpr, b: SparseExpr) -> SparseExpr:
    trunc = _merge_trunc(a.truncation, b.truncation)
    flags = a.laurent | b.laurent
    limits = dict(trunc)
    out: dict = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            m = mono_mul(ma, mb)
            if limits and any(e > limits[k] for k, e in m if k in limits):
                continue
            s = out.get(m, 0) + ca * cb
            if s:
                out[m] = s
            else:
                del out[m]
    return SparseExpr._raw(out, flags, trunc)


def partial_derivative(p: SparseExpr, name: str) -> SparseExpr:
    out = {}
    for m, c in p._terms.items():
        e = mono_exp(m, name)
        if e == 0:
            continue
        nm = tuple((k, x - 1) if k == name else (k, x) for k, x in m if not (k == name and x == 1))
        out[nm] = c * e
    return SparseExpr._raw(out, p.laurent, p.truncation)


def substitute(p: SparseExpr, rules: Mapping[str, SparseExpr | Scalar]) -> SparseExpr:
    """Simultaneous substitution of variables by expressions.

    Negative powers of a substituted variable require the replacement to be
    a unit; otherwise :class:`NonInvertibleSubstitution` is raised.
    """
    rules = {k: (r if isinstance(r, SparseExpr) else SparseExpr.const(r)) for k, r in rules.items()}
    trunc = p.truncation
    for r in rules.values():
        trunc = _merge_trunc(trunc, r.truncation)
    flags = set(p.laurent) - set(rules)
    for r in rules.values():
        flags |= r.laurent
    powers: dict = {}

    def power(name, e):
        key = (name, e)
        if key not in powers:
            base = rules[name].with_truncation(dict(trunc)) if trunc else rules[name]
            powers[key] = base ** e
        return powers[key]

    acc: dict = {}
    for m, c in p._terms.items():
        kept = tuple((k, e) for k, e in m if k not in rules)
        term = SparseExpr._raw({kept: c}, frozenset(flags | {k for k, e in kept if e < 0}), trunc)
        for k, e in m:
            if k in rules:
                term = mul(term, power(k, e))
                if not term:
                    break
        for tm, tc in term._terms.items():
            s = acc.get(tm, 0) + tc
            if s:
                acc[tm] = s
            else:
                del acc[tm]
            for k, e in tm:
                if e < 0:
                    flags.add(k)
    return SparseExpr(acc, flags, trunc)


def t_valuation(p: SparseExpr) -> float | int:
    """Minimal ``t``-exponent over all terms (``math.inf`` for zero)."""
    if not p._terms:
        return math.inf
    low = min(mono_exp(m, "t") for m in p._terms)
    if low < 0:
        raise NegativeTExponent(canonical_string(p))
    return low


def valuation(p: SparseExpr, name: str) -> float | int:
    if not p._terms:
        return math.inf
    return min(mono_exp(m, name) for m in p._terms)


# canonical text ---------------------------------------------------------------

def _sort_key(m: Monomial):
    d = dict(m)
    aux = tuple((k, e) for k, e in m if k not in CORE_VARS)
    return (d.get("t", 0), d.get("v", 0), d.get("y", 0), aux)


def _render_monomial(m: Monomial) -> str:
    d = dict(m)
    names = [n for n in CORE_VARS if n in d] + sorted(k for k in d if k not in CORE_VARS)
    return " ".join(f"{n}^{d[n]}" for n in names)


def _render_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def canonical_string(p: SparseExpr) -> str:
    """Deterministic text form, leading monomial first.

    Monomials are ordered by descending ``(t, v, y, auxiliary)`` exponents,
    e.g. ``"-1 * t^1 v^1 + 1 * v^2 y^1"``.
    """
    if not p._terms:
        return "0"
    parts = []
    for m in sorted(p._terms, key=_sort_key, reverse=True):
        c = _render_coeff(p._terms[m])
        parts.append(c if m == ONE_MONO else f"{c} * {_render_monomial(m)}")
    return " + ".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_']*)|(\^)|(\*)|(\+)|(-))")


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        num, name, caret, star, plus, minus = m.groups()
        if num is not None:
            tokens.append(("num", Fraction(num)))
        elif name is not None:
            tokens.append(("name", name))
        elif caret:
            tokens.append(("^", None))
        elif star:
            tokens.append(("*", None))
        elif plus:
            tokens.append(("+", None))
        else:
            tokens.append(("-", None))
    return tokens


def parse(text: str, laurent: Iterable[str] = (), truncation=None) -> SparseExpr:
    """Parse the text grammar emitted by :func:`canonical_string`.

    Bare names (exponent 1) and ``-`` between terms are also accepted.
    Variables appearing with negative exponents are Laurent-flagged.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    i = 0
    terms: dict = {}
    flags = set(laurent)
    sign = 1
    coeff = Fraction(1)
    exps: dict = {}
    seen_factor = False
    need_factor = False

    def flush():
        nonlocal coeff, exps, sign, seen_factor
        if not seen_factor or need_factor:
            raise ParseError("missing term")
        m = mono(exps)
        for k, e in m:
            if e < 0:
                flags.add(k)
        terms[m] = terms.get(m, 0) + sign * coeff
        coeff, exps, sign, seen_factor = Fraction(1), {}, 1, False

    while i < len(tokens):
        kind, val = tokens[i]
        if kind in "+-":
            if seen_factor:
                flush()
            if kind == "-":
                sign = -sign
            i += 1
            continue
        if kind == "*":
            if not seen_factor:
                raise ParseError("dangling '*'")
            need_factor = True
            i += 1
            continue
        if kind == "num":
            coeff *= val
            seen_factor, need_factor = True, False
            i += 1
            continue
        if kind == "name":
            e = 1
            if i + 1 < len(tokens) and tokens[i + 1][0] == "^":
                j = i + 2
                esign = 1
                if j < len(tokens) and tokens[j][0] == "-":
                    esign = -1
                    j += 1
                if j >= len(tokens) or tokens[j][0] != "num" or tokens[j][1].denominator != 1:
                    raise ParseError(f"bad exponent for {val}")
                e = esign * int(tokens[j][1])
                i = j + 1
            else:
                i += 1
            exps[val] = exps.get(val, 0) + e
            seen_factor, need_factor = True, False
            continue
        raise ParseError(f"unexpected token {kind}")
    flush()
    return SparseExpr({m: c for m, c in terms.items()}, flags, truncation)
