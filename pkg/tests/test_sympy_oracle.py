"""Independent re-derivation of the lifting systems with sympy.

Shares nothing with the package except the closed-form shape of global
fields and the bracket table, both of which are checked elsewhere.
"""

import itertools
import random

import pytest

sp = pytest.importorskip("sympy")

t, v, y = sp.symbols("t v y")
P = ["A", "B", "C", "a", "b", "c", "e"]
E0 = {1: dict(a=-1), 2: dict(c=-1), 3: dict(C=1), 4: dict(b=-1), 5: dict(B=-1, e=2),
      6: dict(B=1), 7: dict(A=-1)}
S = {(1, 3): {4: -2}, (1, 6): {1: -2}, (2, 5): {2: -2}, (2, 7): {4: -2}, (3, 4): {2: 1},
     (3, 5): {3: -1}, (3, 6): {3: 1}, (3, 7): {5: 1, 6: -1}, (4, 5): {4: -1}, (4, 6): {4: -1},
     (4, 7): {1: -1}, (5, 7): {7: -1}, (6, 7): {7: 1}}


def shape(p):
    A, B, C, a, b, c, e = (p[k] for k in P)
    return [A * v**2 + B * v + C,
            (a * v**2 + b * v + c) * y**2 + (-2 * (a * t + A) * v + e) * y + t**2 * a + t * A,
            b * t**2 + e * t + B * t]


def br(f, g):
    X = lambda F, q: F[0] * sp.diff(q, v) + F[1] * sp.diff(q, y) + F[2] * sp.diff(q, t)
    return [sp.expand(X(f, g[k]) - X(g, f[k])) for k in range(3)]


def order_equations(series, m):
    fields = {i: shape(p) for i, p in series.items()}
    eqs = []
    for i, j in itertools.combinations(range(1, 8), 2):
        b = br(fields[i], fields[j])
        for k in range(3):
            r = sp.expand(b[k] - sum(c * fields[l][k] for l, c in S.get((i, j), {}).items()))
            eqs += [c for mon, c in sp.Poly(r, t, v, y).terms() if mon[0] == m]
    return eqs


def test_sympy_oracle_order_one_and_two():
    z1 = {i: {p: sp.Symbol(f"{p}{i}_1") for p in P} for i in E0}
    series = {i: {p: E0[i].get(p, 0) + z1[i][p] * t for p in P} for i in E0}
    unknowns = [z1[i][p] for i in E0 for p in P]
    M, b = sp.linear_eq_to_matrix(order_equations(series, 1), unknowns)
    assert M.rank() == 42 and M.row_join(b).rank() == 42

    sol = next(iter(sp.linsolve((M, b), unknowns)))
    free = sorted(set().union(*(s.free_symbols for s in sol)), key=str)
    assert len(free) == 7
    rng = random.Random(11)
    for _ in range(2):
        vals = {q: sp.Rational(rng.randint(-9, 9), rng.randint(1, 4)) for q in free}
        first = dict(zip(unknowns, [s.subs(vals) for s in sol]))
        z2 = {i: {p: sp.Symbol(f"{p}{i}_2") for p in P} for i in E0}
        s2 = {i: {p: E0[i].get(p, 0) + first[z1[i][p]] * t + z2[i][p] * t**2 for p in P}
              for i in E0}
        u2 = [z2[i][p] for i in E0 for p in P]
        M2, b2 = sp.linear_eq_to_matrix(order_equations(s2, 2), u2)
        assert M2.rank() < M2.row_join(b2).rank()
