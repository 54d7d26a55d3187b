"""Integer polynomials: characteristic polynomials, factorization over Z,
and an exact Schur-Cohn root-location test.

Polynomials are lists of coefficients, lowest degree first.  Factorization
uses rational-root extraction followed by Kronecker's evaluation /
interpolation search, which is exhaustive and fine for the small degrees
(d <= 6) this package targets; cost grows quickly with degree.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

Poly = list  # list[int], lowest degree first


def trim(p: Sequence) -> list:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def degree(p: Sequence) -> int:
    p = trim(p)
    return -1 if p == [0] else len(p) - 1


def evaluate(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_mul(p: Sequence, q: Sequence) -> list:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def poly_divmod(p: Sequence, q: Sequence) -> tuple[list, list]:
    """Division by a monic (or unit-leading) integer polynomial."""
    p, q = trim(p), trim(q)
    lead = q[-1]
    if lead not in (1, -1):
        raise ValueError("divisor must have leading coefficient +-1")
    rem = list(p)
    dq = len(q) - 1
    if len(rem) - 1 < dq:
        return [0], rem
    quot = [0] * (len(rem) - dq)
    for i in range(len(rem) - 1, dq - 1, -1):
        c = rem[i] * lead
        quot[i - dq] = c
        if c:
            for j in range(dq + 1):
                rem[i - dq + j] -= c * q[j]
    return trim(quot), trim(rem[:dq] or [0])


def charpoly(mat: Sequence[Sequence[int]]) -> list:
    """Characteristic polynomial det(xI - M) by Faddeev-LeVerrier (exact)."""
    n = len(mat)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    ident = [[int(i == j) for j in range(n)] for i in range(n)]
    prev = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        cur = [[sum(mat[i][t] * prev[t][j] for t in range(n)) + coeffs[n - k + 1] * ident[i][j]
                for j in range(n)] for i in range(n)]
        tr = sum(sum(mat[i][t] * cur[t][i] for t in range(n)) for i in range(n))
        # tr(M @ cur) is divisible by k for integer M
        q, r = divmod(-tr, k)
        assert r == 0
        coeffs[n - k] = q
        prev = cur
    return coeffs


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, int(n ** 0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _interpolate(xs: Sequence[int], ys: Sequence[int]) -> list | None:
    """Integer polynomial through the points, or None if coefficients are not integral."""
    n = len(xs)
    # Newton divided differences
    coef = [Fraction(y) for y in ys]
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - level])
    poly = [Fraction(0)]
    for i in range(n - 1, -1, -1):
        # poly = poly * (x - xs[i]) + coef[i]
        shifted = [Fraction(0)] + poly
        for t in range(len(poly)):
            shifted[t] -= xs[i] * poly[t]
        shifted[0] += coef[i]
        poly = shifted
    if any(c.denominator != 1 for c in poly):
        return None
    return trim([int(c) for c in poly])


def _find_factor(f: list, s: int) -> list | None:
    """A monic factor of degree s of f (monic, no integer roots), or None."""
    pts = []
    x = 0
    while len(pts) < s + 1:
        for cand in (x, -x) if x else (0,):
            v = evaluate(f, cand)
            if v != 0 and cand not in pts:
                pts.append(cand)
        x += 1
    pts = pts[: s + 1]
    choices = []
    for xp in pts:
        ds = _divisors(evaluate(f, xp))
        choices.append(ds + [-d for d in ds])
    for vals in itertools.product(*choices):
        g = _interpolate(pts, vals)
        if g is None or degree(g) != s or g[-1] != 1:
            continue
        q, r = poly_divmod(f, g)
        if r == [0]:
            return g
    return None


def factor_monic(f: Sequence[int]) -> list[tuple[list, int]]:
    """Factor a monic integer polynomial into monic irreducibles with multiplicity."""
    f = trim(f)
    if f[-1] != 1:
        raise ValueError("polynomial must be monic")
    found: list[list] = []
    # integer roots (rational roots of a monic polynomial are integers)
    while degree(f) >= 1:
        c0 = f[0]
        roots = [0] if c0 == 0 else [s * d for d in _divisors(c0) for s in (1, -1)]
        hit = next((r for r in roots if evaluate(f, r) == 0), None)
        if hit is None:
            break
        f, _ = poly_divmod(f, [-hit, 1])
        found.append([-hit, 1])
    s = 2
    while degree(f) >= 2 * s:
        g = _find_factor(f, s)
        if g is None:
            s += 1
            continue
        f, _ = poly_divmod(f, g)
        found.append(g)
    if degree(f) >= 1:
        found.append(f)
    out: dict[tuple, int] = {}
    for g in found:
        out[tuple(g)] = out.get(tuple(g), 0) + 1
    return sorted(((list(g), e) for g, e in out.items()), key=lambda t: (len(t[0]), t[0]))


def roots_inside_unit_disc(p: Sequence) -> bool:
    """True iff every root of p lies strictly inside |z| < 1 (Schur-Cohn recursion).

    Uses the real-coefficient step p -> (a_n p - a_0 p*) / z, which preserves
    the count of roots in the open disc whenever |a_n| > |a_0|.
    """
    q = [Fraction(c) for c in trim(p)]
    if q == [0]:
        raise ValueError("zero polynomial")
    while len(q) > 1:
        a0, an = q[0], q[-1]
        if abs(an) <= abs(a0):
            return False
        rev = q[::-1]
        nxt = [an * q[i] - a0 * rev[i] for i in range(len(q))]
        # constant term vanishes by construction
        q = nxt[1:]
    return True


def roots_outside_unit_disc(p: Sequence) -> bool:
    """True iff every root of p has modulus strictly greater than one."""
    p = trim(p)
    if p[0] == 0:
        return False
    return roots_inside_unit_disc(p[::-1])
