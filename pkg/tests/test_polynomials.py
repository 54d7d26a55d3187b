import numpy as np
import sympy
from hypothesis import assume, given
from hypothesis import strategies as hs

from kmslat import polynomials as pl

x = sympy.symbols("x")

matrices = hs.integers(1, 4).flatmap(
    lambda d: hs.lists(hs.lists(hs.integers(-4, 4), min_size=d, max_size=d), min_size=d, max_size=d))


def _to_sympy(p):
    return sympy.Poly(list(reversed(p)), x)


@given(matrices)
def test_charpoly_matches_sympy(M):
    expected = sympy.Matrix(M).charpoly(x).all_coeffs()
    assert pl.charpoly(M) == [int(c) for c in reversed(expected)]


def test_charpoly_small_cases():
    assert pl.charpoly([[2]]) == [-2, 1]
    assert pl.charpoly([[0, -2], [1, 0]]) == [2, 0, 1]


monic = hs.lists(hs.integers(-6, 6), min_size=1, max_size=6).map(lambda c: c + [1])


@given(monic)
def test_factorization_matches_sympy(f):
    got = sorted((tuple(g), e) for g, e in pl.factor_monic(f))
    _, facs = sympy.factor_list(_to_sympy(f).as_expr(), x)
    expected = sorted((tuple(int(c) for c in reversed(sympy.Poly(g, x).all_coeffs())), e) for g, e in facs)
    assert got == expected


@given(hs.lists(monic, min_size=1, max_size=3))
def test_factorization_of_products(parts):
    f = [1]
    for p in parts:
        f = pl.poly_mul(f, p)
    assume(len(f) <= 9)
    prod = [1]
    for g, e in pl.factor_monic(f):
        for _ in range(e):
            prod = pl.poly_mul(prod, g)
    assert pl.trim(prod) == pl.trim(f)


def test_cyclotomic_factors():
    # x^4 - 1 = (x - 1)(x + 1)(x^2 + 1)
    assert sorted(map(tuple, (g for g, _ in pl.factor_monic([-1, 0, 0, 0, 1])))) == [(-1, 1), (1, 0, 1), (1, 1)]


coeffs = hs.lists(hs.integers(-9, 9), min_size=2, max_size=6).filter(lambda c: c[-1] != 0)


@given(coeffs)
def test_schur_cohn_matches_numpy(p):
    roots = np.roots(list(reversed(p)))
    mods = np.abs(roots)
    assume(np.all(np.abs(mods - 1) > 1e-7))
    assert pl.roots_inside_unit_disc(p) == bool(np.all(mods < 1))
    if p[0] != 0:
        assert pl.roots_outside_unit_disc(p) == bool(np.all(mods > 1))


def test_schur_cohn_boundary_cases():
    assert not pl.roots_inside_unit_disc([-1, 1])
    assert not pl.roots_outside_unit_disc([1, 0, 1])
    assert pl.roots_outside_unit_disc([2, 0, 1])
    assert pl.roots_inside_unit_disc([1, 2])
