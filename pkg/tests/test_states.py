import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as hs

from kmslat import algebra as alg
from kmslat import lattice as lat
from kmslat import measures as ms
from kmslat import states as st
from kmslat.algebra import AlgebraElement as E, Monomial
from kmslat.measures import Atomic, CoordinateProduct, Haar
from kmslat.scalars import QQi
from kmslat.states import StateSpec, eval_state

from conftest import delta_at, sys_of, two_atoms

F = Fraction
TWO = sys_of([[2]])
R3 = F(1, 3)


def naive_series(A, r, mu, mono, levels=400):
    """Oracle: float partial sum of the defining series with sympy's B^{-1}."""
    m, k, l, n = mono
    if k != l:
        return 0j
    B = sympy.Matrix(A).T
    Binv = B.inv()
    N = abs(int(B.det()))
    x = sympy.Matrix(list(m)) - sympy.Matrix(list(n))
    total = 0j
    Nr = N * float(r)
    for j in range(levels):
        if not all(c.is_integer for c in x):
            break
        if j >= k:
            q = tuple(int(c) for c in x)
            total += Nr ** j * complex(ms.moment(mu, q))
        if Nr ** j < 1e-18:
            break
        x = Binv * x
    return (1 - Nr) * total / N ** k


def panel(sys, kmax=2, bound=3):
    return alg.monomial_panel(sys, kmax, bound)


def close(sv, expected, tol=0.0):
    return abs(complex(sv.value) - complex(expected)) <= float(sv.error_bound) + tol


# ---------------------------------------------------------------------------
# examples

def test_eval_examples():
    haar = StateSpec.kms(R3, Haar(1))
    assert eval_state(TWO, haar, Monomial((1,), 1, 1, (0,))).value == 0
    v = eval_state(TWO, haar, Monomial((0,), 1, 1, (0,)))
    assert v.value == R3 and v.error_bound == 0
    d0 = StateSpec.kms(R3, delta_at(0))
    v = eval_state(TWO, d0, E.u(TWO, (2,)))
    assert v.value == F(5, 9) and v.error_bound == 0
    crit = StateSpec.critical()
    for k in range(5):
        assert eval_state(TWO, crit, Monomial((1,), k, k, (1,))).value == F(1, 2 ** k)
    assert eval_state(TWO, StateSpec.ground(delta_at(F(1, 3))), E.v(TWO) * E.vstar(TWO)).value == 0
    diag21 = sys_of([[2, 0], [0, 1]])
    assert eval_state(diag21, StateSpec.critical_limit(delta_at(0, 0)), E.u(diag21, (0, 5))).value == 1


def test_characterization_example():
    d0 = StateSpec.kms(R3, delta_at(0))
    rep = st.characterization_check(TWO, d0, Monomial((2,), 1, 1, (0,)))
    assert rep.passed and rep.lhs == F(1, 9) and rep.rhs == F(1, 9)
    assert eval_state(TWO, d0, Monomial((1,), 0, 0, (0,))).value == R3


def test_identity_pair():
    for spec in (StateSpec.kms(R3, delta_at(0)), StateSpec.critical()):
        one = Monomial((0,), 0, 0, (0,))
        rep = st.kms_condition_check(TWO, spec, one, one)
        assert rep.passed and rep.lhs == 1 and rep.rhs == 1


# ---------------------------------------------------------------------------
# agreement with the defining series

SERIES_CASES = [
    ([[2]], F(1, 3), delta_at(0)),
    ([[2]], F(1, 5), delta_at(F(1, 3))),
    ([[2]], F(1, 3), Atomic.uniform([(F(1, 3),), (F(1, 7),)])),
    ([[3]], F(1, 4), Haar(1)),
    ([[2, 0], [0, 3]], F(1, 12), two_atoms(2)),
    ([[0, -2], [1, 0]], F(1, 3), two_atoms(2)),
    ([[2, 0], [0, 1]], F(1, 4), delta_at(F(1, 2), F(1, 3))),
    ([[2, 0], [0, 1]], F(1, 3), CoordinateProduct((Haar(1), delta_at(F(2, 5))))),
    ([[1, 1], [0, 1]], F(1, 2), delta_at(F(1, 3), F(1, 4))),
    ([[2, 0, 0], [0, 2, 1], [0, 1, 1]], F(1, 4), delta_at(0, F(1, 3), F(1, 5))),
]


@pytest.mark.parametrize("A, r, mu", SERIES_CASES)
def test_kms_series_matches_naive_sum(A, r, mu):
    sys = sys_of(A)
    spec = StateSpec.kms(r, mu)
    box = 2 if sys.d == 3 else 3
    for mono in alg.monomial_panel(sys, 2, box)[:: max(1, sys.d)]:
        got = eval_state(sys, spec, mono)
        assert close(got, naive_series(A, r, mu, mono), 1e-10), mono


def test_closed_form_on_a_cycle():
    # the hyperbolic block [[2,1],[1,1]] permutes residues mod 15 periodically
    sys = sys_of([[2, 0, 0], [0, 2, 1], [0, 1, 1]])
    mu = delta_at(0, F(1, 3), F(1, 5))
    spec = StateSpec.kms(F(1, 4), mu)
    v = eval_state(sys, spec, Monomial((0, 1, 2), 0, 0, (0, 0, 0)))
    assert v.error_bound == 0
    as_product = StateSpec.kms(F(1, 4), CoordinateProduct((delta_at(0), delta_at(F(1, 3)), delta_at(F(1, 5)))))
    assert abs(complex(v.value) - naive_series(sys.A, F(1, 4), mu, Monomial((0, 1, 2), 0, 0, (0, 0, 0)))) < 1e-12
    assert abs(complex(v.value) - complex(eval_state(sys, as_product, Monomial((0, 1, 2), 0, 0, (0, 0, 0))).value)) < 1e-12


def test_truncated_series_reports_its_tail():
    # a product with a Haar factor never takes the closed form off the diagonal
    sys = sys_of([[1, 1], [1, 2]])
    mu = CoordinateProduct((delta_at(F(1, 3)), Haar(1)))
    spec = StateSpec.kms(F(1, 2), mu, eps=F(1, 10 ** 6))
    v = eval_state(sys, spec, Monomial((1, 0), 0, 0, (0, 0)))
    J = st.truncation_level(F(1, 2), F(1, 10 ** 6))
    assert v.error_bound == F(1, 2) ** (J + 1) <= F(1, 10 ** 6)


@given(hs.fractions(F(1, 100), F(99, 100)), hs.integers(1, 40))
def test_truncation_level_is_minimal(Nr, e):
    eps = F(1, 2 ** e)
    J = st.truncation_level(Nr, eps)
    assert Nr ** (J + 1) <= eps
    assert J == 0 or Nr ** J > eps


# ---------------------------------------------------------------------------
# Haar, critical, ground, critical limit

@pytest.mark.parametrize("A, r", [([[2]], F(1, 3)), ([[2, 0], [0, 3]], F(1, 7)), ([[0, -2], [1, 0]], F(1, 5))])
def test_haar_closed_form(A, r):
    sys = sys_of(A)
    spec = StateSpec.kms(r, Haar(sys.d))
    for mono in panel(sys, 3, 2):
        v = eval_state(sys, spec, mono)
        m, k, l, n = mono
        expected = r ** k if (k == l and m == n) else 0
        assert v.value == expected and v.error_bound == 0


@pytest.mark.parametrize("A", [[[2]], [[2, 0], [0, 3]]])
def test_critical_state_kms(A):
    sys = sys_of(A)
    spec = StateSpec.critical()
    rng = np.random.Generator(np.random.PCG64(7))
    for _ in range(100):
        x = alg.random_monomial(sys, rng, 6, 3)
        y = alg.random_monomial(sys, rng, 6, 3)
        assert st.kms_condition_check(sys, spec, x, y).passed


def test_ground_state_vanishes_off_degree_zero():
    mu = two_atoms(2)
    sys = sys_of([[2, 0], [0, 3]])
    spec = StateSpec.ground(mu)
    for mono in panel(sys, 2, 2):
        v = eval_state(sys, spec, mono).value
        m, k, l, n = mono
        if k or l:
            assert v == 0
        else:
            assert ms.moments_agree(v, ms.moment(mu, lat.vec_sub(m, n)))


@pytest.mark.parametrize("r", [F(1, 16), F(1, 64)])
def test_ground_state_is_the_low_temperature_trend(r):
    gap = st.ground_gap(TWO, delta_at(F(1, 3)), panel(TWO, 2, 4), r)
    assert gap <= 10 * r


def test_critical_limit_needs_trivial_moments_on_the_stable_lattice():
    diag21 = sys_of([[2, 0], [0, 1]])
    with pytest.raises(st.StateSpecError):
        eval_state(diag21, StateSpec.critical_limit(delta_at(0, F(1, 3))), E.one(diag21))
    spec = StateSpec.critical_limit(delta_at(F(1, 3), 0))
    assert eval_state(diag21, spec, Monomial((1, 4), 1, 1, (1, 0))).value == F(1, 2)
    assert eval_state(diag21, spec, Monomial((1, 4), 1, 1, (0, 0))).value == 0


# ---------------------------------------------------------------------------
# state axioms

SPECS = [
    (TWO, StateSpec.kms(R3, delta_at(0))),
    (TWO, StateSpec.kms(F(1, 4), Atomic.uniform([(F(1, 3),), (F(1, 2),)]))),
    (TWO, StateSpec.critical()),
    (TWO, StateSpec.ground(delta_at(F(1, 3)))),
    (sys_of([[2, 0], [0, 3]]), StateSpec.kms(F(1, 12), two_atoms(2))),
    (sys_of([[2, 0], [0, 1]]), StateSpec.critical_limit(delta_at(F(1, 2), 0))),
    (sys_of([[1, 0], [1, 1]]), StateSpec.invariant_trace(ms.periodic_orbit_measure(sys_of([[1, 0], [1, 1]]),
                                                                                  (F(1, 3), 0)))),
]


def elements(sys):
    vec = hs.tuples(*[hs.integers(-3, 3)] * sys.d)
    mono = hs.builds(lambda m, k, l, n: alg.normalize(sys, m, k, l, n), vec, hs.integers(0, 2),
                     hs.integers(0, 2), vec)
    coeff = hs.builds(QQi, hs.integers(-2, 2), hs.integers(-2, 2))
    return hs.dictionaries(mono, coeff, min_size=1, max_size=4).map(lambda t: E(sys, t))


spec_and_element = hs.sampled_from(SPECS).flatmap(lambda p: hs.tuples(hs.just(p[0]), hs.just(p[1]), elements(p[0])))


@pytest.mark.parametrize("sys, spec", SPECS)
def test_unital(sys, spec):
    assert eval_state(sys, spec, E.one(sys)).value == 1


@given(spec_and_element)
def test_positive_on_squares(args):
    sys, spec, x = args
    v = eval_state(sys, spec, x.adjoint() * x)
    b = float(v.error_bound) + 1e-12
    z = complex(v.value)
    assert z.real >= -b and abs(z.imag) <= b


@given(spec_and_element)
def test_hermitian(args):
    sys, spec, x = args
    a = eval_state(sys, spec, x.adjoint())
    b = eval_state(sys, spec, x)
    assert abs(complex(a.value) - complex(b.value).conjugate()) <= float(a.error_bound + b.error_bound) + 1e-12


@given(spec_and_element)
def test_gauge_invariance(args):
    sys, spec, x = args
    v = eval_state(sys, spec, x)
    kept = E(sys, {mono: c for mono, c in x.items() if mono.k == mono.l})
    w = eval_state(sys, spec, kept)
    assert abs(complex(v.value) - complex(w.value)) <= float(v.error_bound + w.error_bound) + 1e-12


@pytest.mark.parametrize("sys, spec", [p for p in SPECS if p[1].kind in (st.StateKind.KMS_SERIES,
                                                                            st.StateKind.CRITICAL)])
def test_characterization_on_panel(sys, spec):
    tol = 0 if spec.kind is st.StateKind.CRITICAL else 1e-12
    for mono in alg.monomial_panel(sys, 3, 4 if sys.d == 1 else 2):
        assert st.characterization_check(sys, spec, mono, tol).passed, mono


@pytest.mark.parametrize("sys, spec", [p for p in SPECS if p[1].kind is st.StateKind.KMS_SERIES])
def test_kms_condition_random_pairs(sys, spec):
    rng = np.random.Generator(np.random.PCG64(11))
    for _ in range(80):
        x = alg.random_monomial(sys, rng, 5, 3)
        y = alg.random_monomial(sys, rng, 5, 3)
        rep = st.kms_condition_check(sys, spec, x, y, 1e-12)
        assert rep.passed, (x, y, rep)


def test_report_json_keys():
    rep = st.kms_condition_check(TWO, StateSpec.critical(), Monomial((1,), 1, 0, (0,)), Monomial((0,), 0, 1, (1,)))
    assert set(rep.to_json()) == {"lhs", "rhs", "bound", "pass", "monomials"}


# ---------------------------------------------------------------------------
# feasibility and validation

def test_beta_feasibility():
    assert st.beta_feasibility(TWO, R3)
    bad = st.beta_feasibility(TWO, F(2, 3))
    assert not bad and bad.Nr == F(4, 3) and bad.message == "N r = 4/3 > 1"
    bad6 = st.beta_feasibility(sys_of([[2, 0], [0, 3]]), F(1, 5))
    assert not bad6 and bad6.Nr == F(6, 5)
    assert st.beta_feasibility(sys_of([[1, 1], [0, 1]]), 1)


def test_spec_validation():
    with pytest.raises(st.StateSpecError, match="N r"):
        eval_state(TWO, StateSpec.kms(F(1, 2), Haar(1)), E.one(TWO))
    with pytest.raises(st.StateSpecError, match="measure"):
        eval_state(TWO, StateSpec(st.StateKind.KMS_SERIES, r=R3), E.one(TWO))
    with pytest.raises(st.StateSpecError, match="dimension"):
        eval_state(TWO, StateSpec.kms(R3, Haar(2)), E.one(TWO))
    with pytest.raises(st.StateSpecError, match="det"):
        eval_state(TWO, StateSpec.invariant_trace(Haar(1)), E.one(TWO))
    with pytest.raises(st.StateSpecError, match="invariant"):
        eval_state(sys_of([[1, 0], [1, 1]]), StateSpec.invariant_trace(delta_at(F(1, 3), 0)),
                   E.one(sys_of([[1, 0], [1, 1]])))


# ---------------------------------------------------------------------------
# conditioned state, reconstruction, moments

def test_conditioned_state_examples():
    spec = StateSpec.kms(R3, delta_at(0))
    assert st.conditioned_state(TWO, spec, E.one(TWO)).value == 1
    assert st.conditioned_state(TWO, spec, E.u(TWO, (1,))).value == 1
    assert st.conditioned_state(TWO, spec, E.v(TWO)).value == 0


@given(hs.sampled_from([delta_at(0), delta_at(F(1, 3)), Atomic.uniform([(F(1, 4),), (F(1, 2),)]), Haar(1)]),
       hs.integers(-8, 8))
def test_conditioned_state_recovers_moments(mu, m):
    v = st.conditioned_state(TWO, StateSpec.kms(R3, mu), E.u(TWO, (m,)))
    assert abs(complex(v.value) - complex(ms.moment(mu, (m,)))) <= float(v.error_bound) * 3 + 1e-12


def test_p_n():
    assert st.geometric_p_n(TWO, R3, 1) == F(5, 9)
    for n in range(4):
        pn = st.p_n_element(TWO, n)
        assert pn * pn == pn
        v = eval_state(TWO, StateSpec.kms(R3, delta_at(F(1, 3))), pn)
        assert v.value == st.geometric_p_n(TWO, R3, n)


def test_reconstruction():
    spec = StateSpec.kms(R3, delta_at(F(1, 3)))
    rep = st.reconstruction_partial_sum(TWO, spec, E.one(TWO), 3)
    assert rep.partial_sum.value == rep.p_n == st.geometric_p_n(TWO, R3, 3)
    for m in (1, 2, 4, 6):
        x = E.u(TWO, (m,))
        full = eval_state(TWO, spec, x)
        for n in (2, 4):
            rep = st.reconstruction_partial_sum(TWO, spec, x, n)
            gap = abs(complex(rep.partial_sum.value) - complex(full.value))
            assert gap <= float(rep.tail_bound + rep.partial_sum.error_bound + full.error_bound) + 1e-12


def test_recover_moments_examples():
    d0 = StateSpec.kms(R3, delta_at(0))
    assert st.recover_moments(TWO, StateSpec.kms(R3, Haar(1)), (0,)).value == 1
    assert st.recover_moments(TWO, d0, (1,)).value == 1
    assert st.recover_moments(TWO, d0, (2,)).value == 1


# ---------------------------------------------------------------------------
# traces

UNI = sys_of([[1, 0], [1, 1]])


def test_trace_witness():
    spec = StateSpec.invariant_trace(delta_at(F(1, 3), 0))
    x = Monomial((0, 1), 1, 0, (0, 0))
    y = Monomial((0, 0), 0, 1, (0, 0))
    rep = st.trace_property_check(UNI, spec, [(x, y)], 1e-10)
    assert not rep.passed and not rep.moment_criterion
    p = rep.pairs[0]
    assert complex(p.lhs) == 1
    assert abs(complex(p.rhs) - cmath.exp(-2j * math.pi / 3)) < 1e-12


def test_invariant_trace_passes():
    mu = ms.periodic_orbit_measure(UNI, (F(1, 3), 0))
    spec = StateSpec.invariant_trace(mu)
    rng = np.random.Generator(np.random.PCG64(3))
    pairs = [(alg.random_monomial(UNI, rng, 4, 3), alg.random_monomial(UNI, rng, 4, 3)) for _ in range(60)]
    pairs.append((pairs[0][0], pairs[0][0]))
    rep = st.trace_property_check(UNI, spec, pairs, 1e-10, validate=True)
    assert rep.passed


def test_trace_check_rejects_expanding_systems():
    with pytest.raises(st.StateSpecError):
        st.trace_property_check(TWO, StateSpec.invariant_trace(Haar(1)), [])


def series_pattern(r, nu, delta, k):
    """(1 - r) r^l M_nu(i) when delta = (l i, i) with i != 0 and k <= l."""
    a, i = delta
    if i == 0:
        return r ** k if a == 0 else 0
    if a % i or a // i < k:
        return 0
    l = a // i
    return (1 - r) * r ** l * complex(ms.moment(nu, (i,)))


@pytest.mark.parametrize("r", [F(1, 2), F(1, 10)])
def test_kms_series_for_haar_times_nu(r):
    nu = Atomic.uniform([(F(0),), (F(1, 3),), (F(1, 2),)])
    spec = StateSpec.kms(r, CoordinateProduct((Haar(1), nu)))
    for delta in itertools.product(range(-6, 7), range(-3, 4)):
        for k in range(4):
            v = eval_state(UNI, spec, alg.normalize(UNI, delta, k, k, (0, 0)))
            expected = series_pattern(r, nu, delta, k)
            assert abs(complex(v.value) - complex(expected)) <= float(v.error_bound) + 1e-10, (delta, k)


@pytest.mark.parametrize("mu", [delta_at(0), delta_at(F(1, 3)), two_atoms(1), Haar(1)], ids=str)
def test_kms_values_approach_critical_values(mu):
    panel = alg.monomial_panel(TWO, 2, 3)
    consts = []
    for t in (8, 16, 32):
        spec = StateSpec.kms(F(1, 2) - F(1, t), mu)
        err = max(abs(complex(eval_state(TWO, spec, x).value)
                      - complex(eval_state(TWO, StateSpec.critical(), x).value)) for x in panel)
        consts.append(err * t)
    print(f"C = {max(consts):.3f} for {mu}")
    assert max(consts) <= 2 * min(consts)
