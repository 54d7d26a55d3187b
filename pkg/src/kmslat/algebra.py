"""The dense *-subalgebra of the Toeplitz algebra spanned by ``u_m v^k v^{*l} u_n^*``.

A :class:`Monomial` ``(m, k, l, n)`` stands for ``u_m v^k v^{*l} u_n^*``.  The
only identification imposed is the shift relation

    u_{m + B^k t} v^k v^{*l} u^*_{n + B^l t} = u_m v^k v^{*l} u_n^*,

resolved by insisting that ``n`` is the canonical representative of its
class in ``Sigma_l`` (so ``n = 0`` whenever ``l = 0``).  Products follow the
three-case multiplication rule for these monomials; coefficients are exact
Gaussian rationals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from . import lattice as lat
from .lattice import DilationSystem, Vec, vec_add, vec_sub
from .scalars import QQi, format_rational, parse_rational


class Monomial(NamedTuple):
    m: Vec
    k: int
    l: int
    n: Vec

    def sort_key(self):
        return (self.k, self.l, self.m, self.n)

    def __str__(self):
        return f"u{list(self.m)} v^{self.k} v*^{self.l} u*{list(self.n)}"


def normalize(sys: DilationSystem, m: Sequence[int], k: int, l: int, n: Sequence[int]) -> Monomial:
    """Shift ``(m, n)`` to ``(m + B^k t, n + B^l t)`` with ``n + B^l t`` in ``Sigma_l``."""
    if k < 0 or l < 0:
        raise ValueError("v-powers must be nonnegative")
    c, t = lat.canonical_rep(sys, n, l)
    return Monomial(vec_sub(tuple(m), sys.apply_B(t, k)), k, l, c)


def multiply_monomials(sys: DilationSystem, x: Monomial, y: Monomial) -> Optional[Monomial]:
    """Product of two monomials: a single normalised monomial, or None for zero."""
    m, k, l, n = x
    p, i, j, q = y
    diff = vec_sub(p, n)
    if i >= l:
        w = lat.preimage(sys, diff, l)
        if w is None:
            return None
        # B^{k-l}(p - n) = B^k (B^{-l}(p - n))
        return normalize(sys, vec_add(m, sys.apply_B(w, k)), k + i - l, j, q)
    w = lat.preimage(sys, tuple(-a for a in diff), i)
    if w is None:
        return None
    # B^{j-i}(n - p) + q = B^j (B^{-i}(n - p)) + q
    return normalize(sys, m, k, l + j - i, vec_add(sys.apply_B(w, j), q))


class AlgebraElement:
    """Finite linear combination of normal-form monomials with QQi coefficients."""

    __slots__ = ("sys", "_terms")

    def __init__(self, sys: DilationSystem, terms=None):
        self.sys = sys
        clean = {}
        for mono, c in (terms or {}).items():
            c = QQi.coerce(c)
            if c:
                clean[mono] = c
        self._terms = clean

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, sys):
        return cls(sys)

    @classmethod
    def one(cls, sys):
        return cls.monomial(sys, sys.zero, 0, 0, sys.zero)

    @classmethod
    def monomial(cls, sys, m, k, l, n, coeff=1):
        return cls(sys, {normalize(sys, m, k, l, n): coeff})

    @classmethod
    def from_monomial(cls, sys, mono: Monomial, coeff=1):
        return cls.monomial(sys, *mono, coeff=coeff)

    @classmethod
    def u(cls, sys, m):
        return cls.monomial(sys, tuple(m), 0, 0, sys.zero)

    @classmethod
    def v(cls, sys):
        return cls.monomial(sys, sys.zero, 1, 0, sys.zero)

    @classmethod
    def vstar(cls, sys):
        return cls.monomial(sys, sys.zero, 0, 1, sys.zero)

    # access ---------------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Terms in the canonical (k, l, m, n) order."""
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def coefficient(self, mono: Monomial) -> QQi:
        return self._terms.get(mono, QQi(0))

    # arithmetic -----------------------------------------------------------

    def _check(self, other):
        if other.sys != self.sys:
            raise ValueError("elements belong to different systems")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            other = AlgebraElement.one(self.sys) * other
        self._check(other)
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out.get(mono, 0) + c
        return AlgebraElement(self.sys, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.sys, {mono: -c for mono, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        c = QQi.coerce(other)
        return AlgebraElement(self.sys, {mono: a * c for mono, a in self._terms.items()})

    def __rmul__(self, other):
        c = QQi.coerce(other)
        return AlgebraElement(self.sys, {mono: c * a for mono, a in self._terms.items()})

    def __pow__(self, e: int):
        out = AlgebraElement.one(self.sys)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, AlgebraElement):
            return self.sys == other.sys and self._terms == other._terms
        return NotImplemented

    __hash__ = None

    def adjoint(self):
        return adjoint(self)

    def __repr__(self):
        if not self._terms:
            return "AlgebraElement(0)"
        body = " + ".join(f"({c}) {mono}" for mono, c in self.items())
        return f"AlgebraElement({body})"

    def serialize(self) -> str:
        return serialize(self)


def multiply(x, y) -> AlgebraElement:
    """Product of monomials or elements, extended bilinearly."""
    if isinstance(x, Monomial) or isinstance(y, Monomial):
        raise TypeError("wrap monomials with AlgebraElement.from_monomial first")
    x._check(y)
    sys = x.sys
    out: dict = {}
    for a, ca in x._terms.items():
        for b, cb in y._terms.items():
            prod = multiply_monomials(sys, a, b)
            if prod is not None:
                out[prod] = out.get(prod, 0) + ca * cb
    return AlgebraElement(sys, out)


def adjoint(x: AlgebraElement) -> AlgebraElement:
    sys = x.sys
    out: dict = {}
    for (m, k, l, n), c in x._terms.items():
        mono = normalize(sys, n, l, k, m)
        out[mono] = out.get(mono, 0) + c.conjugate()
    return AlgebraElement(sys, out)


def apply_dynamics(x: AlgebraElement, r) -> AlgebraElement:
    """``sigma_{i beta}`` with ``r = e^{-beta}``: scale each term by ``r^{k-l}``."""
    r = Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    return AlgebraElement(x.sys, {mono: c * r ** (mono.k - mono.l) for mono, c in x._terms.items()})


def gauge_expectation(x: AlgebraElement) -> AlgebraElement:
    """Keep exactly the terms with ``k = l`` and ``m = n``."""
    return AlgebraElement(x.sys, {mono: c for mono, c in x._terms.items()
                                  if mono.k == mono.l and mono.m == mono.n})


def range_projection_of_digit(sys: DilationSystem, s: Vec) -> AlgebraElement:
    """``u_s v v^* u_s^*``."""
    return AlgebraElement.monomial(sys, s, 1, 1, s)


def defect_projection(sys: DilationSystem) -> AlgebraElement:
    """``P = 1 - sum_{s in Sigma} u_s v v^* u_s^*``."""
    P = AlgebraElement.one(sys)
    for s in sys.sigma:
        P = P - range_projection_of_digit(sys, s)
    return P


def defect_projection_product(sys: DilationSystem) -> AlgebraElement:
    """The same projection as the ordered product of ``1 - u_s v v^* u_s^*``."""
    one = AlgebraElement.one(sys)
    P = one
    for s in sys.sigma:
        P = P * (one - range_projection_of_digit(sys, s))
    return P


def range_projection(sys: DilationSystem, j: int, g: Sequence[int]) -> AlgebraElement:
    """``P_{j,g} = u_g v^j P v^{*j} u_g^*`` for g in ``Sigma_j``."""
    g = tuple(g)
    if g not in lat.coset_representatives(sys, j):
        raise ValueError(f"{g} is not in Sigma_{j}")
    left = AlgebraElement.monomial(sys, g, j, 0, sys.zero)
    right = AlgebraElement.monomial(sys, sys.zero, 0, j, g)
    return left * defect_projection(sys) * right


def transfer_on_character(sys: DilationSystem, m: Sequence[int]) -> Optional[Vec]:
    """Character index of ``L(gamma_m)``: ``B^{-1} m`` if ``m in B Z^d``, else None (zero)."""
    return lat.preimage(sys, m, 1)


def quotient_monomial(sys: DilationSystem, x) -> tuple[Vec, int]:
    """Image ``u_p v^s`` of ``u_m v^k v^{*l} u_n^*`` in the crossed product (|det A| = 1).

    With ``v`` unitary and ``u_n^* = u_{-n}`` the image is
    ``u_{m - B^{k-l} n} v^{k-l}``.
    """
    if sys.N != 1:
        raise ValueError("quotient_monomial requires |det A| = 1")
    m, k, l, n = x
    return vec_sub(tuple(m), sys.apply_B(n, k - l)), k - l


# ---------------------------------------------------------------------------
# text form

def _fmt_vec(v) -> str:
    return ",".join(str(a) for a in v)


def serialize(x: AlgebraElement) -> str:
    """One line per term: ``coeff_re coeff_im | m | k | l | n``."""
    lines = []
    for (m, k, l, n), c in x.items():
        lines.append(f"{format_rational(c.re)} {format_rational(c.im)} | {_fmt_vec(m)} | {k} | {l} | {_fmt_vec(n)}")
    return "\n".join(lines)


def parse_element(sys: DilationSystem, text: str) -> AlgebraElement:
    terms: dict = {}
    for line in text.strip().splitlines():
        if not line.strip():
            continue
        coeff, m, k, l, n = (part.strip() for part in line.split("|"))
        re_s, im_s = coeff.split()
        mono = normalize(sys, tuple(int(a) for a in m.split(",")), int(k), int(l),
                         tuple(int(a) for a in n.split(",")))
        terms[mono] = terms.get(mono, 0) + QQi(parse_rational(re_s), parse_rational(im_s))
    return AlgebraElement(sys, terms)


# ---------------------------------------------------------------------------
# panels of monomials

def random_monomial(sys: DilationSystem, rng, bound: int, kmax: int) -> Monomial:
    """Normalise a uniformly drawn raw ``(m, k, l, n)`` with ``|m_i|, |n_i| <= bound``."""
    m = tuple(int(a) for a in rng.integers(-bound, bound + 1, size=sys.d))
    n = tuple(int(a) for a in rng.integers(-bound, bound + 1, size=sys.d))
    k, l = (int(a) for a in rng.integers(0, kmax + 1, size=2))
    return normalize(sys, m, k, l, n)


def monomial_panel(sys: DilationSystem, kmax: int, bound: int) -> list[Monomial]:
    """All normal-form monomials with ``k, l <= kmax`` and ``|m_i|, |n_i| <= bound``."""
    import itertools

    box = list(itertools.product(range(-bound, bound + 1), repeat=sys.d))
    out = []
    for k in range(kmax + 1):
        for l in range(kmax + 1):
            ns = [n for n in lat.coset_representatives(sys, l) if max(map(abs, n), default=0) <= bound]
            for m in box:
                for n in ns:
                    out.append(Monomial(m, k, l, n))
    return out
