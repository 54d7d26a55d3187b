"""Probability measures on the torus T^d and their moments.

Three families are supported: finitely atomic measures at rational angles,
Haar measure, and coordinate-wise products of one-dimensional atomic/Haar
factors.  A point of T^d is written ``e^{2 pi i q}`` with ``q in [0,1)^d``
rational, so ``sigma_A`` acts on angles by ``q -> A q mod 1``.

Moments ``M(m) = int z^m dmu`` come back as exact :class:`~kmslat.scalars.QQi`
whenever every phase ``m.q mod 1`` is a quarter turn (and always for Haar);
otherwise as a Python complex evaluated after exact phase reduction.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .lattice import DilationSystem, mat_vec
from .scalars import QQi, format_rational, is_exact, parse_rational

Angle = tuple  # tuple[Fraction, ...] with entries in [0, 1)

_QUARTER_TURNS = {
    Fraction(0): QQi(1, 0),
    Fraction(1, 4): QQi(0, 1),
    Fraction(1, 2): QQi(-1, 0),
    Fraction(3, 4): QQi(0, -1),
}

# float comparisons of inexact moments
MOMENT_TOL = 1e-12


class UnsupportedPushforward(ValueError):
    """The image measure leaves the supported families."""


def _frac_mod1(x) -> Fraction:
    x = Fraction(x)
    return x - math.floor(x)


def phase(theta: Fraction):
    """``e^{2 pi i theta}``, exact for quarter turns."""
    theta = _frac_mod1(theta)
    if theta in _QUARTER_TURNS:
        return _QUARTER_TURNS[theta]
    return cmath.exp(2j * math.pi * float(theta))


@dataclass(frozen=True)
class Atomic:
    """``sum_a w_a delta_{e^{2 pi i q_a}}``; atoms are merged and sorted by angle."""

    atoms: tuple  # ((weight, angle), ...)

    def __post_init__(self):
        merged: dict = {}
        dims = set()
        for w, q in self.atoms:
            w = Fraction(w)
            if w <= 0:
                raise ValueError("atom weights must be positive")
            q = tuple(_frac_mod1(x) for x in q)
            dims.add(len(q))
            merged[q] = merged.get(q, Fraction(0)) + w
        if not merged:
            raise ValueError("an atomic measure needs at least one atom")
        if len(dims) != 1:
            raise ValueError("atoms must share one dimension")
        if sum(merged.values()) != 1:
            raise ValueError(f"weights sum to {sum(merged.values())}, not 1")
        object.__setattr__(self, "atoms", tuple((w, q) for q, w in sorted(merged.items())))

    @property
    def d(self) -> int:
        return len(self.atoms[0][1])

    @classmethod
    def point(cls, q: Sequence) -> "Atomic":
        return cls(((Fraction(1), tuple(q)),))

    @classmethod
    def uniform(cls, points: Sequence[Sequence]) -> "Atomic":
        w = Fraction(1, len(points))
        return cls(tuple((w, tuple(q)) for q in points))


@dataclass(frozen=True)
class Haar:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")


@dataclass(frozen=True)
class CoordinateProduct:
    """Product of one-dimensional Atomic or Haar factors, one per coordinate."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a product needs at least one factor")
        for f in self.factors:
            if not isinstance(f, (Atomic, Haar)) or f.d != 1:
                raise ValueError("product factors must be one-dimensional Atomic or Haar measures")

    @property
    def d(self) -> int:
        return len(self.factors)


Measure = Union[Atomic, Haar, CoordinateProduct]


# ---------------------------------------------------------------------------
# moments

def moment(mu: Measure, m: Sequence[int]):
    m = tuple(m)
    if len(m) != mu.d:
        raise ValueError("character and measure dimensions differ")
    if isinstance(mu, Haar):
        return QQi(1) if not any(m) else QQi(0)
    if isinstance(mu, CoordinateProduct):
        vals = [moment(f, (mi,)) for f, mi in zip(mu.factors, m)]
        if any(is_exact(v) and not v for v in vals):
            return QQi(0)
        out = QQi(1)
        for v in vals:
            out = out * v
        return out
    total = QQi(0)
    for w, q in mu.atoms:
        total = total + w * phase(sum(mi * qi for mi, qi in zip(m, q)))
    return total


def moments_agree(a, b, tol=MOMENT_TOL) -> bool:
    """Exact equality for exact moments, ``tol`` otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(complex(a) - complex(b)) <= tol


def angle_modulus(mu: Measure):
    """D such that ``M(m)`` depends only on ``m mod D``, or None if no such D exists.

    Atomic measures (and products of atomic factors) have D = lcm of the angle
    denominators.  Anything with a Haar factor returns None.
    """
    if isinstance(mu, Atomic):
        return math.lcm(*(x.denominator for _, q in mu.atoms for x in q))
    if isinstance(mu, CoordinateProduct) and all(isinstance(f, Atomic) for f in mu.factors):
        return math.lcm(*(angle_modulus(f) for f in mu.factors))
    return None


def to_atomic(mu: Measure) -> Atomic:
    """Expand a product of atomic factors into a single atomic measure."""
    if isinstance(mu, Atomic):
        return mu
    if isinstance(mu, CoordinateProduct) and all(isinstance(f, Atomic) for f in mu.factors):
        atoms = []
        for combo in itertools.product(*(f.atoms for f in mu.factors)):
            w = Fraction(1)
            for wi, _ in combo:
                w *= wi
            atoms.append((w, tuple(qi[0] for _, qi in combo)))
        return Atomic(tuple(atoms))
    raise ValueError("measure is not atomic")


# ---------------------------------------------------------------------------
# dynamics

def apply_sigma(sys: DilationSystem, q: Sequence) -> Angle:
    """``sigma_A`` on angles: ``q -> A q mod 1``."""
    return tuple(_frac_mod1(x) for x in mat_vec(sys.A, tuple(Fraction(x) for x in q)))


def _monomial_matrix(A) -> list | None:
    """For a generalised permutation matrix, ``[(source_index, scale), ...]`` per row."""
    rows = []
    for row in A:
        nz = [(j, a) for j, a in enumerate(row) if a]
        if len(nz) != 1:
            return None
        rows.append(nz[0])
    if sorted(j for j, _ in rows) != list(range(len(A))):
        return None
    return rows


def pushforward(sys: DilationSystem, mu: Measure) -> Measure:
    """Image of mu under ``sigma_A``; moments satisfy ``M_{sigma*mu}(m) = M_mu(B m)``."""
    if mu.d != sys.d:
        raise ValueError("measure dimension differs from the system")
    if isinstance(mu, Haar):
        return mu
    if isinstance(mu, Atomic):
        return Atomic(tuple((w, apply_sigma(sys, q)) for w, q in mu.atoms))
    if all(isinstance(f, Atomic) for f in mu.factors):
        return pushforward(sys, to_atomic(mu))
    perm = _monomial_matrix(sys.A)
    if perm is None:
        raise UnsupportedPushforward("unsupported pushforward: image of the product is not coordinate-decomposable")
    factors = []
    for j, a in perm:
        f = mu.factors[j]
        if isinstance(f, Haar):
            factors.append(f)
        else:
            factors.append(Atomic(tuple((w, (_frac_mod1(a * q[0]),)) for w, q in f.atoms)))
    return CoordinateProduct(tuple(factors))


def character_box(d: int, bound: int):
    """All m in Z^d with ``|m_i| <= bound``."""
    return itertools.product(range(-bound, bound + 1), repeat=d)


def is_invariant(sys: DilationSystem, mu: Measure, char_bound: int = 8) -> bool:
    if isinstance(mu, Haar):
        return True
    if isinstance(mu, Atomic) or all(isinstance(f, Atomic) for f in mu.factors):
        a = to_atomic(mu)
        return pushforward(sys, a) == a
    return all(moments_agree(moment(mu, sys.apply_B(m)), moment(mu, m)) for m in character_box(sys.d, char_bound))


def exel_condition_witness(sys: DilationSystem, mu: Measure, r, char_bound: int = 8):
    """First character m (in box order) violating the character form of Exel's condition, or None."""
    r = Fraction(r)
    for m in character_box(sys.d, char_bound):
        lhs = moment(mu, m)
        pre = sys.inv_step(m)
        rhs = QQi(0) if pre is None else r * sys.N * moment(mu, pre)
        if not moments_agree(lhs, rhs):
            return m
    return None


def exel_condition_check(sys: DilationSystem, mu: Measure, r, char_bound: int = 8) -> bool:
    """``M(m) = rN M(B^{-1} m)`` on ``B Z^d`` and ``M(m) = 0`` off it, for ``|m_i| <= char_bound``."""
    return exel_condition_witness(sys, mu, r, char_bound) is None


def periodic_orbit_measure(sys: DilationSystem, q: Sequence) -> Atomic:
    """Uniform measure on the cycle eventually reached from q under ``sigma_A``."""
    x = tuple(_frac_mod1(Fraction(a)) for a in q)
    seen: dict = {}
    orbit = []
    while x not in seen:
        seen[x] = len(orbit)
        orbit.append(x)
        x = apply_sigma(sys, x)
    return Atomic.uniform(orbit[seen[x]:])


# ---------------------------------------------------------------------------
# literals: {"haar": d}, {"atoms": [[w, [q...]], ...]}, {"product": [...]}

def parse_measure(obj) -> Measure:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("a measure literal is an object with exactly one of 'haar', 'atoms', 'product'")
    (kind, body), = obj.items()
    if kind == "haar":
        if not isinstance(body, int) or isinstance(body, bool):
            raise ValueError("'haar' takes an integer dimension")
        return Haar(body)
    if kind == "atoms":
        atoms = []
        for item in body:
            w, q = item
            atoms.append((parse_rational(w), tuple(parse_rational(x) for x in q)))
        return Atomic(tuple(atoms))
    if kind == "product":
        return CoordinateProduct(tuple(parse_measure(f) for f in body))
    raise ValueError(f"unknown measure kind {kind!r}")


def format_measure(mu: Measure):
    if isinstance(mu, Haar):
        return {"haar": mu.d}
    if isinstance(mu, Atomic):
        return {"atoms": [[format_rational(w), [format_rational(x) for x in q]] for w, q in mu.atoms]}
    return {"product": [format_measure(f) for f in mu.factors]}
