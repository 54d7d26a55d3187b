"""Integer-lattice arithmetic for the transpose ``B = A^t`` of an integer matrix.

Everything here is exact integer arithmetic.  Vectors are tuples of ints,
matrices are tuples of row tuples.  The central object is
:class:`DilationSystem`, which fixes ``A``, ``B``, ``N = |det A|`` and a set of
digits ``Sigma`` (coset representatives of ``Z^d / B Z^d`` containing 0).
Digit expansions ``mu_1 + B mu_2 + ... + B^{k-1} mu_k`` give the coset
representatives of ``Z^d / B^k Z^d`` used throughout the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Optional, Sequence

from .polynomials import charpoly, factor_monic, poly_mul, roots_outside_unit_disc

Vec = tuple  # tuple[int, ...]
Mat = tuple  # tuple[tuple[int, ...], ...]

INFINITE = math.inf


# ---------------------------------------------------------------------------
# small integer matrix helpers

def as_matrix(rows: Iterable[Iterable[int]]) -> Mat:
    out = tuple(tuple(int(x) for x in row) for row in rows)
    if not out or any(len(r) != len(out) for r in out):
        raise ValueError("matrix must be square and non-empty")
    return out


def identity(d: int) -> Mat:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def transpose(M: Sequence[Sequence[int]]) -> Mat:
    return tuple(zip(*M))


def mat_vec(M: Mat, v: Sequence[int]) -> Vec:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in M)


def mat_mul(M: Mat, P: Mat) -> Mat:
    cols = transpose(P)
    return tuple(tuple(sum(a * b for a, b in zip(row, c)) for c in cols) for row in M)


def mat_pow(M: Mat, k: int) -> Mat:
    out, base = identity(len(M)), M
    while k:
        if k & 1:
            out = mat_mul(out, base)
        base = mat_mul(base, base)
        k >>= 1
    return out


def vec_add(u, v) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def vec_neg(u) -> Vec:
    return tuple(-a for a in u)


def determinant(M: Mat) -> int:
    """Bareiss fraction-free elimination."""
    n = len(M)
    a = [list(r) for r in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def adjugate(M: Mat) -> Mat:
    """Integer matrix adj(M) with M adj(M) = det(M) I (M nonsingular)."""
    n = len(M)
    det = determinant(M)
    if det == 0:
        raise ValueError("singular matrix")
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    inv = [row[n:] for row in aug]
    adj = tuple(tuple(int(x * det) for x in row) for row in inv)
    assert all((x * det).denominator == 1 for row in inv for x in row)
    return adj


# ---------------------------------------------------------------------------
# Hermite normal form

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_normal_form(M: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Column-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular (c x c) and ``H`` equal to the
    first ``rank`` columns of ``M U``; the remaining columns of ``M U`` are
    zero (so they span the integer kernel of ``M``).  ``H`` is in column
    echelon form: pivot rows strictly increase, pivots are positive, and every
    entry to the left of a pivot lies in ``[0, pivot)``.  ``H`` is returned as
    a list of rows.
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    H = [list(map(int, r)) for r in M]
    U = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def combine(i, j, a, b, c, d):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for mat in (H, U):
            for row in mat:
                x, y = row[i], row[j]
                row[i], row[j] = a * x + b * y, c * x + d * y

    piv = 0
    for r in range(rows):
        if piv == cols:
            break
        for j in range(piv + 1, cols):
            if H[r][j] != 0:
                a, b = H[r][piv], H[r][j]
                g, x, y = _xgcd(a, b)
                combine(piv, j, x, y, -b // g, a // g)
        p = H[r][piv]
        if p == 0:
            continue
        if p < 0:
            for mat in (H, U):
                for row in mat:
                    row[piv] = -row[piv]
            p = -p
        for j in range(piv):
            q = H[r][j] // p
            if q:
                for mat in (H, U):
                    for row in mat:
                        row[j] -= q * row[piv]
        piv += 1
    return [row[:piv] for row in H], U


@dataclass(frozen=True)
class Lattice:
    """A sublattice of ``Z^d`` stored by its column Hermite basis.

    ``columns`` holds the basis vectors; because the Hermite form is unique,
    two lattices are equal exactly when their stored bases are.
    """

    d: int
    columns: tuple

    @classmethod
    def from_generators(cls, d: int, gens: Iterable[Sequence[int]]) -> "Lattice":
        gens = [tuple(g) for g in gens]
        if not gens:
            return cls(d, ())
        M = [[g[i] for g in gens] for i in range(d)]
        H, _ = hermite_normal_form(M)
        rank = len(H[0]) if H else 0
        return cls(d, tuple(tuple(H[i][t] for i in range(d)) for t in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.columns)

    @property
    def basis(self) -> list[list[int]]:
        """The basis as a d x r matrix (list of rows)."""
        return [[c[i] for c in self.columns] for i in range(self.d)]

    def _pivots(self) -> list[int]:
        return [next(i for i, x in enumerate(c) if x != 0) for c in self.columns]

    def __contains__(self, v) -> bool:
        v = list(v)
        pivots = dict(zip(self._pivots(), range(self.rank)))
        for i in range(self.d):
            if i in pivots:
                col = self.columns[pivots[i]]
                q, rem = divmod(v[i], col[i])
                if rem:
                    return False
                if q:
                    v = [a - q * b for a, b in zip(v, col)]
            elif v[i] != 0:
                return False
        return True

    def reduce(self, v: Sequence[int]) -> Vec:
        """Box representative of ``v`` modulo a full-rank lattice."""
        if self.rank != self.d:
            raise ValueError("box reduction needs a full-rank lattice")
        v = list(v)
        for i, col in enumerate(self.columns):
            q = v[i] // col[i]
            if q:
                v = [a - q * b for a, b in zip(v, col)]
        return tuple(v)

    def image(self, M: Mat) -> "Lattice":
        return Lattice.from_generators(self.d, (mat_vec(M, c) for c in self.columns))


# ---------------------------------------------------------------------------
# the system attached to A

@dataclass(frozen=True, eq=False)
class DilationSystem:
    """Integer matrix ``A`` together with ``B = A^t``, ``N = |det A|`` and digits ``Sigma``.

    Build with :meth:`from_matrix`.  Instances are immutable; the internal
    caches only memoise pure functions of the fields.
    """

    A: Mat
    B: Mat
    d: int
    N: int
    det_B: int
    sigma: tuple
    _adj_B: Mat = field(repr=False)
    _B_lattice: Lattice = field(repr=False)
    _sigma_by_box: dict = field(repr=False)
    _cache: dict = field(repr=False, default_factory=dict)

    @classmethod
    def from_matrix(cls, A, sigma: Optional[Iterable[Sequence[int]]] = None) -> "DilationSystem":
        A = as_matrix(A)
        d = len(A)
        det = determinant(A)
        if det == 0:
            raise ValueError("matrix must have nonzero determinant")
        B = transpose(A)
        N = abs(det)
        B_lat = Lattice.from_generators(d, transpose(B))  # columns of B
        if sigma is None:
            diag = [B_lat.columns[i][i] for i in range(d)]
            sig = tuple(itertools.product(*(range(h) for h in diag)))
        else:
            sig = tuple(tuple(int(x) for x in s) for s in sigma)
            if any(len(s) != d for s in sig):
                raise ValueError("sigma vectors must have length d")
        boxes = {}
        for idx, s in enumerate(sig):
            box = B_lat.reduce(s)
            if box in boxes:
                raise ValueError(f"sigma elements {sig[boxes[box]]} and {s} are congruent mod B Z^d")
            boxes[box] = idx
        if len(sig) != N:
            raise ValueError(f"sigma must have exactly N = {N} elements, got {len(sig)}")
        if (0,) * d not in sig:
            raise ValueError("sigma must contain the zero vector")
        return cls(A=A, B=B, d=d, N=N, det_B=det, sigma=sig,
                   _adj_B=adjugate(B), _B_lattice=B_lat, _sigma_by_box=boxes)

    @property
    def zero(self) -> Vec:
        return (0,) * self.d

    def B_pow(self, k: int) -> Mat:
        key = ("Bpow", k)
        if key not in self._cache:
            self._cache[key] = mat_pow(self.B, k)
        return self._cache[key]

    def apply_B(self, v: Sequence[int], k: int = 1) -> Vec:
        """``B^k v`` for k >= 0, or ``B^k v`` for k < 0 when it is integral (else ValueError)."""
        if k >= 0:
            return mat_vec(self.B_pow(k), v)
        out = preimage(self, v, -k)
        if out is None:
            raise ValueError(f"B^{k} {tuple(v)} is not integral")
        return out

    def inv_step(self, v: Sequence[int]) -> Optional[Vec]:
        """``B^{-1} v`` if integral, else None."""
        w = mat_vec(self._adj_B, v)
        det = self.det_B
        if any(x % det for x in w):
            return None
        return tuple(x // det for x in w)

    def digit_index(self, v: Sequence[int]) -> int:
        """Index in ``sigma`` of the digit congruent to v mod B Z^d."""
        return self._sigma_by_box[self._B_lattice.reduce(v)]

    def __eq__(self, other):
        return isinstance(other, DilationSystem) and (self.A, self.sigma) == (other.A, other.sigma)

    def __hash__(self):
        return hash((self.A, self.sigma))


# ---------------------------------------------------------------------------
# operations

def preimage(sys: DilationSystem, m: Sequence[int], k: int) -> Optional[Vec]:
    """The unique integer x with ``B^k x = m``, or None."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    x = tuple(m)
    for _ in range(k):
        x = sys.inv_step(x)
        if x is None:
            return None
    return x


def in_sublattice(sys: DilationSystem, m: Sequence[int], k: int) -> bool:
    return preimage(sys, m, k) is not None


def coset_representatives(sys: DilationSystem, k: int) -> list:
    """``Sigma_k`` in lexicographic digit order (``mu_1`` most significant)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    key = ("sigma_k", k)
    if key not in sys._cache:
        reps = []
        for digits in itertools.product(sys.sigma, repeat=k):
            c = sys.zero
            for mu in reversed(digits):
                c = vec_add(mu, mat_vec(sys.B, c))
            reps.append(c)
        sys._cache[key] = reps
    return sys._cache[key]


def canonical_index(sys: DilationSystem, m: Sequence[int], k: int) -> tuple[int, Vec, Vec]:
    """``(index, c, t)`` with ``c = Sigma_k[index]`` and ``m = c + B^k t``."""
    x = tuple(m)
    idx = 0
    c = sys.zero
    for step in range(k):
        i = sys.digit_index(x)
        mu = sys.sigma[i]
        idx = idx * sys.N + i
        c = vec_add(c, mat_vec(sys.B_pow(step), mu))
        x = sys.inv_step(vec_sub(x, mu))
        assert x is not None
    return idx, c, x


def canonical_rep(sys: DilationSystem, m: Sequence[int], k: int) -> tuple[Vec, Vec]:
    """``(c, t)`` with c in ``Sigma_k`` and ``m = c + B^k t``."""
    _, c, t = canonical_index(sys, m, k)
    return c, t


def _matrix_poly(M: Mat, p: Sequence[int]) -> Mat:
    d = len(M)
    acc = tuple((0,) * d for _ in range(d))
    for coef in reversed(p):
        acc = mat_mul(acc, M)
        acc = tuple(tuple(x + (coef if i == j else 0) for j, x in enumerate(row))
                    for i, row in enumerate(acc))
    return acc


def stable_lattice(sys: DilationSystem) -> Lattice:
    """``M = intersection of B^j Z^d`` computed as ``Z^d ∩ ker chi_u(B)``.

    ``chi_u`` is the part of the characteristic polynomial made of irreducible
    factors with constant term +-1, taken with multiplicity so the kernel is
    the sum of the matching generalised eigenspaces.
    """
    key = "stable"
    if key not in sys._cache:
        factors = factor_monic(charpoly(sys.B))
        unit = [f for f, e in factors for _ in range(e) if abs(f[0]) == 1]
        chi = reduce(poly_mul, unit, [1])
        K = _matrix_poly(sys.B, chi)
        H, U = hermite_normal_form(K)
        rank = len(H[0]) if H and H[0] else 0
        kernel = [tuple(U[i][t] for i in range(sys.d)) for t in range(rank, sys.d)]
        sys._cache[key] = Lattice.from_generators(sys.d, kernel)
    return sys._cache[key]


def max_membership_index(sys: DilationSystem, delta: Sequence[int]):
    """Largest j with ``delta in B^j Z^d``, or ``INFINITE`` on the stable lattice."""
    delta = tuple(delta)
    if delta in stable_lattice(sys):
        return INFINITE
    j, x = 0, delta
    while True:
        x = sys.inv_step(x)
        if x is None:
            return j
        j += 1


def is_dilation(sys: DilationSystem) -> bool:
    """All eigenvalues of A have modulus > 1 (exact Schur-Cohn test)."""
    return roots_outside_unit_disc(charpoly(sys.A))
