"""Finite-dimensional model of the induced representation, used as an oracle.

For an atomic measure with atoms ``z_a = e^{2 pi i q_a}`` and weights ``w_a``,
level ``j`` of the representation space consists of sections
``xi: Z^d -> L^2(mu)`` with ``xi(c + B^j s) = M_{-s} xi(c)``; such a section is
fixed by its values on ``Sigma_j``, so level j has dimension ``N^j a``.
Coordinates are normalised by ``sqrt(w_a)`` so the standard inner product is
the L^2 inner product.

* ``(U_m xi)(p) = xi(p - m)``
* ``(V xi)(p) = xi(B^{-1} p)`` on ``B Z^d`` and 0 elsewhere (level j to j+1;
  the top level J is sent to 0)
* ``e_{0,0}`` is the constant function 1 on level 0 and
  ``e_{j,g} = U_{c_j(g)} V^j e_{0,0}``.

Every operator here sends each coordinate vector to a multiple of another
one (or to zero), so it is stored as a :class:`PhasedMap` and composed in
O(dim); :meth:`PhasedMap.matrix` gives the scipy sparse matrix.  The vector
state

    psi(T) = (1 - N r) sum_{j <= J} sum_g r^j <T e_{j,g}, e_{j,g}>

differs from the full series by at most ``(N r)^{J+1}`` per unit coefficient:
a monomial moves level j to ``j - l + k``, so the truncated operators never
lose mass on the diagonal terms that survive.  Since ``e_{j,g}`` turns out to
be a coordinate vector times ``sqrt(w)``, the state reads off operator
diagonals; :func:`relation_check` confirms that form on the low levels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from . import lattice as lat
from .algebra import AlgebraElement, Monomial
from .lattice import DilationSystem, vec_sub
from .measures import Atomic, to_atomic
from .states import StateValue

DEFAULT_SIZE_CAP = 10 ** 5
RELATION_TOL = 1e-12


class SizeCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PhasedMap:
    """Operator with ``T e_c = phase[c] e_{target[c]}`` (``target[c] = -1`` for zero)."""

    target: np.ndarray
    phase: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.target)

    @classmethod
    def identity(cls, dim: int) -> "PhasedMap":
        return cls(np.arange(dim), np.ones(dim, dtype=complex))

    def __matmul__(self, other: "PhasedMap") -> "PhasedMap":
        t = other.target
        alive = t >= 0
        safe = np.where(alive, t, 0)
        target = np.where(alive, self.target[safe], -1)
        phase = np.where(target >= 0, self.phase[safe] * other.phase, 0)
        return PhasedMap(target, phase)

    def adjoint(self) -> "PhasedMap":
        target = np.full(self.dim, -1)
        phase = np.zeros(self.dim, dtype=complex)
        src = np.flatnonzero(self.target >= 0)
        target[self.target[src]] = src
        phase[self.target[src]] = np.conj(self.phase[src])
        return PhasedMap(target, phase)

    def diagonal(self) -> np.ndarray:
        return np.where(self.target == np.arange(self.dim), self.phase, 0)

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        src = np.flatnonzero(self.target >= 0)
        np.add.at(out, self.target[src], self.phase[src] * x[src])
        return out

    def matrix(self) -> sp.csr_matrix:
        src = np.flatnonzero(self.target >= 0)
        return sp.csr_matrix((self.phase[src], (self.target[src], src)), shape=(self.dim, self.dim))


def _phases(angles, s) -> np.ndarray:
    """``z_a^{-s}`` for every atom, after exact reduction of ``q_a . s`` mod 1."""
    out = np.empty(len(angles), dtype=complex)
    for i, q in enumerate(angles):
        t = sum(Fraction(x) * y for x, y in zip(q, s))
        t -= t.numerator // t.denominator
        out[i] = np.exp(-2j * np.pi * float(t))
    return out


@dataclass
class TruncatedRep:
    sys: DilationSystem
    mu: Atomic
    J: int
    dim: int
    offsets: list
    V: PhasedMap
    U_gen: list
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def a(self) -> int:
        return len(self.mu.atoms)

    def level_slice(self, j: int) -> slice:
        return slice(self.offsets[j], self.offsets[j + 1])

    def U(self, m) -> PhasedMap:
        """Image of ``u_m`` as a product of powers of the generator images."""
        m = tuple(m)
        key = ("U", m)
        if key not in self._cache:
            out = PhasedMap.identity(self.dim)
            for t, e in enumerate(m):
                step = self.U_gen[t] if e >= 0 else self._gen_inverse(t)
                for _ in range(abs(e)):
                    out = step @ out
            self._cache[key] = out
        return self._cache[key]

    def _gen_inverse(self, t: int) -> PhasedMap:
        key = ("Uinv", t)
        if key not in self._cache:
            self._cache[key] = self.U_gen[t].adjoint()
        return self._cache[key]

    def U_direct(self, m) -> PhasedMap:
        """Image of ``u_m`` built straight from the section covariance."""
        return _translation(self.sys, self.mu, self.J, self.offsets, tuple(m))

    def V_power(self, k: int, adjoint: bool = False) -> PhasedMap:
        key = ("V*" if adjoint else "V", k)
        if key not in self._cache:
            if k == 0:
                out = PhasedMap.identity(self.dim)
            else:
                step = self.V.adjoint() if adjoint else self.V
                out = step @ self.V_power(k - 1, adjoint)
            self._cache[key] = out
        return self._cache[key]

    def operator(self, mono: Monomial) -> PhasedMap:
        """``U_m V^k V^{*l} U_{-n}``."""
        m, k, l, n = mono
        return self.U(m) @ self.V_power(k) @ self.V_power(l, adjoint=True) @ self.U(tuple(-x for x in n))

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.array([np.sqrt(float(w)) for w, _ in self.mu.atoms])

    def e00(self) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[: self.a] = self.sqrt_weights
        return e

    def basis_vector(self, j: int, g) -> np.ndarray:
        """``e_{j,g} = U_g V^j e_{0,0}`` computed with the operators."""
        return self.U(g).apply(self.V_power(j).apply(self.e00()))

    def position_weights(self):
        """Atom weight ``w_a`` at every coordinate, and the level of every coordinate."""
        w = np.array([float(w) for w, _ in self.mu.atoms])
        per_level = [self.sys.N ** j for j in range(self.J + 1)]
        weights = np.concatenate([np.tile(w, c) for c in per_level])
        levels = np.concatenate([np.full(c * self.a, j) for j, c in enumerate(per_level)])
        return weights, levels


def _translation(sys, mu, J, offsets, m) -> PhasedMap:
    a = len(mu.atoms)
    angles = [q for _, q in mu.atoms]
    dim = offsets[-1]
    target = np.full(dim, -1)
    phase = np.zeros(dim, dtype=complex)
    for j in range(J + 1):
        for i, c in enumerate(lat.coset_representatives(sys, j)):
            # (U_m xi)(c) = xi(c - m) = M_{-s} xi(c'),  c - m = c' + B^j s,
            # so coordinate (c', a) goes to (c, a) with phase z_a^{-s}
            i2, _, s = lat.canonical_index(sys, vec_sub(c, m), j)
            src = offsets[j] + i2 * a
            target[src:src + a] = np.arange(offsets[j] + i * a, offsets[j] + (i + 1) * a)
            phase[src:src + a] = _phases(angles, s)
    return PhasedMap(target, phase)


def build(sys: DilationSystem, mu, J: int, size_cap: int = DEFAULT_SIZE_CAP) -> TruncatedRep:
    mu = to_atomic(mu)
    if mu.d != sys.d:
        raise ValueError("measure dimension differs from the system")
    if J < 0:
        raise ValueError("J must be nonnegative")
    a = len(mu.atoms)
    sizes = [sys.N ** j * a for j in range(J + 1)]
    dim = sum(sizes)
    if dim > size_cap:
        raise SizeCapExceeded(f"dimension {dim} exceeds the size cap {size_cap}")
    offsets = [0]
    for s in sizes:
        offsets.append(offsets[-1] + s)
    angles = [q for _, q in mu.atoms]
    target = np.full(dim, -1)
    phase = np.zeros(dim, dtype=complex)
    for j in range(J):
        for i, c in enumerate(lat.coset_representatives(sys, j + 1)):
            pre = sys.inv_step(c)
            if pre is None:
                continue
            # (V xi)(c) = xi(B^{-1} c) = M_{-s} xi(c'),  B^{-1} c = c' + B^j s
            i2, _, s = lat.canonical_index(sys, pre, j)
            src = offsets[j] + i2 * a
            target[src:src + a] = np.arange(offsets[j + 1] + i * a, offsets[j + 1] + (i + 1) * a)
            phase[src:src + a] = _phases(angles, s)
    gens = [_translation(sys, mu, J, offsets, tuple(int(i == t) for i in range(sys.d)))
            for t in range(sys.d)]
    return TruncatedRep(sys=sys, mu=mu, J=J, dim=dim, offsets=offsets,
                        V=PhasedMap(target, phase), U_gen=gens)


# ---------------------------------------------------------------------------
# checks

def _max_abs(M) -> float:
    M = sp.csr_matrix(M)
    return float(np.abs(M.data).max()) if M.nnz else 0.0


def relation_check(rep: TruncatedRep, bound: int = 2, basis_levels: int = 3) -> dict:
    """Deviations for the covariance relations on all ``|m_i| <= bound``.

    (E1) ``V U_m = U_{Bm} V`` and (E2) ``V^* U_m V = U_{B^{-1}m}`` or 0 are
    checked as sparse matrices on levels ``<= J-1``.  ``U_m`` (a product of
    generator images) is checked for unitarity and against the direct section
    formula on all levels.  The vectors ``e_{j,g}`` are checked for
    orthonormality, and against their coordinate-vector form, on levels up to
    ``basis_levels``.
    """
    sys, dim = rep.sys, rep.dim
    low = np.zeros(dim)
    low[: rep.offsets[rep.J]] = 1.0
    Plow = sp.diags(low).tocsr()
    V = rep.V.matrix()
    Vs = V.conj().T.tocsr()
    eye = sp.identity(dim, dtype=complex, format="csr")
    zero = sp.csr_matrix((dim, dim), dtype=complex)
    dev = {"E1": 0.0, "E2": 0.0, "unitary": 0.0, "generators": 0.0, "orthonormal": 0.0, "basis": 0.0}
    for m in itertools.product(range(-bound, bound + 1), repeat=sys.d):
        Um = rep.U(m).matrix()
        UBm = rep.U(sys.apply_B(m)).matrix()
        dev["E1"] = max(dev["E1"], _max_abs((V @ Um - UBm @ V) @ Plow))
        pre = sys.inv_step(m)
        target = rep.U(pre).matrix() if pre is not None else zero
        dev["E2"] = max(dev["E2"], _max_abs((Vs @ Um @ V - target) @ Plow))
        dev["unitary"] = max(dev["unitary"], _max_abs(Um.conj().T @ Um - eye))
        dev["generators"] = max(dev["generators"], _max_abs(rep.U_direct(m).matrix() - Um))
    # V^j e_{0,0} sits at the position of 0 in Sigma_j, so e_{j,g} should be the
    # coordinate vector at (j, g) times sqrt(w)
    sw = rep.sqrt_weights
    for j in range(min(rep.J, basis_levels) + 1):
        reps = lat.coset_representatives(sys, j)
        vecs = np.array([rep.basis_vector(j, g) for g in reps])
        closed = np.zeros_like(vecs)
        for i in range(len(reps)):
            start = rep.offsets[j] + i * rep.a
            closed[i, start:start + rep.a] = sw
        dev["basis"] = max(dev["basis"], float(np.abs(vecs - closed).max()))
        G = vecs.conj() @ vecs.T
        dev["orthonormal"] = max(dev["orthonormal"], float(np.abs(G - np.eye(len(reps))).max()))
    return {"deviations": dev, "pass": all(v <= RELATION_TOL for v in dev.values()), "tol": RELATION_TOL}


def vector_state_sum(rep: TruncatedRep, r, x) -> StateValue:
    """Truncated vector-state series for x.

    ``error_bound = sum|c| ((N r)^{J+1} + 4 dim eps_mach)``: the analytic tail
    plus a floating-point allowance for the length-dim dot products.
    """
    r = Fraction(r)
    Nr = rep.sys.N * r
    if not 0 < Nr < 1:
        raise ValueError("need 0 < N r < 1")
    if isinstance(x, Monomial):
        x = AlgebraElement.from_monomial(rep.sys, x)
    weights, levels = rep.position_weights()
    weights = weights * (1 - float(Nr)) * float(r) ** levels
    total = 0j
    mass = Fraction(0)
    for mono, c in x.items():
        total += complex(c) * complex(weights @ rep.operator(mono).diagonal())
        mass += abs(c.re) + abs(c.im)
    rounding = Fraction(4 * rep.dim * float(np.finfo(float).eps))
    return StateValue(total, mass * (Nr ** (rep.J + 1) + rounding))
