"""State families on the monomial algebra and the checks built on them.

Every family is defined on normal-form monomials and extended linearly:

* ``KMS_SERIES``  -- the KMS_beta state attached to a measure for ``N r < 1``
  (``r = e^{-beta}``), a series over the levels ``j >= k`` at which ``m - n``
  stays in ``B^j Z^d``.
* ``CRITICAL``    -- ``delta_{kl} delta_{mn} N^{-k}``.
* ``GROUND``      -- ``[k = l = 0] M(m - n)``.
* ``CRITICAL_LIMIT`` -- ``delta_{kl} [m - n in stable lattice] N^{-k}``.
* ``INVARIANT_TRACE`` -- for ``|det A| = 1`` and an invariant measure,
  ``[s = 0] M(p)`` where ``u_p v^s`` is the image in the crossed product.

Values are exact (``QQi``) when every moment used is exact.  Truncated series
carry a rigorous ``error_bound``.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import lattice as lat
from . import measures as ms
from .algebra import (AlgebraElement, Monomial, defect_projection, multiply_monomials,
                      quotient_monomial, range_projection)
from .lattice import DilationSystem, vec_sub
from .scalars import QQi, is_exact, to_json_scalar, within

DEFAULT_EPS = Fraction(1, 10 ** 12)
# longest cycle searched for by the closed-form path
MAX_PERIOD = 64


class StateKind(enum.Enum):
    KMS_SERIES = "kms-series"
    CRITICAL = "critical"
    GROUND = "ground"
    CRITICAL_LIMIT = "critical-limit"
    INVARIANT_TRACE = "invariant-trace"


class StateSpecError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class StateSpec:
    kind: StateKind
    r: Optional[Fraction] = None
    mu: Optional[ms.Measure] = None
    eps: Fraction = DEFAULT_EPS

    @classmethod
    def kms(cls, r, mu, eps=DEFAULT_EPS):
        return cls(StateKind.KMS_SERIES, Fraction(r), mu, Fraction(eps))

    @classmethod
    def critical(cls):
        return cls(StateKind.CRITICAL)

    @classmethod
    def ground(cls, mu):
        return cls(StateKind.GROUND, mu=mu)

    @classmethod
    def critical_limit(cls, mu):
        return cls(StateKind.CRITICAL_LIMIT, mu=mu)

    @classmethod
    def invariant_trace(cls, mu):
        return cls(StateKind.INVARIANT_TRACE, mu=mu)


@dataclass(frozen=True)
class StateValue:
    value: object  # QQi or complex
    error_bound: Fraction = Fraction(0)

    @property
    def exact(self) -> bool:
        return is_exact(self.value) and self.error_bound == 0

    def __add__(self, other: "StateValue") -> "StateValue":
        return StateValue(self.value + other.value, self.error_bound + other.error_bound)

    def scale(self, c) -> "StateValue":
        """Multiply by an exact scalar; the bound scales by ``|c|`` (rounded up for complex c)."""
        c = QQi.coerce(c)
        if c.im == 0:
            k = abs(c.re)
        else:
            k = abs(c.re) + abs(c.im)
        return StateValue(c * self.value, k * self.error_bound)

    def to_json(self):
        return {"value": to_json_scalar(self.value), "error_bound": float(self.error_bound)}


ZERO = StateValue(QQi(0))


# ---------------------------------------------------------------------------
# validation

def _require_measure(sys, spec):
    if spec.mu is None:
        raise StateSpecError("measure", f"required for {spec.kind.value}")
    if spec.mu.d != sys.d:
        raise StateSpecError("measure", f"dimension {spec.mu.d} does not match d = {sys.d}")


@functools.lru_cache(maxsize=256)
def validate_spec(sys: DilationSystem, spec: StateSpec) -> None:
    """Raise :class:`StateSpecError` if ``spec`` is not admissible for ``sys``."""
    kind = spec.kind
    if kind is StateKind.KMS_SERIES:
        if spec.r is None:
            raise StateSpecError("r", "required for kms-series")
        if not 0 < spec.r <= 1:
            raise StateSpecError("r", "must lie in (0, 1]")
        if sys.N * spec.r >= 1:
            raise StateSpecError("r", f"N r = {sys.N * spec.r} must be < 1")
        if spec.eps <= 0:
            raise StateSpecError("eps", "must be positive")
        _require_measure(sys, spec)
    elif kind is StateKind.GROUND:
        _require_measure(sys, spec)
    elif kind is StateKind.CRITICAL_LIMIT:
        _require_measure(sys, spec)
        for b in lat.stable_lattice(sys).columns:
            if ms.moment(spec.mu, b) != 1:
                raise StateSpecError("measure", f"moment at stable-lattice vector {tuple(b)} is not 1")
    elif kind is StateKind.INVARIANT_TRACE:
        if sys.N != 1:
            raise StateSpecError("matrix", "invariant traces need |det A| = 1")
        _require_measure(sys, spec)
        if not ms.is_invariant(sys, spec.mu):
            raise StateSpecError("measure", "measure is not sigma_A-invariant")


def dynamics_parameter(sys: DilationSystem, spec: StateSpec) -> Fraction:
    """The ``r = e^{-beta}`` at which ``spec`` is a KMS state."""
    if spec.kind is StateKind.KMS_SERIES:
        return spec.r
    if spec.kind is StateKind.CRITICAL:
        return Fraction(1, sys.N)
    if spec.kind is StateKind.INVARIANT_TRACE:
        return Fraction(1)
    raise StateSpecError("kind", f"{spec.kind.value} is not a KMS state at finite beta")


# ---------------------------------------------------------------------------
# per-monomial values

def truncation_level(Nr: Fraction, eps: Fraction) -> int:
    """Smallest J >= 0 with ``(Nr)^{J+1} <= eps``."""
    J = max(0, math.ceil(math.log(eps) / math.log(Nr)) - 1)
    while Nr ** (J + 1) > eps:
        J += 1
    while J > 0 and Nr ** J <= eps:
        J -= 1
    return J


def _cycle_length(sys, mu, x0) -> Optional[int]:
    """Least p <= MAX_PERIOD after which ``B^{-j} x0`` has periodic moments from j = 0 on."""
    if isinstance(mu, ms.Haar):
        return 1
    D = ms.angle_modulus(mu)
    x = x0
    for p in range(1, MAX_PERIOD + 1):
        x = sys.inv_step(x)
        if x == x0:
            return p
        if D is not None and all((a - b) % D == 0 for a, b in zip(x, x0)):
            # x - x0 lies in the saturated lattice M and in D Z^d, hence in D M,
            # and B^{-1} preserves D M, so the residues mod D recur with period p
            return p
    return None


def _kms_series(sys, spec, delta, k) -> StateValue:
    r, mu = spec.r, spec.mu
    N = sys.N
    Nr = N * r
    x = lat.preimage(sys, delta, k)
    if x is None:
        return ZERO
    jmax = lat.max_membership_index(sys, delta)
    scale = (1 - Nr) / Fraction(N) ** k
    if jmax != lat.INFINITE:
        total = QQi(0)
        for j in range(k, jmax + 1):
            total = total + Nr ** j * ms.moment(mu, x)
            if j < jmax:
                x = sys.inv_step(x)
        return StateValue(scale * total)
    p = _cycle_length(sys, mu, x)
    if p is not None:
        total = QQi(0)
        for j in range(k, k + p):
            total = total + Nr ** j * ms.moment(mu, x)
            x = sys.inv_step(x)
        return StateValue(scale * total * (1 / (1 - Nr ** p)))
    J = max(truncation_level(Nr, spec.eps), k - 1)
    total = QQi(0)
    for j in range(k, J + 1):
        total = total + Nr ** j * ms.moment(mu, x)
        x = sys.inv_step(x)
    return StateValue(scale * total, Nr ** (J + 1))


def monomial_value(sys: DilationSystem, spec: StateSpec, mono: Monomial) -> StateValue:
    """State value on one normal-form monomial (no spec validation)."""
    m, k, l, n = mono
    kind = spec.kind
    if kind is StateKind.INVARIANT_TRACE:
        p, s = quotient_monomial(sys, mono)
        return StateValue(ms.moment(spec.mu, p)) if s == 0 else ZERO
    if kind is StateKind.GROUND:
        if k or l:
            return ZERO
        return StateValue(ms.moment(spec.mu, vec_sub(m, n)))
    if k != l:
        return ZERO
    if kind is StateKind.CRITICAL:
        return StateValue(QQi(Fraction(1, sys.N ** k))) if m == n else ZERO
    delta = vec_sub(m, n)
    if kind is StateKind.CRITICAL_LIMIT:
        return StateValue(QQi(Fraction(1, sys.N ** k))) if delta in lat.stable_lattice(sys) else ZERO
    return _kms_series(sys, spec, delta, k)


def eval_state(sys: DilationSystem, spec: StateSpec, x, validate: bool = True) -> StateValue:
    """Linear extension of :func:`monomial_value` to an AlgebraElement (or a Monomial)."""
    if validate:
        validate_spec(sys, spec)
    if isinstance(x, Monomial):
        return monomial_value(sys, spec, x)
    out = ZERO
    for mono, c in x.items():
        out = out + monomial_value(sys, spec, mono).scale(c)
    return out


# ---------------------------------------------------------------------------
# reports

@dataclass
class CheckReport:
    lhs: object
    rhs: object
    bound: Fraction
    passed: bool
    monomials: list = field(default_factory=list)

    def to_json(self):
        return {
            "lhs": to_json_scalar(self.lhs),
            "rhs": to_json_scalar(self.rhs),
            "bound": float(self.bound),
            "pass": self.passed,
            "monomials": [[list(m), k, l, list(n)] for m, k, l, n in self.monomials],
        }


def _compare(a: StateValue, b: StateValue, tol, monomials) -> CheckReport:
    tol = Fraction(tol) if isinstance(tol, (int, Fraction)) else tol
    bound = tol + a.error_bound + b.error_bound
    return CheckReport(a.value, b.value, bound, within(a.value - b.value, bound), list(monomials))


def _product(sys, x: Monomial, y: Monomial) -> AlgebraElement:
    prod = multiply_monomials(sys, x, y)
    return AlgebraElement(sys) if prod is None else AlgebraElement(sys, {prod: 1})


def kms_condition_check(sys, spec, x: Monomial, y: Monomial, tol=0) -> CheckReport:
    """``phi(x y) = r^{k-l} phi(y x)`` for ``x = u_m v^k v^{*l} u_n^*``."""
    validate_spec(sys, spec)
    r = dynamics_parameter(sys, spec)
    lhs = eval_state(sys, spec, _product(sys, x, y), validate=False)
    rhs = eval_state(sys, spec, _product(sys, y, x), validate=False).scale(r ** (x.k - x.l))
    return _compare(lhs, rhs, tol, [x, y])


def characterization_check(sys, spec, x: Monomial, tol=0) -> CheckReport:
    """``phi(x) = 0`` unless ``k = l`` and ``m - n in B^k Z^d``, else ``r^k phi(u_{B^{-k}(m-n)})``."""
    validate_spec(sys, spec)
    r = dynamics_parameter(sys, spec)
    m, k, l, n = x
    lhs = monomial_value(sys, spec, x)
    pre = lat.preimage(sys, vec_sub(m, n), k) if k == l else None
    if pre is None:
        rhs = ZERO
    else:
        rhs = monomial_value(sys, spec, Monomial(pre, 0, 0, sys.zero)).scale(r ** k)
    return _compare(lhs, rhs, tol, [x])


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    Nr: Fraction

    def __bool__(self):
        return self.feasible

    @property
    def message(self) -> str:
        rel = "<=" if self.feasible else ">"
        return f"N r = {self.Nr} {rel} 1"


def beta_feasibility(sys: DilationSystem, r) -> Feasibility:
    """KMS states at ``r = e^{-beta}`` need ``N r <= 1``: ``phi(1) >= sum_s phi(u_s v v^* u_s^*) = N r``."""
    r = Fraction(r)
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    return Feasibility(sys.N * r <= 1, sys.N * r)


def _require_kms(spec):
    if spec.kind is not StateKind.KMS_SERIES:
        raise StateSpecError("kind", "this operation needs a kms-series state")


def conditioned_state(sys, spec, x: AlgebraElement) -> StateValue:
    """``phi_P(x) = phi(P x P) / (1 - N r)``."""
    _require_kms(spec)
    validate_spec(sys, spec)
    P = defect_projection(sys)
    return eval_state(sys, spec, P * x * P, validate=False).scale(1 / (1 - sys.N * spec.r))


def geometric_p_n(sys: DilationSystem, r, n: int) -> Fraction:
    """``(1 - N r) sum_{j <= n} (N r)^j``."""
    Nr = sys.N * Fraction(r)
    return (1 - Nr) * sum(Nr ** j for j in range(n + 1))


def p_n_element(sys: DilationSystem, n: int) -> AlgebraElement:
    """``p_n = sum_{j <= n} sum_{g in Sigma_j} P_{j,g}``."""
    out = AlgebraElement(sys)
    for j in range(n + 1):
        for g in lat.coset_representatives(sys, j):
            out = out + range_projection(sys, j, g)
    return out


@dataclass
class ReconstructionReport:
    partial_sum: StateValue
    p_n: Fraction
    depth: int
    tail_bound: Fraction

    def to_json(self):
        return {"partial_sum": self.partial_sum.to_json(), "p_n": to_json_scalar(self.p_n),
                "depth": self.depth, "tail_bound": float(self.tail_bound)}


def reconstruction_partial_sum(sys, spec, x: AlgebraElement, n: int) -> ReconstructionReport:
    """``(1 - N r) sum_{j <= n} sum_{g in Sigma_j} r^j phi_P(v^{*j} u_g^* x u_g v^j)``.

    ``tail_bound`` is ``(N r)^{n+1}`` times the coefficient mass of x, the
    distance to ``phi(x)`` left by stopping at depth n.
    """
    _require_kms(spec)
    validate_spec(sys, spec)
    r = spec.r
    P = defect_projection(sys)
    total = ZERO
    for j in range(n + 1):
        for g in lat.coset_representatives(sys, j):
            left = AlgebraElement.monomial(sys, sys.zero, 0, j, g)
            right = AlgebraElement.monomial(sys, g, j, 0, sys.zero)
            y = P * left * x * right * P
            total = total + eval_state(sys, spec, y, validate=False).scale(r ** j)
    mass = sum((abs(c.re) + abs(c.im) for _, c in x.items()), Fraction(0))
    return ReconstructionReport(total, geometric_p_n(sys, r, n), n, mass * (sys.N * r) ** (n + 1))


def recover_moments(sys, spec, m: Sequence[int]) -> StateValue:
    """``(psi(u_m) - [m in B Z^d] N r psi(u_{B^{-1} m})) / (1 - N r)``, which equals ``M(m)``."""
    _require_kms(spec)
    validate_spec(sys, spec)
    Nr = sys.N * spec.r
    m = tuple(m)
    val = monomial_value(sys, spec, Monomial(m, 0, 0, sys.zero))
    pre = sys.inv_step(m)
    if pre is not None:
        val = val + monomial_value(sys, spec, Monomial(pre, 0, 0, sys.zero)).scale(-Nr)
    return val.scale(1 / (1 - Nr))


@dataclass
class TraceReport:
    pairs: list
    moment_criterion: bool
    moment_witness: Optional[tuple]

    @property
    def passed(self) -> bool:
        return self.moment_criterion and all(p.passed for p in self.pairs)

    def to_json(self):
        return {"pass": self.passed, "moment_criterion": self.moment_criterion,
                "moment_witness": None if self.moment_witness is None else
                {"m": list(self.moment_witness[0]), "l": self.moment_witness[1]},
                "pairs": [p.to_json() for p in self.pairs]}


def trace_property_check(sys, spec, pairs: Iterable[tuple], tol=0, validate: bool = False) -> TraceReport:
    """``psi(x y) = psi(y x)`` on the pairs, plus ``M(m) = M(B^l m)`` for ``|l| <= 3``, ``|m_i| <= 5``.

    By default the measure is not required to be invariant, so the check can
    also exhibit failures for non-invariant measures.
    """
    if sys.N != 1:
        raise StateSpecError("matrix", "trace checks need |det A| = 1")
    if spec.kind is not StateKind.INVARIANT_TRACE:
        raise StateSpecError("kind", "trace checks need an invariant-trace state")
    if validate:
        validate_spec(sys, spec)
    _require_measure(sys, spec)
    reports = []
    for x, y in pairs:
        lhs = eval_state(sys, spec, _product(sys, x, y), validate=False)
        rhs = eval_state(sys, spec, _product(sys, y, x), validate=False)
        reports.append(_compare(lhs, rhs, tol, [x, y]))
    witness = None
    for m in itertools.product(range(-5, 6), repeat=sys.d):
        for l in range(-3, 4):
            if not ms.moments_agree(ms.moment(spec.mu, m), ms.moment(spec.mu, sys.apply_B(m, l))):
                witness = (m, l)
                break
        if witness:
            break
    return TraceReport(reports, witness is None, witness)


def ground_gap(sys, mu, panel: Iterable[Monomial], r) -> float:
    """Largest ``|psi_{r,mu}(x) - ground_mu(x)|`` over the panel, tail bounds added."""
    kms, ground = StateSpec.kms(r, mu), StateSpec.ground(mu)
    worst = 0.0
    for mono in panel:
        a = eval_state(sys, kms, mono)
        b = eval_state(sys, ground, mono)
        worst = max(worst, abs(complex(a.value - b.value)) + float(a.error_bound))
    return worst
