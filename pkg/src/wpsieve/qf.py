"""Real quadratic fields Q(√D) with exact ring arithmetic, unit reduction
into a fundamental domain, and ideal-norm enumeration.

Only class-number-1 fields with D ≡ 2, 3 (mod 4) are supported, so the ring
of integers is Z[√D] and every construction here stays in exact integer
pairs (a, b) ↦ a + b√D.  Logarithmic embeddings use 96-bit floating
arithmetic; decompositions that land within 1e-9 of a unit-translate
boundary are either resolved exactly in Z[√D] (when the point sits on the
boundary precisely) or rejected with BoundaryAmbiguityError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from mpmath import mp

from . import arith
from .arith import INFINITE
from .wps import WeightVector

VETTED_D = (2, 3, 6, 7, 11, 19)

_PREC_BITS = 96
_BOUNDARY_TOL = "1e-9"


class BoundaryAmbiguityError(ValueError):
    """The decomposition coordinate is too close to an integer to trust the
    floating computation, and the point is not exactly on the boundary."""

    def __init__(self, s: float):
        super().__init__(
            f"decomposition coordinate s = {s!r} is within {_BOUNDARY_TOL} of an "
            "integer and the point is not exactly on a domain boundary"
        )
        self.s = s


@dataclass(frozen=True)
class QuadInt:
    """a + b√D with exact integer arithmetic."""

    a: int
    b: int
    D: int

    def __post_init__(self):
        for v in (self.a, self.b, self.D):
            if not isinstance(v, int):
                raise TypeError(f"QuadInt components must be int, got {v!r}")

    def _same(self, other: "QuadInt") -> None:
        if not isinstance(other, QuadInt) or other.D != self.D:
            raise ValueError(f"mixed fields: √{self.D} vs {other!r}")

    def __add__(self, other):
        self._same(other)
        return QuadInt(self.a + other.a, self.b + other.b, self.D)

    def __sub__(self, other):
        self._same(other)
        return QuadInt(self.a - other.a, self.b - other.b, self.D)

    def __neg__(self):
        return QuadInt(-self.a, -self.b, self.D)

    def __mul__(self, other):
        self._same(other)
        return QuadInt(
            self.a * other.a + self.D * self.b * other.b,
            self.a * other.b + self.b * other.a,
            self.D,
        )

    def conj(self) -> "QuadInt":
        return QuadInt(self.a, -self.b, self.D)

    def norm(self) -> int:
        return self.a * self.a - self.D * self.b * self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def inverse(self) -> "QuadInt":
        n = self.norm()
        if n not in (1, -1):
            raise ValueError(f"{self} is not a unit (norm {n})")
        c = self.conj()
        return c if n == 1 else -c

    def __pow__(self, k: int) -> "QuadInt":
        if not isinstance(k, int):
            raise TypeError("exponent must be int")
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = QuadInt(1, 0, self.D)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __repr__(self):
        return f"({self.a}{self.b:+}√{self.D})"


def _pell_min_unit(D: int) -> tuple[int, int]:
    """Smallest (u, v) with u² − Dv² = ±1, v ≥ 1, via the continued fraction
    of √D."""
    a0 = math.isqrt(D)
    m, d, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while p * p - D * q * q not in (1, -1):
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q


class QuadField:
    """Q(√D) for vetted D; immutable, one cached instance per D."""

    _CACHE: dict = {}

    def __init__(self, D: int):
        if D not in VETTED_D:
            raise ValueError(f"unsupported D = {D!r}; choose from {VETTED_D}")
        # defensive: the vetted list must satisfy the ring assumptions
        assert D % 4 in (2, 3) and all(
            e == 1 for _, e in arith.factorize(D).factors
        )
        self.D = D
        u, v = _pell_min_unit(D)
        self.epsilon = QuadInt(u, v, D)
        assert self.epsilon.norm() in (1, -1)

    @classmethod
    def get(cls, D: int) -> "QuadField":
        if D not in cls._CACHE:
            cls._CACHE[D] = cls(D)
        return cls._CACHE[D]

    def element(self, a: int, b: int = 0) -> QuadInt:
        return QuadInt(a, b, self.D)

    def __repr__(self):
        return f"QuadField(√{self.D})"


def fundamental_unit(D: int) -> QuadInt:
    """The smallest unit > 1 of Z[√D]."""
    return QuadField.get(D).epsilon


# --- logarithmic embedding and the fundamental domain ----------------------


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / mp.mpf(x.denominator)
    return mp.mpf(x)


def _log_pair(x: QuadInt, sqrtD):
    return mp.log(abs(x.a + x.b * sqrtD)), mp.log(abs(x.a - x.b * sqrtD))


def log_embed(x: QuadInt) -> tuple[float, float]:
    """(log|σ₁x|, log|σ₂x|) for the two real embeddings σ₁,₂: √D ↦ ±√D."""
    if x.is_zero():
        raise ValueError("log embedding of zero")
    with mp.workprec(_PREC_BITS):
        l1, l2 = _log_pair(x, mp.sqrt(x.D))
        return float(l1), float(l2)


@dataclass(frozen=True)
class DomainSpec:
    """Fundamental-domain data: the field, the weights acted on, and the unit
    log-vector u₁ = (log σ₁ε, log σ₂ε)."""

    field: QuadField
    weights: WeightVector
    u1: Optional[tuple] = None

    def __post_init__(self):
        if not isinstance(self.weights, WeightVector):
            object.__setattr__(self, "weights", WeightVector(tuple(self.weights)))
        if self.u1 is None:
            object.__setattr__(self, "u1", log_embed(self.field.epsilon))
        if abs(self.u1[0] + self.u1[1]) > 1e-12:
            raise ValueError(f"unit log-vector {self.u1} does not sum to 0")


def _check_tuple(x, field: QuadField, weights: WeightVector) -> tuple:
    x = tuple(x)
    if len(x) != len(weights):
        raise ValueError(f"tuple length {len(x)} != weight count {len(weights)}")
    for xi in x:
        if not isinstance(xi, QuadInt) or xi.D != field.D:
            raise ValueError(f"coordinate {xi!r} is not in Q(√{field.D})")
    if all(xi.is_zero() for xi in x):
        raise ValueError("all-zero tuple has no height")
    return x


def _log_maxes(x, weights: WeightVector, sqrtD):
    """(log M₁, log M₂) with Mⱼ = max_i |σⱼxᵢ|^{1/aᵢ}; zero coords ignored."""
    m1 = m2 = None
    for xi, ai in zip(x, weights):
        if xi.is_zero():
            continue
        l1, l2 = _log_pair(xi, sqrtD)
        l1, l2 = l1 / ai, l2 / ai
        m1 = l1 if m1 is None or l1 > m1 else m1
        m2 = l2 if m2 is None or l2 > m2 else m2
    return m1, m2


def _decompose(x, spec: DomainSpec):
    """s, log M₁, log M₂ with (log M₁, log M₂) = s·u₁ + t·(1,1); requires an
    active mp.workprec context."""
    sqrtD = mp.sqrt(spec.field.D)
    u11, u12 = _log_pair(spec.field.epsilon, sqrtD)
    m1, m2 = _log_maxes(x, spec.weights, sqrtD)
    s = (m1 - m2) / (u11 - u12)
    return s, m1, m2


def in_domain(x: Sequence[QuadInt], spec: DomainSpec, T) -> bool:
    """Membership in S_{F,a}(T): decomposition coordinate s ∈ [0,1) and, for
    finite T, M₁M₂ ≤ T².

    The interval is half-open, so points whose orbit touches a boundary
    exactly must not be double-counted; when s floats within 1e-9 of 0 or 1
    the side is decided exactly in Z[√D]."""
    x = _check_tuple(x, spec.field, spec.weights)
    finite = not (T == INFINITE or (isinstance(T, float) and math.isinf(T)))
    if finite and T <= 0:
        raise ValueError(f"height cap must be positive, got {T!r}")
    with mp.workprec(_PREC_BITS):
        s, m1, m2 = _decompose(x, spec)
        tol = mp.mpf(_BOUNDARY_TOL)
        if abs(s) < tol:
            ok = _exact_side(x, spec) >= 0
        elif abs(s - 1) < tol:
            ok = _exact_side(_unit_translate(x, spec, -1), spec) < 0
        else:
            ok = 0 <= s < 1
        if not ok:
            return False
        if not finite:
            return True
        return m1 + m2 <= 2 * mp.log(_to_mpf(T))


def _unit_translate(x, spec: DomainSpec, k: int):
    eps = spec.field.epsilon
    return tuple(xi * eps ** (k * ai) for xi, ai in zip(x, spec.weights))


def _sign_quad(e: int, f: int, D: int) -> int:
    """Exact sign of e + f√D."""
    if e >= 0 and f >= 0:
        return 1 if (e or f) else 0
    if e <= 0 and f <= 0:
        return -1
    lhs, rhs = e * e, f * f * D  # squarefree D: equality forces e = f = 0
    if e > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


def _cmp_abs_emb1(u: QuadInt, v: QuadInt) -> int:
    """Exact sign of |σ₁u| − |σ₁v|."""
    d = u * u - v * v
    return _sign_quad(d.a, d.b, u.D)


def _exact_side(y, spec: DomainSpec) -> int:
    """Exact sign of log M₁(y) − log M₂(y), i.e. of the decomposition s."""
    L = spec.weights.lcm
    best1 = best2 = None
    for yi, ai in zip(y, spec.weights):
        if yi.is_zero():
            continue
        w = yi ** (L // ai)
        if best1 is None or _cmp_abs_emb1(w, best1) > 0:
            best1 = w
        wc = w.conj()
        if best2 is None or _cmp_abs_emb1(wc, best2) > 0:
            best2 = wc
    return _cmp_abs_emb1(best1, best2)


def reduce_to_domain(x: Sequence[QuadInt], spec: DomainSpec):
    """The unit translate of x lying in S_{F,a}(∞) and the exponent applied.

    ε^k acts by xᵢ ↦ ε^{k aᵢ} xᵢ; k = −⌊s⌋.  When s is within 1e-9 of an
    integer the side is decided exactly in Z[√D]: points exactly on the s = 0
    boundary reduce cleanly (the half-open domain contains them), anything
    else raises BoundaryAmbiguityError.
    """
    x = _check_tuple(x, spec.field, spec.weights)
    with mp.workprec(_PREC_BITS):
        s, _, _ = _decompose(x, spec)
        if abs(s - mp.nint(s)) < mp.mpf(_BOUNDARY_TOL):
            m = int(mp.nint(s))
            y = _unit_translate(x, spec, -m)
            if _exact_side(y, spec) == 0:
                return y, -m
            raise BoundaryAmbiguityError(float(s))
        k = -int(mp.floor(s))
    y = _unit_translate(x, spec, k)
    return y, k


def height_infty_k(x: Sequence[QuadInt], weights) -> float:
    """M₁·M₂, the product over the two real places of max_i |σⱼxᵢ|^{1/aᵢ}."""
    if not isinstance(weights, WeightVector):
        weights = WeightVector(tuple(weights))
    x = tuple(x)
    if not x:
        raise ValueError("empty tuple")
    field = QuadField.get(x[0].D)
    x = _check_tuple(x, field, weights)
    with mp.workprec(_PREC_BITS):
        m1, m2 = _log_maxes(x, weights, mp.sqrt(field.D))
        return float(mp.exp(m1 + m2))


# --- prime ideals and sieve mass over k ------------------------------------


def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def prime_ideal_norms_up_to(field: QuadField, Q: int) -> list[tuple[int, int]]:
    """(norm, count) per batch of prime ideals of norm ≤ Q, sorted by norm.

    p | 4D ramifies (one ideal, norm p); (D|p) = 1 splits (two ideals, norm
    p); (D|p) = −1 stays inert (one ideal, norm p²)."""
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q!r}")
    out = []
    for p in arith.primes_up_to(Q):
        if (4 * field.D) % p == 0:
            out.append((p, 1))
        elif _legendre(field.D, p) == 1:
            out.append((p, 2))
        elif p * p <= Q:
            out.append((p * p, 1))
    return sorted(out)


def compute_G_k(field: QuadField, Q: int, density_per_ideal) -> Fraction:
    """Σ over squarefree ideals 𝔮 with N𝔮 ≤ Q of ∏_{𝔭|𝔮} ν/(1−ν), ν constant."""
    nu = Fraction(density_per_ideal)
    if not 0 <= nu < 1:
        raise ValueError(f"ideal density must lie in [0,1), got {nu}")
    norms = []
    for norm, mult in prime_ideal_norms_up_to(field, Q):
        norms.extend([norm] * mult)
    ratio = nu / (1 - nu)
    if ratio == 0:
        return Fraction(1)

    def rec(i: int, cap: int) -> Fraction:
        total = Fraction(1)
        for j in range(i, len(norms)):
            if norms[j] <= cap:
                total += ratio * rec(j + 1, cap // norms[j])
        return total

    return rec(0, Q)
