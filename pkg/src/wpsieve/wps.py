"""Rational points of weighted projective space.

Coordinates transform by lambda . (x_0,...,x_n) = (lambda^{a_0} x_0, ...,
lambda^{a_n} x_n).  Orbits are represented by integer tuples of weighted gcd
1 with a fixed sign convention, the height max_i |x_i|^{1/a_i} is compared
through L-th powers (L = lcm a_i) so rational height cutoffs are exact, and
bounded-height enumeration walks the box |x_i| <= B^{a_i} directly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import Pool
from typing import Iterator, Sequence

from . import arith

DEFAULT_BUDGET = 5_000_000_000

# Fixed chunk count for parallel partitioning of the outermost coordinate.
# The partition must not depend on the worker count, so that merged results
# are bit-identical for any number of workers.
_CHUNKS = 32


class BudgetExceededError(RuntimeError):
    """An enumeration box holds more tuples than the configured budget."""

    def __init__(self, volume: int, budget: int):
        super().__init__(
            f"enumeration box holds {volume} tuples, budget is {budget}"
        )
        self.volume = volume
        self.budget = budget


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if not self.weights:
            raise ValueError("weight vector must be nonempty")
        if any(not isinstance(a, int) or a < 1 for a in self.weights):
            raise ValueError(f"weights must be positive integers: {self.weights}")

    @classmethod
    def of(cls, *weights: int) -> "WeightVector":
        return cls(tuple(weights))

    @property
    def total(self) -> int:
        return sum(self.weights)

    @property
    def min_weight(self) -> int:
        return min(self.weights)

    @property
    def lcm(self) -> int:
        return math.lcm(*self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)


@dataclass(frozen=True)
class WpsPoint:
    """Normalized representative: integer coords, weighted gcd 1, canonical sign."""

    coords: tuple[int, ...]
    weights: WeightVector


@dataclass(frozen=True)
class IntegralPoint:
    """Integer tuple with plain gcd 1 and canonical sign."""

    coords: tuple[int, ...]
    weights: WeightVector


def as_bound(bound) -> Fraction:
    """Coerce a height bound to a positive Fraction."""
    b = Fraction(bound)
    if b <= 0:
        raise ValueError(f"height bound must be positive, got {bound!r}")
    return b


def box_cutoffs(weights: WeightVector, bound) -> tuple[int, ...]:
    """Per-coordinate cutoffs floor(B^{a_i}), computed exactly."""
    b = as_bound(bound)
    return tuple(b.numerator**a // b.denominator**a for a in weights)


def box_volume(weights: WeightVector, bound) -> int:
    return math.prod(2 * m + 1 for m in box_cutoffs(weights, bound))


def is_sign_canonical(coords: Sequence[int], weights: WeightVector) -> bool:
    for x, a in zip(coords, weights):
        if a % 2 == 1 and x != 0:
            return x > 0
    return True


def sign_canonical(coords: Sequence[int], weights: WeightVector) -> tuple[int, ...]:
    """Apply lambda = -1 when the first odd-weight nonzero coordinate is negative.

    If no coordinate has odd weight, -1 acts trivially and the tuple is
    returned unchanged.
    """
    if is_sign_canonical(coords, weights):
        return tuple(coords)
    return tuple(-x if a % 2 == 1 else x for x, a in zip(coords, weights))


def wgcd(coords: Sequence[int], weights: WeightVector) -> int:
    """Weighted gcd: prod_p p^{min_i floor(v_p(x_i)/a_i)}.

    Zero coordinates have infinite valuation and drop out of the min; the
    all-zero tuple is rejected.  Only primes dividing every nonzero
    coordinate can contribute.
    """
    coords = tuple(coords)
    if len(coords) != len(weights):
        raise ValueError("coordinate/weight length mismatch")
    nz = [(abs(x), a) for x, a in zip(coords, weights) if x != 0]
    if not nz:
        raise ValueError("weighted gcd of the all-zero tuple is undefined")
    g = 0
    for x, _ in nz:
        g = math.gcd(g, x)
    out = 1
    for p, _ in arith.factorize(g).factors:
        e = min(arith.valuation(x, p) // a for x, a in nz)
        out *= p**e
    return out


def normalize(coords, weights: WeightVector) -> WpsPoint:
    """Canonical representative of the orbit of a rational tuple.

    Scales per prime so every valuation profile min_i floor(v_p/a_i) becomes
    zero, then fixes the sign.  The result has integer coordinates.
    """
    xs = [Fraction(c) for c in coords]
    if len(xs) != len(weights):
        raise ValueError("coordinate/weight length mismatch")
    if all(x == 0 for x in xs):
        raise ValueError("cannot normalize the all-zero tuple")
    support: set[int] = set()
    for x in xs:
        if x == 0:
            continue
        support.update(p for p, _ in arith.factorize(abs(x.numerator)).factors)
        support.update(p for p, _ in arith.factorize(x.denominator).factors)
    ws = tuple(weights)
    for p in sorted(support):
        vmin = None
        for x, a in zip(xs, ws):
            if x == 0:
                continue
            v = arith.valuation(x.numerator, p) - arith.valuation(x.denominator, p)
            q = v // a  # floor division, also for negative v
            vmin = q if vmin is None else min(vmin, q)
        if vmin:
            scale = Fraction(p) ** (-vmin)
            xs = [x * scale**a for x, a in zip(xs, ws)]
    ints = []
    for x in xs:
        if x.denominator != 1:
            raise AssertionError(f"normalization left a denominator: {x}")
        ints.append(x.numerator)
    return WpsPoint(sign_canonical(ints, weights), weights)


def height(point: WpsPoint) -> float:
    """max_i |x_i|^{1/a_i}; the maximizing index is located exactly."""
    L = point.weights.lcm
    best = max(
        abs(x) ** (L // a) for x, a in zip(point.coords, point.weights)
    )
    if best == 0:
        raise ValueError("height of the all-zero tuple is undefined")
    return math.exp(math.log(best) / L)


def height_leq(point: WpsPoint, bound) -> bool:
    """Exact comparison height(P) <= B for rational B."""
    b = as_bound(bound)
    L = point.weights.lcm
    pL = b.numerator**L
    qL = b.denominator**L
    return all(
        abs(x) ** (L // a) * qL <= pL for x, a in zip(point.coords, point.weights)
    )


# --- enumeration -----------------------------------------------------------


def _box_primes(weights: WeightVector, bound) -> list[tuple[int, tuple[int, ...]]]:
    # p^{a_i} | x_i with some 0 < |x_i| <= B^{a_i} forces p <= B, so inside
    # the box only primes up to floor(B) can witness weighted gcd > 1.
    b = as_bound(bound)
    pmax = b.numerator // b.denominator
    return [
        (p, tuple(p**a for a in weights)) for p in arith.primes_up_to(pmax)
    ]


def _wgcd_one_in_box(coords, prime_powers) -> bool:
    for _, pas in prime_powers:
        if all(x % pa == 0 for x, pa in zip(coords, pas)):  # 0 % pa == 0: v = inf
            return False
    return True


def _check_budget(weights: WeightVector, bound, budget) -> None:
    if budget is None:
        return
    vol = box_volume(weights, bound)
    if vol > budget:
        raise BudgetExceededError(vol, budget)


def _iter_canonical(
    weights: WeightVector,
    bound,
    budget,
    x0_range,
    integral: bool,
) -> Iterator[tuple[int, ...]]:
    _check_budget(weights, bound, budget)
    Ms = box_cutoffs(weights, bound)
    prime_powers = None if integral else _box_primes(weights, bound)
    ranges = [range(-m, m + 1) for m in Ms]
    if x0_range is not None:
        lo = max(x0_range[0], -Ms[0])
        hi = min(x0_range[1], Ms[0])
        if lo > hi:
            return
        ranges[0] = range(lo, hi + 1)
    for tup in itertools.product(*ranges):
        if not any(tup):
            continue
        if not is_sign_canonical(tup, weights):
            continue
        if integral:
            if math.gcd(*tup) != 1:
                continue
        elif not _wgcd_one_in_box(tup, prime_powers):
            continue
        yield tup


def enumerate_points(
    weights: WeightVector, bound, *, budget=DEFAULT_BUDGET, x0_range=None
) -> Iterator[WpsPoint]:
    """Stream every normalized point of height <= B, in lexicographic order."""
    for tup in _iter_canonical(weights, bound, budget, x0_range, integral=False):
        yield WpsPoint(tup, weights)


def enumerate_integral(
    weights: WeightVector, bound, *, budget=DEFAULT_BUDGET, x0_range=None
) -> Iterator[IntegralPoint]:
    """Stream gcd-1 integer tuples of height <= B, in lexicographic order."""
    for tup in _iter_canonical(weights, bound, budget, x0_range, integral=True):
        yield IntegralPoint(tup, weights)


def _chunk_ranges(m0: int) -> list[tuple[int, int]]:
    # Fixed partition of [-m0, m0]; independent of the worker count.
    width = 2 * m0 + 1
    pieces = min(width, _CHUNKS)
    bounds = [-m0 + (width * i) // pieces for i in range(pieces + 1)]
    return [(bounds[i], bounds[i + 1] - 1) for i in range(pieces)]


def _count_chunk(args) -> int:  # top level so Pool can pickle it
    weights, bound, lo, hi, integral = args
    rng = None if lo is None else (lo, hi)
    return sum(1 for _ in _iter_canonical(weights, bound, None, rng, integral))


def _count(weights, bound, integral, workers, budget) -> int:
    _check_budget(weights, bound, budget)
    if workers <= 1:
        return _count_chunk((weights, bound, None, None, integral))
    m0 = box_cutoffs(weights, bound)[0]
    tasks = [
        (weights, bound, lo, hi, integral) for lo, hi in _chunk_ranges(m0)
    ]
    with Pool(workers) as pool:
        return sum(pool.map(_count_chunk, tasks))


def count(weights: WeightVector, bound, *, workers: int = 1,
          budget=DEFAULT_BUDGET) -> int:
    """Number of points of height <= B (weighted gcd 1, canonical sign)."""
    return _count(weights, bound, False, workers, budget)


def count_integral(weights: WeightVector, bound, *, workers: int = 1,
                   budget=DEFAULT_BUDGET) -> int:
    """Number of gcd-1 canonical tuples of height <= B."""
    return _count(weights, bound, True, workers, budget)
