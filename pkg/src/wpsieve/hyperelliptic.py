"""Odd-degree hyperelliptic moduli inside weighted projective space.

A point of weights (4, 6, ..., 4g+2) is read as the curve

    y^2 = t^{2g+1} + x_0 t^{2g-1} + x_1 t^{2g-2} + ... + x_{2g-1}

(no t^{2g} term).  The module provides smoothness (nonvanishing
discriminant, computed exactly), rational 2-torsion (an integer root of the
right-hand side), a bounded-height census over a grid of height cutoffs,
and log-log exponent fits of the census columns.

The census never walks the full box point by point: for each prefix of
coordinates the last coordinate is counted arithmetically (inclusion-
exclusion for the weighted-gcd condition) and thin members are produced by
solving the cover for the constant coefficient.  Both routes are checked
against brute-force oracles in the test suite.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import arith, covers
from .wps import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    WeightVector,
    WpsPoint,
    as_bound,
    box_cutoffs,
    box_volume,
    _box_primes,
    _chunk_ranges,
    _wgcd_one_in_box,
)


def moduli_weights(g: int) -> WeightVector:
    if not isinstance(g, int) or g < 1:
        raise ValueError(f"genus must be a positive integer, got {g!r}")
    return WeightVector(tuple(range(4, 4 * g + 3, 2)))


@dataclass(frozen=True)
class HyperellipticPoint:
    genus: int
    point: WpsPoint

    def poly(self) -> list[int]:
        """Ascending coefficients of t^{2g+1} + x_0 t^{2g-1} + ... + x_{2g-1}."""
        return _poly_from_coords(self.genus, self.point.coords)


def _poly_from_coords(g: int, coords: Sequence[int]) -> list[int]:
    # coefficient of t^j is x_{2g-1-j}; the t^{2g} slot is empty; monic.
    return [*reversed(coords), 0, 1]


def curve_from_point(point: WpsPoint, g: int) -> HyperellipticPoint:
    if point.weights != moduli_weights(g):
        raise ValueError(
            f"point weights {tuple(point.weights)} are not the genus-{g} moduli "
            f"weights {tuple(moduli_weights(g))}"
        )
    return HyperellipticPoint(g, point)


# --- exact polynomial arithmetic ------------------------------------------


def _trim(poly: Sequence[int]) -> list[int]:
    out = list(poly)
    while out and out[-1] == 0:
        out.pop()
    return out


def _poly_eval(poly: Sequence[int], t: int) -> int:
    acc = 0
    for c in reversed(poly):
        acc = acc * t + c
    return acc


def _derivative(poly: Sequence[int]) -> list[int]:
    return [k * c for k, c in enumerate(poly)][1:]


def _content(poly: Sequence[int]) -> int:
    g = 0
    for c in poly:
        g = math.gcd(g, c)
    return g


def _prem(A: list[int], B: list[int]) -> list[int]:
    """Pseudo-remainder: lc(B)^{degA-degB+1} * A mod B, exact over Z."""
    dA, dB = len(A) - 1, len(B) - 1
    lb = B[-1]
    R = list(A)
    for k in range(dA, dB - 1, -1):
        c = R[k]
        R = [lb * r for r in R]
        if c:
            for j in range(dB + 1):
                R[j + k - dB] -= c * B[j]
    return R[:dB]


def resultant(A: Sequence[int], B: Sequence[int]) -> int:
    """Res(A, B) for integer polynomials (ascending coefficients).

    Subresultant PRS: all intermediate divisions are exact in Z, so the
    value is computed without rationals.
    """
    A = _trim(A)
    B = _trim(B)
    if not A or not B:
        return 0
    degA, degB = len(A) - 1, len(B) - 1
    if degA == 0 and degB == 0:
        return 1
    s = 1
    if degA < degB:
        if degA % 2 == 1 and degB % 2 == 1:
            s = -s
        A, B, degA, degB = B, A, degB, degA
    if degB == 0:
        return s * B[0] ** degA
    ca, cb = _content(A), _content(B)
    A = [c // ca for c in A]
    B = [c // cb for c in B]
    t = ca**degB * cb**degA
    g = h = 1
    while True:
        degA, degB = len(A) - 1, len(B) - 1
        delta = degA - degB
        if degA % 2 == 1 and degB % 2 == 1:
            s = -s
        R = _trim(_prem(A, B))
        if not R:
            return 0  # nonconstant common factor
        den = g * h**delta
        if any(c % den for c in R):
            raise AssertionError("subresultant division was not exact")
        R = [c // den for c in R]
        A, B = B, R
        g = A[-1]
        if delta > 0:
            h = g**delta // h ** (delta - 1)
        if len(B) == 1:
            degA = len(A) - 1
            num = B[0] ** degA
            den = h ** (degA - 1)
            if num % den:
                raise AssertionError("final subresultant division was not exact")
            return s * t * (num // den)


def _disc_poly(poly: Sequence[int]) -> int:
    """Discriminant of a monic integer polynomial (ascending coefficients)."""
    n = len(_trim(poly)) - 1
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * resultant(poly, _derivative(poly))


def discriminant(h: HyperellipticPoint) -> int:
    return _disc_poly(h.poly())


def is_smooth(h: HyperellipticPoint) -> bool:
    """Nonvanishing discriminant of the defining polynomial."""
    return discriminant(h) != 0


def has_rational_two_torsion(h: HyperellipticPoint) -> bool:
    """Integer root of the defining polynomial (a rational 2-torsion x-coordinate)."""
    return covers.root_cover_member(covers.two_torsion_cover(h.genus), h.point)


# --- singular values along a column ---------------------------------------


def _interp_int_poly(points: list[tuple[int, int]]) -> list[int]:
    """Integer polynomial (ascending) through the given (x, value) pairs."""
    n = len(points)
    coeffs = [Fraction(0)] * n
    for k, (xk, vk) in enumerate(points):
        basis = [Fraction(1)]
        denom = 1
        for j, (xj, _) in enumerate(points):
            if j == k:
                continue
            basis = [Fraction(0)] + basis
            for i in range(len(basis) - 1):
                basis[i] -= xj * basis[i + 1]
            denom *= xk - xj
        scale = Fraction(vk, denom)
        for i, b in enumerate(basis):
            coeffs[i] += scale * b
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise AssertionError("interpolation of an integer family left a denominator")
        out.append(c.numerator)
    return out


def _integer_roots_within(R: Sequence[int], bound: int) -> list[int]:
    """All integer roots y of R with |y| <= bound, found exactly.

    Small windows are scanned directly.  Larger windows are filtered through
    roots of R modulo a few primes whose product exceeds the window, then
    candidates are verified exactly; every integer root survives reduction
    mod every prime, so the filter is complete.
    """
    R = _trim(R)
    if not R:
        raise ValueError("zero polynomial has every root")
    if len(R) == 1:
        return []
    c = _content(R)
    R = [x // c for x in R]
    if 2 * bound + 1 <= 64:
        return [y for y in range(-bound, bound + 1) if _poly_eval(R, y) == 0]
    need = 2 * bound + 1
    prime_roots: list[tuple[int, list[int]]] = []
    prod = 1
    for p in arith.primes_up_to(10_000):
        if p < 101:
            continue
        roots = [r for r in range(p) if _poly_eval([x % p for x in R], r) % p == 0]
        prime_roots.append((p, roots))
        prod *= p
        if prod >= need:
            break
    else:
        raise AssertionError("prime pool exhausted while filtering roots")
    out = []
    for combo in itertools.product(*(roots for _, roots in prime_roots)):
        x, mod = 0, 1
        for (p, _), r in zip(prime_roots, combo):
            x += mod * ((r - x) * pow(mod, -1, p) % p)
            mod *= p
        y = ((x + bound) % mod) - bound
        if -bound <= y <= bound and _poly_eval(R, y) == 0:
            out.append(y)
    return sorted(set(out))


def _singular_last_values(g: int, prefix: Sequence[int], bound: int) -> list[int]:
    """Values y of the last coordinate, |y| <= bound, where the column's curve
    polynomial has a repeated root.

    Res_t(f_y, f') is a polynomial of degree <= 2g in y (f' does not involve
    y); it is recovered exactly by interpolation and its integer roots in the
    window are extracted."""
    base = _poly_from_coords(g, tuple(prefix) + (0,))
    dfdt = _derivative(base)
    pts = []
    for k in range(2 * g + 1):
        fk = list(base)
        fk[0] = k
        pts.append((k, resultant(fk, dfdt)))
    R = _trim(_interp_int_poly(pts))
    if not R:
        raise AssertionError("resultant in y vanished identically")
    return _integer_roots_within(R, bound)


# --- census ----------------------------------------------------------------


@dataclass(frozen=True)
class CensusRow:
    bound: Fraction
    total: int
    thin: int
    thin_label: str


@dataclass
class CensusTable:
    rows: list[CensusRow]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        prev = None
        for r in self.rows:
            if r.total < 0 or r.thin < 0 or r.thin > r.total:
                raise ValueError(f"invalid census row {r}")
            if prev is not None and r.bound <= prev:
                raise ValueError("census heights must increase strictly")
            prev = r.bound

    def column(self, name: str) -> list[int]:
        if name == "total":
            return [r.total for r in self.rows]
        if name == "thin":
            return [r.thin for r in self.rows]
        raise ValueError(f"unknown census column {name!r}")

    def to_csv(self, fh) -> None:
        fh.write("B,total,thin,thin_label\n")
        for r in self.rows:
            fh.write(f"{_fmt_bound(r.bound)},{r.total},{r.thin},{r.thin_label}\n")

    @classmethod
    def from_csv(cls, fh) -> "CensusTable":
        header = fh.readline().strip()
        if header != "B,total,thin,thin_label":
            raise ValueError(f"unexpected census header {header!r}")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            b, total, thin, label = line.split(",")
            rows.append(CensusRow(Fraction(b), int(total), int(thin), label))
        return cls(rows)


def _fmt_bound(b: Fraction) -> str:
    return str(b.numerator) if b.denominator == 1 else format(float(b), ".12g")


_TESTER_NAMES = ("two-torsion", "disc-square", "none")


def _tester_cover(name: str, g: int) -> Optional[covers.Cover]:
    if name == "none":
        return None
    if name == "two-torsion":
        return covers.two_torsion_cover(g)
    if name == "disc-square":
        if g != 1:
            raise ValueError("disc-square tester is defined for genus 1 only")
        return covers.disc_square_cover_g1()
    raise ValueError(f"unknown tester {name!r}; choose from {_TESTER_NAMES}")


def census(
    g: int,
    grid: Sequence,
    thin: str = "two-torsion",
    smooth_only: bool = False,
    *,
    workers: int = 1,
    budget=DEFAULT_BUDGET,
) -> CensusTable:
    """Point totals and thin counts for every height cutoff in the grid.

    One pass over coordinate prefixes serves the whole grid: each prefix is
    bucketed by the smallest cutoff whose box contains it and the last
    coordinate is counted per cutoff.
    """
    t0 = time.perf_counter()
    wv = moduli_weights(g)
    bounds = [as_bound(b) for b in grid]
    if not bounds:
        raise ValueError("census needs a nonempty height grid")
    if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise ValueError("census heights must increase strictly")
    _tester_cover(thin, g)  # validate the name before any work
    if budget is not None:
        vol = box_volume(wv, bounds[-1])
        if vol > budget:
            raise BudgetExceededError(vol, budget)
    if workers <= 1:
        totals, thins = _census_chunk((g, bounds, thin, smooth_only, None))
    else:
        m0 = box_cutoffs(wv, bounds[-1])[0]
        tasks = [
            (g, bounds, thin, smooth_only, rng) for rng in _chunk_ranges(m0)
        ]
        with Pool(workers) as pool:
            parts = pool.map(_census_chunk, tasks)
        totals = [sum(p[0][j] for p in parts) for j in range(len(bounds))]
        thins = [sum(p[1][j] for p in parts) for j in range(len(bounds))]
    rows = [
        CensusRow(b, totals[j], thins[j], thin) for j, b in enumerate(bounds)
    ]
    meta = {
        "genus": g,
        "thin": thin,
        "smooth_only": smooth_only,
        "workers": workers,
        "wall_time_s": time.perf_counter() - t0,
    }
    return CensusTable(rows, meta)


def _census_chunk(args) -> tuple[list[int], list[int]]:
    g, bounds, thin, smooth_only, x0_range = args
    wv = moduli_weights(g)
    cutoffs = [box_cutoffs(wv, b) for b in bounds]
    Ms = cutoffs[-1]
    nG = len(bounds)
    cover = _tester_cover(thin, g)
    use_column = cover is None or cover.column_solver() is not None
    plist = _box_primes(wv, bounds[-1])
    totals = [0] * nG
    thins = [0] * nG
    if use_column:
        _census_columns(
            g, wv, cutoffs, Ms, plist, cover, smooth_only, x0_range, totals, thins
        )
    else:
        _census_pointwise(
            g, wv, cutoffs, Ms, plist, cover, smooth_only, x0_range, totals, thins
        )
    return totals, thins


def _clip_ranges(Ms, x0_range):
    ranges = [range(-m, m + 1) for m in Ms]
    if x0_range is not None:
        lo = max(x0_range[0], -Ms[0])
        hi = min(x0_range[1], Ms[0])
        if lo > hi:
            return None
        ranges[0] = range(lo, hi + 1)
    return ranges


def _census_columns(
    g, wv, cutoffs, Ms, plist, cover, smooth_only, x0_range, totals, thins
):
    nG = len(cutoffs)
    last = len(wv) - 1
    ranges = _clip_ranges(Ms[:-1], x0_range)
    if ranges is None:
        return
    prefix_cut = [c[:-1] for c in cutoffs]
    for prefix in itertools.product(*ranges):
        j0 = next(
            j
            for j in range(nG)
            if all(abs(x) <= cm for x, cm in zip(prefix, prefix_cut[j]))
        )
        # primes excluding on this column: p^{a_i} | x_i for every prefix slot
        P = [
            pas[last]
            for _, pas in plist
            if all(x % q == 0 for x, q in zip(prefix, pas))
        ]
        zero_prefix = not any(prefix)
        subs = [(1, 1)]
        for q in P:
            subs += [(-sg, mod * q) for sg, mod in subs]
        for j in range(j0, nG):
            M = cutoffs[j][last]
            cnt = sum(sg * (2 * (M // mod) + 1) for sg, mod in subs)
            if zero_prefix and not P:
                cnt -= 1  # the all-zero tuple is not a point
            totals[j] += cnt
        if cover is not None:
            ys = cover.column_members(prefix, Ms[last])
            ys = [y for y in ys if not any(y % q == 0 for q in P)]
            if zero_prefix:
                ys = [y for y in ys if y != 0]
            if smooth_only:
                ys = [
                    y
                    for y in ys
                    if _disc_poly(_poly_from_coords(g, prefix + (y,))) != 0
                ]
            for y in ys:
                ay = abs(y)
                for j in range(j0, nG):
                    if ay <= cutoffs[j][last]:
                        thins[j] += 1
        if smooth_only:
            sing = _singular_last_values(g, prefix, Ms[last])
            sing = [y for y in sing if not any(y % q == 0 for q in P)]
            if zero_prefix:
                sing = [y for y in sing if y != 0]
            for y in sing:
                ay = abs(y)
                for j in range(j0, nG):
                    if ay <= cutoffs[j][last]:
                        totals[j] -= 1


def _census_pointwise(
    g, wv, cutoffs, Ms, plist, cover, smooth_only, x0_range, totals, thins
):
    nG = len(cutoffs)
    ranges = _clip_ranges(Ms, x0_range)
    if ranges is None:
        return
    for tup in itertools.product(*ranges):
        if not any(tup):
            continue
        if not _wgcd_one_in_box(tup, plist):
            continue
        if smooth_only and _disc_poly(_poly_from_coords(g, tup)) == 0:
            continue
        j0 = next(
            (
                j
                for j in range(nG)
                if all(abs(x) <= cm for x, cm in zip(tup, cutoffs[j]))
            ),
            None,
        )
        if j0 is None:
            continue
        member = cover is not None and covers.has_integer_root(cover.poly_at(tup))
        for j in range(j0, nG):
            totals[j] += 1
            if member:
                thins[j] += 1


# --- exponent fits ---------------------------------------------------------


class FitResult(NamedTuple):
    slope: float
    stderr: float


def fit_exponent(table: CensusTable, column: str = "total") -> FitResult:
    """Least-squares slope of log(count) against log(B), with its standard error."""
    data = [
        (float(r.bound), v)
        for r, v in zip(table.rows, table.column(column))
        if v > 0
    ]
    if len(data) < 3:
        raise ValueError("exponent fit needs at least 3 rows with positive counts")
    x = np.log(np.array([b for b, _ in data]))
    y = np.log(np.array([v for _, v in data], dtype=float))
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0:
        raise ValueError("height grid is degenerate for fitting")
    slope = float(np.dot(xc, y - y.mean()) / sxx)
    resid = y - y.mean() - slope * xc
    ssr = float(np.dot(resid, resid))
    stderr = math.sqrt(max(ssr, 0.0) / (len(data) - 2) / sxx)
    return FitResult(slope, stderr)


def recommended_Q(bound, weights: WeightVector) -> int:
    """floor(B^{min a_i / 2}), the sieve cutoff balancing the bound."""
    b = as_bound(bound)
    m = weights.min_weight
    return math.isqrt(b.numerator**m // b.denominator**m)
