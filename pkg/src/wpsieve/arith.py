"""Exact integer arithmetic shared by the other modules.

Everything here is deterministic and exact: a growable prime table, trial
division factorization, p-adic valuations and the Moebius function.  Inputs
are desk-scale (well under 64 bits), so nothing fancier than a sieve plus
trial division is warranted.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

# Valuation of 0.  Compares above every finite valuation and floor-divides
# to itself, which is exactly what weighted-gcd minima need.
INFINITE = math.inf

_primes: list[int] = [2, 3, 5, 7]
_limit = 10


def _grow_primes(limit: int) -> None:
    """Extend the cached prime table to cover [2, limit]."""
    global _primes, _limit
    if limit <= _limit:
        return
    limit = max(limit, 2 * _limit)
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    _primes = [i for i in range(2, limit + 1) if sieve[i]]
    _limit = limit


def primes_up_to(q: int) -> list[int]:
    """All primes p <= q, ascending."""
    if q < 2:
        return []
    _grow_primes(q)
    return _primes[: bisect_right(_primes, q)]


def is_prime(n: int) -> bool:
    if not isinstance(n, int) or n < 2:
        return False
    if n <= _limit:
        i = bisect_right(_primes, n)
        return i > 0 and _primes[i - 1] == n
    r = math.isqrt(n)
    _grow_primes(r)
    for p in _primes:
        if p > r:
            break
        if n % p == 0:
            return False
    return True


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]  # (prime, exponent), primes ascending


def factorize(n: int) -> Factorization:
    """Factor n >= 1 by trial division against the prime table."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"factorize needs an integer >= 1, got {n!r}")
    rem = n
    out: list[tuple[int, int]] = []
    i = 0
    while rem > 1:
        if i >= len(_primes):
            if _limit >= math.isqrt(rem):
                break  # no prime <= sqrt(rem) divides it: rem is prime
            _grow_primes(2 * _limit)
            continue
        p = _primes[i]
        if p * p > rem:
            break
        if rem % p == 0:
            e = 0
            while rem % p == 0:
                rem //= p
                e += 1
            out.append((p, e))
        i += 1
    if rem > 1:
        out.append((rem, 1))
    return Factorization(n, tuple(out))


def valuation(n: int, p: int):
    """p-adic valuation of n; INFINITE at n = 0.  p must be prime."""
    if not is_prime(p):
        raise ValueError(f"valuation needs a prime modulus, got {p!r}")
    if n == 0:
        return INFINITE
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e >= 2 for _, e in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


def divisors(n: int) -> list[int]:
    """Positive divisors of n >= 1, ascending."""
    ds = [1]
    for p, e in factorize(n).factors:
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)
