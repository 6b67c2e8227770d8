import math
import random

import numpy as np
import pytest

from wpsieve import arith


def test_primes_up_to_against_numpy_sieve():
    N = 100_000
    mask = np.ones(N + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(N) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    expected = [int(p) for p in np.nonzero(mask)[0]]
    assert arith.primes_up_to(N) == expected
    assert arith.primes_up_to(1) == []
    assert arith.primes_up_to(2) == [2]


def test_is_prime_small_and_carmichael():
    assert [n for n in range(2, 30) if arith.is_prime(n)] == [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
    ]
    assert not arith.is_prime(1)
    assert not arith.is_prime(0)
    assert not arith.is_prime(-7)
    assert not arith.is_prime(561)  # Carmichael number, trial division is immune
    assert arith.is_prime(10**9 + 7)


def test_factorize_reconstructs_and_moebius_matches_sieve():
    # one pass: product reconstruction + a sieved Mobius oracle
    N = 100_000
    mu = np.ones(N + 1, dtype=np.int64)
    is_p = np.ones(N + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, N + 1):
        if is_p[p]:
            is_p[2 * p :: p] = False
            mu[p::p] *= -1
            mu[p * p :: p * p] = 0
    for n in range(1, N + 1):
        f = arith.factorize(n)
        prod = 1
        for p, e in f.factors:
            assert arith.is_prime(p) and e >= 1
            prod *= p**e
        assert prod == n
        assert arith.moebius(n) == int(mu[n])


def test_factorize_large_spot_checks():
    rng = random.Random(11)
    for _ in range(50):
        a = rng.choice(arith.primes_up_to(500))
        b = rng.choice(arith.primes_up_to(500))
        e = rng.randint(1, 3)
        n = a**e * b
        prod = 1
        for p, k in arith.factorize(n).factors:
            prod *= p**k
        assert prod == n
    # a prime square beyond the initial table
    p = 104729
    assert arith.factorize(p * p).factors == ((p, 2),)


def test_factorize_rejects_nonpositive():
    with pytest.raises(ValueError):
        arith.factorize(0)
    with pytest.raises(ValueError):
        arith.factorize(-6)


def test_valuation():
    assert arith.valuation(48, 2) == 4
    assert arith.valuation(48, 3) == 1
    assert arith.valuation(48, 5) == 0
    assert arith.valuation(0, 7) == arith.INFINITE
    with pytest.raises(ValueError):
        arith.valuation(10, 4)  # modulus must be prime


def test_divisors():
    assert arith.divisors(1) == [1]
    assert arith.divisors(12) == [1, 2, 3, 4, 6, 12]
    assert arith.divisors(49) == [1, 7, 49]
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 5000)
        ds = arith.divisors(n)
        assert ds == sorted(d for d in range(1, n + 1) if n % d == 0)
