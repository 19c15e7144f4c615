"""Exact integer arithmetic: factorization and multiplicative functions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd, isqrt, prod

from .exceptions import DomainError

TRIAL_DIVISION_LIMIT = 10**12


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if prod(p**e for p, e in self.factors) != self.n:
            raise ValueError(f"factors do not multiply to {self.n}")
        primes = [p for p, _ in self.factors]
        if primes != sorted(set(primes)) or any(e < 1 for _, e in self.factors):
            raise ValueError("primes must be strictly increasing with exponents >= 1")

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def prime_powers(self) -> list[int]:
        return [p**e for p, e in self.factors]


def _check_positive(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool):
        raise DomainError(f"expected a positive integer, got {n!r}")
    if n < 1:
        raise DomainError(f"expected a positive integer, got {n}")


@lru_cache(maxsize=65536)
def factorize(n: int) -> Factorization:
    """Factor ``n`` by trial division (deterministic, exact for n <= 10**12)."""
    _check_positive(n)
    if n > TRIAL_DIVISION_LIMIT:
        raise DomainError(f"{n} exceeds the trial-division limit {TRIAL_DIVISION_LIMIT}")
    factors = []
    m = n
    for p in (2, 3):
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            factors.append((p, e))
    p = 5
    step = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            factors.append((p, e))
        p += step
        step = 6 - step
    if m > 1:
        factors.append((m, 1))
    return Factorization(n, tuple(factors))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = factorize(n).factors
    return len(f) == 1 and f[0][1] == 1


def primes_in_range(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi (simple sieve)."""
    if hi < 2 or hi < lo:
        return []
    sieve = bytearray([1]) * (hi + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, isqrt(hi) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, hi + 1, p)))
    return [p for p in range(max(lo, 2), hi + 1) if sieve[p]]


def mobius(n: int) -> int:
    f = factorize(n).factors
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    result = 1
    for p, e in factorize(n).factors:
        result *= (p - 1) * p ** (e - 1)
    return result


def divisors(n: int) -> list[int]:
    f = factorize(n).factors
    out = [1]
    for p, e in f:
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def divisor_count(n: int) -> int:
    return prod(e + 1 for _, e in factorize(n).factors)


def phi_star(q: int) -> int:
    """Number of primitive characters mod q: sum over d | q of phi(d) mu(q/d)."""
    return sum(euler_phi(d) * mobius(q // d) for d in divisors(q))


def phi_star_via_c_sum(q: int) -> Fraction:
    """phi(q)^2/q * sum_{cd=q, (c,d)=1} mu(c)/phi(c)^2, in exact rationals.

    Equals ``phi_star(q)``; the two are kept separate so that one can check
    the other.
    """
    total = sum(
        (Fraction(mobius(c), euler_phi(c) ** 2) for c, _ in coprime_splittings(q)),
        Fraction(0),
    )
    return Fraction(euler_phi(q) ** 2, q) * total


def coprime_splittings(q: int) -> list[tuple[int, int]]:
    """All (c, d) with c*d == q and gcd(c, d) == 1, ordered by increasing d."""
    pp = factorize(q).prime_powers()
    pairs = []
    for mask in product((0, 1), repeat=len(pp)):
        d = prod(x for x, take in zip(pp, mask) if take)
        pairs.append((q // d, d))
    pairs.sort(key=lambda cd: cd[1])
    assert all(gcd(c, d) == 1 for c, d in pairs)
    return pairs


def mod_inverse(a: int, m: int) -> int:
    if m == 1:
        return 0
    return pow(a, -1, m)
