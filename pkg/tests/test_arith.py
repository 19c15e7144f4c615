import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_moments.arith import (
    coprime_splittings,
    divisor_count,
    divisors,
    euler_phi,
    factorize,
    is_prime,
    mobius,
    phi_star,
    phi_star_via_c_sum,
    primes_in_range,
)
from dirichlet_moments.characters import character_group
from dirichlet_moments.exceptions import DomainError


def test_factorize_examples():
    assert list(factorize(1).factors) == []
    assert list(factorize(12).factors) == [(2, 2), (3, 1)]
    assert list(factorize(1517).factors) == [(37, 1), (41, 1)]


def test_factorize_rejects_zero():
    with pytest.raises(DomainError):
        factorize(0)


@pytest.mark.parametrize("n, mu", [(1, 1), (6, 1), (12, 0), (30, -1), (7, -1)])
def test_mobius(n, mu):
    assert mobius(n) == mu


@pytest.mark.parametrize("n, phi", [(1, 1), (9, 6), (1517, 1440)])
def test_euler_phi(n, phi):
    assert euler_phi(n) == phi


@pytest.mark.parametrize("n, d", [(1, 1), (12, 6), (1517, 4)])
def test_divisor_count(n, d):
    assert divisor_count(n) == d
    assert len(divisors(n)) == d


@pytest.mark.parametrize("q, n", [(5, 3), (9, 4), (1, 1), (4, 1), (2, 0)])
def test_phi_star_examples(q, n):
    assert phi_star(q) == n


def test_phi_star_c_sum_examples():
    assert phi_star_via_c_sum(5) == 3
    assert phi_star_via_c_sum(9) == 4
    assert phi_star_via_c_sum(45) == phi_star(45)
    assert isinstance(phi_star_via_c_sum(45), Fraction)


def test_coprime_splittings():
    assert set(coprime_splittings(12)) == {(12, 1), (3, 4), (4, 3), (1, 12)}
    assert set(coprime_splittings(101)) == {(101, 1), (1, 101)}
    assert len(coprime_splittings(1517)) == 4


def test_primes_in_range():
    assert primes_in_range(100, 130) == [101, 103, 107, 109, 113, 127]
    assert all(is_prime(p) for p in primes_in_range(1, 2000))
    assert len(primes_in_range(1, 2000)) == 303


coprime_pairs = st.tuples(st.integers(1, 10**6), st.integers(1, 10**6)).filter(lambda t: math.gcd(*t) == 1)


@given(coprime_pairs)
@settings(max_examples=200, deadline=None)
def test_multiplicative(mn):
    m, n = mn
    assert mobius(m * n) == mobius(m) * mobius(n)
    assert euler_phi(m * n) == euler_phi(m) * euler_phi(n)
    assert divisor_count(m * n) == divisor_count(m) * divisor_count(n)


def test_phi_divisor_sum():
    for n in range(1, 10**4 + 1):
        assert sum(euler_phi(d) for d in divisors(n)) == n


def test_phi_star_identity_exact():
    for q in range(1, 2001):
        assert phi_star_via_c_sum(q) == phi_star(q)


def test_phi_star_counts_conductor_q():
    for q in range(1, 501):
        g = character_group(q)
        assert int((g.conductors == q).sum()) == phi_star(q)
