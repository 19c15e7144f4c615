import math
import random

import numpy as np
import pytest

from dirichlet_moments.arith import euler_phi, phi_star, primes_in_range
from dirichlet_moments.characters import character_group
from dirichlet_moments.exceptions import DomainError, NumericalError
from dirichlet_moments.moments import (
    divisor_counts,
    moment,
    moment_all_characters,
    moment_all_primitive,
    moment_even,
    moment_odd,
    series_tail_estimate,
    t_from_moments,
    t_recover,
    t_series,
    twisted_moment,
)

# mpmath (dirichlet(), 30 digits), frozen
ZETA_HALF_SQ = (-1.46035450880958681288949915252) ** 2
EVEN_5 = 0.0537085016690090667118218525335  # |L(1/2, chi_5)|^2, chi_5 quadratic
ODD_5 = 1.26076906945632575495211983439  # two quartic characters mod 5
ODD_3 = 0.480867557696828626181220063236**2
ALL_3 = 0.6121922107658949590423872762
S_5_2 = -0.0537085016690090667118218525335


def test_small_values():
    assert abs(moment_even(5).value - EVEN_5) < 1e-13
    assert moment_even(5).character_count == 1
    odd = moment_odd(5)
    assert odd.character_count == 2
    assert abs(odd.value - ODD_5) < 1e-13
    assert abs(moment_odd(3).value - ODD_3) < 1e-13
    assert abs(moment_all_characters(1).value - ZETA_HALF_SQ) < 1e-13
    assert abs(moment_all_characters(2).value - ZETA_HALF_SQ * (1 - 2**-0.5) ** 2) < 1e-13
    assert abs(moment_all_characters(3).value - ALL_3) < 1e-13


def test_rejects_small_q():
    for q in (1, 2):
        with pytest.raises(DomainError):
            moment_even(q)
        with pytest.raises(DomainError):
            moment_odd(q)
    with pytest.raises(DomainError):
        moment(7, 0.01, 0, "all-characters")
    with pytest.raises(DomainError):
        moment(7, 0, 0, "neither")


def test_all_characters_at_primes():
    for p in (3, 7, 101):
        want = moment_all_primitive(p).value + (1 - p**-0.5) ** 2 * ZETA_HALF_SQ
        assert abs(moment_all_characters(p).value - want) < 1e-11


def test_shift_symmetry():
    rng = random.Random(7)
    for q in range(5, 61):
        for _ in range(10):
            a = complex(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05))
            b = complex(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05))
            v1 = moment_even(q, a, b).value
            v2 = moment_even(q, b, a).value
            assert abs(v1 - v2) < 1e-10


def test_parity_partition():
    for q in range(3, 200):
        ev, od, al = moment_even(q, 0.01, 0.02), moment_odd(q, 0.01, 0.02), moment_all_primitive(q, 0.01, 0.02)
        assert ev.character_count + od.character_count == al.character_count == phi_star(q)
        assert abs(ev.value + od.value - al.value) < 1e-10


def test_real_shifts_give_real_values():
    for q in (5, 12, 101, 360):
        for cls in ("even", "odd", "all-primitive"):
            v = moment(q, 0.03, -0.01, cls).value
            assert abs(v.imag) < 1e-9


def test_census():
    for q in range(3, 300):
        g = character_group(q)
        prim = g.primitive_mask
        assert moment_even(q).character_count == int((prim & (g.parities == 1)).sum())
        assert moment_odd(q).character_count == int((prim & (g.parities == -1)).sum())
        assert moment_all_characters(q).character_count == euler_phi(q)


def test_t_recover_examples():
    assert abs(t_recover(1) - ZETA_HALF_SQ) < 1e-13
    for p in (5, 13, 101):
        want = p / (p - 1) * moment_all_characters(p).value.real + ZETA_HALF_SQ
        assert abs(t_recover(p) - want) < 1e-10


def test_inversion_roundtrip():
    for q in range(1, 201):
        assert abs(t_from_moments(q) - moment_all_characters(q).value.real) < 1e-9 * max(1.0, q)


def test_divisor_counts():
    d = divisor_counts(1000)
    assert d[0] == 0 and d[1] == 1 and d[12] == 6 and d[997] == 2
    assert all(d[n] == sum(1 for k in range(1, n + 1) if n % k == 0) for n in range(1, 300))


def test_series_matches_divisor_route():
    assert abs(t_series(1).value - ZETA_HALF_SQ) < 1e-4
    for k in (2, 5, 13):
        assert abs(t_series(k).value - t_recover(k)) < 1e-4


def test_series_doubling_stability():
    base = t_series(5)
    doubled = t_series(5, cutoff=2 * base.cutoff)
    assert abs(base.value - doubled.value) < 1e-7


def test_series_rejects_short_cutoff():
    assert series_tail_estimate(5, 10.0) > 1e-8
    with pytest.raises(NumericalError):
        t_series(5, cutoff=10.0)


def test_twisted_examples():
    assert abs(twisted_moment(5, 2) - S_5_2) < 1e-13
    assert isinstance(twisted_moment(101, 3), float)
    # chi(-1) factor
    assert abs(twisted_moment(5, -2) - S_5_2) < 1e-13  # the quartic pair cancels in both sums
    with pytest.raises(DomainError):
        twisted_moment(15, 2)
    with pytest.raises(DomainError):
        twisted_moment(7, 14)


def test_twisted_identity_h_one():
    for p in primes_in_range(3, 200):
        assert abs(twisted_moment(p, 1) - moment_all_primitive(p).value.real) < 1e-10
