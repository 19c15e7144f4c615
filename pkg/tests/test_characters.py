import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_moments.arith import euler_phi, mobius, phi_star
from dirichlet_moments.characters import (
    character_group,
    conductor_direct,
    even_orthogonality,
    exp_sum_closed,
    exp_sum_direct,
    gauss_sum,
    orthogonality_closed,
    orthogonality_direct,
    primitive_characters,
)
from dirichlet_moments.exceptions import DomainError


def e(x):
    return cmath.exp(2j * math.pi * x)


def test_group_shapes():
    assert len(character_group(1)) == 1
    assert character_group(5).orders == (4,)
    assert sorted(character_group(8).orders) == [2, 2]


def test_rejects_zero_modulus():
    with pytest.raises(DomainError):
        character_group(0)


def test_conductor_examples():
    g = character_group(12)
    assert g.principal().conductor == 1
    (quad,) = primitive_characters(5, parity=1)
    assert quad.conductor == 5
    g10 = character_group(10)
    induced = [g10.character(tuple(l)) for l in g10.labels if not g10.character(tuple(l)).is_principal]
    assert all(c.conductor == 5 for c in induced)


def test_conductor_two_routes():
    for q in range(1, 121):
        g = character_group(q)
        for lab in g.labels:
            chi = g.character(tuple(lab))
            assert chi.conductor == conductor_direct(chi)


def test_gauss_sum_examples():
    (quad,) = primitive_characters(5, parity=1)
    assert abs(gauss_sum(quad) - math.sqrt(5)) < 1e-12
    for d in (1, 6, 12, 30, 49):
        assert abs(gauss_sum(character_group(d).principal()) - mobius(d)) < 1e-9


def test_gauss_sum_magnitude():
    for q in range(3, 201):
        for chi in primitive_characters(q):
            assert abs(abs(gauss_sum(chi)) - math.sqrt(q)) < 1e-9


def test_bulk_gauss_sums_match_direct():
    for q in (7, 12, 45, 101):
        g = character_group(q)
        bulk = g.gauss_sums
        direct = np.array([gauss_sum(g.character(tuple(l))) for l in g.labels])
        assert np.max(np.abs(bulk - direct)) < 1e-9


def test_orthogonality_examples():
    assert orthogonality_closed(5, 1, 1) == 3
    assert abs(orthogonality_direct(5, 2, 3) - (-1)) < 1e-12
    assert orthogonality_closed(5, 2, 3) == -1
    assert orthogonality_closed(12, 5, 7) == 1
    assert abs(orthogonality_direct(12, 5, 7) - 1) < 1e-12


def test_orthogonality_rejects_nonunits():
    with pytest.raises(DomainError):
        orthogonality_closed(12, 2, 5)


def test_even_orthogonality_examples():
    assert even_orthogonality(5, 1, 1) == 1
    assert even_orthogonality(7, 1, 1) == 2
    assert even_orthogonality(5, 2, 2) == 1


def test_orthogonality_random_pairs():
    rng = random.Random(0)
    for q in range(1, 151):
        units = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]
        for _ in range(100):
            m, n = rng.choice(units), rng.choice(units)
            d = orthogonality_direct(q, m, n)
            assert abs(d.imag) < 1e-9
            assert round(d.real) == orthogonality_closed(q, m, n)
            ev = orthogonality_direct(q, m, n, parity=1)
            assert abs(ev - float(even_orthogonality(q, m, n))) < 1e-9


def test_table_closure():
    rng = random.Random(1)
    for q in range(1, 151):
        g = character_group(q)
        units = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]
        for _ in range(10):
            m, n = rng.choice(units), rng.choice(units)
            k = (g.exponents_at(m) - g.exponents_at(n)) % g.exponent
            total = np.sum(np.exp(2j * np.pi * k / g.exponent))
            assert abs(total - euler_phi(q) * ((m - n) % q == 0)) < 1e-9


def test_parity_census():
    for q in range(1, 501):
        g = character_group(q)
        prim = g.primitive_mask
        even = int((prim & (g.parities == 1)).sum())
        odd = int((prim & (g.parities == -1)).sum())
        assert even + odd == phi_star(q)


def test_exp_sum_examples():
    assert abs(exp_sum_closed(2, 3, 1) - e(1 / 6)) < 1e-12
    assert abs(exp_sum_direct(2, 3, 1) - e(1 / 6)) < 1e-12
    assert exp_sum_closed(4, 2, 1) == 0
    assert abs(exp_sum_direct(4, 2, 1)) < 1e-12
    assert abs(exp_sum_closed(1, 5, 2) - e(2 / 5)) < 1e-12


def test_exp_sum_all_small():
    for c in range(1, 31):
        for d in range(1, 31):
            for r in range(d):
                if math.gcd(r, d) == 1:
                    assert abs(exp_sum_direct(c, d, r) - exp_sum_closed(c, d, r)) < 1e-12


def test_exp_sum_rejects_bad_residue():
    with pytest.raises(DomainError):
        exp_sum_closed(3, 4, 2)


@given(st.integers(2, 400), st.data())
@settings(max_examples=60, deadline=None)
def test_character_is_multiplicative(q, data):
    g = character_group(q)
    lab = tuple(g.labels[data.draw(st.integers(0, len(g) - 1))])
    chi = g.character(lab)
    m, n = data.draw(st.integers(1, 5 * q)), data.draw(st.integers(1, 5 * q))
    assert abs(chi(m * n) - chi(m) * chi(n)) < 1e-12
    assert abs(chi(m + q) - chi(m)) < 1e-12


def test_fft_transform_matches_direct():
    rng = np.random.default_rng(3)
    for q in (8, 15, 63, 100, 243):
        g = character_group(q)
        v = rng.normal(size=q) + 1j * rng.normal(size=q)
        assert np.max(np.abs(g.transform(v, "fft") - g.transform(v, "direct"))) < 1e-10
