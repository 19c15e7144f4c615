import cmath
import math
import time

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_moments.characters import gauss_sum, primitive_characters
from dirichlet_moments.exceptions import DomainError, PoleError
from dirichlet_moments.kernels import (
    HBKernelInterpolant,
    ShiftPair,
    f_factor,
    functional_factor,
    hb_kernel_K,
    hb_khat,
    hb_residue_closed,
    hb_residue_numeric,
    kernel_K,
    kernel_K_remainder,
    khat,
    quadrature_stability,
    residue_r,
    script_k_combined,
    script_k_half_quadrature,
    x_minus,
    x_plus,
)

# mpmath quadrature of the inverse Mellin integral on Re s = 1, 25 digits
K_001 = 11.570172730854664108
K_10 = -209.53861848899399813
K_07_SHIFTED = 390.15401847596284568  # alpha = 0.02, beta = 0.01
K_3_IMAG = 335.93880696501062873 + 26.67734328893159381j  # alpha = 0.01i, beta = -0.005i
HB_K_05 = 0.060200302142541450254 - 2.7553152548769264625j
HB_K_20 = 0.41362382137355461523 - 0.056257326448556856897j
# int_0^inf K(x) x^{-1/2} dx by direct Gauss-Legendre over (0, 2e5]
HB_KHAT_HALF = 1.570796326794756 - 8.530448877939888j

SHIFTS = [(0.0, 0.0), (0.02, 0.01), (0.01j, -0.005j)]


def mp_khat(s, a, b):
    s, a, b = mpmath.mpc(s), mpmath.mpc(a), mpmath.mpc(b)
    w = s + 0.5 - b
    return (mpmath.exp(s * s) / s * mpmath.cos(mpmath.pi * (s + a)) / mpmath.cos(mpmath.pi * a)
            * mpmath.cos(mpmath.pi * (s - b)) / mpmath.cos(mpmath.pi * b)
            * mpmath.gamma(w) * mpmath.cos(mpmath.pi * w / 2))


def test_f_examples():
    s, a, b = 0.4 + 0.1j, 0.01, 0.02
    assert abs(f_factor(s, a, b) + f_factor(-s, b, a)) < 1e-14
    # s F(s) - 1 = O(s): about 0.1 s at these shifts
    assert abs(1e-4 * f_factor(1e-4, a, b) - 1) < 2e-5
    assert abs(1e-7 * f_factor(1e-7, a, b) - 1) < 2e-8
    s = 0.3 - 0.2j
    assert abs(f_factor(s, 0, 0) - cmath.exp(s * s) * cmath.cos(math.pi * s) ** 2 / s) < 1e-13
    with pytest.raises(PoleError):
        f_factor(0, a, b)


@given(
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False).filter(lambda s: abs(s) > 1e-3),
    st.complex_numbers(max_magnitude=0.2, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=0.2, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=100, deadline=None)
def test_f_antisymmetry(s, a, b):
    v = f_factor(s, a, b)
    assert abs(v + f_factor(-s, b, a)) <= 1e-12 * max(1.0, abs(v))


def test_khat_matches_mpmath():
    for s, a, b in [(1, 0, 0), (0.3 + 2j, 0.02, 0.01), (-0.5 + 1j, 0.01j, -0.005j)]:
        want = complex(mp_khat(s, a, b))
        assert abs(khat(s, a, b) - want) <= 1e-13 * abs(want)


def test_khat_residue():
    for a, b in SHIFTS:
        assert abs(1e-5 * khat(1e-5, a, b) - residue_r(a, b)) < 1e-4
    assert abs(residue_r(0, 0) - math.sqrt(math.pi) * math.cos(math.pi / 4)) < 1e-14


def test_khat_vertical_decay():
    # e^{s^2} against the e^{2 pi |t|} growth of the cosines: about 6e-17 at t = 10
    want = abs(complex(mp_khat(1 + 10j, 0, 0)))
    assert want < 1e-15
    assert abs(abs(khat(1 + 10j)) - want) <= 1e-10 * want
    assert abs(khat(1 + 12j)) < 1e-25


def test_khat_pole():
    with pytest.raises(PoleError):
        khat(0)


def test_kernel_values():
    assert abs(kernel_K(0.01) - K_001) < 1e-11
    assert abs(kernel_K(10) - K_10) < 1e-10
    assert abs(kernel_K(0.7, 0.02, 0.01) - K_07_SHIFTED) < 1e-10
    assert abs(kernel_K(3.0, 0.01j, -0.005j) - K_3_IMAG) < 1e-10


def test_kernel_small_x_leading_term():
    # K(x) - r x^{-1/2} = O(x^{1/2}) as x -> 0
    for x in (1e-2, 1e-4, 1e-6):
        rem = kernel_K_remainder(x)
        assert abs(kernel_K(x) - residue_r(0, 0) * x**-0.5 - rem) < 1e-9 * x**-0.5
        assert abs(rem) < 20 * x**0.5


def test_kernel_contour_independence():
    for x in (0.7, 3.0, 10.0):
        for a, b in SHIFTS:
            v1, v2 = kernel_K(x, a, b, line=1.0), kernel_K(x, a, b, line=2.0)
            assert abs(v1 - v2) < 1e-10 * max(1.0, abs(v1))


def test_kernel_rejects_nonpositive():
    with pytest.raises(DomainError):
        kernel_K(0.0)
    with pytest.raises(DomainError):
        hb_kernel_K(-1.0)


def test_quadrature_stability():
    grid = [0.01, 0.1, 0.5, 0.7, 1.0, 3.0, 10.0, 100.0]
    for a, b in SHIFTS:
        assert quadrature_stability(grid, a, b) < 1e-9 * max(1.0, np.max(np.abs(kernel_K(grid, a, b))))


@given(
    st.complex_numbers(max_magnitude=0.2, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=0.2, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=20, deadline=None, derandomize=True)
def test_script_k_at_zero_is_pi(a, b):
    assert abs(script_k_combined(0, a, b) - math.pi) < 1e-12


def test_script_k_at_minus_sum():
    for a, b in SHIFTS:
        a, b = complex(a), complex(b)
        want = 2 * residue_r(a, b) * residue_r(b, a)
        assert abs(script_k_combined(-(a + b), a, b) - want) < 1e-13


def test_script_k_quadrature_zero_shift():
    quad = 2 * (script_k_half_quadrature(0, 0, 0) + script_k_half_quadrature(0, 0, 0))
    assert abs(quad - math.pi) < 1e-6


def test_x_factors_at_zero():
    for q in (3, 10, 101, 1517):
        assert abs(x_plus(q, 0, 0) - 1) < 1e-14
        assert abs(x_minus(q, 0, 0) - 1) < 1e-14


def test_x_plus_from_functional_equation():
    a, b = 0.02 + 0.01j, -0.01
    for q in range(3, 51):
        for chi in primitive_characters(q):
            tau, tau_bar = gauss_sum(chi), gauss_sum(chi.conj())
            # X(1/2 + a, chi) is X(1 - s, chi-bar') at s = 1/2 - a with chi' = chi-bar
            xa = functional_factor(0.5 - a, tau, q, chi.parity)
            xb = functional_factor(0.5 - b, tau_bar, q, chi.parity)
            want = x_plus(q, a, b) if chi.is_even else x_minus(q, a, b)
            assert abs(xa * xb - want) < 1e-8


def test_shift_pair_guard():
    assert not ShiftPair(0.01, 0.02, 101).out_of_range
    with pytest.warns(UserWarning):
        ShiftPair(2.0, 0.0, 101).check()
    with pytest.raises(DomainError):
        ShiftPair(0.5, 0.5)


def test_hb_kernel_values():
    assert abs(hb_kernel_K(0.5) - HB_K_05) < 1e-12
    assert abs(hb_kernel_K(20) - HB_K_20) < 1e-12
    assert abs(hb_kernel_K(0.01, line=1.0) - hb_kernel_K(0.01, line=-0.5)) < 1e-10


def test_hb_residue():
    assert abs(hb_residue_closed() - cmath.exp(-0.25j * math.pi) * math.sqrt(math.pi)) < 1e-15
    assert abs(hb_residue_numeric() - hb_residue_closed()) < 1e-8


def test_hb_khat():
    assert abs(hb_khat(0.5) - HB_KHAT_HALF) < 1e-11
    # pole at 0 with the residue above
    assert abs(1e-6 * hb_khat(1e-6) - hb_residue_closed()) < 1e-5
    with pytest.raises(PoleError):
        hb_khat(0)
    with pytest.raises(DomainError):
        hb_khat(-0.75)


def test_hb_interpolant():
    start = time.perf_counter()
    interp = HBKernelInterpolant(0.1, 1e6)
    assert time.perf_counter() - start < 30
    assert interp.max_error(samples=100) < 1e-11
    x = np.array([0.3, 7.0, 123.0])
    assert np.max(np.abs(interp(x) - hb_kernel_K(x)) / np.abs(hb_kernel_K(x))) < 1e-11
