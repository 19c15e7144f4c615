"""Second moments of Dirichlet L-functions by direct summation over characters.

Every character sum here is evaluated the same way: one Hurwitz vector per
(s, q), pushed through the character-group DFT to give L(s, chi) for all chi
mod q at once.  Sums over characters use numpy's pairwise summation in label
order, so values do not depend on how work was distributed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import divisors, euler_phi, is_prime, mobius
from .characters import character_group
from .exceptions import DomainError, NumericalError
from .kernels import HBKernelInterpolant, ShiftPair, hb_kernel_K
from .lfunc import DEFAULT_SETTINGS, EvalSettings, dirichlet_l_all

PARITY_CLASSES = ("even", "odd", "all-primitive", "all-characters")
L_VALUE_BUDGET = 1e-12  # per L-value, times q


@dataclass(frozen=True)
class MomentValue:
    q: int
    alpha: complex
    beta: complex
    parity_class: str
    value: complex
    character_count: int
    est_numeric_error: float

    def __post_init__(self):
        if self.parity_class not in PARITY_CLASSES:
            raise DomainError(f"unknown parity class {self.parity_class!r}")


def _error_estimate(q: int, count: int) -> float:
    return 2.0 * count * q * L_VALUE_BUDGET


def _l_pair(q: int, alpha: complex, beta: complex, settings: EvalSettings):
    """(L(1/2+a, chi), L(1/2+b, chi-bar)) for every chi mod q, label order."""
    g = character_group(q)
    la = dirichlet_l_all(0.5 + alpha, q, settings)
    lb = la if beta == alpha else dirichlet_l_all(0.5 + beta, q, settings)
    return la, lb[g.conj_index]


def _class_mask(q: int, parity_class: str) -> np.ndarray:
    g = character_group(q)
    if parity_class == "all-characters":
        return np.ones(len(g), dtype=bool)
    mask = g.primitive_mask.copy()
    if parity_class == "even":
        mask &= g.parities == 1
    elif parity_class == "odd":
        mask &= g.parities == -1
    return mask


def _primitive_moment(q, alpha, beta, parity_class, settings) -> MomentValue:
    if not isinstance(q, (int, np.integer)) or q < 3:
        raise DomainError("primitive moments need q >= 3")
    q = int(q)
    shifts = ShiftPair(alpha, beta, q).check()
    a, b = shifts.alpha, shifts.beta
    la, lb = _l_pair(q, a, b, settings)
    mask = _class_mask(q, parity_class)
    count = int(mask.sum())
    value = complex(np.sum(la[mask] * lb[mask]))
    return MomentValue(q, a, b, parity_class, value, count, _error_estimate(q, count))


def moment_even(q: int, alpha=0.0, beta=0.0, settings: EvalSettings = DEFAULT_SETTINGS) -> MomentValue:
    """sum over even primitive chi mod q of L(1/2+a, chi) L(1/2+b, chi-bar)."""
    return _primitive_moment(q, alpha, beta, "even", settings)


def moment_odd(q: int, alpha=0.0, beta=0.0, settings: EvalSettings = DEFAULT_SETTINGS) -> MomentValue:
    return _primitive_moment(q, alpha, beta, "odd", settings)


def moment_all_primitive(q: int, alpha=0.0, beta=0.0, settings: EvalSettings = DEFAULT_SETTINGS) -> MomentValue:
    return _primitive_moment(q, alpha, beta, "all-primitive", settings)


def moment(q: int, alpha=0.0, beta=0.0, parity_class: str = "even", settings: EvalSettings = DEFAULT_SETTINGS) -> MomentValue:
    """Dispatch on ``parity_class``; 'all-characters' requires zero shifts."""
    if parity_class == "all-characters":
        if alpha != 0 or beta != 0:
            raise DomainError("the all-characters moment is defined at zero shifts only")
        return moment_all_characters(q, settings)
    if parity_class not in PARITY_CLASSES:
        raise DomainError(f"unknown parity class {parity_class!r}")
    return _primitive_moment(q, alpha, beta, parity_class, settings)


@lru_cache(maxsize=4096)
def _all_characters_value(q: int, settings: EvalSettings) -> float:
    la = dirichlet_l_all(0.5, q, settings)
    return float(np.sum(np.abs(la) ** 2))


def moment_all_characters(q: int, settings: EvalSettings = DEFAULT_SETTINGS) -> MomentValue:
    """sum over every chi mod q (principal included) of |L(1/2, chi)|^2.

    q = 1 gives zeta(1/2)^2 and q = 2 the principal value
    zeta(1/2)^2 (1 - 2^{-1/2})^2, so divisor sums over k | q are total.
    """
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise DomainError("q must be a positive integer")
    q = int(q)
    count = euler_phi(q)
    return MomentValue(q, 0j, 0j, "all-characters", complex(_all_characters_value(q, settings)), count, _error_estimate(q, count))


def t_recover(k: int, settings: EvalSettings = DEFAULT_SETTINGS) -> float:
    """T(k) = sum_{d | k} (d / phi(d)) * moment_all_characters(d)."""
    if k < 1:
        raise DomainError("k must be positive")
    return math.fsum(d / euler_phi(d) * _all_characters_value(d, settings) for d in divisors(k))


def t_from_moments(q: int, settings: EvalSettings = DEFAULT_SETTINGS) -> float:
    """(phi(q)/q) sum_{k | q} mu(q/k) T(k): should give back the all-characters moment."""
    return euler_phi(q) / q * math.fsum(mobius(q // k) * t_recover(k, settings) for k in divisors(q))


# ---- series route to T(k) ---------------------------------------------------

SERIES_X_MIN = 1e-3
SERIES_X_MAX = 1e8
DEFAULT_TAIL_TOL = 1e-8


@lru_cache(maxsize=1)
def _series_interpolant() -> HBKernelInterpolant:
    return HBKernelInterpolant(SERIES_X_MIN, SERIES_X_MAX)


def divisor_counts(n_max: int) -> np.ndarray:
    """d(n) for 0 <= n <= n_max (d(0) = 0), by counting pairs i < j with i*j = n."""
    d = np.zeros(n_max + 1, dtype=np.int64)
    for i in range(1, math.isqrt(n_max) + 1):
        d[i * i] += 1
        d[i * (i + 1) :: i] += 2
    return d


def _series_kernel(x: np.ndarray) -> np.ndarray:
    interp = _series_interpolant()
    out = np.empty(x.size, dtype=complex)
    small = x < SERIES_X_MIN
    if np.any(small):
        out[small] = hb_kernel_K(x[small])
    if np.any(~small):
        out[~small] = interp(x[~small])
    return out


def series_tail_estimate(k: int, cutoff: float) -> float:
    """Estimate of 4 sqrt(k/2pi) sum_{2 pi n/k > cutoff} d(n)/sqrt(n) |K(2 pi n/k)|.

    |K| decreases for x > 1, so each dyadic block (X, 2X] is bounded by
    |K(X)| times the block's mean divisor mass; a factor 2 covers the
    fluctuation of d(n) about log n + 2 gamma - 1.
    """
    if cutoff < 1:
        raise DomainError("tail estimate needs cutoff >= 1")
    scale = k / (2 * math.pi)
    total = 0.0
    X = float(cutoff)
    for _ in range(80):
        N = X * scale
        mass = (math.log(2 * N + 1) + 2 * np.euler_gamma) * 2 * (math.sqrt(2) - 1) * math.sqrt(N)
        block = 2 * mass * abs(complex(hb_kernel_K(X)))
        total += block
        if block < 1e-30 or (total > 0 and block < 1e-6 * total):
            break
        X *= 2
    return 4 * math.sqrt(scale) * total


@dataclass(frozen=True)
class SeriesValue:
    k: int
    value: float
    cutoff: float
    terms: int
    tail_estimate: float


def t_series(k: int, cutoff: float | None = None, tail_tol: float = DEFAULT_TAIL_TOL) -> SeriesValue:
    """T(k) = 4 sqrt(k/2pi) Re sum_n d(n)/sqrt(n) K(2 pi n/k), truncated at 2 pi n/k <= cutoff.

    With ``cutoff=None`` the cutoff starts at 10^3 and doubles until the
    tail estimate is below ``tail_tol``.  An explicit cutoff whose tail
    cannot be certified raises :class:`NumericalError`.
    """
    if k < 1:
        raise DomainError("k must be positive")
    if cutoff is None:
        cutoff = 1e3
        while series_tail_estimate(k, cutoff) >= tail_tol:
            cutoff *= 2
            if cutoff > SERIES_X_MAX:
                raise NumericalError("series tail did not fall below the tolerance")
    elif cutoff > SERIES_X_MAX:
        raise DomainError(f"cutoff above the kernel model range {SERIES_X_MAX:g}")
    tail = series_tail_estimate(k, cutoff)
    if tail >= tail_tol:
        raise NumericalError(f"cutoff {cutoff:g} leaves a tail estimate {tail:.3g} >= {tail_tol:g}")
    n_max = int(math.floor(cutoff * k / (2 * math.pi)))
    d = divisor_counts(n_max)
    partial = 0.0
    for start in range(1, n_max + 1, 1 << 18):
        n = np.arange(start, min(n_max, start + (1 << 18) - 1) + 1)
        kern = _series_kernel(2 * math.pi * n / k)
        partial += float(np.sum(d[n] / np.sqrt(n) * kern.real))
    value = 4 * math.sqrt(k / (2 * math.pi)) * partial
    return SeriesValue(k, value, float(cutoff), n_max, tail)


# ---- twisted moments ----------------------------------------------------------


def twisted_moment(p: int, h: int, settings: EvalSettings = DEFAULT_SETTINGS) -> float:
    """S(p, h) = sum over primitive chi mod p of |L(1/2, chi)|^2 chi(h), p prime.

    Negative h is handled as chi(-1) chi(|h|).  The sum is real (pair chi
    with chi-bar); the imaginary part is checked and dropped.
    """
    if not is_prime(p):
        raise DomainError(f"p = {p} must be prime")
    if h == 0 or h % p == 0:
        raise DomainError("h must be coprime to p")
    g = character_group(p)
    la = dirichlet_l_all(0.5, p, settings)
    mask = g.primitive_mask
    k = g.exponents_at(abs(h) % p)
    chi_h = np.exp(2j * np.pi * k / g.exponent)
    if h < 0:
        chi_h = chi_h * g.parities
    total = complex(np.sum((np.abs(la) ** 2 * chi_h)[mask]))
    if abs(total.imag) > 1e-9:
        raise NumericalError(f"S({p},{h}) has imaginary part {total.imag:.3g}")
    return total.real
