"""Closed-form right-hand sides for the moment identities.

Main terms are phi*(q)/2 (zeta_q(1+x) + X^{+-} zeta_q(1-x)) with x = a + b.
Both zeta_q factors have a pole at x = 0 that cancels because X^{+-} = 1
whenever a + b = 0, so near x = 0 the bracket is rebuilt from pieces that
are individually analytic (see :func:`main_term_limit`).

Secondary terms are sums over unitary splittings q = cd of Gauss-sum
weighted L-values of characters modulo m = min(c, d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special

from .arith import coprime_splittings, divisors, euler_phi, factorize, is_prime, mobius, phi_star
from .characters import character_group
from .exceptions import DomainError, PoleError
from .kernels import residue_r, x_minus, x_plus
from .lfunc import EULER_GAMMA, digamma_half, dirichlet_l_all, riemann_zeta, zeta_q, zeta_q_offset

ZETA_HALF = riemann_zeta(0.5).real
A_CONST = EULER_GAMMA - math.log(8 * math.pi)
B_CONST = 2 * ZETA_HALF**2
DEFAULT_EPS = 0.05
LIMIT_SWITCH = 1e-6
LIMIT_DOMAIN = 1e-3

# zeta(1+x) = 1/x + sum_n (-1)^n gamma_n x^n / n!
_STIELTJES = tuple(float(mpmath.stieltjes(n)) for n in range(4))


@dataclass(frozen=True)
class MainTermBreakdown:
    q: int
    alpha: complex
    beta: complex
    parity_class: str
    leading: complex
    secondary: complex
    error_budget: float
    D: float

    @property
    def total(self) -> complex:
        return self.leading + self.secondary


def _parity_sign(parity) -> int:
    if parity in (1, "even"):
        return 1
    if parity in (-1, "odd"):
        return -1
    raise DomainError(f"parity must be even or odd, got {parity!r}")


def prime_log_sum(q: int) -> float:
    """sum_{p | q} log p / (p - 1)."""
    return math.fsum(math.log(p) / (p - 1) for p in factorize(q).primes)


# ---- leading terms ----------------------------------------------------------


def main_term(q: int, alpha, beta, parity=1) -> complex:
    """phi*(q)/2 (zeta_q(1+a+b) + X zeta_q(1-a-b)), X = X^+ (even) or X^- (odd)."""
    a, b = complex(alpha), complex(beta)
    if abs(a + b) <= LIMIT_SWITCH:
        return main_term_limit(q, a, b, parity)
    X = x_plus(q, a, b) if _parity_sign(parity) == 1 else x_minus(q, a, b)
    x = a + b
    return phi_star(q) / 2 * (zeta_q_offset(x, q) + X * zeta_q_offset(-x, q))


def main_even(q: int, alpha, beta) -> complex:
    """Leading bracket over even primitive characters; |a+b| <= 1e-6 goes to the limit path."""
    return main_term(q, alpha, beta, 1)


def _g_prime(a: complex, sign: int) -> complex:
    """d/da of g(a) = log Gamma(1/2 - a) + log cos (or sin) (pi/2 (1/2 - a))."""
    u = np.pi / 2 * (0.5 - a)
    trig = np.tan(u) if sign == 1 else -1 / np.tan(u)
    return complex(-special.digamma(0.5 - a) + np.pi / 2 * trig)


def _g_third(a: complex, sign: int) -> complex:
    u = np.pi / 2 * (0.5 - a)
    if sign == 1:
        trig = np.tan(u) / np.cos(u) ** 2
    else:
        trig = -1 / (np.tan(u) * np.sin(u) ** 2)
    return complex(-complex(mpmath.psi(2, complex(0.5 - a))) + np.pi**3 / 4 * trig)


def _log1p(z: complex) -> complex:
    """log(1 + z) accurate for small complex z (numpy's complex log1p is not)."""
    u = 1 + z
    if u == 1:
        return z
    return np.log(u) * z / (u - 1)


def _euler_diff_over_x(q: int, x: complex) -> complex:
    """(E(x) - E(0)) / x with E(x) = prod_{p | q} (1 - p^{-1-x}), computed without cancellation."""
    if x == 0:
        return complex(sum(math.log(p) / (p - 1) for p in factorize(q).primes) * euler_phi(q) / q)
    log_ratio = 0j
    for p in factorize(q).primes:
        log_ratio += _log1p(-np.expm1(-x * math.log(p)) / (p - 1))
    return complex(euler_phi(q) / q * np.expm1(log_ratio) / x)


def _zeta_regular(x: complex) -> complex:
    """zeta(1+x) - 1/x."""
    return sum((-1) ** n * g * x**n / math.factorial(n) for n, g in enumerate(_STIELTJES))


def main_term_limit(q: int, alpha, beta, parity=1) -> complex:
    """The main-term bracket near a + b = 0, with the pole cancelled analytically.

    With x = a + b, E(x) the Euler factor of zeta_q(1+x) and X = e^{x L}:

        zeta_q(1+x) + X zeta_q(1-x)
          = [E(x) - E(0)]/x - X [E(-x) - E(0)]/x + E(0) (1 - X)/x
            + E(x) Z(x) + X E(-x) Z(-x),      Z(x) = zeta(1+x) - 1/x.

    log X = -x log(q/2pi) + g(a) - g(-b), and the difference g(a) - g(-b) is
    taken by the midpoint rule with its cubic correction,
    x g'(m) + x^3 g'''(m)/24 with m = (a-b)/2, accurate to O(x^5).  Z uses
    Stieltjes constants through gamma_3.  At a = b = 0 this is
    phi*(q)/2 (phi(q)/q)(log(q/2pi) + 2 gamma + psi(1/2) -+ pi/2 + 2 sum log p/(p-1)).
    """
    a, b = complex(alpha), complex(beta)
    x = a + b
    if abs(x) >= LIMIT_DOMAIN:
        raise DomainError("the limit path needs |alpha + beta| < 1e-3")
    sign = _parity_sign(parity)
    mid = (a - b) / 2
    L = -math.log(q / (2 * math.pi)) + _g_prime(mid, sign) + x * x / 24 * _g_third(mid, sign)
    E0 = euler_phi(q) / q
    if x == 0:
        pole = 2 * _euler_diff_over_x(q, 0) - E0 * L
        regular = 2 * E0 * EULER_GAMMA
        return phi_star(q) / 2 * (pole + regular)
    X = np.exp(x * L)
    one_minus_X_over_x = -np.expm1(x * L) / x
    pole = _euler_diff_over_x(q, x) + X * _euler_diff_over_x(q, -x) + E0 * one_minus_X_over_x
    Ex = E0 + x * _euler_diff_over_x(q, x)
    Emx = E0 - x * _euler_diff_over_x(q, -x)
    regular = Ex * _zeta_regular(x) + X * Emx * _zeta_regular(-x)
    return complex(phi_star(q) / 2 * (pole + regular))


def main_even_limit(q: int, alpha=0.0, beta=0.0) -> complex:
    return main_term_limit(q, alpha, beta, 1)


def odd_main(q: int) -> float:
    """Leading term for odd primitive characters at zero shifts (+pi/2 variant)."""
    _check_q(q)
    return main_term_limit(q, 0, 0, -1).real


def allprim_main(q: int) -> float:
    """phi*(q)(phi(q)/q)(log(q/2pi) + 2 gamma + psi(1/2) + 2 sum_{p|q} log p/(p-1))."""
    _check_q(q)
    return phi_star(q) * euler_phi(q) / q * (
        math.log(q / (2 * math.pi)) + 2 * EULER_GAMMA + digamma_half() + 2 * prime_log_sum(q)
    )


def corollary6_main(q: int) -> float:
    """Closed form of the zero-shift even leading term, written out directly."""
    _check_q(q)
    return phi_star(q) / 2 * euler_phi(q) / q * (
        math.log(q / (2 * math.pi)) + 2 * EULER_GAMMA + digamma_half() - math.pi / 2 + 2 * prime_log_sum(q)
    )


# ---- secondary terms --------------------------------------------------------


def _check_q(q: int) -> None:
    if not isinstance(q, (int, np.integer)) or q < 3:
        raise DomainError("q must be an integer >= 3")


@dataclass(frozen=True)
class _PsiData:
    """Per-character data for psi mod m, used inside sums for modulus q."""

    m: int
    parities: np.ndarray
    tau_bar: np.ndarray  # tau(psi-bar)
    exponent: int
    exps_fn: object

    def psi_bar(self, n: int) -> np.ndarray:
        """psi-bar(n) for every psi mod m (0 when gcd(n, m) > 1)."""
        if self.m == 1:
            return np.ones(1, dtype=complex)
        if math.gcd(n, self.m) > 1:
            return np.zeros(len(self.parities), dtype=complex)
        k = self.exps_fn(n % self.m)
        return np.exp(-2j * np.pi * k / self.exponent)


@lru_cache(maxsize=256)
def _psi_data(m: int) -> _PsiData:
    if m == 1:
        return _PsiData(1, np.ones(1, dtype=int), np.ones(1, dtype=complex), 1, None)
    g = character_group(m)
    tau = g.gauss_sums[g.conj_index]
    return _PsiData(m, g.parities, tau, g.exponent, g.exponents_at)


@lru_cache(maxsize=1024)
def _l_restricted_all(s: complex, m: int, q: int) -> np.ndarray:
    """L_q(s, psi) for every psi mod m (label order), m | q."""
    if m == 1:
        return np.array([zeta_q(s, q)])
    g = character_group(m)
    vals = dirichlet_l_all(s, m).copy()
    if np.allclose(s, 1):
        raise PoleError("L_q at s = 1")
    for p in factorize(q).primes:
        if m % p == 0:
            continue
        k = g.exponents_at(p % m)
        vals = vals * (1 - np.exp(2j * np.pi * k / g.exponent) * p ** (-complex(s)))
    return vals


def _splitting_terms(q: int):
    """(c, d, weight mu^2(c)/phi(c)) for unitary splittings with c squarefree."""
    for c, d in coprime_splittings(q):
        if mobius(c) == 0:
            continue
        yield c, d, 1.0 / euler_phi(c)


def secondary_even(q: int, alpha=0.0, beta=0.0) -> complex:
    """The sqrt(q)-scale term over even psi mod m = min(c, d), with psi-bar(M), M = max(c, d)."""
    _check_q(q)
    a, b = complex(alpha), complex(beta)
    ra, rb = residue_r(0, a), residue_r(0, b)
    fa = ra * (q / (2 * math.pi)) ** (0.5 - a)
    fb = rb * (q / (2 * math.pi)) ** (0.5 - b)
    total = 0j
    for c, d, w in _splitting_terms(q):
        m, M = min(c, d), max(c, d)
        pd = _psi_data(m)
        even = pd.parities == 1
        l1 = _l_restricted_all(0.5 + a, m, q) * _l_restricted_all(0.5 - b, m, q)
        l2 = _l_restricted_all(0.5 - a, m, q) * _l_restricted_all(0.5 + b, m, q)
        inner = (pd.tau_bar * pd.psi_bar(M) * (fb * l1 + fa * l2))[even]
        total += w / euler_phi(m) * np.sum(inner)
    return complex(2 * euler_phi(q) / q * total)


def corollary6_secondary(q: int) -> float:
    """2 (phi(q)/sqrt q) sum_{cd=q} mu^2(c)/phi(c) (1/phi(m)) sum^e tau(psi-bar) psi-bar(M) L_q(1/2, psi)^2."""
    _check_q(q)
    total = 0j
    for c, d, w in _splitting_terms(q):
        m, M = min(c, d), max(c, d)
        pd = _psi_data(m)
        even = pd.parities == 1
        lq = _l_restricted_all(0.5, m, q)
        total += w / euler_phi(m) * np.sum((pd.tau_bar * pd.psi_bar(M) * lq**2)[even])
    value = 2 * euler_phi(q) / math.sqrt(q) * total
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise ArithmeticError(f"secondary term not real: {value}")
    return value.real


def odd_secondary(q: int, form: str = "min") -> float:
    """Secondary term over odd psi, with the factor -i.

    ``form='min'`` (default) sums odd psi mod m = min(c, d) against
    psi-bar(-d) when c < d and psi-bar(c) when c > d; this is the odd half of
    the all-primitive secondary term.  ``form='literal'`` keeps, for every
    splitting, both the sum over odd psi mod c with psi-bar(-d) and the sum
    over odd psi mod d with psi-bar(c); it is exposed as a diagnostic.
    """
    _check_q(q)
    if form not in ("min", "literal"):
        raise DomainError(f"unknown form {form!r}")
    total = 0j
    for c, d, w in _splitting_terms(q):
        if form == "min":
            parts = [(c, -d)] if c < d else [(d, c)]
        else:
            parts = [(c, -d), (d, c)]
        for mod, arg in parts:
            pd = _psi_data(mod)
            odd = pd.parities == -1
            if not odd.any():
                continue
            lq = _l_restricted_all(0.5, mod, q)
            total += w / euler_phi(mod) * np.sum((pd.tau_bar * pd.psi_bar(arg) * lq**2)[odd])
    value = -2j * euler_phi(q) / math.sqrt(q) * total
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise ArithmeticError(f"odd secondary term not real: {value}")
    return value.real


def allprim_secondary(q: int) -> float:
    """Secondary term over all psi mod min(c, d) with weight i(psi) and the delta convention."""
    _check_q(q)
    total = 0j
    for c, d, w in _splitting_terms(q):
        m = min(c, d)
        pd = _psi_data(m)
        ipsi = np.where(pd.parities == 1, 1, -1j)
        arg = -d if c < d else c
        lq = _l_restricted_all(0.5, m, q)
        total += w / euler_phi(m) * np.sum(ipsi * pd.tau_bar * pd.psi_bar(arg) * lq**2)
    value = 2 * euler_phi(q) / math.sqrt(q) * total
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise ArithmeticError(f"secondary term not real: {value}")
    return value.real


# ---- Heath-Brown and reciprocity --------------------------------------------


def hb_main(k: float) -> float:
    """k log k + A k + B sqrt(k), A = gamma - log 8pi, B = 2 zeta(1/2)^2."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return k * math.log(k) + A_CONST * k + B_CONST * math.sqrt(k)


def thm10_rhs(p: int, h: int, s_hp: float) -> float:
    """sqrt(p/h) S(h,-p) + (p/sqrt h)(log(p/h) + A) + (B/2) sqrt(p), for primes h < p."""
    if not (is_prime(p) and is_prime(h)):
        raise DomainError("h and p must be prime")
    if not h < p:
        raise DomainError("need h < p")
    return math.sqrt(p / h) * s_hp + p / math.sqrt(h) * (math.log(p / h) + A_CONST) + B_CONST / 2 * math.sqrt(p)


def reciprocity_bound_scale(p: int, h: int) -> float:
    return h + math.log(p) + math.sqrt(p / h) * math.log(p)


# ---- error budget -----------------------------------------------------------


def error_budget(q: int, D: float | None = None, eps: float = DEFAULT_EPS) -> float:
    """Four-term error scale with unit O-constants; D defaults to sqrt(q).

    (1/q) sum_{d|q, d<=D} phi(d) d^{3/2} + sqrt(q) sum_{d|q, d>D} phi(d)/d^{3/2}
    + q^eps + q^{eps-1} D^2.
    """
    if q < 1:
        raise DomainError("q must be positive")
    D = math.sqrt(q) if D is None else float(D)
    if not 1 <= D <= q:
        raise DomainError("need 1 <= D <= q")
    small = math.fsum(euler_phi(d) * d**1.5 for d in divisors(q) if d <= D) / q
    large = math.sqrt(q) * math.fsum(euler_phi(d) / d**1.5 for d in divisors(q) if d > D)
    return small + large + q**eps + q ** (eps - 1) * D * D


def refined_error_scale(q: int, eps: float = DEFAULT_EPS) -> float:
    """(1 + #{d | q : q^{1/2-eps} < d < q^{1/2+eps}}) q^{1/4}."""
    lo, hi = q ** (0.5 - eps), q ** (0.5 + eps)
    return (1 + sum(1 for d in divisors(q) if lo < d < hi)) * q**0.25


def breakdown(q: int, alpha=0.0, beta=0.0, parity_class: str = "even", D: float | None = None) -> MainTermBreakdown:
    """Main and secondary terms for one modulus; odd and all-primitive need zero shifts."""
    _check_q(q)
    a, b = complex(alpha), complex(beta)
    Dv = math.sqrt(q) if D is None else float(D)
    budget = error_budget(q, Dv)
    if parity_class == "even":
        lead, sec = main_even(q, a, b), secondary_even(q, a, b)
    elif a != 0 or b != 0:
        raise DomainError(f"{parity_class} main terms are implemented at zero shifts only")
    elif parity_class == "odd":
        lead, sec = complex(odd_main(q)), complex(odd_secondary(q))
    elif parity_class == "all-primitive":
        lead, sec = complex(allprim_main(q)), complex(allprim_secondary(q))
    else:
        raise DomainError(f"unknown parity class {parity_class!r}")
    return MainTermBreakdown(q, a, b, parity_class, complex(lead), complex(sec), budget, Dv)
