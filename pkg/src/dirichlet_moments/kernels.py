"""Mellin kernels behind the shifted second moment.

All inverse Mellin integrals are computed on a vertical line Re s = c by
the composite trapezoid rule in t = Im s.  The integrands carry a factor
e^{s^2}, so the rule converges spectrally; the truncation |t| <= 12 is set
by the e^{-t^2 + 2 pi |t|} envelope (the two cosine factors grow like
e^{2 pi |t|}), which is below 1e-30 there.

Lines left of 0 pick up the residue at s = 0 explicitly; K-hat has no other
singularity, since the Gamma poles are cancelled by zeros of the cosine
factor.  Internally that cancellation is built in through

    cos(pi (s - beta)) Gamma(w) cos(pi w / 2) = pi cos(pi w / 2) / Gamma(1 - w),
    w = s + 1/2 - beta,

which is entire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
import warnings

import numpy as np
from scipy import special

from .exceptions import DomainError, NumericalError, PoleError

TRUNCATION = 12.0
STEP = 0.005


@dataclass(frozen=True)
class ShiftPair:
    alpha: complex
    beta: complex
    modulus_hint: int = 3

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        for x in (1, -1):
            if abs(self.alpha + self.beta - x) < 1e-12:
                raise DomainError("alpha + beta must stay away from +-1")

    @property
    def guard(self) -> float:
        return 5 / math.log(max(self.modulus_hint, 3))

    @property
    def out_of_range(self) -> bool:
        """True when |alpha| or |beta| exceeds 5/log(max(q, 3)) (soft guard)."""
        return abs(self.alpha) > self.guard or abs(self.beta) > self.guard

    def swapped(self) -> ShiftPair:
        return ShiftPair(self.beta, self.alpha, self.modulus_hint)

    def check(self) -> ShiftPair:
        if self.out_of_range:
            warnings.warn(
                f"shifts ({self.alpha}, {self.beta}) exceed the 1/log q guard for q={self.modulus_hint}",
                stacklevel=2,
            )
        return self


def _cpx(z):
    return np.asarray(z, dtype=complex)


def f_factor(s, alpha, beta):
    """F(s, a, b) = (e^{s^2}/s) cos(pi(s+a))/cos(pi a) * cos(pi(s-b))/cos(pi b)."""
    s = _cpx(s)
    if np.any(s == 0):
        raise PoleError("F has a pole at s = 0")
    return (
        np.exp(s * s) / s
        * np.cos(np.pi * (s + alpha)) / np.cos(np.pi * alpha)
        * np.cos(np.pi * (s - beta)) / np.cos(np.pi * beta)
    )


def _khat_entire_part(s, alpha, beta):
    """s * K-hat(s): entire."""
    w = s + 0.5 - beta
    return (
        np.exp(s * s)
        * np.cos(np.pi * (s + alpha)) / (np.cos(np.pi * alpha) * np.cos(np.pi * beta))
        * np.pi * np.cos(np.pi * w / 2) * special.rgamma(1 - w)
    )


def khat(s, alpha=0.0, beta=0.0):
    """K-hat_{a,b}(s) = F(s,a,b) Gamma(s+1/2-b) cos(pi/2 (s+1/2-b))."""
    s = _cpx(s)
    if np.any(s == 0):
        raise PoleError("K-hat has a pole at s = 0")
    out = _khat_entire_part(s, complex(alpha), complex(beta)) / s
    return out if out.ndim else complex(out)


def residue_r(alpha, beta) -> complex:
    """r_{a,b} = Gamma(1/2 - b) cos(pi/2 (1/2 - b)), the residue of K-hat at 0."""
    b = complex(beta)
    return complex(special.gamma(0.5 - b) * np.cos(np.pi / 2 * (0.5 - b)))


@lru_cache(maxsize=64)
def _line_grid(c: float, T: float, h: float):
    n = int(round(T / h))
    t = np.arange(-n, n + 1) * h
    w = np.full(t.size, h)
    w[0] = w[-1] = h / 2
    return c + 1j * t, w


def _inverse_mellin(values_on_line, s_line, weights, x, chunk=256):
    """(1/2 pi i) int g(s) x^{-s} ds along the line, for each x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.size, dtype=complex)
    logs = np.log(x)
    vw = values_on_line * weights
    for start in range(0, x.size, chunk):
        lx = logs[start : start + chunk]
        out[start : start + chunk] = np.exp(-np.outer(lx, s_line)) @ vw
    return out / (2 * np.pi)


def _default_lines(x: np.ndarray) -> np.ndarray:
    """Contour abscissa per x: -1/2 below x = 1/2, else near the saddle of e^{s^2} x^{-s}."""
    c = np.clip(np.round(np.log(np.maximum(x, 1.0)) / 2), 1.0, 8.0)
    return np.where(x < 0.5, -0.5, c)


def _contour_eval(x: np.ndarray, line, entire_part, residue: complex, T: float, h: float) -> np.ndarray:
    """(1/2 pi i) int entire_part(s)/s x^{-s} ds, with the residue added on lines left of 0."""
    lines = _default_lines(x) if line is None else np.full(x.shape, float(line))
    if np.any(lines == 0):
        raise DomainError("the contour must avoid the pole at s = 0")
    out = np.empty(x.size, dtype=complex)
    for c in np.unique(lines):
        sel = lines == c
        s_line, w = _line_grid(float(c), T, h)
        out[sel] = _inverse_mellin(entire_part(s_line) / s_line, s_line, w, x[sel])
        if c < 0:
            out[sel] += residue
    return out


def kernel_K(x, alpha=0.0, beta=0.0, line=None, T: float = TRUNCATION, h: float = STEP):
    """K_{a,b}(x) = x^{b-1/2} (1/2 pi i) int K-hat(s) x^{-s} ds.

    ``line`` selects Re s of the contour; for negative lines the residue at
    s = 0 is added back.  By default x < 1/2 uses Re s = -1/2 and larger x a
    line near the saddle point (log x)/2, which keeps relative accuracy for
    large x.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    if np.any(x <= 0):
        raise DomainError("kernel_K requires x > 0")
    alpha, beta = complex(alpha), complex(beta)
    flat = x.reshape(-1)
    out = _contour_eval(
        flat, line, lambda s: _khat_entire_part(s, alpha, beta), residue_r(alpha, beta), T, h
    )
    out = out * flat ** (beta - 0.5)
    return complex(out[0]) if scalar else out.reshape(x.shape)


def kernel_K_remainder(x, alpha=0.0, beta=0.0, T: float = TRUNCATION, h: float = STEP):
    """K(x) - r x^{b-1/2}, computed on Re s = -1/2 without subtraction."""
    x = np.asarray(x, dtype=float)
    s_line, w = _line_grid(-0.5, T, h)
    vals = _khat_entire_part(s_line, complex(alpha), complex(beta)) / s_line
    return _inverse_mellin(vals, s_line, w, x.reshape(-1)).reshape(x.shape) * x ** (complex(beta) - 0.5)


def script_k_combined(delta, alpha, beta) -> complex:
    """Closed form of calK_{a,b}(1+d) + calK_{b,a}(1+d).

    2 Gamma(1/2-b) cos(pi/2 (1/2-b)) Gamma(1/2+b+d) sin(pi/2 (1/2-b-d)).
    The identity holds for d = 0 and d = -a-b, the two values where the
    Mellin integrand is odd under (s, a, b) -> (-s, b, a); for other d this
    is only the right-hand side.
    """
    d, b = complex(delta), complex(beta)
    arg = 0.5 + b + d
    if arg.imag == 0 and arg.real <= 0 and arg.real == int(arg.real):
        raise PoleError("Gamma(1/2 + beta + delta) at a pole")
    return complex(
        2 * residue_r(alpha, beta) * special.gamma(arg) * np.sin(np.pi / 2 * (0.5 - b - d))
    )


def _gauss_legendre_panels(a, b, panels, order=20):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[1:] + edges[:-1]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def _half_line_nodes(y_max: float = 60.0):
    """Quadrature on (0, y_max]: log-spaced on (0, 1], panels beyond."""
    v, wv = _gauss_legendre_panels(0.0, 40.0, 40)
    y0 = np.exp(-v)
    y1, w1 = _gauss_legendre_panels(1.0, y_max, 60)
    return np.concatenate([y0, y1]), np.concatenate([wv * y0, w1])


def _rotated_remainder(y, alpha, beta, direction: int, T: float = TRUNCATION, h: float = STEP):
    """K(x) - r x^{b-1/2} at x = direction * i * y (direction = +1 or -1)."""
    s_line, w = _line_grid(-0.5, T, h)
    vals = _khat_entire_part(s_line, alpha, beta) / s_line * w
    theta = direction * np.pi / 2
    y = np.asarray(y, dtype=float)
    out = np.empty(y.size, dtype=complex)
    for start in range(0, y.size, 256):
        ly = np.log(y[start : start + 256])
        expo = -np.outer(ly + 1j * theta, s_line)
        out[start : start + 256] = np.exp(expo) @ vals
    out /= 2 * np.pi
    return out * np.exp((beta - 0.5) * (np.log(y) + 1j * theta))


def script_k_half_quadrature(delta, alpha, beta) -> complex:
    """(1/2) calK_{a,b}(1+d) = int_0^inf K_{a,b}(x) x^d cos x dx, numerically.

    K is split as r x^{b-1/2} + R(x).  The first piece is the Mellin
    transform of cos, Gamma(u) cos(pi u/2) with u = b + d + 1/2.  For R the
    x-contour is rotated onto the imaginary axis (K continues analytically
    to the right half-plane), turning e^{+-ix} into e^{-y}; R(+-iy) comes
    from the inverse Mellin integral on Re s = -1/2.
    """
    d, a, b = complex(delta), complex(alpha), complex(beta)
    u = b + d + 0.5
    if not 0 < u.real < 1:
        raise DomainError("requires 0 < Re(beta + delta + 1/2) < 1")
    head = residue_r(a, b) * special.gamma(u) * np.cos(np.pi * u / 2)
    y, wy = _half_line_nodes()
    total = 0j
    for direction in (1, -1):
        rem = _rotated_remainder(y, a, b, direction)
        phase = np.exp(1j * direction * np.pi / 2 * (1 + d))
        total += phase * np.sum(wy * rem * y**d * np.exp(-y))
    return complex(head + total / 2)


def x_plus(q, alpha, beta) -> complex:
    """(4/q)(q/2pi)^{1-a-b} Gamma(1/2-a)Gamma(1/2-b) cos(pi/2(1/2-a)) cos(pi/2(1/2-b))."""
    a, b = complex(alpha), complex(beta)
    return complex(
        4 / q * (q / (2 * np.pi)) ** (1 - a - b)
        * special.gamma(0.5 - a) * special.gamma(0.5 - b)
        * np.cos(np.pi / 2 * (0.5 - a)) * np.cos(np.pi / 2 * (0.5 - b))
    )


def x_minus(q, alpha, beta) -> complex:
    """As :func:`x_plus` with sines in place of the cosines (odd characters)."""
    a, b = complex(alpha), complex(beta)
    return complex(
        4 / q * (q / (2 * np.pi)) ** (1 - a - b)
        * special.gamma(0.5 - a) * special.gamma(0.5 - b)
        * np.sin(np.pi / 2 * (0.5 - a)) * np.sin(np.pi / 2 * (0.5 - b))
    )


def functional_factor(s, chi_bar_gauss: complex, q: int, parity: int) -> complex:
    """X(1-s, chi-bar) = tau(chi-bar) q^{s-1} (2pi)^{-s} Gamma(s) (e^{-pi i s/2} + chi(-1) e^{pi i s/2})."""
    s = complex(s)
    return complex(
        chi_bar_gauss * q ** (s - 1) * (2 * np.pi) ** (-s) * special.gamma(s)
        * (np.exp(-0.5j * np.pi * s) + parity * np.exp(0.5j * np.pi * s))
    )


# ---- the kernel from the all-characters moment ---------------------------


def _hb_entire_part(s):
    """s * Gamma(s+1/2) e^{-i pi s/2} F(s), F(s) = e^{s^2} cos(pi s)/s.

    Gamma(w) sin(pi w) = pi / Gamma(1 - w) with w = s + 1/2.
    """
    return np.exp(s * s) * np.exp(-0.5j * np.pi * s) * np.pi * special.rgamma(0.5 - s)


def hb_integrand(s):
    s = _cpx(s)
    if np.any(s == 0):
        raise PoleError("pole at s = 0")
    return _hb_entire_part(s) / s


def hb_kernel_K(x, line=None, T: float = TRUNCATION, h: float = STEP):
    """K(x) = e^{ix - i pi/4} (1/2 pi i) int Gamma(s+1/2) e^{-i pi s/2} F(s) x^{-s} ds.

    Contour choice as in :func:`kernel_K`.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    if np.any(x <= 0):
        raise DomainError("hb_kernel_K requires x > 0")
    flat = x.reshape(-1)
    g = _contour_eval(flat, line, _hb_entire_part, math.sqrt(math.pi), T, h)
    out = np.exp(1j * (flat - np.pi / 4)) * g
    return complex(out[0]) if scalar else out.reshape(x.shape)


def hb_residue_closed() -> complex:
    """e^{-i pi/4} Gamma(1/2)."""
    return complex(np.exp(-0.25j * np.pi) * math.sqrt(math.pi))


def hb_residue_numeric(x: float = 1e-6, line: float = 0.25) -> complex:
    """Residue of K-hat at 0 read off as lim_{x -> 0} K(x), with a contour right of 0.

    A Mellin pole at s = 0 corresponds to the constant term of K near 0, so
    no residue is assumed by this route.
    """
    return complex(hb_kernel_K(x, line=line) * np.exp(-1j * x))


def _hb_rotated_remainder(y, T: float = TRUNCATION, h: float = STEP):
    """G(iy) - sqrt(pi), where K(x) = e^{ix - i pi/4} G(x), on Re s = -1/2."""
    s_line, w = _line_grid(-0.5, T, h)
    vals = _hb_entire_part(s_line) / s_line * w
    y = np.asarray(y, dtype=float)
    out = np.empty(y.size, dtype=complex)
    for start in range(0, y.size, 256):
        ly = np.log(y[start : start + 256])
        out[start : start + 256] = np.exp(-np.outer(ly + 0.5j * np.pi, s_line)) @ vals
    return out / (2 * np.pi)


def hb_khat(s) -> complex:
    """Mellin transform int_0^inf K(x) x^{s-1} dx, continued to Re s > -1/2.

    With x = iy the factor e^{ix} becomes e^{-y}:
    K-hat(s) = e^{-i pi/4} i^s [sqrt(pi) Gamma(s) + int_0^inf e^{-y} (G(iy) - sqrt(pi)) y^{s-1} dy].
    The Gamma term carries the pole at 0.
    """
    s = complex(s)
    if s == 0:
        raise PoleError("K-hat has a pole at s = 0")
    if s.real <= -0.5:
        raise DomainError("hb_khat is continued only to Re s > -1/2")
    y, wy = _half_line_nodes()
    rem = _hb_rotated_remainder(y)
    body = np.sum(wy * np.exp(-y) * rem * y ** (s - 1))
    head = math.sqrt(math.pi) * special.gamma(s)
    return complex(np.exp(-0.25j * np.pi) * np.exp(0.5j * np.pi * s) * (head + body))


class HBKernelInterpolant:
    """Piecewise Chebyshev model of K(x) on [x_min, x_max] for bulk sums.

    K(x) = e^{ix - i pi/4} G(x) with G smooth and non-oscillatory in log x,
    so G is interpolated on panels of width ``panel`` in u = log x.  Each
    panel's error scales with the size of G there, which keeps the relative
    accuracy in the far tail.  :meth:`max_error` measures the model against
    direct contour evaluation.
    """

    def __init__(self, x_min: float, x_max: float, panel: float = 1.0, degree: int = 40):
        if not 0 < x_min < x_max:
            raise DomainError("need 0 < x_min < x_max")
        self.lo, self.hi = math.log(x_min), math.log(x_max)
        n = max(1, math.ceil((self.hi - self.lo) / panel))
        self.edges = np.linspace(self.lo, self.hi, n + 1)
        self.degree = degree
        nodes = np.polynomial.chebyshev.chebpts1(degree + 1)
        coeffs = []
        for a, b in zip(self.edges[:-1], self.edges[1:]):
            g = self._direct_G(np.exp(a + (nodes + 1) * (b - a) / 2))
            cr = np.polynomial.chebyshev.chebfit(nodes, g.real, degree)
            ci = np.polynomial.chebyshev.chebfit(nodes, g.imag, degree)
            coeffs.append(cr + 1j * ci)
        self.coeffs = np.array(coeffs)

    @staticmethod
    def _direct_G(x):
        return hb_kernel_K(x) * np.exp(-1j * (x - np.pi / 4))

    def G(self, x) -> np.ndarray:
        u = np.log(np.atleast_1d(np.asarray(x, dtype=float)))
        if np.any(u < self.lo - 1e-12) or np.any(u > self.hi + 1e-12):
            raise DomainError("x outside the interpolation range")
        idx = np.clip(np.searchsorted(self.edges, u, side="right") - 1, 0, len(self.coeffs) - 1)
        a, b = self.edges[idx], self.edges[idx + 1]
        z = 2 * (u - a) / (b - a) - 1
        # Clenshaw, vectorised across panels
        c = self.coeffs[idx]
        b1 = np.zeros(u.size, dtype=complex)
        b2 = np.zeros(u.size, dtype=complex)
        for k in range(self.degree, 0, -1):
            b1, b2 = 2 * z * b1 - b2 + c[:, k], b1
        return z * b1 - b2 + c[:, 0]

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.exp(1j * (x - np.pi / 4)) * self.G(x)

    def max_error(self, samples: int = 200, seed: int = 0) -> float:
        """Largest |model - direct| relative to max(|G|, 1e-300) on random points."""
        u = np.random.default_rng(seed).uniform(self.lo, self.hi, samples)
        x = np.exp(u)
        ref = self._direct_G(x)
        return float(np.max(np.abs(self.G(x) - ref) / np.maximum(np.abs(ref), 1e-300)))


def quadrature_stability(x, alpha=0.0, beta=0.0) -> float:
    """Change in kernel_K when the step is halved and the window widened."""
    base = kernel_K(x, alpha, beta)
    fine = kernel_K(x, alpha, beta, T=TRUNCATION + 2, h=STEP / 2)
    delta = np.max(np.abs(np.asarray(base) - np.asarray(fine)))
    if not np.isfinite(delta):
        raise NumericalError("kernel quadrature produced non-finite values")
    return float(delta)
