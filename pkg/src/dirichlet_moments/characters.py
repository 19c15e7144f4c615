"""Dirichlet character groups built from the CRT decomposition of (Z/qZ)*.

Characters carry exact root-of-unity exponents: ``chi(a) = exp(2 pi i k / N)``
where ``N`` is the exponent of the group and ``k`` an integer.  Complex values
are only materialized on demand.

Characters are enumerated in lexicographic order of their label vectors,
which is also the C-order flattening of the multi-dimensional FFT used by
:meth:`CharacterGroup.transform`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd, lcm, prod

import numpy as np

from .arith import divisors, euler_phi, factorize, mobius, mod_inverse
from .exceptions import DomainError


def primitive_root(p: int) -> int:
    """Smallest primitive root modulo an odd prime ``p``."""
    if p == 2:
        return 1
    qs = factorize(p - 1).primes
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in qs):
            return g
    raise DomainError(f"no primitive root found mod {p}")


@dataclass(frozen=True)
class CyclicComponent:
    prime: int
    modulus: int  # the prime power p^e this component lives in
    generator: int
    order: int


def _local_structure(p: int, e: int):
    """Cyclic components of (Z/p^e)* and the local log table.

    Returns ``(components, logs)`` where ``logs`` has shape (p^e, ncomp) and
    rows for non-units are -1.
    """
    P = p**e
    if p == 2:
        if e == 1:
            return [], np.zeros((P, 0), dtype=np.int64)
        logs = np.full((P, 1 if e == 2 else 2), -1, dtype=np.int64)
        if e == 2:
            logs[1] = [0]
            logs[3] = [1]
            return [CyclicComponent(2, 4, 3, 2)], logs
        order5 = P // 4
        x = 1
        for j in range(order5):
            logs[x] = [0, j]
            logs[P - x] = [1, j]
            x = x * 5 % P
        return [CyclicComponent(2, P, P - 1, 2), CyclicComponent(2, P, 5, order5)], logs
    g = primitive_root(p)
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    order = P // p * (p - 1)
    logs = np.full((P, 1), -1, dtype=np.int64)
    x = 1
    for j in range(order):
        logs[x, 0] = j
        x = x * g % P
    return [CyclicComponent(p, P, g, order)], logs


class CharacterGroup:
    """The dual group of (Z/qZ)*.  Immutable after construction."""

    def __init__(self, q: int):
        if not isinstance(q, int) or q < 1:
            raise DomainError(f"modulus must be a positive integer, got {q!r}")
        self.q = q
        self.factorization = factorize(q)
        comps: list[CyclicComponent] = []
        cols = []
        # index ranges of the components belonging to each prime power
        self._prime_slices: list[tuple[int, int, slice]] = []
        residues = np.arange(q)
        for p, e in self.factorization.factors:
            local_comps, local_logs = _local_structure(p, e)
            start = len(comps)
            comps.extend(local_comps)
            self._prime_slices.append((p, p**e, slice(start, len(comps))))
            if local_comps:
                cols.append(local_logs[residues % p**e])
        self.components: tuple[CyclicComponent, ...] = tuple(comps)
        self.orders: tuple[int, ...] = tuple(c.order for c in comps)
        self.exponent = lcm(*self.orders) if self.orders else 1
        self.units = np.array([gcd(a, q) == 1 for a in range(q)], dtype=bool)
        if cols:
            log_table = np.concatenate(cols, axis=1)
        else:
            log_table = np.zeros((q, 0), dtype=np.int64)
        log_table[~self.units] = -1
        self.log_table = log_table
        self.log_table.setflags(write=False)
        self.units.setflags(write=False)
        # weights turning a log vector into an exponent mod N
        self._scale = np.array([self.exponent // n for n in self.orders], dtype=np.int64)

    def __repr__(self):
        return f"CharacterGroup(q={self.q}, orders={self.orders})"

    def __len__(self):
        return prod(self.orders)

    @property
    def order(self) -> int:
        return prod(self.orders)

    # ---- group elements -------------------------------------------------
    def log(self, a: int) -> tuple[int, ...]:
        a %= self.q
        if not self.units[a]:
            raise DomainError(f"{a} is not a unit mod {self.q}")
        return tuple(int(x) for x in self.log_table[a])

    def element(self, logvec) -> int:
        """Residue mod q with the given log vector (inverse of :meth:`log`)."""
        residues, moduli = [], []
        for p, P, sl in self._prime_slices:
            x = 1
            for comp, k in zip(self.components[sl], list(logvec)[sl]):
                x = x * pow(comp.generator, int(k), P) % P
            residues.append(x)
            moduli.append(P)
        a = 0
        for r, P in zip(residues, moduli):
            M = self.q // P
            a += r * M * mod_inverse(M % P, P)
        return a % self.q

    # ---- enumeration ----------------------------------------------------
    @cached_property
    def labels(self) -> np.ndarray:
        """All label vectors, shape (phi(q), r), lexicographic order."""
        if not self.orders:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.orders).reshape(len(self.orders), -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)

    def index_of(self, label) -> int:
        if not self.orders:
            return 0
        return int(np.ravel_multi_index(tuple(int(k) for k in label), self.orders))

    @cached_property
    def conj_index(self) -> np.ndarray:
        """Index of the conjugate character, for every character."""
        if not self.orders:
            return np.zeros(1, dtype=np.int64)
        neg = (-self.labels) % np.array(self.orders)
        return np.ravel_multi_index(tuple(neg.T), self.orders)

    def character(self, label) -> DirichletCharacter:
        if len(label) != len(self.orders):
            raise DomainError("label length does not match the number of components")
        label = tuple(int(k) % n for k, n in zip(label, self.orders))
        return DirichletCharacter(self, label)

    def __iter__(self):
        for row in self.labels:
            yield DirichletCharacter(self, tuple(int(k) for k in row))

    def principal(self) -> DirichletCharacter:
        return DirichletCharacter(self, (0,) * len(self.orders))

    # ---- bulk classification --------------------------------------------
    def exponents_at(self, a: int) -> np.ndarray:
        """Exponent k (mod N) of chi(a) for every character, in label order."""
        lv = np.array(self.log(a), dtype=np.int64)
        return (self.labels @ (lv * self._scale)) % self.exponent

    @cached_property
    def parities(self) -> np.ndarray:
        """chi(-1) in {+1, -1} for every character."""
        k = self.exponents_at(self.q - 1) if self.q > 1 else np.zeros(1, dtype=np.int64)
        return np.where(k == 0, 1, -1)

    @cached_property
    def conductors(self) -> np.ndarray:
        cond = np.ones(len(self), dtype=np.int64)
        for p, P, sl in self._prime_slices:
            n = sl.stop - sl.start
            if n == 0:
                continue
            local_orders = self.orders[sl]
            table = _local_conductor_table(p, P)
            idx = np.ravel_multi_index(tuple(self.labels[:, sl].T), local_orders)
            cond *= table.reshape(-1)[idx]
        return cond

    @cached_property
    def primitive_mask(self) -> np.ndarray:
        return self.conductors == self.q

    def exponent_matrix(self, rows=None) -> np.ndarray:
        """Exponents of chi(a) for characters ``rows`` (default all) and all a.

        Non-units get -1.
        """
        labels = self.labels if rows is None else self.labels[rows]
        logs = np.where(self.units[:, None], self.log_table, 0)
        k = (labels * self._scale) @ logs.T % self.exponent
        k[:, ~self.units] = -1
        return k

    def transform(self, values, method: str = "fft") -> np.ndarray:
        """sum_{a unit} chi(a) * values[a] for every character chi.

        ``values`` has length q.  ``method='fft'`` reorganizes the units by
        their log vectors and runs a multi-dimensional DFT over the cyclic
        components; ``method='direct'`` multiplies by the explicit character
        table.  The two agree to rounding.
        """
        values = np.asarray(values, dtype=complex)
        if values.shape != (self.q,):
            raise DomainError(f"expected a vector of length {self.q}")
        if not self.orders:
            return np.array([values[self.units].sum()])
        if method == "direct":
            out = np.empty(len(self), dtype=complex)
            chunk = max(1, 2_000_000 // self.q)
            for start in range(0, len(self), chunk):
                rows = slice(start, start + chunk)
                k = self.exponent_matrix(rows)
                table = np.where(k >= 0, np.exp(2j * np.pi * k / self.exponent), 0)
                out[rows] = table @ values
            return out
        if method != "fft":
            raise DomainError(f"unknown transform method {method!r}")
        grid = np.zeros(self.orders, dtype=complex)
        unit_logs = self.log_table[self.units]
        grid[tuple(unit_logs.T)] = values[self.units]
        return (np.fft.ifftn(grid) * grid.size).reshape(-1)

    @cached_property
    def gauss_sums(self) -> np.ndarray:
        """tau(chi) for all characters at once (bulk DFT path)."""
        a = np.arange(self.q)
        return self.transform(np.exp(2j * np.pi * a / self.q))


@lru_cache(maxsize=None)
def _local_conductor_table(p: int, P: int) -> np.ndarray:
    """Conductor of each character of (Z/P)*, indexed by local label grid."""
    e = 0
    while p**e < P:
        e += 1
    comps, logs = _local_structure(p, e)
    orders = tuple(c.order for c in comps)
    N = lcm(*orders)
    scale = np.array([N // n for n in orders], dtype=np.int64)
    labels = np.indices(orders).reshape(len(orders), -1).T
    out = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        w = lab * scale
        cond = P
        # smallest p^j such that chi is trivial on units congruent to 1 mod p^j
        for j in range(0, e + 1):
            f = p**j
            us = np.arange(1, P, f)
            us = us[us % p != 0] if f == 1 else us
            if np.all((logs[us] @ w) % N == 0):
                cond = f
                break
        out[i] = cond
    return out.reshape(orders)


@lru_cache(maxsize=256)
def character_group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


@dataclass(frozen=True)
class DirichletCharacter:
    group: CharacterGroup = field(repr=False)
    label: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.group.q

    @property
    def index(self) -> int:
        return self.group.index_of(self.label)

    @cached_property
    def exponents(self) -> np.ndarray:
        """chi(a) = exp(2 pi i k[a] / N); k[a] = -1 marks a non-unit."""
        g = self.group
        lab = np.array(self.label, dtype=np.int64)
        logs = np.where(g.units[:, None], g.log_table, 0)
        k = (logs @ (lab * g._scale)) % g.exponent
        k[~g.units] = -1
        k.setflags(write=False)
        return k

    @cached_property
    def values(self) -> np.ndarray:
        k = self.exponents
        return np.where(k >= 0, np.exp(2j * np.pi * k / self.group.exponent), 0)

    def __call__(self, n: int) -> complex:
        k = int(self.exponents[n % self.group.q])
        if k < 0:
            return 0j
        return complex(np.exp(2j * np.pi * k / self.group.exponent))

    def exponent_of(self, n: int) -> Fraction | None:
        """chi(n) as a fraction of a full turn, or None when chi(n) = 0."""
        k = int(self.exponents[n % self.group.q])
        return None if k < 0 else Fraction(k, self.group.exponent)

    def conj(self) -> DirichletCharacter:
        return DirichletCharacter(
            self.group, tuple((-k) % n for k, n in zip(self.label, self.group.orders))
        )

    @property
    def parity(self) -> int:
        return int(self.group.parities[self.index])

    @property
    def is_even(self) -> bool:
        return self.parity == 1

    @property
    def is_principal(self) -> bool:
        return not any(self.label)

    @property
    def conductor(self) -> int:
        return int(self.group.conductors[self.index])

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.group.q


def conductor(chi: DirichletCharacter) -> int:
    return chi.conductor


def conductor_direct(chi: DirichletCharacter) -> int:
    """Conductor by testing induction from every divisor f of q.

    chi is induced from mod f iff chi(a) = 1 for every unit a = 1 mod f.
    Independent of the per-prime computation behind :attr:`conductor`.
    """
    q = chi.modulus
    k = chi.exponents
    for f in divisors(q):
        a = np.arange(1, q + 1, f) % q
        a = a[chi.group.units[a]]
        if np.all(k[a] == 0):
            return f
    return q


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_{a=1}^{q} chi(a) e(a/q), by direct summation."""
    q = chi.modulus
    a = np.arange(q)
    return complex(np.sum(chi.values * np.exp(2j * np.pi * a / q)))


def primitive_characters(q: int, parity: int | None = None) -> list[DirichletCharacter]:
    g = character_group(q)
    mask = g.primitive_mask.copy()
    if parity is not None:
        mask &= g.parities == parity
    return [DirichletCharacter(g, tuple(int(k) for k in g.labels[i])) for i in np.flatnonzero(mask)]


def _check_units(q: int, m: int, n: int) -> None:
    if gcd(m * n, q) != 1:
        raise DomainError(f"gcd(m*n, q) must be 1 (q={q}, m={m}, n={n})")


def orthogonality_direct(q: int, m: int, n: int, parity: int | None = None) -> complex:
    """sum over primitive chi mod q of chi(m) conj(chi(n)), summed directly."""
    _check_units(q, m, n)
    g = character_group(q)
    mask = g.primitive_mask
    if parity is not None:
        mask = mask & (g.parities == parity)
    k = (g.exponents_at(m) - g.exponents_at(n)) % g.exponent
    return complex(np.sum(np.exp(2j * np.pi * k[mask] / g.exponent)))


def orthogonality_closed(q: int, m: int, n: int) -> int:
    """sum over d | q with d | m - n of phi(d) mu(q/d)."""
    _check_units(q, m, n)
    return sum(euler_phi(d) * mobius(q // d) for d in divisors(q) if (m - n) % d == 0)


def even_orthogonality(q: int, m: int, n: int) -> Fraction:
    """Sum over even primitive chi of chi(m) conj(chi(n)), in closed form.

    Half of the d | m - n sum plus half of the d | m + n sum.
    """
    _check_units(q, m, n)
    total = 0
    for d in divisors(q):
        w = euler_phi(d) * mobius(q // d)
        if (m - n) % d == 0:
            total += w
        if (m + n) % d == 0:
            total += w
    return Fraction(total, 2)


def exp_sum_direct(c: int, d: int, r: int) -> complex:
    """sum over a in [1, cd], a = r mod d, gcd(a, cd) = 1 of e(a/(cd))."""
    if c < 1 or d < 1:
        raise DomainError("c and d must be positive")
    if gcd(r, d) != 1:
        raise DomainError(f"gcd(r, d) must be 1 (r={r}, d={d})")
    cd = c * d
    a = np.array([a for a in range(1, cd + 1) if (a - r) % d == 0 and gcd(a, cd) == 1])
    if a.size == 0:
        return 0j
    return complex(np.sum(np.exp(2j * np.pi * a / cd)))


def exp_sum_closed(c: int, d: int, r: int) -> complex:
    """mu(c) e(r cbar / d) when gcd(c, d) = 1, else 0."""
    if c < 1 or d < 1:
        raise DomainError("c and d must be positive")
    if gcd(r, d) != 1:
        raise DomainError(f"gcd(r, d) must be 1 (r={r}, d={d})")
    if gcd(c, d) != 1:
        return 0j
    cbar = mod_inverse(c % d, d)
    return mobius(c) * complex(np.exp(2j * np.pi * ((r * cbar) % d) / d))
