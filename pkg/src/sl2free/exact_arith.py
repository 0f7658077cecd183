"""Exact scalars and the few number-theoretic helpers the counting code needs.

Rationals are :class:`fractions.Fraction` (always canonical, den > 0).
Python integers never overflow, so no fixed-width fast path is needed here;
numpy kernels elsewhere check their own magnitude bounds before using int64.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

Rat = Fraction


class DomainError(ValueError):
    """Raised when an operation is called outside its mathematical domain."""


def rat_cmp(x: Fraction, y: Fraction) -> int:
    """Three-way comparison of rationals by integer cross-multiplication."""
    lhs = x.numerator * y.denominator
    rhs = y.numerator * x.denominator
    return (lhs > rhs) - (lhs < rhs)


@dataclass(frozen=True, slots=True)
class QComplex:
    """Gaussian rational ``re + im*i``."""

    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def __add__(self, other: QComplex | int | Fraction) -> QComplex:
        other = _lift(other)
        return QComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> QComplex:
        return QComplex(-self.re, -self.im)

    def __sub__(self, other: QComplex | int | Fraction) -> QComplex:
        return self + (-_lift(other))

    def __rsub__(self, other: QComplex | int | Fraction) -> QComplex:
        return _lift(other) - self

    def __mul__(self, other: QComplex | int | Fraction) -> QComplex:
        other = _lift(other)
        return QComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conjugate(self) -> QComplex:
        return QComplex(self.re, -self.im)

    def __truediv__(self, other: QComplex | int | Fraction) -> QComplex:
        other = _lift(other)
        n = qc_norm_sq(other)
        if n == 0:
            raise ZeroDivisionError("division by 0 + 0i")
        p = self * other.conjugate()
        return QComplex(p.re / n, p.im / n)

    def __str__(self) -> str:
        return f"{self.re} + {self.im}i"


def _lift(z: QComplex | int | Fraction) -> QComplex:
    if isinstance(z, QComplex):
        return z
    return QComplex(Fraction(z), Fraction(0))


def qc_norm_sq(z: QComplex) -> Fraction:
    """Squared modulus ``re**2 + im**2``, exact."""
    return z.re * z.re + z.im * z.im


# the Mobius code only ever needs the squared modulus
qc_mobius_norm_sq = qc_norm_sq


def factorize(k: int) -> dict[int, int]:
    """Prime factorisation of ``|k|`` by trial division."""
    n = abs(k)
    if n == 0:
        raise DomainError("cannot factor 0")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisor_count(k: int) -> int:
    """Number of positive divisors of ``|k|``; ``k`` must be nonzero."""
    if k == 0:
        raise DomainError("divisor_count(0) is undefined")
    total = 1
    for e in factorize(k).values():
        total *= e + 1
    return total


def euler_phi(k: int) -> int:
    """Euler's totient by factorisation."""
    if k < 1:
        raise DomainError(f"euler_phi needs k >= 1, got {k}")
    out = k
    for p in factorize(k):
        out -= out // p
    return out


def phi_sieve(n: int) -> np.ndarray:
    """Array ``phi`` with ``phi[k] = euler_phi(k)`` for ``0 < k <= n`` (``phi[0] = 0``)."""
    if n < 0:
        raise DomainError("sieve bound must be nonnegative")
    phi = np.arange(n + 1, dtype=np.int64)
    for p in range(2, n + 1):
        if phi[p] == p:  # untouched so far, hence prime
            phi[p::p] -= phi[p::p] // p
    return phi


def spf_sieve(n: int) -> np.ndarray:
    """Smallest-prime-factor table on ``[0, n]`` (entries 0 and 1 are left as is)."""
    spf = np.arange(n + 1, dtype=np.int64)
    for p in range(2, isqrt(n) + 1):
        if spf[p] == p:
            block = spf[p * p :: p]
            mask = block == np.arange(p * p, n + 1, p)
            block[mask] = p
    return spf


def divisors_from_spf(m: int, spf: np.ndarray) -> list[int]:
    """Positive divisors of ``m >= 1`` using a precomputed smallest-prime-factor table."""
    divs = [1]
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return divs


def positive_divisors(k: int) -> list[int]:
    """Sorted positive divisors of ``|k|`` (no sieve)."""
    divs = [1]
    for p, e in factorize(k).items():
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def count_in_residue_class(lo: int, hi: int, r: int, m: int) -> int:
    """How many ``x`` in ``[lo, hi]`` satisfy ``x = r (mod m)``."""
    if hi < lo:
        return 0
    return (hi - r) // m - (lo - 1 - r) // m


def first_in_residue_class(lo: int, r: int, m: int) -> int:
    """Smallest ``x >= lo`` with ``x = r (mod m)``."""
    return lo + (r - lo) % m
