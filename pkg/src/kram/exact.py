"""Exact rational arithmetic and the polynomial identity oracle.

Everything in this module computes over arbitrary-precision rationals
(`fractions.Fraction`); there is no floating point anywhere.  The two
alternating binomial identities verified here are what force compactly
supported combinations of shifted truncated powers to vanish outside an
interval, so the rest of the library leans on them being *exactly* true.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

# Exact rational scalar used throughout the library.  Arbitrary-precision
# integers come for free; gcd reduction and positive denominators are
# maintained by Fraction itself.
Rational = Fraction

__all__ = [
    "Rational",
    "Polynomial",
    "binomial",
    "vanishing_identity_residual",
    "constant_identity_value",
    "interpolate",
    "alternating_power_sum",
]


def binomial(n: int, j: int) -> int:
    """Exact binomial coefficient C(n, j).

    Raises ValueError unless 0 <= j <= n.
    """
    if n < 0 or j < 0 or j > n:
        raise ValueError(f"binomial({n}, {j}) is outside 0 <= j <= n")
    return math.comb(n, j)


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial with exact rational coefficients.

    ``coefficients[i]`` is the coefficient of x**i; trailing zeros are
    trimmed on construction, so the zero polynomial has no coefficients
    and degree -infinity (reported as None by :meth:`degree`).
    """

    coefficients: tuple[Fraction, ...]

    def __init__(self, coefficients: Iterable[Fraction | int] = ()):
        coeffs = [Fraction(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    def degree(self) -> int | None:
        """Degree of the polynomial, or None for the zero polynomial."""
        return len(self.coefficients) - 1 if self.coefficients else None

    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, x: Fraction | int) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coefficients, other.coefficients
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, ca in enumerate(self.coefficients):
            for j, cb in enumerate(other.coefficients):
                out[i + j] += ca * cb
        return Polynomial(out)

    def scale(self, factor: Fraction | int) -> "Polynomial":
        f = Fraction(factor)
        return Polynomial(c * f for c in self.coefficients)

    @staticmethod
    def shifted_power(shift: Fraction | int, k: int) -> "Polynomial":
        """(x - shift)**k expanded by the binomial theorem."""
        if k < 0:
            raise ValueError("power must be nonnegative")
        s = Fraction(shift)
        return Polynomial(
            binomial(k, i) * (-s) ** (k - i) for i in range(k + 1)
        )


def vanishing_identity_residual(k: int) -> Polynomial:
    """Expand sum_{j=0}^{k+1} C(k+1, j) (-1)^j (x - j)^k exactly.

    The alternating (k+1)-fold difference of a degree-k polynomial
    cancels identically, so the result must be the zero polynomial;
    callers assert that rather than trusting it.
    """
    if k < 1:
        raise ValueError("order k must be >= 1")
    acc = Polynomial()
    for j in range(k + 2):
        sign = -1 if j % 2 else 1
        acc = acc + Polynomial.shifted_power(j, k).scale(sign * binomial(k + 1, j))
    return acc


def constant_identity_value(k: int) -> Fraction:
    """Expand sum_{j=0}^{k} C(k, j) (-1)^j (x - j)^k and return the constant.

    The expansion is an alternating k-fold difference of x^k, so every
    x-dependent coefficient cancels; if it does not, something is broken
    and we raise rather than return garbage.  The derived constant is k!
    (k=1 by hand: x - (x-1) = 1); see the README for the note on the
    value this quantity is sometimes misquoted as.
    """
    if k < 1:
        raise ValueError("order k must be >= 1")
    acc = Polynomial()
    for j in range(k + 1):
        sign = -1 if j % 2 else 1
        acc = acc + Polynomial.shifted_power(j, k).scale(sign * binomial(k, j))
    deg = acc.degree()
    if deg is not None and deg > 0:
        raise AssertionError(
            f"alternating difference of x^{k} failed to collapse: degree {deg}"
        )
    return acc(0)


def alternating_power_sum(k: int, n: int, x: Fraction | int) -> Fraction:
    """Evaluate sum_{j=0}^{n} C(n, j) (-1)^j (x - j)^k without expanding.

    Independent route used to cross-check the expanded polynomials: it
    never builds coefficient lists, only powers of rational points.
    """
    x = Fraction(x)
    total = Fraction(0)
    for j in range(n + 1):
        sign = -1 if j % 2 else 1
        total += sign * binomial(n, j) * (x - j) ** k
    return total


def interpolate(points: Sequence[tuple[Fraction | int, Fraction | int]]) -> Polynomial:
    """Exact Lagrange interpolation through distinct rational points.

    Returns the unique polynomial of degree < len(points) passing through
    them.  This is the second, expansion-free route for verifying the
    identity polynomials: evaluating the defining sums at enough points
    and interpolating must reproduce the expanded coefficients exactly.
    """
    xs = [Fraction(x) for x, _ in points]
    ys = [Fraction(y) for _, y in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation points must be distinct")
    result = Polynomial()
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        basis = Polynomial([1])
        denom = Fraction(1)
        for jj, xj in enumerate(xs):
            if jj == i:
                continue
            basis = basis * Polynomial([-xj, 1])
            denom *= xi - xj
        result = result + basis.scale(yi / denom)
    return result
