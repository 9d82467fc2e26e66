"""Terms, networks, and calculus for truncated-power (k-ReLU) sums.

A term is c * relu(s*(x - t))**k with orientation s in {+1, -1}; a
network is a finite sum of terms sharing one order k.  Term data may be
floats or exact rationals (`fractions.Fraction`); construction never
converts rationals to floats, so networks built from rational data admit
exact evaluation -- which is how the support and plateau guarantees of
the bump/step constructors are tested as identities rather than as
"small enough" floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from kram import _backend
from kram.exact import binomial, constant_identity_value

Scalar = Union[int, float, Fraction]

__all__ = [
    "KReluTerm",
    "KReluNetwork",
    "canonicalize",
    "bump",
    "step",
    "integrate_network",
    "differentiate_network",
]


def _as_fraction(v: Scalar) -> Fraction:
    # Exact for floats too: Fraction(0.1) is the precise binary value.
    return Fraction(v)


def _is_exact(v: Scalar) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _add(a: Scalar, b: Scalar) -> Scalar:
    if _is_exact(a) and _is_exact(b):
        return Fraction(a) + Fraction(b)
    return float(a) + float(b)


@dataclass(frozen=True)
class KReluTerm:
    """One scaled, shifted truncated power c * relu(s*(x - t))**k."""

    coefficient: Scalar
    orientation: int
    knot: Scalar
    order: int

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.order < 1:
            raise ValueError("order must be a positive integer")

    def __call__(self, x: float) -> float:
        d = self.orientation * (x - float(self.knot))
        if d <= 0.0:
            return 0.0
        return float(self.coefficient) * d**self.order

    def eval_exact(self, x: Scalar) -> Fraction:
        d = self.orientation * (_as_fraction(x) - _as_fraction(self.knot))
        if d <= 0:
            return Fraction(0)
        return _as_fraction(self.coefficient) * d**self.order


class KReluNetwork:
    """A finite sum of same-order terms; the empty network is zero.

    Terms with identical (orientation, knot) are merged on construction
    and the list is sorted by (knot, orientation), so equal functions
    built in different term orders compare and serialize identically.
    Zero-coefficient terms are dropped unless ``keep_zeros`` is set.
    """

    def __init__(
        self,
        order: int,
        terms: Iterable[KReluTerm] = (),
        *,
        keep_zeros: bool = False,
    ):
        if order < 1:
            raise ValueError("order must be a positive integer")
        merged: dict[tuple[Fraction, int], KReluTerm] = {}
        for t in terms:
            if t.order != order:
                raise ValueError(
                    f"term order {t.order} does not match network order {order}"
                )
            key = (_as_fraction(t.knot), t.orientation)
            prev = merged.get(key)
            if prev is None:
                merged[key] = t
            else:
                merged[key] = KReluTerm(
                    _add(prev.coefficient, t.coefficient), t.orientation, prev.knot, order
                )
        out = sorted(merged.values(), key=lambda t: (_as_fraction(t.knot), t.orientation))
        if not keep_zeros:
            out = [t for t in out if t.coefficient != 0]
        self.order = order
        self.terms = tuple(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KReluNetwork)
            and self.order == other.order
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        return f"KReluNetwork(order={self.order}, terms={len(self.terms)})"

    def __len__(self) -> int:
        return len(self.terms)

    @cached_property
    def _float_data(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coeffs = np.array([float(t.coefficient) for t in self.terms])
        signs = np.array([float(t.orientation) for t in self.terms])
        knots = np.array([float(t.knot) for t in self.terms])
        return coeffs, signs, knots

    def __call__(self, x: float) -> float:
        """Scalar float evaluation (compensated with math.fsum)."""
        xf = float(x)
        return math.fsum(t(xf) for t in self.terms)

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        """Batch float evaluation through the selected backend."""
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        out = np.empty_like(xs)
        coeffs, signs, knots = self._float_data
        _backend.eval_batch(xs, coeffs, signs, knots, self.order, out)
        return out

    def eval_exact(self, x: Scalar) -> Fraction:
        """Exact rational evaluation; exact for float term data as well."""
        total = Fraction(0)
        for t in self.terms:
            total += t.eval_exact(x)
        return total

    def with_terms(self, extra: Sequence[KReluTerm]) -> "KReluNetwork":
        return KReluNetwork(self.order, list(self.terms) + list(extra))

    def scaled(self, factor: Scalar) -> "KReluNetwork":
        if _is_exact(factor):
            terms = [
                KReluTerm(
                    _as_fraction(t.coefficient) * Fraction(factor)
                    if _is_exact(t.coefficient)
                    else float(t.coefficient) * float(factor),
                    t.orientation,
                    t.knot,
                    t.order,
                )
                for t in self.terms
            ]
        else:
            terms = [
                KReluTerm(float(t.coefficient) * float(factor), t.orientation, t.knot, t.order)
                for t in self.terms
            ]
        return KReluNetwork(self.order, terms)


def canonicalize(c: Scalar, a: Scalar, b: Scalar, k: int) -> KReluTerm:
    """Rewrite c * relu(a*x + b)**k in canonical (coefficient, sign, knot) form.

    Uses c*|a|^k, sign(a), -b/a.  Exact when all inputs are rational.
    """
    if a == 0:
        raise ValueError("scale a must be nonzero")
    if k < 1:
        raise ValueError("order must be a positive integer")
    if _is_exact(c) and _is_exact(a) and _is_exact(b):
        af = Fraction(a)
        coeff = Fraction(c) * abs(af) ** k
        knot = -Fraction(b) / af
        return KReluTerm(coeff, 1 if af > 0 else -1, knot, k)
    af = float(a)
    coeff = float(c) * abs(af) ** k
    knot = -float(b) / af + 0.0  # normalize -0.0
    return KReluTerm(coeff, 1 if af > 0 else -1, knot, k)


def bump(k: int, left: Scalar, right: Scalar) -> KReluNetwork:
    """Compactly supported order-k network on [left, right].

    The alternating binomial combination of k+2 equally spaced truncated
    powers cancels identically outside its knot range (it is a scaled
    B-spline), so the support statement is an exact identity, not a
    numerical one.  Construction is fully rational given rational
    endpoints.
    """
    lo, hi = _as_fraction(left), _as_fraction(right)
    if not lo < hi:
        raise ValueError("need left < right")
    s = Fraction(k + 1) / (hi - lo)
    scale = s**k
    terms = []
    for j in range(k + 2):
        sign = -1 if j % 2 else 1
        knot = lo + Fraction(j) / s
        terms.append(KReluTerm(sign * binomial(k + 1, j) * scale, 1, knot, k))
    return KReluNetwork(k, terms)


def step(k: int, rise_left: Scalar, rise_right: Scalar) -> KReluNetwork:
    """Order-k network equal to 0 left of rise_left and 1 right of rise_right.

    Built from the k+1-term alternating combination whose value past the
    last knot is exactly the derived constant (k!); dividing by that
    constant -- taken from the exact oracle, never hard-coded -- pins the
    right plateau at exactly 1.  Monotone in between (its derivative is a
    nonnegative bump).
    """
    lo, hi = _as_fraction(rise_left), _as_fraction(rise_right)
    if not lo < hi:
        raise ValueError("need rise_left < rise_right")
    s = Fraction(k) / (hi - lo)
    norm = constant_identity_value(k)
    scale = s**k / norm
    terms = []
    for j in range(k + 1):
        sign = -1 if j % 2 else 1
        knot = lo + Fraction(j) / s
        terms.append(KReluTerm(sign * binomial(k, j) * scale, 1, knot, k))
    return KReluNetwork(k, terms)


def integrate_network(net: KReluNetwork) -> KReluNetwork:
    """Running integral from -infinity, one order up.

    Termwise: c * relu(x - t)**k integrates to (c/(k+1)) * relu(x - t)**(k+1).
    Negatively oriented terms have divergent left tails and are rejected.
    Coefficient division is exact (floats are widened to rationals first),
    so integrate/differentiate round-trips term lists identically.
    """
    new_order = net.order + 1
    terms = []
    for t in net.terms:
        if t.orientation != 1:
            raise ValueError(
                "cannot integrate a negatively oriented term from -infinity"
            )
        terms.append(
            KReluTerm(_as_fraction(t.coefficient) / new_order, 1, t.knot, new_order)
        )
    return KReluNetwork(new_order, terms)


def differentiate_network(net: KReluNetwork) -> KReluNetwork:
    """Termwise derivative, one order down; defined for order >= 2 only."""
    if net.order < 2:
        raise ValueError("derivative of an order-1 network leaves the class")
    new_order = net.order - 1
    terms = [
        KReluTerm(
            _as_fraction(t.coefficient) * net.order * t.orientation,
            t.orientation,
            t.knot,
            new_order,
        )
        for t in net.terms
    ]
    return KReluNetwork(new_order, terms)
