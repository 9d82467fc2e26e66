"""Weighted sup-norm machinery over the compactified real line.

The weight is 1/(1 + |x|^k).  Functions whose weighted values have
limits at both infinities correspond, through the rational chart
u = x/(1+|x|), to bounded continuous functions on [-1, 1]; the norm
engine works entirely in that chart, which makes "sample near infinity"
a well-posed grid operation and makes the norm of the compactified
representative equal to the weighted norm by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from kram.network import KReluNetwork

__all__ = [
    "weight",
    "to_unit",
    "from_unit",
    "TargetFunction",
    "TailLimits",
    "TailDivergenceError",
    "tail_limits",
    "CompactifiedGrid",
    "CompactifiedFunction",
    "compactify",
    "from_compactified",
    "WeightedNormEstimate",
    "weighted_norm",
    "difference",
]

DEFAULT_TAIL_TOL = 1e-8
DEFAULT_NORM_TOL = 1e-6
DEFAULT_DEPTH_CAP = 24
_MAX_NODES = 2_000_000


def weight(x: float, k: int) -> float:
    """1/(1 + |x|^k); 0 at the points at infinity."""
    if math.isinf(x):
        return 0.0
    return 1.0 / (1.0 + abs(x) ** k)


def to_unit(x: float) -> float:
    """Chart x -> u = x/(1+|x|), mapping the closed line onto [-1, 1]."""
    if math.isinf(x):
        return 1.0 if x > 0 else -1.0
    return x / (1.0 + abs(x))


def from_unit(u: float) -> float:
    """Inverse chart u -> x = u/(1-|u|); |u| = 1 maps to +-infinity."""
    if abs(u) >= 1.0:
        return math.inf if u > 0 else -math.inf
    return u / (1.0 - abs(u))


@dataclass
class TargetFunction:
    """A real function of one real variable plus what the engines need.

    ``evaluator`` must be total and continuous on the reals (spot-checked
    by refinement stability, not proven).  ``support_hint`` asserts the
    function vanishes outside the closed interval; ``tail_limits_hint``
    supplies known limits of f(x)/(1+|x|^k).  ``array_evaluator`` is an
    optional vectorized path used by the grid engines.
    """

    evaluator: Callable[[float], float]
    order_hint: int = 1
    support_hint: Optional[tuple[float, float]] = None
    tail_limits_hint: Optional[tuple[float, float]] = None
    array_evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x: float) -> float:
        return self.evaluator(float(x))

    def sample(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if self.array_evaluator is not None:
            return np.asarray(self.array_evaluator(xs), dtype=np.float64)
        return np.fromiter(
            (self.evaluator(float(x)) for x in xs), np.float64, count=len(xs)
        )

    @classmethod
    def from_network(cls, net: KReluNetwork) -> "TargetFunction":
        # Weighted tails of a pure network are the orientation-wise
        # coefficient sums; no sampling needed.
        lam_plus = float(sum(float(t.coefficient) for t in net.terms if t.orientation == 1))
        lam_minus = float(sum(float(t.coefficient) for t in net.terms if t.orientation == -1))
        return cls(
            evaluator=net,
            order_hint=net.order,
            tail_limits_hint=(lam_minus, lam_plus),
            array_evaluator=net.eval_many,
        )


def difference(f: TargetFunction, g: TargetFunction | KReluNetwork) -> TargetFunction:
    """Target for f - g, propagating tail hints when both are known."""
    if isinstance(g, KReluNetwork):
        g = TargetFunction.from_network(g)
    hints = None
    if f.tail_limits_hint is not None and g.tail_limits_hint is not None:
        hints = (
            f.tail_limits_hint[0] - g.tail_limits_hint[0],
            f.tail_limits_hint[1] - g.tail_limits_hint[1],
        )
    elif f.support_hint is not None and g.support_hint is not None:
        hints = (0.0, 0.0)
    support = None
    if f.support_hint is not None and g.support_hint is not None:
        support = (
            min(f.support_hint[0], g.support_hint[0]),
            max(f.support_hint[1], g.support_hint[1]),
        )
    g_arr = g.array_evaluator if g.array_evaluator is not None else None

    def arr(xs: np.ndarray) -> np.ndarray:
        return f.sample(xs) - g.sample(xs)

    return TargetFunction(
        evaluator=lambda x: f.evaluator(x) - g.evaluator(x),
        order_hint=f.order_hint,
        support_hint=support,
        tail_limits_hint=hints,
        array_evaluator=arr if (f.array_evaluator is not None or g_arr is not None) else None,
    )


class TailDivergenceError(ValueError):
    """Weighted tail values failed to stabilize at the requested tolerance.

    Carries the sampled evidence: ``side`` is -1 or +1, ``samples`` the
    (x, weighted value) pairs examined.
    """

    def __init__(self, side: int, samples: list[tuple[float, float]], tol: float):
        self.side = side
        self.samples = samples
        self.tol = tol
        where = "-infinity" if side < 0 else "+infinity"
        last = samples[-1][1] if samples else float("nan")
        super().__init__(
            f"weighted tail limit toward {where} did not stabilize at tolerance "
            f"{tol:g} (last value {last!r} after {len(samples)} geometric samples)"
        )


@dataclass(frozen=True)
class TailLimits:
    """Estimated limits of f(x)/(1+|x|^k) as x -> -inf / +inf."""

    left: float
    right: float
    agreement_left: float = 0.0
    agreement_right: float = 0.0

    def __iter__(self):
        yield self.left
        yield self.right


def _stabilized_limit(
    value_at: Callable[[float], float],
    side: int,
    tol: float,
    m_end: int,
    consecutive: int = 3,
) -> tuple[float, float, list[tuple[float, float]]]:
    """Sample value_at(side * 2^m) until ``consecutive`` successive
    differences stay within tol; returns (limit, achieved agreement,
    samples).  Raises TailDivergenceError otherwise."""
    samples: list[tuple[float, float]] = []
    prev = None
    run = 0
    worst_in_run = 0.0
    for m in range(m_end + 1):
        x = side * 2.0**m
        try:
            v = value_at(x)
        except (OverflowError, ValueError):
            raise TailDivergenceError(side, samples, tol) from None
        if not math.isfinite(v):
            samples.append((x, v))
            raise TailDivergenceError(side, samples, tol)
        samples.append((x, v))
        if prev is not None:
            d = abs(v - prev)
            if d <= tol:
                run += 1
                worst_in_run = max(worst_in_run, d)
                if run >= consecutive:
                    return v, worst_in_run, samples
            else:
                run = 0
                worst_in_run = 0.0
        prev = v
    raise TailDivergenceError(side, samples, tol)


def tail_limits(
    f: TargetFunction,
    k: int,
    tol: float = DEFAULT_TAIL_TOL,
    *,
    m_end: int = 48,
    use_hints: bool = True,
) -> TailLimits:
    """Estimate the weighted tail limits of f by geometric sampling.

    Compactly supported targets short-circuit to (0, 0); an explicit
    ``tail_limits_hint`` is trusted when ``use_hints`` is set.  Otherwise
    values at x = +-2^m must agree to ``tol`` over three consecutive
    scales; failure raises :class:`TailDivergenceError` with the sampled
    evidence.
    """
    if use_hints and f.support_hint is not None:
        return TailLimits(0.0, 0.0)
    if use_hints and f.tail_limits_hint is not None:
        lo, hi = f.tail_limits_hint
        return TailLimits(float(lo), float(hi))

    def value_at(x: float) -> float:
        return f.evaluator(x) * weight(x, k)

    left, agree_l, _ = _stabilized_limit(value_at, -1, tol, m_end)
    right, agree_r, _ = _stabilized_limit(value_at, +1, tol, m_end)
    return TailLimits(left, right, agree_l, agree_r)


@dataclass(frozen=True)
class CompactifiedGrid:
    """Sorted u-nodes in [-1, 1], always containing the endpoints."""

    nodes: np.ndarray
    refinement_depth: int

    def xs(self) -> np.ndarray:
        """Grid nodes mapped back to the line (endpoints become +-inf)."""
        return np.array([from_unit(float(u)) for u in self.nodes])


class CompactifiedFunction:
    """Bounded continuous representative F(u) = f(x(u)) * weight(x(u)).

    Extended to u = +-1 by the tail limits; its sup over any grid equals
    the weighted-norm lower bound computed from the same grid.
    """

    def __init__(self, f: TargetFunction, k: int, tails: TailLimits):
        self.target = f
        self.order = k
        self.tails = tails

    def __call__(self, u: float) -> float:
        if u <= -1.0:
            return self.tails.left
        if u >= 1.0:
            return self.tails.right
        x = from_unit(u)
        return self.target.evaluator(x) * weight(x, self.order)

    def values(self, us: np.ndarray) -> np.ndarray:
        us = np.asarray(us, dtype=np.float64)
        out = np.empty_like(us)
        interior = np.abs(us) < 1.0
        ui = us[interior]
        xi = ui / (1.0 - np.abs(ui))
        w = 1.0 / (1.0 + np.abs(xi) ** self.order)
        out[interior] = self.target.sample(xi) * w
        out[us <= -1.0] = self.tails.left
        out[us >= 1.0] = self.tails.right
        return out

    def abs_values(self, us: np.ndarray) -> np.ndarray:
        return np.abs(self.values(us))


def compactify(
    f: TargetFunction,
    k: int,
    *,
    tails: Optional[TailLimits] = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> CompactifiedFunction:
    """Map f to its bounded representative on [-1, 1] (see module doc)."""
    if tails is None:
        tails = tail_limits(f, k, tail_tol)
    return CompactifiedFunction(f, k, tails)


def from_compactified(F: Callable[[float], float], k: int) -> TargetFunction:
    """Inverse direction: lift a bounded function on [-1, 1] to the line."""

    def evaluator(x: float) -> float:
        return F(to_unit(x)) * (1.0 + abs(x) ** k)

    return TargetFunction(
        evaluator=evaluator,
        order_hint=k,
        tail_limits_hint=(float(F(-1.0)), float(F(1.0))),
    )


@dataclass(frozen=True)
class WeightedNormEstimate:
    """Certified lower bound and heuristic upper estimate of the norm.

    ``lower_bound`` is a true lower bound (max of sampled weighted
    values) and never decreases under refinement; ``upper_estimate``
    inflates it by the residual inter-node variation.  ``argmax_x`` may
    be +-inf when the maximum sits at a tail limit.
    """

    lower_bound: float
    upper_estimate: float
    argmax_x: float
    grid: CompactifiedGrid = field(repr=False)
    unconverged: bool = False


def weighted_norm(
    f: TargetFunction,
    k: int,
    refine_until: float = DEFAULT_NORM_TOL,
    *,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    initial_nodes: int = 129,
    seed_points: Optional[list[float]] = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> WeightedNormEstimate:
    """Adaptively estimate sup |f(x)|/(1+|x|^k) over the whole line.

    Works on the compactified grid: intervals whose sampled weighted
    values differ by more than ``refine_until`` are bisected, down to
    ``depth_cap`` levels.  Returns an unconverged-flagged estimate if the
    cap is hit before the variation settles.
    """
    cf = compactify(f, k, tail_tol=tail_tol)
    us = np.linspace(-1.0, 1.0, initial_nodes)
    if seed_points:
        extra = np.array([to_unit(float(x)) for x in seed_points])
        us = np.unique(np.concatenate([us, extra[np.abs(extra) <= 1.0]]))
    gs = cf.abs_values(us)

    all_u = [us]
    all_g = [gs]
    u0, u1 = us[:-1].copy(), us[1:].copy()
    g0, g1 = gs[:-1].copy(), gs[1:].copy()
    margin = 0.0
    unconverged = False
    depth = 0
    total_nodes = len(us)
    while True:
        var = np.abs(g1 - g0)
        viol = var > refine_until
        settled = var[~viol]
        if settled.size:
            margin = max(margin, float(settled.max()))
        if not viol.any():
            break
        if depth >= depth_cap or total_nodes > _MAX_NODES:
            unconverged = True
            margin = max(margin, float(var[viol].max()))
            break
        mu = 0.5 * (u0[viol] + u1[viol])
        mg = cf.abs_values(mu)
        all_u.append(mu)
        all_g.append(mg)
        total_nodes += len(mu)
        u0, u1 = np.concatenate([u0[viol], mu]), np.concatenate([mu, u1[viol]])
        g0, g1 = np.concatenate([g0[viol], mg]), np.concatenate([mg, g1[viol]])
        depth += 1

    u_all = np.concatenate(all_u)
    g_all = np.concatenate(all_g)
    best = int(np.argmax(g_all))
    lower = float(g_all[best])
    grid = CompactifiedGrid(np.sort(u_all), depth)
    return WeightedNormEstimate(
        lower_bound=lower,
        upper_estimate=lower + margin,
        argmax_x=from_unit(float(u_all[best])),
        grid=grid,
        unconverged=unconverged,
    )
