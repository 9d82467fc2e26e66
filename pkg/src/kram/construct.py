"""Constructive approximation engines.

Compact targets: the target is pre-interpolated piecewise-linearly (the
smoothing step), the interpolant's derivative -- an explicit step
function -- is approximated one order down, integrated back termwise,
and the right-plateau residue is cancelled with a scaled step network so
compact support is restored.  Every breakpoint and coefficient stays an
exact rational, so the output is identically zero outside the target's
support hull, not merely small.

Global targets: the weighted tail limits give the two unbounded
generator coefficients; what remains has vanishing weighted tails, is
truncated to a window with linear tapers, and the windowed remainder is
handed to the compact engine.  The report carries a measured weighted
error of the assembled network, never an assumed one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from kram.network import (
    KReluNetwork,
    KReluTerm,
    integrate_network,
    step,
)
from kram.space import (
    CompactifiedFunction,
    TailDivergenceError,
    TargetFunction,
    TailLimits,
    WeightedNormEstimate,
    _stabilized_limit,
    compactify,
    difference,
    tail_limits,
    to_unit,
    weight,
    weighted_norm,
)

__all__ = [
    "CompactApproxConfig",
    "GlobalDecomposition",
    "ApproxReport",
    "ApproximationBudgetError",
    "approx_compact",
    "decompose",
    "window_remainder",
    "windowed_tail_residual",
    "approx_global",
    "SigmoidalCheck",
    "SigmoidalExpansion",
    "SigmoidalTermSubstitution",
    "sigmoidal_check",
    "sigmoidal_substitute",
    "substitution_error",
]


class ApproximationBudgetError(RuntimeError):
    """A construction budget ran out; carries partial diagnostics."""

    def __init__(self, message: str, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            detail = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)


@dataclass
class CompactApproxConfig:
    """Budgets for the compact approximation pipeline.

    ``epsilon`` is the target sup error on the whole line.
    ``mollifier_width`` fixes the pre-interpolation spacing; "auto"
    refines until the measured interpolation error fits the budget.
    ``base_knot_count`` seeds the order-1 grid; ``max_recursion`` bounds
    the order recursion depth and must be at least the requested order.
    """

    epsilon: float
    mollifier_width: Union[float, str] = "auto"
    base_knot_count: int = 17
    max_recursion: int = 32
    knot_cap: int = 1 << 15

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.base_knot_count < 2:
            raise ValueError("base_knot_count must be at least 2")


# ---------------------------------------------------------------------------
# Exact piecewise-linear / piecewise-constant scaffolding


@dataclass(frozen=True)
class _PwLinear:
    """Continuous piecewise-linear function, zero outside its nodes.

    Node abscissae and values are exact rationals; the first and last
    values must be zero so the function is genuinely compactly
    supported.
    """

    xs: tuple[Fraction, ...]
    ys: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 2:
            raise ValueError("need matching node/value lists with >= 2 nodes")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ValueError("nodes must be strictly increasing")
        if self.ys[0] != 0 or self.ys[-1] != 0:
            raise ValueError("end values must be exactly zero")

    def derivative(self) -> "_PwConst":
        slopes = tuple(
            (y1 - y0) / (x1 - x0)
            for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])
        )
        return _PwConst(self.xs, slopes)

    def to_network(self) -> KReluNetwork:
        """Exact order-1 representation via slope differences."""
        slopes = [Fraction(0)]
        slopes += [
            (y1 - y0) / (x1 - x0)
            for x0, x1, y0, y1 in zip(self.xs, self.xs[1:], self.ys, self.ys[1:])
        ]
        slopes.append(Fraction(0))
        terms = [
            KReluTerm(slopes[i + 1] - slopes[i], 1, self.xs[i], 1)
            for i in range(len(self.xs))
        ]
        return KReluNetwork(1, terms)


@dataclass(frozen=True)
class _PwConst:
    """Piecewise-constant function on len(xs)-1 pieces, zero outside."""

    xs: tuple[Fraction, ...]
    vals: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.vals) != len(self.xs) - 1:
            raise ValueError("need one value per piece")

    def jumps(self) -> list[tuple[Fraction, Fraction]]:
        """(position, jump) pairs including both support edges."""
        out = [(self.xs[0], self.vals[0])]
        for i in range(1, len(self.vals)):
            out.append((self.xs[i], self.vals[i] - self.vals[i - 1]))
        out.append((self.xs[-1], -self.vals[-1]))
        return out

    def total_variation(self) -> Fraction:
        return sum((abs(j) for _, j in self.jumps()), Fraction(0))

    def ramped(self, widths) -> _PwLinear:
        """Continuous version: each nonzero jump becomes a linear ramp,
        placed just after the jump (just before it for the right support
        edge).  ``widths`` maps each (position, jump) pair from
        :meth:`jumps` to a maximum ramp width; ordering clamps shrink it
        further.  Exactly equal to the step function outside the bands."""
        jumps = [(b, j, w) for (b, j), w in zip(self.jumps(), widths) if j != 0]
        if not jumps:
            return _PwLinear((self.xs[0], self.xs[-1]), (Fraction(0), Fraction(0)))
        nodes: list[tuple[Fraction, Fraction]] = []
        lo, hi = self.xs[0], self.xs[-1]
        level = Fraction(0)
        nodes.append((lo, Fraction(0)))
        for idx, (b, j, width) in enumerate(jumps):
            nxt = jumps[idx + 1][0] if idx + 1 < len(jumps) else hi
            if b == hi:
                w = min(width, (hi - nodes[-1][0]) / 2)
                nodes.append((hi - w, level))
                nodes.append((hi, level + j))
            else:
                w = min(width, (nxt - b) / 2, (hi - b) / 2)
                if nodes[-1][0] < b:
                    nodes.append((b, level))
                level += j
                nodes.append((b + w, level))
        if nodes[-1][0] < hi:
            nodes.append((hi, level))
        xs, ys = zip(*nodes)
        return _PwLinear(xs, ys)

    def midpoint_pl(self, edge_width: Fraction) -> _PwLinear:
        """Continuous version interpolating the piece values at the piece
        midpoints, ramped to zero inside the support at both edges."""
        mids = [
            ((x0 + x1) / 2, v)
            for x0, x1, v in zip(self.xs, self.xs[1:], self.vals)
        ]
        lo, hi = self.xs[0], self.xs[-1]
        w_lo = min(edge_width, (mids[0][0] - lo) / 2)
        w_hi = min(edge_width, (hi - mids[-1][0]) / 2)
        nodes = [(lo, Fraction(0)), (lo + w_lo, self.vals[0])]
        nodes += mids
        nodes += [(hi - w_hi, self.vals[-1]), (hi, Fraction(0))]
        xs, ys = [], []
        for x, y in nodes:
            if xs and x <= xs[-1]:
                continue
            xs.append(x)
            ys.append(y)
        return _PwLinear(tuple(xs), tuple(ys))


def _metric(weight_order: Optional[int], x: float) -> float:
    """Error metric at a point: 1 (sup norm) or the order-k weight."""
    return 1.0 if weight_order is None else weight(x, weight_order)


def _spread(weight_order: Optional[int], b: float) -> float:
    """Worst metric value to the right of b (integration carries local
    derivative errors rightward, so that is where a ramp's lump lands)."""
    if weight_order is None or b <= 0:
        return 1.0
    return weight(b, weight_order)


def _initial_knots(
    lo: Fraction, hi: Fraction, cfg: CompactApproxConfig, weight_order: Optional[int]
) -> list[Fraction]:
    base = max(2, cfg.base_knot_count - 1)
    knots = [lo + (hi - lo) * i / base for i in range(base + 1)]
    if weight_order is not None:
        # Weighted runs can span enormous windows; seed extra knots
        # uniformly in the compactified chart so the region where the
        # weight is not negligible starts resolved.
        for u in np.linspace(to_unit(float(lo)), to_unit(float(hi)), 129)[1:-1]:
            x = Fraction(float(u)) / (1 - abs(Fraction(float(u))))
            if lo < x < hi:
                knots.append(x)
    return sorted(set(knots))


def _sample_values(f: TargetFunction, xs: list[Fraction]) -> list[Fraction]:
    samples = f.sample(np.array([float(x) for x in xs]))
    if not np.all(np.isfinite(samples)):
        raise ValueError("target produced a non-finite value inside its support")
    return [Fraction(float(v)) for v in samples]


def _interpolate_target(
    f: TargetFunction,
    lo: Fraction,
    hi: Fraction,
    sup_budget: float,
    cfg: CompactApproxConfig,
    weight_order: Optional[int] = None,
) -> _PwLinear:
    """Piecewise-linear pre-interpolation of a black-box target.

    Sup-norm mode keeps the grid uniform (doubling until the measured
    midpoint deviation fits the budget): uniform pieces let downstream
    running-integral errors cancel instead of accumulate.  Weighted mode
    bisects only the violating pieces, so enormous windows spend knots
    only where the weight is not negligible.  End values are forced to
    exactly zero; a compactly supported continuous target vanishes there
    anyway, so this costs at most the boundary residue.
    """
    if isinstance(cfg.mollifier_width, (int, float)):
        span = hi - lo
        n = max(2, int(math.ceil(float(span) / float(cfg.mollifier_width))))
        xs = [lo + span * i / n for i in range(n + 1)]
        ys = _sample_values(f, xs)
        ys[0] = Fraction(0)
        ys[-1] = Fraction(0)
        return _PwLinear(tuple(xs), tuple(ys))
    if weight_order is None:
        n = max(2, cfg.base_knot_count - 1)
        while True:
            xs = [lo + (hi - lo) * i / n for i in range(n + 1)]
            ys = _sample_values(f, xs)
            ys[0] = Fraction(0)
            ys[-1] = Fraction(0)
            mids = np.array([float((a + b) / 2) for a, b in zip(xs, xs[1:])])
            fmid = f.sample(mids)
            pl_mid = np.array([float((a + b) / 2) for a, b in zip(ys, ys[1:])])
            deviation = float(np.max(np.abs(fmid - pl_mid)))
            if deviation <= sup_budget:
                return _PwLinear(tuple(xs), tuple(ys))
            if 2 * n > cfg.knot_cap:
                raise ApproximationBudgetError(
                    "interpolation knot cap reached before the budget was met",
                    achieved_deviation=deviation,
                    budget=sup_budget,
                    knots=n + 1,
                )
            n *= 2
    xs = _initial_knots(lo, hi, cfg, weight_order)
    ys = _sample_values(f, xs)
    ys[0] = Fraction(0)
    ys[-1] = Fraction(0)
    for _ in range(64):
        mids = [(a + b) / 2 for a, b in zip(xs, xs[1:])]
        fmid = f.sample(np.array([float(m) for m in mids]))
        if not np.all(np.isfinite(fmid)):
            raise ValueError("target produced a non-finite value inside its support")
        pl_mid = np.array([float((a + b) / 2) for a, b in zip(ys, ys[1:])])
        metric = np.array([_metric(weight_order, float(m)) for m in mids])
        dev = np.abs(fmid - pl_mid) * metric
        viol = dev > sup_budget
        if not viol.any():
            return _PwLinear(tuple(xs), tuple(ys))
        if len(xs) + int(viol.sum()) > cfg.knot_cap:
            raise ApproximationBudgetError(
                "interpolation knot cap reached before the budget was met",
                achieved_deviation=float(dev.max()),
                budget=sup_budget,
                knots=len(xs),
            )
        new_xs: list[Fraction] = []
        new_ys: list[Fraction] = []
        for i, x in enumerate(xs[:-1]):
            new_xs.append(x)
            new_ys.append(ys[i])
            if viol[i]:
                new_xs.append(mids[i])
                new_ys.append(Fraction(float(fmid[i])))
        new_xs.append(xs[-1])
        new_ys.append(ys[-1])
        xs, ys = new_xs, new_ys
    return _PwLinear(tuple(xs), tuple(ys))


def _ramp_widths(
    d: _PwConst, run_budget: float, weight_order: Optional[int]
) -> list[Fraction]:
    """Per-jump ramp widths for :meth:`_PwConst.ramped`.

    Sup-norm mode uses one shared width (budget over total variation,
    floored so coefficients stay small enough for clean float64
    cancellation; a shared width also lets alternating jump lumps cancel
    in the running integral).  Weighted mode shares the budget per jump
    in the rightward-spread metric, so jumps sitting far out in the
    weight's tail may ramp over wide, well-conditioned bands.
    """
    jumps = d.jumps()
    if weight_order is None:
        tv = float(d.total_variation())
        span = float(d.xs[-1] - d.xs[0])
        w = Fraction(max(run_budget / max(tv, 1e-300), span * 1e-7, 1e-300))
        return [w] * len(jumps)
    n = max(1, sum(1 for _, j in jumps if j != 0))
    widths: list[Fraction] = []
    for b, j in jumps:
        if j == 0:
            widths.append(Fraction(0))
            continue
        bf = float(b)
        share = run_budget / (n * abs(float(j)) * max(_spread(weight_order, bf), 1e-300))
        floor = max(1.0, abs(bf)) * 1e-7
        widths.append(Fraction(max(share, floor)))
    return widths


def _approx_jump_density(
    k: int,
    d: _PwConst,
    run_budget: float,
    cfg: CompactApproxConfig,
    depth: int,
    weight_order: Optional[int],
) -> KReluNetwork:
    """Order-k network whose running integral tracks that of ``d``.

    The contract is on sup_t |integral_{-inf}^t (d - psi)| (in the error
    metric), which is what the caller's integration step turns into a
    sup-norm error.  At order 1 the step function is ramped (exactly
    representable); at higher orders the piece values are
    midpoint-interpolated into a continuous piecewise-linear profile and
    that profile is approximated at order k.
    """
    tv = float(d.total_variation())
    if tv == 0.0:
        return KReluNetwork(k)
    if k == 1:
        return d.ramped(_ramp_widths(d, run_budget, weight_order)).to_network()
    edge = max(abs(float(d.vals[0])), abs(float(d.vals[-1])), 1e-300)
    edge_w = Fraction(run_budget / (4.0 * edge))
    profile = d.midpoint_pl(edge_w)
    span = float(d.xs[-1] - d.xs[0])
    child_eps = run_budget / (2.0 * max(1.0, span))
    return _approx_continuous(k, profile, child_eps, cfg, depth, weight_order)


def _approx_continuous(
    k: int,
    target: Union[_PwLinear, TargetFunction],
    eps: float,
    cfg: CompactApproxConfig,
    depth: int,
    weight_order: Optional[int],
) -> KReluNetwork:
    """Order-k approximation of a compactly supported continuous target."""
    if depth > cfg.max_recursion:
        raise ApproximationBudgetError(
            "order recursion exceeded max_recursion",
            depth=depth,
            max_recursion=cfg.max_recursion,
        )
    if isinstance(target, _PwLinear):
        profile = target
    else:
        lo, hi = target.support_hint  # validated by approx_compact
        budget = eps if k == 1 else eps / 2.0
        profile = _interpolate_target(
            target, Fraction(lo), Fraction(hi), budget, cfg, weight_order
        )
    if k == 1:
        return profile.to_network()
    d = profile.derivative()
    psi = _approx_jump_density(k - 1, d, eps / 4.0, cfg, depth + 1, weight_order)
    phi = integrate_network(psi)
    left, right = profile.xs[0], profile.xs[-1]
    residue = phi.eval_exact(right)
    if residue == 0:
        return phi
    if weight_order is None:
        corr = step(k, left, right)
    else:
        # Rise the cancellation step at the right end of the support:
        # that is where the weight metric is smallest, and the sup bound
        # |residue| * 1 holds wherever the rise sits.
        rise = min(Fraction(1), (right - left) / 4)
        corr = step(k, right - rise, right)
    return KReluNetwork(k, list(phi.terms) + list(corr.scaled(-residue).terms))


def approx_compact(
    f: TargetFunction,
    k: int,
    cfg: CompactApproxConfig,
    *,
    weight_order: Optional[int] = None,
) -> KReluNetwork:
    """Approximate a compactly supported continuous target at order k.

    Requires ``f.support_hint``; the returned network is supported inside
    that hull with exact rational zeros outside it.  The sup error scales
    with ``cfg.epsilon`` times a constant depending on the order and the
    support (measured, not proven; see the acceptance suite).

    ``weight_order`` switches the internal error metric from the plain
    sup norm to the order-k weighted one; the global pipeline uses this
    so that huge windows only spend effort where the weight is not
    negligible.
    """
    if f.support_hint is None:
        raise ValueError("approx_compact needs a compactly supported target "
                         "(support_hint is not set)")
    if k < 1:
        raise ValueError("order must be a positive integer")
    if k > cfg.max_recursion:
        raise ApproximationBudgetError(
            "requested order exceeds the recursion budget",
            order=k,
            max_recursion=cfg.max_recursion,
        )
    lo, hi = f.support_hint
    if not lo < hi:
        raise ValueError("support hull must have positive length")
    return _approx_continuous(k, f, cfg.epsilon, cfg, 1, weight_order)


# ---------------------------------------------------------------------------
# Global decomposition and assembly


@dataclass
class GlobalDecomposition:
    """Tail coefficients, windowed remainder target, and window radius."""

    beta_plus: float
    beta_minus: float
    remainder: TargetFunction
    window_radius: float


def _tail_generators(k: int, beta_plus: float, beta_minus: float) -> KReluNetwork:
    return KReluNetwork(
        k,
        [KReluTerm(beta_plus, 1, 0, k), KReluTerm(beta_minus, -1, 0, k)],
    )


def windowed_tail_residual(g0: TargetFunction, radius: float, k: int) -> float:
    """Measured sup of the weighted remainder outside [-radius, radius]."""
    cf = compactify(g0, k)
    u_r = to_unit(radius)
    us = np.concatenate(
        [np.linspace(-1.0, -u_r, 257), np.linspace(u_r, 1.0, 257)]
    )
    return float(np.max(cf.abs_values(us)))


def decompose(
    f: TargetFunction,
    k: int,
    *,
    tail_budget: Optional[float] = None,
    tail_tol: float = 1e-8,
    radius_cap_doublings: int = 34,
) -> GlobalDecomposition:
    """Split f into tail generators plus a remainder with vanishing tails.

    beta+ and beta- are the weighted tail limits of f.  The window radius
    starts at max(1, support bound) and doubles, when ``tail_budget`` is
    given, until the measured weighted residual beyond the radius fits.
    """
    tl = tail_limits(f, k, tail_tol)
    beta_minus, beta_plus = tl.left, tl.right
    gen = _tail_generators(k, beta_plus, beta_minus)
    if gen.terms:
        remainder = difference(f, gen)
    else:
        remainder = f
    r0 = 1.0
    if f.support_hint is not None:
        r0 = max(1.0, abs(f.support_hint[0]), abs(f.support_hint[1]))
    radius = r0
    if tail_budget is not None:
        for _ in range(radius_cap_doublings):
            if windowed_tail_residual(remainder, radius, k) <= tail_budget:
                break
            radius *= 2.0
    return GlobalDecomposition(beta_plus, beta_minus, remainder, radius)


def window_remainder(g0: TargetFunction, radius: float, k: int) -> TargetFunction:
    """Truncate g0 to [-R, R] with linear tapers to zero over one unit."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    r = float(radius)
    g_right = g0.evaluator(r)
    g_left = g0.evaluator(-r)

    def evaluator(x: float) -> float:
        if -r <= x <= r:
            return g0.evaluator(x)
        if r < x <= r + 1.0:
            return g_right * (1.0 - (x - r))
        if -r - 1.0 <= x < -r:
            return g_left * (x + r + 1.0)
        return 0.0

    def array_evaluator(xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        inner = np.abs(xs) <= r
        out = np.zeros_like(xs)
        if inner.any():
            out[inner] = g0.sample(xs[inner])
        right = (xs > r) & (xs <= r + 1.0)
        out[right] = g_right * (1.0 - (xs[right] - r))
        left = (xs < -r) & (xs >= -r - 1.0)
        out[left] = g_left * (xs[left] + r + 1.0)
        return out

    return TargetFunction(
        evaluator=evaluator,
        order_hint=k,
        support_hint=(-r - 1.0, r + 1.0),
        array_evaluator=array_evaluator,
    )


@dataclass
class ApproxReport:
    """Constructed network plus measured provenance."""

    network: KReluNetwork = field(repr=False)
    k: int
    epsilon: float
    beta_plus: float
    beta_minus: float
    window_radius: float
    term_count: int
    weighted_error: WeightedNormEstimate
    sup_error_on_window: float
    error_curve: list[tuple[float, float, float, float]] = field(repr=False)
    success: bool = False


def _measure(
    f: TargetFunction, net: KReluNetwork, k: int, radius: float, epsilon: float
) -> tuple[WeightedNormEstimate, float, list[tuple[float, float, float, float]]]:
    resid = difference(f, net)
    est = weighted_norm(
        resid,
        k,
        refine_until=max(epsilon / 20.0, 1e-9),
        initial_nodes=257,
        seed_points=[-radius - 1.0, -radius, 0.0, radius, radius + 1.0],
    )
    xs = np.linspace(-radius - 1.0, radius + 1.0, 20001)
    fx = f.sample(xs)
    nx = net.eval_many(xs)
    sup_window = float(np.max(np.abs(fx - nx)))
    curve_x = np.linspace(-radius - 2.0, radius + 2.0, 1601)
    cf = f.sample(curve_x)
    cn = net.eval_many(curve_x)
    wts = 1.0 / (1.0 + np.abs(curve_x) ** k)
    curve = [
        (float(a), float(b), float(c), float(abs(b - c) * w))
        for a, b, c, w in zip(curve_x, cf, cn, wts)
    ]
    return est, sup_window, curve


def approx_global(
    f: TargetFunction,
    k: int,
    epsilon: float,
    cfg: Optional[CompactApproxConfig] = None,
    *,
    max_attempts: int = 4,
) -> ApproxReport:
    """Whole-line approximation: tail generators + windowed compact part.

    Success means the measured weighted-error lower bound of the
    assembled network is within ``epsilon`` and the norm refinement
    converged.  On a miss the window is widened (when the worst point
    sits beyond the window) or the compact budget halved, a few times;
    the final report is returned either way, flagged accordingly.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    dec = decompose(
        f, k, tail_budget=epsilon / 4.0, tail_tol=min(1e-8, epsilon / 1000.0)
    )
    compact_eps = cfg.epsilon if cfg is not None else epsilon / 2.0
    base_cfg = cfg or CompactApproxConfig(epsilon=compact_eps)
    radius = dec.window_radius
    gen_terms = list(_tail_generators(k, dec.beta_plus, dec.beta_minus).terms)

    best: Optional[tuple[float, KReluNetwork, WeightedNormEstimate, float, list]] = None
    for _ in range(max_attempts):
        windowed = window_remainder(dec.remainder, radius, k)
        attempt_cfg = CompactApproxConfig(
            epsilon=compact_eps,
            mollifier_width=base_cfg.mollifier_width,
            base_knot_count=base_cfg.base_knot_count,
            max_recursion=base_cfg.max_recursion,
            knot_cap=base_cfg.knot_cap,
        )
        compact_part = approx_compact(windowed, k, attempt_cfg, weight_order=k)
        net = KReluNetwork(k, gen_terms + list(compact_part.terms))
        est, sup_window, curve = _measure(f, net, k, radius, epsilon)
        if best is None or est.lower_bound < best[0]:
            best = (est.lower_bound, net, est, sup_window, curve)
        if est.lower_bound <= epsilon and not est.unconverged:
            break
        if math.isfinite(est.argmax_x) and abs(est.argmax_x) <= radius + 1.0:
            compact_eps /= 2.0
        else:
            radius *= 2.0
    lower, net, est, sup_window, curve = best
    return ApproxReport(
        network=net,
        k=k,
        epsilon=epsilon,
        beta_plus=dec.beta_plus,
        beta_minus=dec.beta_minus,
        window_radius=radius,
        term_count=len(net.terms),
        weighted_error=est,
        sup_error_on_window=sup_window,
        error_curve=curve,
        success=bool(est.lower_bound <= epsilon and not est.unconverged),
    )


# ---------------------------------------------------------------------------
# k-sigmoidal adapter


@dataclass(frozen=True)
class SigmoidalCheck:
    """Verdict of the k-sigmoidal limit test.

    ``verdict`` is "sigmoidal", "not-sigmoidal", or "undetermined"; a
    non-stabilizing limit can only produce "undetermined", never a false
    positive.  ``limits`` holds the stabilized values (None where the
    sampling did not settle).
    """

    verdict: str
    limits: tuple[Optional[float], Optional[float]]

    @property
    def is_sigmoidal(self) -> bool:
        return self.verdict == "sigmoidal"


def sigmoidal_check(
    sigma: Union[TargetFunction, Callable[[float], float]],
    k: int,
    *,
    limit_tol: float = 1e-6,
    stab_tol: float = 1e-8,
    m_end: int = 48,
) -> SigmoidalCheck:
    """Test whether sigma(x)/x^k tends to 0 at -inf and 1 at +inf."""
    if k < 0:
        raise ValueError("order must be nonnegative")
    ev = sigma.evaluator if isinstance(sigma, TargetFunction) else sigma

    def ratio(x: float) -> float:
        return ev(x) / x**k if k else ev(x)

    limits: list[Optional[float]] = [None, None]
    for idx, side in enumerate((-1, +1)):
        try:
            value, _, _ = _stabilized_limit(ratio, side, stab_tol, m_end)
        except TailDivergenceError:
            continue
        limits[idx] = value
    if limits[0] is None or limits[1] is None:
        return SigmoidalCheck("undetermined", tuple(limits))
    ok = abs(limits[0]) <= limit_tol and abs(limits[1] - 1.0) <= limit_tol
    return SigmoidalCheck("sigmoidal" if ok else "not-sigmoidal", tuple(limits))


@dataclass(frozen=True)
class SigmoidalTermSubstitution:
    """One replaced term: coefficient * sigma(scale * x + shift)."""

    coefficient: float
    scale: float
    shift: float


@dataclass(frozen=True)
class SigmoidalExpansion:
    terms: tuple[SigmoidalTermSubstitution, ...]
    achieved_error: float
    converged: bool
    scales: tuple[float, ...]


def substitution_error(
    term: KReluTerm,
    sigma: TargetFunction,
    region: tuple[float, float],
    a: float,
    grid_points: int = 4097,
) -> float:
    """Sup error on the region of replacing one truncated-power term by
    coefficient * sigma(a * s * (x - t)) / a^k."""
    xs = np.linspace(region[0], region[1], grid_points)
    k = term.order
    c = float(term.coefficient)
    s = float(term.orientation)
    t = float(term.knot)
    ref = c * np.maximum(s * (xs - t), 0.0) ** k
    cand = c * sigma.sample(a * s * (xs - t)) / a**k
    return float(np.max(np.abs(cand - ref)))


def sigmoidal_substitute(
    net: KReluNetwork,
    sigma: TargetFunction,
    region: tuple[float, float],
    tol: float,
    *,
    scale_cap: float = 2.0**40,
    grid_points: int = 4097,
) -> SigmoidalExpansion:
    """Replace each network term by a scaled sigma ridge on a region.

    Scales double from 1 until each term's measured sup error fits its
    share tol/term_count; the expansion and the measured total error are
    returned.  A term that cannot fit before ``scale_cap`` marks the
    expansion unconverged (sigma approaches its limits too slowly for
    this region), with the best scales kept.
    """
    if not region[0] < region[1]:
        raise ValueError("region must have positive length")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not net.terms:
        return SigmoidalExpansion((), 0.0, True, ())
    share = tol / len(net.terms)
    subs = []
    scales = []
    converged = True
    for term in net.terms:
        a = 1.0
        best_a, best_err = a, math.inf
        while True:
            err = substitution_error(term, sigma, region, a, grid_points)
            if err < best_err:
                best_a, best_err = a, err
            if err <= share:
                break
            if a >= scale_cap:
                converged = False
                break
            a *= 2.0
        a = best_a
        s = float(term.orientation)
        t = float(term.knot)
        subs.append(
            SigmoidalTermSubstitution(
                coefficient=float(term.coefficient) / a**net.order,
                scale=a * s,
                shift=-a * s * t,
            )
        )
        scales.append(a)
    xs = np.linspace(region[0], region[1], grid_points)
    total = np.zeros_like(xs)
    for sub in subs:
        total += sub.coefficient * sigma.sample(sub.scale * xs + sub.shift)
    achieved = float(np.max(np.abs(total - net.eval_many(xs))))
    return SigmoidalExpansion(tuple(subs), achieved, converged, tuple(scales))
