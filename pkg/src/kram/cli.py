"""Command-line surface.

Subcommands: verify-identities, bump, step, eval, norm, approx,
sigmoidal.  Exit status 0 on success, 1 on usage errors (bad flags,
unreadable files, unparsable expressions), 2 when a verification or
approximation fails; failures also emit a JSON diagnostic on stderr.
Outputs are deterministic byte-for-byte for identical inputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from kram import io as kio
from kram.construct import (
    ApproximationBudgetError,
    ApproxReport,
    CompactApproxConfig,
    _measure,
    approx_compact,
    approx_global,
    sigmoidal_check,
    sigmoidal_substitute,
)
from kram.exact import (
    Polynomial,
    alternating_power_sum,
    constant_identity_value,
    interpolate,
    vanishing_identity_residual,
)
from kram.expr import ExprSyntaxError, expression_target
from kram.network import bump, step
from kram.space import TailDivergenceError, weighted_norm

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        # Let values like "-10:10" or "-1.5" pass as arguments.
        import re

        self._negative_number_matcher = re.compile(r"^-\d")

    def error(self, message):  # keep argparse from sys.exit(2)
        raise _UsageError(message)


def _diag(payload: dict) -> None:
    sys.stderr.write(kio.dumps(payload))


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _parse_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    if not _:
        raise _UsageError(f"expected L:R, got {text!r}")
    lo_f, hi_f = float(lo), float(hi)
    if not lo_f < hi_f:
        raise _UsageError(f"range must satisfy L < R, got {text!r}")
    return lo_f, hi_f


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError(f"expected L:R:N, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not lo < hi or n < 2:
        raise _UsageError(f"grid needs L < R and N >= 2, got {text!r}")
    return lo, hi, n


def _cmd_verify_identities(args) -> int:
    rows = []
    all_ok = True
    for k in range(1, args.k_max + 1):
        residual = vanishing_identity_residual(k)
        constant = constant_identity_value(k)
        # Independent route: evaluate the defining sums at k+2 rational
        # points and interpolate; must reproduce the expansions exactly.
        pts_v = [Fraction(2 * i + 1, 2) for i in range(k + 2)]
        cross_v = interpolate([(x, alternating_power_sum(k, k + 1, x)) for x in pts_v])
        pts_c = [Fraction(3 * i + 1, 3) for i in range(k + 2)]
        cross_c = interpolate([(x, alternating_power_sum(k, k, x)) for x in pts_c])
        ok = (
            residual.is_zero()
            and cross_v.is_zero()
            and cross_c == Polynomial([constant])
        )
        all_ok &= ok
        rows.append(
            {
                "k": k,
                "constant": str(constant),
                "factorial": str(math.factorial(k)),
                "alternating_sign": str((-1) ** k),
                "residual_zero": residual.is_zero(),
                "cross_check": ok,
            }
        )
    header = f"{'k':>3}  {'constant':>14}  {'k!':>14}  {'(-1)^k':>7}  status"
    lines = [header, "-" * len(header)]
    for r in rows:
        status = "ok" if r["cross_check"] else "FAIL"
        lines.append(
            f"{r['k']:>3}  {r['constant']:>14}  {r['factorial']:>14}"
            f"  {r['alternating_sign']:>7}  {status}"
        )
    lines.append(
        "note: the plateau constant derives to k! exactly; the oft-quoted"
        " (-1)^k disagrees already at k=1 (x - (x-1) = 1)."
    )
    print("\n".join(lines))
    if args.json:
        Path(args.json).write_text(kio.dumps({"identities": rows}), encoding="utf-8")
    if not all_ok:
        _diag({"error": "identity verification failed", "rows": rows})
        return 2
    return 0


def _cmd_bump(args) -> int:
    net = bump(args.k, Fraction(args.lo), Fraction(args.hi))
    _emit(kio.dumps(kio.network_to_json(net)), args.output)
    return 0


def _cmd_step(args) -> int:
    net = step(args.k, Fraction(args.lo), Fraction(args.hi))
    _emit(kio.dumps(kio.network_to_json(net)), args.output)
    return 0


def _cmd_eval(args) -> int:
    net = kio.load_network(args.net)
    if args.at is not None:
        print(repr(net(float(args.at))))
        return 0
    lo, hi, n = _parse_grid(args.grid)
    xs = np.linspace(lo, hi, n)
    fs = net.eval_many(xs)
    if args.csv:
        kio.write_grid_csv(args.csv, xs, fs, net.order)
    else:
        print("x,u,f,weighted_f")
        from kram.space import to_unit, weight

        for x, v in zip(xs, fs):
            print(f"{x!r},{to_unit(float(x))!r},{v!r},{v * weight(float(x), net.order)!r}")
    return 0


def _cmd_norm(args) -> int:
    f = expression_target(args.fn, args.k)
    est = weighted_norm(f, args.k, refine_until=args.tol)
    payload = {"fn": args.fn, "k": args.k, **kio.norm_estimate_to_json(est)}
    _emit(kio.dumps(payload), args.output)
    if args.csv:
        xs = [x for x in est.grid.xs() if math.isfinite(x)]
        fs = f.sample(np.array(xs))
        kio.write_grid_csv(args.csv, xs, fs, args.k)
    if est.unconverged:
        _diag({"error": "norm refinement hit the depth cap", **payload})
        return 2
    return 0


def _cmd_approx(args) -> int:
    support = _parse_range(args.support) if args.support else None
    f = expression_target(args.fn, args.k, support=support)
    if support is not None:
        lo, hi = support
        probes = np.concatenate(
            [np.linspace(lo - 1.0, lo - 1e-9, 7), np.linspace(hi + 1e-9, hi + 1.0, 7)]
        )
        worst = float(np.max(np.abs(f.sample(probes))))
        if worst > 1e-12:
            sys.stderr.write(
                f"warning: --support given but |f| reaches {worst:g} outside it\n"
            )
        net = approx_compact(f, args.k, CompactApproxConfig(epsilon=args.eps))
        radius = max(abs(lo), abs(hi))
        est, sup_window, curve = _measure(f, net, args.k, radius, args.eps)
        rep = ApproxReport(
            network=net,
            k=args.k,
            epsilon=args.eps,
            beta_plus=0.0,
            beta_minus=0.0,
            window_radius=radius,
            term_count=len(net.terms),
            weighted_error=est,
            sup_error_on_window=sup_window,
            error_curve=curve,
            success=bool(est.lower_bound <= args.eps and not est.unconverged),
        )
    else:
        rep = approx_global(f, args.k, args.eps)
    _emit(kio.dumps(kio.report_to_json(rep)), args.output)
    if args.curve:
        kio.write_error_curve_csv(args.curve, rep.error_curve)
    if not rep.success:
        _diag(
            {
                "error": "approximation missed the requested tolerance",
                "epsilon": args.eps,
                "weighted_error": kio.norm_estimate_to_json(rep.weighted_error),
            }
        )
        return 2
    return 0


def _cmd_sigmoidal(args) -> int:
    net = kio.load_network(args.net)
    sigma = expression_target(args.sigma, args.k)
    check = sigmoidal_check(sigma, args.k)
    if not check.is_sigmoidal:
        _diag(
            {
                "error": "sigma failed the sigmoidal limit check",
                "verdict": check.verdict,
                "limits": [None if v is None else v for v in check.limits],
            }
        )
        return 2
    lo, hi = _parse_range(args.region)
    expansion = sigmoidal_substitute(net, sigma, (lo, hi), args.tol)
    payload = {
        "sigma": args.sigma,
        "k": args.k,
        "region": [lo, hi],
        "tol": args.tol,
        "verdict": check.verdict,
        "converged": expansion.converged,
        "achieved_error": expansion.achieved_error,
        "terms": [
            {"coefficient": t.coefficient, "scale": t.scale, "shift": t.shift}
            for t in expansion.terms
        ],
        "scales": list(expansion.scales),
    }
    _emit(kio.dumps(payload), args.output)
    if not expansion.converged:
        _diag(
            {
                "error": "substitution scales capped before reaching tol",
                "achieved_error": expansion.achieved_error,
            }
        )
        return 2
    return 0


def _build_parser() -> _Parser:
    p = _Parser(prog="kram", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify-identities", help="exact identity suite")
    v.add_argument("--k-max", type=int, default=10)
    v.add_argument("--json", help="also write the table as JSON")
    v.set_defaults(func=_cmd_verify_identities)

    for name, fn, doc in (
        ("bump", _cmd_bump, "compactly supported network on [L, R]"),
        ("step", _cmd_step, "network rising 0 -> 1 across [L, R]"),
    ):
        s = sub.add_parser(name, help=doc)
        s.add_argument("--k", type=int, required=True)
        s.add_argument("--from", dest="lo", required=True)
        s.add_argument("--to", dest="hi", required=True)
        s.add_argument("-o", "--output")
        s.set_defaults(func=fn)

    e = sub.add_parser("eval", help="evaluate a saved network")
    e.add_argument("--net", required=True)
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--at", type=float)
    g.add_argument("--grid", help="L:R:N")
    e.add_argument("--csv")
    e.set_defaults(func=_cmd_eval)

    n = sub.add_parser("norm", help="weighted sup-norm estimate of an expression")
    n.add_argument("--fn", required=True)
    n.add_argument("--k", type=int, required=True)
    n.add_argument("--tol", type=float, default=1e-6)
    n.add_argument("-o", "--output")
    n.add_argument("--csv", help="grid dump CSV")
    n.set_defaults(func=_cmd_norm)

    a = sub.add_parser("approx", help="construct an approximating network")
    a.add_argument("--fn", required=True)
    a.add_argument("--k", type=int, required=True)
    a.add_argument("--eps", type=float, required=True)
    a.add_argument("--support", help="L:R -> compact pipeline")
    a.add_argument("-o", "--output")
    a.add_argument("--curve", help="error-curve CSV")
    a.set_defaults(func=_cmd_approx)

    s = sub.add_parser("sigmoidal", help="substitute a sigmoidal ridge per term")
    s.add_argument("--net", required=True)
    s.add_argument("--sigma", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--region", required=True, help="L:R")
    s.add_argument("--tol", type=float, required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=_cmd_sigmoidal)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"kram: {exc}\n")
        return 1
    except ExprSyntaxError as exc:
        sys.stderr.write(f"kram: expression error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"kram: file not found: {exc.filename}\n")
        return 1
    except TailDivergenceError as exc:
        _diag({"error": str(exc)})
        return 2
    except ApproximationBudgetError as exc:
        _diag({"error": str(exc), **exc.diagnostics})
        return 2
    except (ValueError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"kram: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
