"""File formats: kram-net/1 and kram-report/1 JSON, and the CSV curves.

Decimal strings use Python's shortest round-trip repr.  Term fields
carry optional exact rational companions (``c_exact``/``knot_exact`` as
{"num", "den"} string pairs) whenever the in-memory value is rational,
so rational networks survive a save/load bit-exactly.  Non-finite floats
(an argmax at infinity) are encoded as the strings "inf"/"-inf" to stay
inside strict JSON.  Output is deterministic: fixed key order, two-space
indent, LF newlines.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Union

from kram.construct import ApproxReport
from kram.network import KReluNetwork, KReluTerm
from kram.space import WeightedNormEstimate, to_unit, weight

NETWORK_FORMAT = "kram-net/1"
REPORT_FORMAT = "kram-report/1"

__all__ = [
    "NETWORK_FORMAT",
    "REPORT_FORMAT",
    "network_to_json",
    "network_from_json",
    "save_network",
    "load_network",
    "norm_estimate_to_json",
    "report_to_json",
    "save_report",
    "dumps",
    "write_grid_csv",
    "write_error_curve_csv",
]


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _exact_pair(v) -> dict:
    f = Fraction(v)
    return {"num": str(f.numerator), "den": str(f.denominator)}


def _json_float(v: float):
    v = float(v)
    if math.isfinite(v):
        return v
    if math.isnan(v):
        return "nan"
    return "inf" if v > 0 else "-inf"


def _term_to_json(t: KReluTerm) -> dict:
    d = {
        "c": repr(float(t.coefficient)),
        "orient": "+" if t.orientation == 1 else "-",
        "knot": repr(float(t.knot)),
    }
    if _is_exact(t.coefficient):
        d["c_exact"] = _exact_pair(t.coefficient)
    if _is_exact(t.knot):
        d["knot_exact"] = _exact_pair(t.knot)
    return d


def network_to_json(net: KReluNetwork) -> dict:
    return {
        "format": NETWORK_FORMAT,
        "k": net.order,
        "terms": [_term_to_json(t) for t in net.terms],
    }


def _value_from_json(decimal: str, exact: dict | None):
    if exact is not None:
        return Fraction(int(exact["num"]), int(exact["den"]))
    return float(decimal)


def network_from_json(data: dict) -> KReluNetwork:
    if data.get("format") != NETWORK_FORMAT:
        raise ValueError(
            f"not a {NETWORK_FORMAT} document (format={data.get('format')!r})"
        )
    k = int(data["k"])
    terms = []
    for td in data["terms"]:
        orient = {"+": 1, "-": -1}.get(td["orient"])
        if orient is None:
            raise ValueError(f"bad orientation {td['orient']!r}")
        terms.append(
            KReluTerm(
                _value_from_json(td["c"], td.get("c_exact")),
                orient,
                _value_from_json(td["knot"], td.get("knot_exact")),
                k,
            )
        )
    return KReluNetwork(k, terms, keep_zeros=True)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def save_network(net: KReluNetwork, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(network_to_json(net)), encoding="utf-8")


def load_network(path: Union[str, Path]) -> KReluNetwork:
    return network_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def norm_estimate_to_json(est: WeightedNormEstimate) -> dict:
    return {
        "lower_bound": _json_float(est.lower_bound),
        "upper_estimate": _json_float(est.upper_estimate),
        "argmax_x": _json_float(est.argmax_x),
        "grid_nodes": len(est.grid.nodes),
        "refinement_depth": est.grid.refinement_depth,
        "unconverged": est.unconverged,
    }


def report_to_json(rep: ApproxReport) -> dict:
    """kram-report/1 body; the error curve goes to CSV, not here."""
    return {
        "format": REPORT_FORMAT,
        "k": rep.k,
        "epsilon": _json_float(rep.epsilon),
        "success": rep.success,
        "beta_plus": _json_float(rep.beta_plus),
        "beta_minus": _json_float(rep.beta_minus),
        "window_radius": _json_float(rep.window_radius),
        "term_count": rep.term_count,
        "weighted_error": norm_estimate_to_json(rep.weighted_error),
        "sup_error_on_window": _json_float(rep.sup_error_on_window),
        "network": network_to_json(rep.network),
    }


def save_report(rep: ApproxReport, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(report_to_json(rep)), encoding="utf-8")


def _write_csv(path: Union[str, Path], header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_grid_csv(path: Union[str, Path], xs, fs, k: int) -> None:
    """Grid dump: x, u, f, weighted_f (weight of order k)."""
    rows = [
        (x, to_unit(float(x)), v, v * weight(float(x), k)) for x, v in zip(xs, fs)
    ]
    _write_csv(path, ["x", "u", "f", "weighted_f"], rows)


def write_error_curve_csv(path: Union[str, Path], rows) -> None:
    """Error curve: x, f, approx, weighted_err rows."""
    _write_csv(path, ["x", "f", "approx", "weighted_err"], rows)
