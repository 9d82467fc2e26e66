"""Pure-Python (numpy) fallback for the batch term-sum evaluator.

Same contract as the compiled kernel in ``_evalcore.pyx``.  Points are
processed in chunks to bound the broadcast buffer; for large term counts
the per-term contributions are accumulated with a Kahan-compensated
vector loop instead of one big ``sum`` so that the heavy cancellation of
alternating-coefficient networks stays controlled.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 4096
_PLAIN_SUM_MAX_TERMS = 64


def eval_batch(
    xs: np.ndarray,
    coeffs: np.ndarray,
    signs: np.ndarray,
    knots: np.ndarray,
    k: int,
    out: np.ndarray,
) -> None:
    if out.shape != xs.shape or not (len(coeffs) == len(signs) == len(knots)):
        raise ValueError("mismatched array lengths")
    if k < 1:
        raise ValueError("order must be >= 1")
    m = len(coeffs)
    if m == 0:
        out[:] = 0.0
        return
    for start in range(0, len(xs), _CHUNK):
        chunk = xs[start : start + _CHUNK]
        if m <= _PLAIN_SUM_MAX_TERMS:
            d = signs[np.newaxis, :] * (chunk[:, np.newaxis] - knots[np.newaxis, :])
            np.maximum(d, 0.0, out=d)
            contrib = coeffs[np.newaxis, :] * d**k
            out[start : start + len(chunk)] = contrib.sum(axis=1)
        else:
            acc = np.zeros(len(chunk))
            comp = np.zeros(len(chunk))
            for j in range(m):
                d = signs[j] * (chunk - knots[j])
                np.maximum(d, 0.0, out=d)
                contrib = coeffs[j] * d**k
                y = contrib - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
            out[start : start + len(chunk)] = acc
