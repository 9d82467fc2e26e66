"""Selects the batch-evaluation backend at import time.

The compiled extension is preferred; the numpy fallback is used when the
extension is missing or when ``KRAM_PURE_PYTHON`` is set (handy for
benchmarking the two against each other).
"""

from __future__ import annotations

import os

if os.environ.get("KRAM_PURE_PYTHON"):
    from kram import _eval_fallback as _impl

    BACKEND = "python"
else:
    try:
        from kram import _evalcore as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from kram import _eval_fallback as _impl

        BACKEND = "python"

eval_batch = _impl.eval_batch
