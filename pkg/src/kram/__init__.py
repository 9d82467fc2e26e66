"""Two-layer truncated-power (k-ReLU) networks on the real line.

Construction, exact identity verification, weighted sup-norm estimation
over the compactified line, and constructive approximation of targets in
the weighted-limit class, plus a k-sigmoidal substitution adapter.
"""

from kram._backend import BACKEND
from kram.exact import (
    Polynomial,
    Rational,
    binomial,
    constant_identity_value,
    vanishing_identity_residual,
)
from kram.network import (
    KReluNetwork,
    KReluTerm,
    bump,
    canonicalize,
    differentiate_network,
    integrate_network,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Rational",
    "Polynomial",
    "binomial",
    "vanishing_identity_residual",
    "constant_identity_value",
    "KReluTerm",
    "KReluNetwork",
    "canonicalize",
    "bump",
    "step",
    "integrate_network",
    "differentiate_network",
    "__version__",
]
