"""MIMO nonlinear precoding laboratory.

Implements zero-forcing, vector perturbation (full and degree-K), and
constellation-oriented perturbation (plain and widely linear) for the
multiuser MIMO downlink, together with a modulo receiver and a reproducible
Monte Carlo symbol-error-rate harness.
"""

from coplab.errors import (
    DimensionCap,
    SingularMatrix,
    UnsupportedModulation,
    ZeroBlock,
)

__all__ = [
    "DimensionCap",
    "SingularMatrix",
    "UnsupportedModulation",
    "ZeroBlock",
]

__version__ = "0.1.0"
