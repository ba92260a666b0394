"""Working-precision policy for all extended-precision computations.

Everything that touches coefficient vectors runs under an mpmath precision
context.  Coefficient magnitudes of a degree-N power grow like exp(c*N), so
the default significand scales linearly with the degree.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager

from mpmath import mp

MIN_BITS = 128

# bits of headroom per coefficient degree; see default_bits
BITS_PER_DEGREE = 2.5


def default_bits(total_degree: int) -> int:
    """Default working precision (bits) for a polynomial of this degree.

    The environment variable HEATFLOW_PRECISION overrides the computed value.
    """
    env = os.environ.get("HEATFLOW_PRECISION")
    if env:
        return max(MIN_BITS // 2, int(env))
    return max(MIN_BITS, math.ceil(BITS_PER_DEGREE * total_degree))


def unit_roundoff(bits: int | None = None):
    """2^-bits at the given (or current) working precision."""
    if bits is None:
        bits = mp.prec
    return mp.mpf(2) ** (-bits)


@contextmanager
def working_prec(bits: int):
    """Temporarily set the mpmath significand size."""
    old = mp.prec
    mp.prec = int(bits)
    try:
        yield mp
    finally:
        mp.prec = old


class PrecisionExhausted(ArithmeticError):
    """Requested accuracy cannot be represented at the working precision."""
