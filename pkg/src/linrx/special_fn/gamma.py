"""Log-gamma, digamma and harmonic numbers."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special as sp

from ..errors import PoleAtNonpositiveInteger

EULER_GAMMA = 0.57721566490153286060651209008240243


def _is_pole(z):
    z = np.asarray(z)
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex ``z`` (scalar or array).

    Backed by :func:`scipy.special.loggamma`.  Non-positive integers raise
    :class:`PoleAtNonpositiveInteger`.
    """
    zc = np.asarray(z, dtype=complex)
    if np.any(_is_pole(zc)):
        raise PoleAtNonpositiveInteger(f"log_gamma has a pole at {z!r}")
    out = sp.loggamma(zc)
    return complex(out) if np.ndim(out) == 0 else out


def digamma(x):
    """Psi(x) = d/dx log Gamma(x) for real x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise ValueError(f"digamma is only provided for x > 0, got {x!r}")
    out = sp.digamma(xa)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def harmonic_number(n):
    """Exact H_n = 1 + 1/2 + ... + 1/n as a Fraction (H_0 = 0)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return sum((Fraction(1, k) for k in range(1, n + 1)), Fraction(0))


def euler_plus_digamma(n):
    """gamma_E + Psi(n) for a positive integer n, returned as H_{n-1} in float.

    The closed form avoids the cancellation between gamma_E and Psi(n).
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    return float(harmonic_number(int(n) - 1))
