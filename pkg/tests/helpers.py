"""Shared numerical oracles for the test suite."""
import math

import numpy as np

from linrx.ensembles import mellin_omega
from linrx.quadrature import quad_adaptive


def scale_points(spec):
    """Break points at multiples of the weight's mean, for unbounded supports."""
    if math.isfinite(spec.support):
        return None
    sc = mellin_omega(spec, 2) / mellin_omega(spec, 1)
    return [sc * k for k in (0.01, 0.1, 0.5, 1, 2, 5, 10, 30)]


def integrate_with_l1(spec, f, tol=1e-11):
    """``(int f, int |f|)`` over the support of ``spec``.

    The signed integral is computed to ``tol`` relative to ``int |f|``, which
    is the best float64 can do when ``f`` cancels.
    """
    pts = scale_points(spec)
    l1, _ = quad_adaptive(lambda x: np.abs(f(x)), 0.0, spec.support, 1e-9, points=pts)
    if l1 == 0:
        return 0.0, 0.0
    v, _ = quad_adaptive(lambda x: f(x) / l1, 0.0, spec.support, tol, points=pts)
    return v * l1, l1
