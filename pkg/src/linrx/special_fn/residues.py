"""Residue-series evaluation of the Meijer G-function.

The contour is closed to the right, so ``G = -sum Res`` over the right-hand
poles.  Coinciding poles (repeated parameters, parameters differing by
integers) are handled by expanding every factor as ``sign * eps^e * exp(series)``
around the pole and reading off the ``eps^{-1}`` coefficient.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from ..errors import InadmissibleParameters, PrecisionLoss

_ROOT_TOL = 1e-9
_EPS = np.finfo(float).eps
_MAX_POLES = 4000


def _is_nonpos_int(z):
    return z < 0.5 and abs(z - round(z)) < _ROOT_TOL


def _log_series_linear(q, order):
    """log|q + u| as a Taylor series in u, and sign(q)."""
    coeffs = np.zeros(order + 1)
    coeffs[0] = math.log(abs(q))
    n = np.arange(1, order + 1)
    coeffs[1:] = (-1.0) ** (n + 1) / (n * q ** n)
    return coeffs, math.copysign(1.0, q)


def _log_series_gamma_pos(w, order):
    """log Gamma(w + u), w > 0."""
    coeffs = np.zeros(order + 1)
    coeffs[0] = sp.gammaln(w)
    if order >= 1:
        coeffs[1] = sp.digamma(w)
    for n in range(2, order + 1):
        coeffs[n] = sp.polygamma(n - 1, w) / math.factorial(n)
    return coeffs


def _gamma_factor(z0, order):
    """Expansion of Gamma(z0 + u) as (e, sign, log-series in u)."""
    if _is_nonpos_int(z0):
        k = int(round(-z0))
        coeffs = _log_series_gamma_pos(1.0, order)
        sign = 1.0
        for i in range(k):
            c, s = _log_series_linear(float(i - k), order)
            coeffs -= c
            sign *= s
        return -1, sign, coeffs
    shift = max(0, math.ceil(1.0 - z0))
    coeffs = _log_series_gamma_pos(z0 + shift, order)
    sign = 1.0
    for i in range(shift):
        c, s = _log_series_linear(z0 + i, order)
        coeffs -= c
        sign *= s
    return 0, sign, coeffs


def _flip(coeffs, direction):
    """Substitute u = direction * eps."""
    if direction > 0:
        return coeffs
    return coeffs * (-1.0) ** np.arange(coeffs.size)


def _exp_series(coeffs, order):
    """Taylor coefficients of exp(sum_{n>=1} coeffs[n] eps^n)."""
    out = np.zeros(order + 1)
    out[0] = 1.0
    for n in range(1, order + 1):
        k = np.arange(1, n + 1)
        out[n] = np.dot(k * coeffs[1 : n + 1], out[n - k]) / n
    return out


def _pole_order(st, s0):
    e = 0
    for c in st.right:
        e -= _is_nonpos_int(c - s0)
    for p in st.left:
        e -= _is_nonpos_int(p + s0)
    for b in st.right_den:
        e += _is_nonpos_int(b - s0)
    for p in st.left_den:
        e += _is_nonpos_int(p + s0)
    for q, sg, pw in zip(st.lin_const, st.lin_coef, st.lin_pow):
        if abs(q + sg * s0) < _ROOT_TOL:
            e += int(pw)
    return e


def _residue_poly(st, s0):
    """``-Res`` of the integrand times ``x^s`` at ``s0`` as ``x^s0 * sum_k coef[k] (ln x)^k``.

    Returns ``(coef, m, cond)``: ``m`` is the pole order (``coef`` empty when
    ``s0`` is not a pole) and ``cond`` the relative condition number of the
    term with respect to rounding of the gamma arguments and log-gamma values,
    so that its rounding error is about ``eps * cond * |term|``.
    """
    e_tot = _pole_order(st, s0)
    if e_tot >= 0:
        return np.zeros(0), 0, 0.0
    m = -e_tot
    order = m - 1
    total = np.zeros(order + 1)
    sign = 1.0
    cond = 0.0

    def gamma(z0, base):
        nonlocal cond
        e, s, co = _gamma_factor(z0, order)
        if not e:
            # Gamma(z0) with z0 carrying an absolute rounding error ~ eps*(|base|+|s0|)
            cond += abs(sp.digamma(z0)) * (abs(base) + abs(s0)) + abs(co[0])
        return e, s, co

    for c in st.right:
        e, s, co = gamma(c - s0, c)
        sign *= s * (-1.0 if e else 1.0)  # 1/u = -1/eps for u = -eps
        total = total + _flip(co, -1)
    for p in st.left:
        e, s, co = gamma(p + s0, p)
        sign *= s
        total = total + co
    for b in st.right_den:
        e, s, co = gamma(b - s0, b)
        sign *= s * (-1.0 if e else 1.0)
        total = total - _flip(co, -1)
    for p in st.left_den:
        e, s, co = gamma(p + s0, p)
        sign *= s
        total = total - co
    for q, sg, pw in zip(st.lin_const, st.lin_coef, st.lin_pow):
        q0 = q + sg * s0
        if abs(q0) < _ROOT_TOL:
            sign *= sg ** int(pw)
            continue
        co, s = _log_series_linear(q0, order)
        total = total + pw * _flip(co, sg)
        sign *= s ** int(abs(pw))
        cond += abs(pw) * (abs(q) + abs(s0)) / abs(q0)
    scale = -sign * math.exp(total[0])
    total[0] = 0.0
    series = _exp_series(total, order)
    # x^(s0 + eps) = x^s0 * sum_k (eps ln x)^k / k!
    coef = np.array([scale * series[order - k] / math.factorial(k) for k in range(order + 1)])
    return coef, m, cond + 8.0


def _term_and_error(s0, coef, cond, logx):
    """Value of one residue term and its rounding error, vectorised over ``logx``."""
    logx = np.asarray(logx, dtype=float)
    xs0 = np.exp(s0 * logx)
    value = xs0 * np.polynomial.polynomial.polyval(logx, coef)
    bound = xs0 * np.polynomial.polynomial.polyval(np.abs(logx), np.abs(coef))
    return value, _EPS * bound * (cond + np.abs(s0 * logx))


def _residue_term(st, s0, logx):
    """-Res of the integrand times x^s at s0, its pole order and rounding error."""
    coef, m, cond = _residue_poly(st, s0)
    if m == 0:
        return 0.0, 0, 0.0
    v, e = _term_and_error(s0, coef, cond, logx)
    return float(v), m, float(e)


def _right_poles(st, count):
    poles = set()
    for c in st.right:
        poles.update(round(c + k, 9) for k in range(count))
    for q, sg, pw in zip(st.lin_const, st.lin_coef, st.lin_pow):
        if sg < 0 and pw < 0:
            poles.add(round(q, 9))
    return sorted(poles)


def residue_series(params, x):
    """Sum the right-hand residues of the G-function integrand at ``x``."""
    from .meijer import EvalDiagnostics, _analyse

    st = _analyse(params)
    if not st.left_max < st.right_min:
        raise InadmissibleParameters(f"no separating contour for {params}")
    n_up = len(params.a) + len(params.b)
    n_lo = len(params.c) + len(params.d)
    if n_lo < n_up or (n_lo == n_up and x >= 1.0):
        raise InadmissibleParameters(f"residue series of {params} diverges at x={x:g}")
    logx = math.log(x)
    total = 0.0
    abs_total = 0.0
    round_err = 0.0
    small = 0
    count = 0
    exhausted = False
    poles = _right_poles(st, 200)
    i = 0
    while True:
        if i >= len(poles):
            if not st.right.size:
                exhausted = True
                break
            poles = _right_poles(st, 2 * len(poles) + 200)
            poles = [p for p in poles if p > last]
            i = 0
            if not poles:
                break
        s0 = poles[i]
        last = s0
        i += 1
        term, m, term_err = _residue_term(st, s0, logx)
        if m == 0:
            continue
        count += 1
        total += term
        abs_total += abs(term)
        round_err += term_err
        if abs(term) <= 1e-17 * max(abs(total), 1e-300) or abs(term) < 1e-300:
            small += 1
            if small >= 4:
                break
        else:
            small = 0
        if count >= _MAX_POLES:
            raise PrecisionLoss(f"residue series of {params} did not converge at x={x:g}", value=total, error=abs(term))
    err = round_err + 16.0 * _EPS * abs_total + (abs(term) if count and not exhausted else 0.0)
    if err > max(1e-10, 1e-8 * abs(total)):
        raise PrecisionLoss(
            f"residue series of {params} at x={x:g} lost precision ({err:.2e})", value=total, error=err
        )
    return total, EvalDiagnostics("residue-series", count, err)


def finite_residue_sum(params, xs):
    """Exact residue sum for integrands with finitely many right-hand poles.

    Vectorised over ``xs``; returns ``(values, errors, scales)`` where
    ``scales`` is ``sum |terms|``.  Valid where the contour may be
    closed to the right (``x < 1`` for balanced classes).
    """
    from .meijer import _analyse

    st = _analyse(params)
    if st.right.size:
        raise ValueError(f"{params} has infinitely many right-hand poles")
    logx = np.log(np.asarray(xs, dtype=float))
    total = np.zeros_like(logx)
    abs_total = np.zeros_like(logx)
    err = np.zeros_like(logx)
    for s0 in _right_poles(st, 0):
        coef, m, cond = _residue_poly(st, s0)
        if m == 0:
            continue
        term, e = _term_and_error(s0, coef, cond, logx)
        total += term
        abs_total += np.abs(term)
        err += e
    return total, err + 16.0 * _EPS * abs_total, abs_total


def limit_at_zero(params):
    """``lim_{x -> 0+} G(x)``: 0, a finite constant, or ``inf``.

    Governed by the leftmost right-hand pole ``s0``: the limit is 0 for
    ``s0 > 0``, minus the residue for a simple pole at 0 and divergent
    (``x^{s0}`` or ``log x``) otherwise.
    """
    from .meijer import _analyse

    st = _analyse(params)
    s0 = st.right_min
    if math.isinf(s0) or s0 > _ROOT_TOL:
        return 0.0
    if s0 < -_ROOT_TOL:
        return math.inf
    term, m, _ = _residue_term(st, 0.0, 0.0)
    if m == 0:
        return 0.0
    return term if m == 1 else math.copysign(math.inf, term)
