"""Output-SINR densities and ergodic sum rates of linear ZF and MMSE receivers.

Every quantity has two independent routes:

* a *generic* route that only needs the correlation kernel ``K(x, y)`` of the
  ensemble (``K(0, .)`` for ZF, ``K(-1/delta, .)`` for MMSE) and integrates it
  numerically;
* a *specialised* route built from the weight ``omega`` of a Polya ensemble,
  usually a single Meijer G-function or a short sum of them.

Rates are in nats.  ``delta = E_s alpha / (n_t N_0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .ensembles import (
    EnsembleKind,
    EnsembleSpec,
    KernelHandle,
    kernel_handle,
    poly_p,
    weight_derivative,
    weight_omega,
    weight_params,
)
from .errors import ConfigError, ConsistencyError, InadmissibleParameters, MaxDepthExceeded, PrecisionLoss
from .quadrature import quad_adaptive
from .special_fn import MeijerGParams, euler_plus_digamma, meijer_g, meijer_g_many, mellin_omega

__all__ = [
    "Receiver",
    "ReceiverConfig",
    "DensityCurve",
    "SumRateResult",
    "zf_pdf_generic",
    "zf_pdf_specialized",
    "zf_sumrate",
    "zf_sumrate_generic",
    "mmse_pdf",
    "mmse_pdf_generic",
    "mmse_pdf_product",
    "mmse_pdf_polya",
    "mmse_sumrate",
    "mmse_sumrate_generic",
    "density_curve",
    "auto_ratio_grid",
    "CLOSED",
    "QUAD",
    "quad_adaptive",
]

CLOSED = "meijer_closed_form"
QUAD = "kernel_quadrature"


class Receiver(str, Enum):
    ZF = "zf"
    MMSE = "mmse"


@dataclass(frozen=True)
class ReceiverConfig:
    """Receiver type, effective power ``delta`` and stream index ``k`` (1-based).

    ``es``, ``n0`` and ``alpha`` are optional metadata; when ``es``, ``alpha``
    and ``n_t`` are all given, ``delta`` must equal ``es*alpha/(n_t*n0)``.
    """

    receiver: Receiver
    delta: float
    k: int = 1
    es: float | None = None
    n0: float = 1.0
    alpha: float | None = None
    n_t: int | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "receiver", Receiver(getattr(self.receiver, "value", self.receiver)))
        except ValueError:
            raise ConfigError(f"unknown receiver {self.receiver!r}", field="receiver") from None
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ConfigError(f"must be a positive finite number, got {self.delta!r}", field="delta")
        if self.k < 1 or (self.n_t is not None and self.k > self.n_t):
            raise ConfigError(f"stream index {self.k} out of range", field="k")
        if self.es is not None and self.es < 0:
            raise ConfigError("must be non-negative", field="es")
        if not self.n0 > 0:
            raise ConfigError("must be positive", field="n0")
        if None not in (self.es, self.alpha, self.n_t):
            expect = self.es * self.alpha / (self.n_t * self.n0)
            if not math.isclose(expect, self.delta, rel_tol=1e-12):
                raise ConfigError(f"{self.delta} != es*alpha/(n_t*n0) = {expect}", field="delta")

    @classmethod
    def from_power(cls, receiver, es, alpha, n_t, n0=1.0, k=1):
        return cls(receiver, es * alpha / (n_t * n0), k, es, n0, alpha, n_t)


@dataclass
class DensityCurve:
    """Tabulated SINR density ``rho(gamma)`` with per-point error estimates."""

    gamma: np.ndarray
    density: np.ndarray
    error: np.ndarray
    receiver: str
    delta: float
    sigma: float = 1.0
    method: str = ""
    ensemble: dict | None = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        self.error = np.asarray(self.error, dtype=float)
        if self.gamma.ndim != 1 or self.gamma.shape != self.density.shape:
            raise ValueError("gamma and density must be 1-D arrays of equal length")
        if np.any(self.gamma < 0) or np.any(np.diff(self.gamma) <= 0):
            raise ValueError("gamma grid must be non-negative and strictly increasing")
        if np.any(self.density < 0):
            raise ValueError("negative density value")

    def integral(self):
        return float(np.trapezoid(self.density, self.gamma))

    def cdf(self):
        """Cumulative trapezoid, rescaled so that it ends at 1 (tail correction)."""
        steps = 0.5 * np.diff(self.gamma) * (self.density[1:] + self.density[:-1])
        c = np.concatenate([[0.0], np.cumsum(steps)])
        return c / c[-1]

    def on_ratio_axis(self):
        """``(gamma/delta, delta*rho)``: the density of ``gamma/delta``."""
        return self.gamma / self.delta, self.density * self.delta


@dataclass
class SumRateResult:
    """Sum rate ``R`` in nats with per-stream contributions."""

    value: float
    per_stream: tuple
    method: str
    error: float
    notes: tuple = ()

    def __post_init__(self):
        self.notes = tuple(self.notes)
        self.per_stream = tuple(float(v) for v in self.per_stream)
        total = math.fsum(self.per_stream)
        if not math.isclose(total, self.value, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("sum rate does not equal the sum of its streams")

    @property
    def bits(self):
        return self.value / math.log(2.0)


def _as_spec_and_kernel(obj):
    if isinstance(obj, KernelHandle):
        return None, obj
    if isinstance(obj, EnsembleSpec):
        return obj, None
    raise TypeError(f"expected EnsembleSpec or KernelHandle, got {type(obj).__name__}")


def _handle(obj):
    spec, kern = _as_spec_and_kernel(obj)
    return kern if kern is not None else kernel_handle(spec)


def _scalar_or_array(out):
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _check_agreement(results, what):
    items = list(results.items())
    (na, a), (nb, b) = items[0], items[1]
    tol = max(1e-6 * max(abs(a.value), abs(b.value)), a.error + b.error, 1e-12)
    if abs(a.value - b.value) > tol:
        raise ConsistencyError(f"{what}: {na}={a.value!r} and {nb}={b.value!r} disagree beyond {tol:.2e}")


# ---------------------------------------------------------------------------
# ZF


def zf_pdf_generic(kernel, delta, sigma, gamma, *, tol=1e-10, with_error=False):
    """ZF SINR density from the kernel at the origin.

    ``rho(g) = (n_t-1) (sigma/delta) int_0^1 K(0, sigma g x/delta) (1-x)^{n_t-2} x dx``.
    """
    kern = _handle(kernel)
    n = kern.n_t
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    vals, errs = np.zeros(g.shape), np.zeros(g.shape)
    for i, gi in enumerate(g):
        if gi < 0:
            raise ValueError("gamma must be non-negative")
        scale = sigma * gi / delta

        def f(x):
            return kern.K0(scale * x) * (1.0 - x) ** (n - 2) * x

        points = [kern.support / scale] if scale > kern.support else None
        v, e = quad_adaptive(f, 0.0, 1.0, tol, points=points)
        if with_error:
            e += _evaluation_error(lambda x: kern.K0_with_error(scale * x)[1] * (1.0 - x) ** (n - 2) * x,
                                   0.0, 1.0, e, v, points)
        vals[i], errs[i] = (n - 1) * sigma / delta * v, (n - 1) * sigma / delta * e
    if np.ndim(gamma) == 0:
        vals, errs = float(vals[0]), float(errs[0])
    return (vals, errs) if with_error else vals


def zf_pdf_specialized(spec, delta, sigma, gamma):
    """ZF SINR density of a Polya ensemble: ``sigma/(delta M omega(1)) omega(sigma g/delta)``.

    The Gaussian ``M = 1`` case uses the elementary gamma law directly.
    """
    if not spec.is_polya:
        raise ConfigError("specialised formulas need a Gaussian or Jacobi ensemble", field="kind")
    u = sigma * np.asarray(gamma, dtype=float) / delta
    if np.any(u < 0):
        raise ValueError("gamma must be non-negative")
    if spec.kind is EnsembleKind.GAUSSIAN and spec.M == 1:
        nu = spec.nu[0]
        out = sigma / (math.factorial(nu) * delta) * (u ** nu if nu else 1.0) * np.exp(-u)
    else:
        out = sigma / (delta * mellin_omega(spec, 1)) * weight_omega(spec, u)
    return _scalar_or_array(out)


def _zf_stream_closed(spec, ratio):
    """``M omega(1)^{-1} G(-nu, 1, 1; - | 1; -mu, 0 | ratio)``, i.e. int omega ln(1+ratio x) / M omega(1)."""
    p = MeijerGParams(a=tuple(-v for v in spec.nu) + (1.0, 1.0), c=(1.0,), d=tuple(-m for m in spec.mu) + (0.0,))
    v, diag = meijer_g(p, ratio)
    m1 = mellin_omega(spec, 1)
    return v / m1, diag.error / m1


def _zf_stream_weight_quad(spec, ratio, tol):
    def f(x):
        return weight_omega(spec, x) * np.log1p(ratio * x)

    v, e = quad_adaptive(f, 0.0, spec.support, tol)
    m1 = mellin_omega(spec, 1)
    return v / m1, e / m1


def _g33(n):
    return MeijerGParams(a=(1.0, 1.0), b=(float(n),), c=(1.0, 1.0), d=(0.0,))


def _zf_stream_generic(kern, ratio, tol):
    n = kern.n_t
    p = _g33(n)

    def g(x):
        pos = x > 0
        val, err = np.zeros_like(x), np.zeros_like(x)
        if np.any(pos):
            val[pos], err[pos] = meijer_g_many(p, ratio * x[pos])
        return val, err

    def f(x):
        return kern.K0(x) * g(x)[0]

    def f_err(x):
        k, ke = kern.K0_with_error(x)
        gv, ge = g(x)
        return ke * np.abs(gv) + np.abs(k) * ge

    v, e = quad_adaptive(f, 0.0, kern.support, tol)
    e += _evaluation_error(f_err, 0.0, kern.support, e, v)
    c = math.factorial(n - 1)
    return c * v, c * e


def _evaluation_error(f_err, a, b, quad_err, value, points=None):
    """``int f_err``: the integrand's own evaluation error carried into the integral.

    A rough (1%) estimate suffices; the integrand is rescaled so the
    quadrature's mixed absolute/relative tolerance acts relatively.
    """
    c = max(quad_err, 1e-16 * abs(value), 1e-300)
    v, _ = quad_adaptive(lambda x: np.abs(f_err(x)) / c, a, b, 1e-2, points=points)
    return c * v


def _sigmas(n_t, sigma_list):
    if sigma_list is None:
        return (1.0,) * n_t
    s = tuple(float(v) for v in sigma_list)
    if len(s) != n_t or any(not v > 0 for v in s):
        raise ConfigError(f"need {n_t} positive values", field="sigma_k")
    return s


def _per_stream(fn, sigmas, delta):
    cache = {}
    vals, errs = [], []
    for s in sigmas:
        if s not in cache:
            cache[s] = fn(delta / s)
        vals.append(cache[s][0])
        errs.append(cache[s][1])
    return vals, errs


def zf_sumrate_generic(kernel, delta, sigma_list=None, *, tol=1e-10):
    """ZF sum rate from ``K(0, .)``: ``(n_t-1)! sum_k int K(0,x) G^{2,2}_{3,3}(1,1;n_t|1,1;0|delta x/sigma_k) dx``."""
    kern = _handle(kernel)
    sig = _sigmas(kern.n_t, sigma_list)
    if delta == 0:
        return SumRateResult(0.0, (0.0,) * kern.n_t, QUAD, 0.0)
    vals, errs = _per_stream(lambda r: _zf_stream_generic(kern, r, tol), sig, delta)
    return SumRateResult(math.fsum(vals), vals, QUAD, math.fsum(errs))


def zf_sumrate(spec_or_kernel, delta, sigma_list=None, *, check=True, tol=1e-11, closed_only=False):
    """ZF ergodic sum rate by every available route.

    Returns a dict keyed by method tag.  For Polya ensembles
    ``meijer_closed_form`` sums one Meijer G per stream and
    ``kernel_quadrature`` integrates ``omega(x) ln(1 + delta x/sigma_k)``;
    for generic kernels only the ``K(0, .)`` integral is available.  With
    ``check`` the routes must agree, otherwise :class:`ConsistencyError`.
    ``closed_only`` skips the quadrature route when a closed form exists.
    """
    spec, kern = _as_spec_and_kernel(spec_or_kernel)
    if delta < 0:
        raise ConfigError("must be non-negative", field="delta")
    if spec is None or not spec.is_polya:
        return {QUAD: zf_sumrate_generic(kern or kernel_handle(spec), delta, sigma_list, tol=tol)}
    sig = _sigmas(spec.n_t, sigma_list)
    if delta == 0:
        zero = (0.0,) * spec.n_t
        return {CLOSED: SumRateResult(0.0, zero, CLOSED, 0.0), QUAD: SumRateResult(0.0, zero, QUAD, 0.0)}
    out = {}
    vals, errs = _per_stream(lambda r: _zf_stream_closed(spec, r), sig, delta)
    out[CLOSED] = SumRateResult(math.fsum(vals), vals, CLOSED, math.fsum(errs))
    if closed_only:
        return out
    vals, errs = _per_stream(lambda r: _zf_stream_weight_quad(spec, r, tol), sig, delta)
    out[QUAD] = SumRateResult(math.fsum(vals), vals, QUAD, math.fsum(errs))
    if check:
        _check_agreement(out, "ZF sum rate")
    return out


# ---------------------------------------------------------------------------
# MMSE


def _require_identity(corr):
    if corr is not None and not corr.is_identity:
        raise ConfigError(
            "MMSE formulas only hold without transmit correlation (Sigma_t = I)", field="sigma_t"
        )


def mmse_pdf_generic(kernel, delta, gamma, *, tol=1e-10, with_error=False):
    """MMSE SINR density from ``K(-1/delta, .)``.

    Evaluates ``(n_t-1)/delta (g/(g+1))^{n_t} int_0^1 (1-x)^{n_t-2} (x + 1/g) K(-1/delta, g x/delta) dx``
    with the prefactor rewritten as ``(g/(g+1))^{n_t-1} (g x + 1)/(g + 1)``,
    which is regular at ``g = 0``.
    """
    kern = _handle(kernel)
    n = kern.n_t
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    vals, errs = np.zeros(g.shape), np.zeros(g.shape)
    for i, gi in enumerate(g):
        if gi < 0:
            raise ValueError("gamma must be non-negative")
        if gi == 0:
            continue
        scale = gi / delta

        def f(x):
            return (1.0 - x) ** (n - 2) * (gi * x + 1.0) * kern.K_shift(delta, scale * x)

        upper = min(1.0, kern.support / scale)
        v, e = quad_adaptive(f, 0.0, upper, tol)
        pref = (n - 1) / delta * (gi / (gi + 1.0)) ** (n - 1) / (gi + 1.0)
        vals[i], errs[i] = pref * v, pref * e
    if np.ndim(gamma) == 0:
        vals, errs = float(vals[0]), float(errs[0])
    return (vals, errs) if with_error else vals


def _mmse_product_params(spec, j, a_shift):
    return weight_params(spec).extend(a=(-float(j), -a_shift), d=(-1.0 - j, 1.0 - a_shift))


def _mmse_product_split(spec, delta, g):
    """Product formula with gamma-independent parameters.

    ``(s + A)/(s + 1 + j) = 1 + (A - 1 - j)/(s + 1 + j)`` splits each term into
    ``omega(x) + (A - 1 - j) G(-j; mu | nu; -1-j | x)``, so the whole grid
    shares one contour evaluation per ``j``.
    """
    n = spec.n_t
    vals, errs = np.zeros(g.shape), np.zeros(g.shape)
    x = g / delta
    live = (g > 0) & (x < spec.support)
    if not np.any(live):
        return vals, errs
    xl, gl = x[live], g[live]
    a_shift = (gl + n) / (gl + 1.0)
    om = weight_omega(spec, xl)
    total = np.zeros(xl.shape)
    err = np.zeros(xl.shape)
    for j in range(n):
        w, e = meijer_g_many(weight_params(spec).extend(a=(-float(j),), d=(-1.0 - j,)), xl)
        c = math.comb(n - 1, j) / mellin_omega(spec, j + 1) * delta ** (-j - 1)
        total += c * (om + (a_shift - 1.0 - j) * w)
        err += abs(c) * np.abs(a_shift - 1.0 - j) * e
    pref = (gl / (gl + 1.0)) ** (n - 1)
    vals[live], errs[live] = pref * total, pref * err
    return vals, errs


def mmse_pdf_product(spec, delta, gamma, *, split=False, with_error=False):
    """MMSE SINR density of a Polya product ensemble as a binomial sum of Meijer G-functions.

    ``(g/(g+1))^{n-1} sum_j C(n-1,j) delta^{-j-1}/M omega(j+1)
    G(-j, -A; mu | nu; -1-j, 1-A | g/delta)`` with ``A = (g+n)/(g+1)``.
    Where a gamma-dependent parameter set is inadmissible the generic kernel
    route is used for that point and the substitution is recorded in the
    returned notes (``with_error=True``).  ``split=True`` evaluates the same
    sum through :func:`_mmse_product_split`, which is much faster on grids.
    """
    if not spec.is_polya:
        raise ConfigError("specialised formulas need a Gaussian or Jacobi ensemble", field="kind")
    n = spec.n_t
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(g < 0):
        raise ValueError("gamma must be non-negative")
    notes = []
    if split:
        vals, errs = _mmse_product_split(spec, delta, g)
        vals = np.maximum(vals, 0.0)
        if np.ndim(gamma) == 0:
            vals, errs = float(vals[0]), float(errs[0])
        return (vals, errs, notes) if with_error else vals
    vals, errs = np.zeros(g.shape), np.zeros(g.shape)
    weights = [math.comb(n - 1, j) / mellin_omega(spec, j + 1) for j in range(n)]
    for i, gi in enumerate(g):
        if gi < 0:
            raise ValueError("gamma must be non-negative")
        x = gi / delta
        if gi == 0 or x >= spec.support:
            continue
        a_shift = (gi + n) / (gi + 1.0)
        try:
            total, err = 0.0, 0.0
            for j in range(n):
                v, diag = meijer_g(_mmse_product_params(spec, j, a_shift), x)
                c = weights[j] * delta ** (-j - 1)
                total += c * v
                err += abs(c) * diag.error
        except InadmissibleParameters:
            total, err = mmse_pdf_generic(spec, delta, gi, with_error=True)
            notes.append(f"gamma={gi!r}: generic kernel route substituted")
            vals[i], errs[i] = total, err
            continue
        pref = (gi / (gi + 1.0)) ** (n - 1)
        vals[i], errs[i] = pref * total, pref * err
    vals = np.maximum(vals, 0.0)
    if np.ndim(gamma) == 0:
        vals, errs = float(vals[0]), float(errs[0])
    return (vals, errs, notes) if with_error else vals


def mmse_pdf_polya(spec, delta, gamma, *, tol=1e-10):
    """MMSE SINR density of a Polya ensemble as a single integral over ``u`` in [0, 1].

    ``-(-g/(g+1))^n int_0^1 p_{n-1}(-u/delta)/(delta M omega(n))
    [(n/g + 1) omega(y) + (1 + 1/g) y omega'(y)] du`` with ``y = g u/delta``.
    """
    n = spec.n_t
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = np.zeros(g.shape)
    mn = mellin_omega(spec, n)
    for i, gi in enumerate(g):
        if gi == 0:
            continue
        scale = gi / delta

        def f(u):
            y = scale * u
            return poly_p(spec, n - 1, -u / delta) * (
                (n / gi + 1.0) * weight_omega(spec, y) + (1.0 + 1.0 / gi) * weight_derivative(spec, 1, y)
            )

        points = [spec.support / scale] if scale > spec.support else None
        v, _ = quad_adaptive(f, 0.0, 1.0, tol, points=points)
        out[i] = -((-gi / (gi + 1.0)) ** n) * v / (delta * mn)
    return _scalar_or_array(out)


def mmse_pdf(spec_or_kernel, delta, gamma, *, method="auto", corr=None):
    """MMSE SINR density; ``method`` is ``auto``, ``product``, ``polya`` or ``generic``."""
    _require_identity(corr)
    spec, kern = _as_spec_and_kernel(spec_or_kernel)
    if method == "auto":
        method = "product" if spec is not None and spec.is_polya else "generic"
    if method == "generic":
        return mmse_pdf_generic(kern or kernel_handle(spec), delta, gamma)
    if spec is None or not spec.is_polya:
        raise ConfigError(f"method {method!r} needs a Gaussian or Jacobi ensemble", field="method")
    if method == "product":
        return mmse_pdf_product(spec, delta, gamma)
    if method == "polya":
        return mmse_pdf_polya(spec, delta, gamma)
    raise ValueError(f"unknown method {method!r}")


def _mmse_rate_params(spec, j):
    n = spec.n_t
    return MeijerGParams(
        a=(-1.0, -float(n), -float(j)),
        b=(0.0,) + tuple(float(m) for m in spec.mu),
        c=(-1.0, -1.0) + tuple(float(v) for v in spec.nu),
        d=(0.0, -1.0 - j),
    )


def mmse_sumrate_generic(kernel, delta, *, tol=1e-11):
    """``R = n_t [int_0^inf ln(1 + x delta) K(-1/delta, x) dx + H_{n_t-1}]``."""
    kern = _handle(kernel)
    n = kern.n_t
    if delta == 0:
        return SumRateResult(0.0, (0.0,) * n, QUAD, 0.0)

    def f(x):
        return np.log1p(delta * x) * kern.K_shift(delta, x)

    v, e = quad_adaptive(f, 0.0, kern.support, tol)
    per = v + euler_plus_digamma(n)
    return SumRateResult(n * per, (per,) * n, QUAD, n * e)


def _mmse_sumrate_closed(spec, delta):
    n = spec.n_t
    total, err = n * euler_plus_digamma(n), 0.0
    for j in range(n):
        v, diag = meijer_g(_mmse_rate_params(spec, j), 1.0 / delta)
        c = n * delta ** (-j - 1) / (math.factorial(j) * math.factorial(n - 1 - j) * mellin_omega(spec, j + 1))
        total += c * v
        err += abs(c) * diag.error
    return SumRateResult(total, (total / n,) * n, CLOSED, err)


def mmse_sumrate(spec_or_kernel, delta, *, corr=None, check=True, tol=1e-11, closed_only=False):
    """MMSE ergodic sum rate by every available route (dict keyed by method tag).

    ``closed_only`` skips the quadrature route when a closed form exists.
    """
    _require_identity(corr)
    spec, kern = _as_spec_and_kernel(spec_or_kernel)
    if delta < 0:
        raise ConfigError("must be non-negative", field="delta")
    if spec is None or not spec.is_polya:
        return {QUAD: mmse_sumrate_generic(kern or kernel_handle(spec), delta, tol=tol)}
    if delta == 0:
        zero = (0.0,) * spec.n_t
        return {CLOSED: SumRateResult(0.0, zero, CLOSED, 0.0), QUAD: SumRateResult(0.0, zero, QUAD, 0.0)}
    out = {CLOSED: _mmse_sumrate_closed(spec, delta)}
    if closed_only:
        return out
    try:
        out[QUAD] = mmse_sumrate_generic(kernel_handle(spec), delta, tol=tol)
    except (InadmissibleParameters, MaxDepthExceeded, PrecisionLoss) as exc:
        # Either the kernel is not a function (Jacobi with little smoothness) or
        # K(-1/delta, .) grows like delta^(1-n_t) and the integral cancels to
        # rounding level at small delta.  The closed form stands alone then.
        closed = out[CLOSED]
        out[CLOSED] = SumRateResult(closed.value, closed.per_stream, CLOSED, closed.error,
                                    closed.notes + (f"{QUAD} unavailable: {exc}",))
        return out
    if check:
        _check_agreement(out, "MMSE sum rate")
    return out


# ---------------------------------------------------------------------------
# density curves


def _ratio_density(spec_or_kernel, cfg, sigma, method):
    """Callable ``u -> (delta * rho(delta u), errors)`` on the gamma/delta axis."""
    spec, kern = _as_spec_and_kernel(spec_or_kernel)
    delta = cfg.delta
    polya = spec is not None and spec.is_polya
    if method == "auto":
        method = "specialized" if polya else "generic"
    if cfg.receiver is Receiver.ZF:
        if method == "specialized":
            return method, lambda u: (zf_pdf_specialized(spec, delta, sigma, delta * u) * delta, np.zeros(np.shape(u)))
        handle = kern or kernel_handle(spec)

        def zf(u):
            v, e = zf_pdf_generic(handle, delta, sigma, delta * np.asarray(u), with_error=True)
            return np.asarray(v) * delta, np.asarray(e) * delta

        return "generic", zf
    if method == "specialized":
        def mm(u):
            v, e, _ = mmse_pdf_product(spec, delta, delta * np.asarray(u), split=True, with_error=True)
            return np.asarray(v) * delta, np.asarray(e) * delta

        return "product", mm
    handle = kern or kernel_handle(spec)

    def mg(u):
        v, e = mmse_pdf_generic(handle, delta, delta * np.asarray(u), with_error=True)
        return np.asarray(v) * delta, np.asarray(e) * delta

    return "generic", mg


def _auto_grid(fn, support, points):
    """Grid on the gamma/delta axis covering all but a negligible tail."""
    if math.isfinite(support):
        t = np.linspace(0.0, 1.0, points)
        # cluster towards the support edge, where Jacobi densities bend sharply
        return support * (1.0 - (1.0 - t) ** 2)
    hi = 4.0
    probe = np.linspace(0.0, hi, 65)[1:]
    for _ in range(40):
        vals = fn(probe)[0]
        peak = float(np.max(vals))
        if vals[-1] <= 1e-10 * peak and vals[-1] * probe[-1] <= 1e-9:
            break
        hi *= 2.0
        probe = np.linspace(0.0, hi, 65)[1:]
    # trim to the last probe point with a non-negligible value
    keep = probe[vals > 1e-12 * peak]
    hi = float(keep[-1]) * 1.25 if keep.size else hi
    # product-ensemble densities spread over decades: log spacing
    return np.concatenate([[0.0], np.geomspace(1e-7 * hi, hi, points)])


def _ratio_support(spec_or_kernel, cfg, sigma):
    spec, kern = _as_spec_and_kernel(spec_or_kernel)
    support = spec.support if spec is not None else kern.support
    return support / sigma if cfg.receiver is Receiver.ZF else support


def auto_ratio_grid(spec_or_kernel, cfg, *, points=600, sigma=1.0, method="auto"):
    """The grid on the gamma/delta axis that ``density_curve(grid="auto")`` would use."""
    _, fn = _ratio_density(spec_or_kernel, cfg, sigma, method)
    return _auto_grid(fn, _ratio_support(spec_or_kernel, cfg, sigma), points)


def density_curve(spec_or_kernel, cfg, grid="auto", *, points=600, sigma=None, method="auto", corr=None):
    """Tabulate an SINR density on a gamma grid.

    Parameters
    ----------
    spec_or_kernel : EnsembleSpec or KernelHandle
    cfg : ReceiverConfig
    grid : "auto", array, or (min, max, count)
        Values of gamma.  ``auto`` picks a range on the gamma/delta axis
        that covers all but a ~1e-10 tail.
    sigma : float, optional
        Per-stream correlation scalar for ZF; defaults to ``corr.sigma_k[k-1]``
        or 1.
    method : {"auto", "specialized", "generic"}
    """
    if cfg.receiver is Receiver.MMSE:
        _require_identity(corr)
    if sigma is None:
        sigma = corr.sigma_k[cfg.k - 1] if corr is not None else 1.0
    used, fn = _ratio_density(spec_or_kernel, cfg, sigma, method)
    spec, _ = _as_spec_and_kernel(spec_or_kernel)
    support = _ratio_support(spec_or_kernel, cfg, sigma)
    if isinstance(grid, str):
        if grid != "auto":
            raise ConfigError(f"unknown grid spec {grid!r}", field="grid")
        u = _auto_grid(fn, support, points)
    elif isinstance(grid, tuple) and len(grid) == 3:
        lo, hi, count = grid
        u = np.linspace(float(lo), float(hi), int(count)) / cfg.delta
    else:
        u = np.asarray(grid, dtype=float) / cfg.delta
    dens, err = fn(u)
    dens = np.asarray(dens, dtype=float)
    err = np.asarray(err, dtype=float)
    bad = ~np.isfinite(dens)
    notes = []
    if np.any(bad):
        # integrable singularity at the origin (e.g. repeated zero nu)
        notes.append("dropped grid points where the density is infinite")
        u, dens, err = u[~bad], dens[~bad], err[~bad]
    ens = spec.to_dict() if spec is not None and spec.is_polya else None
    return DensityCurve(
        gamma=u * cfg.delta,
        density=np.maximum(dens, 0.0) / cfg.delta,
        error=err / cfg.delta,
        receiver=cfg.receiver.value,
        delta=cfg.delta,
        sigma=sigma,
        method=used,
        ensemble=ens,
        notes=notes,
    )
