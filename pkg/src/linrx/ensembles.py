"""Channel ensembles and their Polya-ensemble machinery.

Two ensembles come with a weight function ``omega``:

* Gaussian products ``H = P_M ... P_1`` with Ginibre factors of size
  ``(n_t + nu_j) x (n_t + nu_{j-1})``; ``omega = G^{M,0}_{0,M}(-; - | nu; -)``.
* Jacobi products of truncated Haar unitaries; ``omega = G^{M,0}_{M,M}(-; mu | nu; -)``
  supported on ``(0, 1)``.

Everything else (bi-orthogonal polynomials ``p_l``, weight functions ``q_l``,
the correlation kernel) follows from ``omega`` and its Mellin transform.
Derivatives of ``omega`` are parameter shifts of the Meijer G-function, never
finite differences.

A third kind, ``generic``, carries user-supplied kernel evaluators instead of
a weight and is only usable through the kernel-based formulas.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, InadmissibleParameters, NotPositiveDefinite, PrecisionLoss
from .linalg_rng import (
    adjoint,
    hermitian_sqrt,
    inverse_diagonals,
    make_rng,
    sample_ginibre,
    sample_haar_truncation,
)
from .quadrature import quad_adaptive
from .special_fn import MeijerGParams, limit_at_zero, meijer_g_many, mellin_omega

__all__ = [
    "EnsembleKind",
    "EnsembleSpec",
    "CorrelationSpec",
    "GenericKernel",
    "KernelHandle",
    "kernel_handle",
    "weight_params",
    "weight_omega",
    "weight_derivative",
    "poly_coefficients",
    "poly_p",
    "weight_q",
    "kernel_K",
    "kernel_K0",
    "kernel_K0_leibniz",
    "normalization_alpha",
    "normalization_alpha_mc",
    "mellin_omega",
    "mellin_omega_exact",
    "load_ensemble_json",
    "dump_ensemble_json",
]


class EnsembleKind(str, Enum):
    GAUSSIAN = "gaussian"
    JACOBI = "jacobi"
    GENERIC = "generic"


@dataclass(frozen=True, eq=False)
class GenericKernel:
    """Externally supplied kernel evaluators.

    Parameters
    ----------
    k0 : callable
        ``y -> K(0, y)``, vectorised over ``y``.
    k_shift : callable, optional
        ``(delta, y) -> K(-1/delta, y)``; needed by the MMSE formulas.
    support : float
        Upper end of the eigenvalue support (``inf`` if unbounded).
    """

    k0: Callable
    k_shift: Callable | None = None
    support: float = math.inf

    @classmethod
    def from_table(cls, y, k0_values, shift_tables=None):
        """Build evaluators from tabulated values by cubic interpolation.

        The grid ``y`` must be strictly increasing and start at 0; outside
        ``[y[0], y[-1]]`` the kernel is taken as 0, so the table has to cover
        the region where it is non-negligible.  ``shift_tables`` maps each
        ``delta`` to the values of ``K(-1/delta, y)`` on the same grid; other
        ``delta`` values are rejected.
        """
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size < 4:
            raise ConfigError("need a 1-D grid with at least 4 points", field="kernel.y")
        if np.any(np.diff(y) <= 0):
            raise ConfigError("grid must be strictly increasing", field="kernel.y")
        if y[0] != 0.0:
            raise ConfigError("grid must start at 0", field="kernel.y")

        def interp(values, name):
            values = np.asarray(values, dtype=float)
            if values.shape != y.shape:
                raise ConfigError(f"expected {y.size} values, got {values.shape}", field=name)
            spline = CubicSpline(y, values)

            def f(t):
                t = np.asarray(t, dtype=float)
                out = np.where((t >= y[0]) & (t <= y[-1]), spline(np.clip(t, y[0], y[-1])), 0.0)
                return out

            return f

        k0 = interp(k0_values, "kernel.k0")
        shifts = {float(d): interp(v, f"kernel.shift[{d}]") for d, v in (shift_tables or {}).items()}

        def k_shift(delta, t):
            try:
                return shifts[float(delta)](t)
            except KeyError:
                raise ConfigError(f"no table for delta={delta}", field="kernel.shift") from None

        return cls(k0=k0, k_shift=k_shift if shifts else None, support=float(y[-1]))


def _int_tuple(values, name):
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or int(v) != v:
            raise ConfigError(f"must be an integer, got {v!r}", field=f"{name}[{i}]")
        out.append(int(v))
    return tuple(out)


@dataclass(frozen=True)
class EnsembleSpec:
    """Channel ensemble: kind, antenna count ``n_t`` and layer parameters."""

    kind: EnsembleKind
    n_t: int
    nu: tuple = ()
    mu: tuple = ()
    kernel: GenericKernel | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        try:
            kind = EnsembleKind(getattr(self.kind, "value", self.kind))
        except ValueError:
            raise ConfigError(f"unknown ensemble kind {self.kind!r}", field="kind") from None
        object.__setattr__(self, "kind", kind)
        if isinstance(self.n_t, bool) or int(self.n_t) != self.n_t:
            raise ConfigError("must be an integer", field="n_t")
        object.__setattr__(self, "n_t", int(self.n_t))
        if self.n_t < 2:
            raise ConfigError(f"need at least 2 transmit antennas, got {self.n_t}", field="n_t")
        nu = _int_tuple(self.nu, "nu")
        mu = _int_tuple(self.mu, "mu")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)
        for i, v in enumerate(nu):
            if v < 0:
                raise ConfigError(f"must be non-negative, got {v}", field=f"nu[{i}]")
        if kind is EnsembleKind.GENERIC:
            if self.kernel is None:
                raise ConfigError("generic ensembles need kernel evaluators", field="kernel")
            return
        if not nu:
            raise ConfigError("need at least one layer (M >= 1)", field="nu")
        if kind is EnsembleKind.GAUSSIAN:
            if mu:
                raise ConfigError("only Jacobi ensembles take mu", field="mu")
        else:
            if len(mu) != len(nu):
                raise ConfigError(f"expected {len(nu)} entries, got {len(mu)}", field="mu")
            for j, m in enumerate(mu):
                lower = max(nu[j], nu[j - 1] if j > 0 else 0)
                if m < lower:
                    raise ConfigError(
                        f"must satisfy mu_j >= max(nu_j, nu_(j-1)) = {lower}, got {m}", field=f"mu[{j}]"
                    )
            if sum(m - v for m, v in zip(mu, nu)) < 1:
                raise ConfigError("mu == nu gives a unitary channel with a degenerate spectrum", field="mu")

    @classmethod
    def gaussian(cls, n_t, nu):
        return cls(EnsembleKind.GAUSSIAN, n_t, tuple(nu))

    @classmethod
    def jacobi(cls, n_t, nu, mu):
        return cls(EnsembleKind.JACOBI, n_t, tuple(nu), tuple(mu))

    @classmethod
    def generic(cls, n_t, kernel, nu=()):
        return cls(EnsembleKind.GENERIC, n_t, tuple(nu), (), kernel)

    @property
    def M(self):
        return len(self.nu)

    @property
    def n_r(self):
        """Receive dimension ``n_t + nu_M``."""
        return self.n_t + (self.nu[-1] if self.nu else 0)

    @property
    def is_polya(self):
        return self.kind is not EnsembleKind.GENERIC

    @property
    def smoothness(self):
        """``sum(mu - nu)`` for Jacobi ensembles, ``inf`` otherwise.

        ``omega`` vanishes like ``(1-x)^(smoothness-1)`` at the support edge,
        so derivatives of order ``l`` are integrable only for
        ``l < smoothness``.
        """
        if self.kind is EnsembleKind.JACOBI:
            return sum(m - v for m, v in zip(self.mu, self.nu))
        return math.inf

    @property
    def support(self):
        if self.kind is EnsembleKind.JACOBI:
            return 1.0
        if self.kind is EnsembleKind.GENERIC:
            return self.kernel.support
        return math.inf

    def to_dict(self):
        if self.kind is EnsembleKind.GENERIC:
            raise ConfigError("generic ensembles carry callables and cannot be serialised", field="kind")
        return {"kind": self.kind.value, "n_t": self.n_t, "M": self.M, "nu": list(self.nu), "mu": list(self.mu)}

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("ensemble document must be a JSON object")
        for key in ("kind", "n_t", "nu"):
            if key not in doc:
                raise ConfigError("missing", field=key)
        spec = cls(doc["kind"], doc["n_t"], tuple(doc["nu"]), tuple(doc.get("mu", ())))
        if "M" in doc and doc["M"] != spec.M:
            raise ConfigError(f"M={doc['M']} but nu has {spec.M} entries", field="M")
        return spec


class CorrelationSpec:
    """Transmit correlation ``Sigma_t`` and the per-stream scalars ``sigma_k``.

    ``sigma_t=None`` means the identity.
    """

    def __init__(self, n_t, sigma_t=None):
        self.n_t = int(n_t)
        if sigma_t is None:
            self._matrix = None
            self.sigma_k = tuple([1.0] * self.n_t)
            return
        m = np.array(sigma_t, dtype=complex)
        if m.shape != (self.n_t, self.n_t):
            raise ConfigError(f"expected a {self.n_t}x{self.n_t} matrix, got shape {m.shape}", field="sigma_t")
        if not np.all(np.isfinite(m)):
            raise ConfigError("non-finite entries", field="sigma_t")
        if not np.allclose(m, m.conj().T, rtol=1e-12, atol=1e-12 * np.abs(m).max()):
            raise ConfigError("must be Hermitian", field="sigma_t")
        try:
            diag = inverse_diagonals(m)
        except NotPositiveDefinite:
            raise ConfigError("must be positive definite (Cholesky failed)", field="sigma_t") from None
        m.setflags(write=False)
        self._matrix = m
        self.sigma_k = tuple(float(v) for v in diag)

    @classmethod
    def identity(cls, n_t):
        return cls(n_t)

    @property
    def is_identity(self):
        return self._matrix is None or np.array_equal(self._matrix, np.eye(self.n_t))

    @property
    def matrix(self):
        return np.eye(self.n_t, dtype=complex) if self._matrix is None else self._matrix

    @property
    def trace(self):
        return float(self.n_t if self._matrix is None else np.trace(self._matrix).real)

    def sqrt(self):
        return None if self._matrix is None else hermitian_sqrt(self._matrix)

    def to_list(self):
        if self._matrix is None:
            return None
        m = self._matrix
        if np.all(m.imag == 0):
            return m.real.tolist()
        return [[[z.real, z.imag] for z in row] for row in m]

    def __repr__(self):
        return f"CorrelationSpec(n_t={self.n_t}, identity={self.is_identity})"


def load_ensemble_json(text):
    """Parse ``{kind, n_t, M, nu, mu, sigma_t}`` into (EnsembleSpec, CorrelationSpec).

    ``sigma_t`` entries are real numbers or ``[re, im]`` pairs.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    spec = EnsembleSpec.from_dict(doc)
    raw = doc.get("sigma_t")
    if raw is not None:
        try:
            raw = [[complex(*v) if isinstance(v, list) else complex(v) for v in row] for row in raw]
        except (TypeError, ValueError):
            raise ConfigError("entries must be numbers or [re, im] pairs", field="sigma_t") from None
    return spec, CorrelationSpec(spec.n_t, raw)


def dump_ensemble_json(spec, corr=None):
    doc = spec.to_dict()
    if corr is not None and not corr.is_identity:
        doc["sigma_t"] = corr.to_list()
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# weight, Mellin transform and bi-orthogonal system


def _require_polya(spec):
    if not spec.is_polya:
        raise ConfigError("operation needs a weight function (Gaussian or Jacobi ensemble)", field="kind")


def weight_params(spec):
    """Meijer-G parameters of the weight: ``c = nu``, ``b = mu``."""
    _require_polya(spec)
    return MeijerGParams(b=spec.mu, c=spec.nu)


def mellin_omega_exact(spec, k):
    """``M omega(k)`` for integer ``k >= 1`` as an exact Fraction."""
    _require_polya(spec)
    return _mellin_exact(spec.nu, spec.mu, int(k))


@lru_cache(maxsize=None)
def _mellin_exact(nu, mu, k):
    out = Fraction(1)
    for v in nu:
        out *= math.factorial(k + v - 1)
    for m in mu:
        out /= math.factorial(k + m - 1)
    return out


def _eval_g(params, x, support, with_error=False):
    """Meijer G on an array, zero beyond ``support``, limit value at x=0.

    These functions feed integrals and kernels, so accuracy is judged against
    the function's magnitude: near a sign change the absolute error may reach
    ``1e-12`` of the contour's L1 scale (about 70x the rounding floor) even
    where it exceeds ``1e-8 |value|``.  ``with_error=True`` also returns the
    per-point error estimates (zero at x=0 and beyond the support).
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    err = np.zeros(x.shape)
    inside = (x > 0) & (x < support)
    if np.any(inside):
        xi = x[inside]
        v, e, sc = meijer_g_many(params, xi, check=False, with_scale=True)
        bad = e > np.maximum.reduce([np.full(e.shape, 1e-10), 1e-8 * np.abs(v), 1e-12 * sc])
        if np.any(bad):
            i = int(np.argmax(bad))
            raise PrecisionLoss(
                f"{params} at x={xi[i]:.6g}: error estimate {e[i]:.2e} exceeds tolerance",
                value=v[i],
                error=e[i],
            )
        out[inside] = v
        err[inside] = e
    at_zero = x == 0
    if np.any(at_zero):
        out[at_zero] = limit_at_zero(params)
    if np.any(x < 0):
        raise ValueError("weight functions are only defined for x >= 0")
    return (out, err) if with_error else out


def _shifted(spec, a=(), d=()):
    return weight_params(spec).extend(a=a, d=d)


def weight_omega(spec, x):
    """Weight ``omega(x)``; Jacobi weights vanish for ``x >= 1``."""
    _require_polya(spec)
    x = np.asarray(x, dtype=float)
    if spec.kind is EnsembleKind.GAUSSIAN and spec.M == 1:
        if np.any(x < 0):
            raise ValueError("weight functions are only defined for x >= 0")
        nu = spec.nu[0]
        out = np.exp(-x) * x ** nu if nu else np.exp(-x)
    else:
        out = _eval_g(weight_params(spec), x, spec.support)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def weight_derivative(spec, k, x):
    """``x^k d^k omega / dx^k`` from the parameter shift ``a=(0,)``, ``d=(k,)``."""
    _require_polya(spec)
    out = _eval_g(_shifted(spec, a=(0.0,), d=(float(k),)), x, spec.support)
    return float(out) if out.ndim == 0 else out


def poly_coefficients(spec, l):
    """Exact coefficients of the monic ``p_l``, lowest degree first."""
    _require_polya(spec)
    return _poly_coeffs(spec.nu, spec.mu, int(l))


@lru_cache(maxsize=None)
def _poly_coeffs(nu, mu, l):
    top = _mellin_exact(nu, mu, l + 1)
    return tuple(
        (-1) ** (l - j) * math.comb(l, j) * top / _mellin_exact(nu, mu, j + 1) for j in range(l + 1)
    )


_CANCEL_LIMIT = 1e-8


def poly_p(spec, l, x):
    """Bi-orthogonal polynomial ``p_l`` at real ``x`` (negative allowed).

    Terms are summed with ``math.fsum``; points where the alternating sum
    loses more than ~1e-8 relative accuracy are recomputed with mpmath from
    the exact rational coefficients.
    """
    coeffs = poly_coefficients(spec, l)
    if not 0 <= l <= spec.n_t:
        raise ValueError(f"l must lie in 0..{spec.n_t}")
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    cf = np.array([float(c) for c in coeffs])
    powers = flat[:, None] ** np.arange(l + 1)[None, :]
    terms = cf[None, :] * powers
    out = np.array([math.fsum(row) for row in terms])
    scale = np.abs(terms).sum(axis=1)
    bad = np.nonzero(4.0 * np.finfo(float).eps * scale > _CANCEL_LIMIT * np.abs(out))[0]
    for i in bad:
        digits = 20 + int(math.log10(max(scale[i], 1e-300) / max(abs(out[i]), 1e-300)) + 1)
        with mpmath.workdps(max(digits, 20)):
            xv = mpmath.mpf(float(flat[i]))
            acc = mpmath.mpf(0)
            for c in reversed(coeffs):
                acc = acc * xv + mpmath.mpf(c.numerator) / c.denominator
            out[i] = float(acc)
    out = out.reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def _check_smooth(spec, order, what):
    if order >= spec.smoothness:
        raise InadmissibleParameters(
            f"{what} needs derivatives of omega of order {order}, but the Jacobi weight only "
            f"supports order < sum(mu - nu) = {spec.smoothness}"
        )


def weight_q(spec, l, x):
    """Weight function ``q_l = (l! M omega(l+1))^{-1} d^l[(-x)^l omega(x)]``."""
    _require_polya(spec)
    if not 0 <= l <= spec.n_t:
        raise ValueError(f"l must lie in 0..{spec.n_t}")
    if l:
        _check_smooth(spec, l, f"q_{l}")
    pref = (-1.0) ** l / (math.factorial(l) * mellin_omega(spec, l + 1))
    out = pref * _eval_g(_shifted(spec, a=(-float(l),), d=(0.0,)), x, spec.support)
    return float(out) if out.ndim == 0 else out


def kernel_K0(spec, y, *, with_error=False):
    """``K(0, y) = ((n_t-1)! M omega(1))^{-1} y^{-1} d^{n_t-1}[y^{n_t} omega(y)]``.

    The derivative is a single parameter shift: ``a=(-n_t,)``, ``d=(-1,)``.
    ``with_error=True`` returns ``(values, error estimates)``.
    """
    _require_polya(spec)
    n = spec.n_t
    _check_smooth(spec, n - 1, "K(0, y)")
    pref = 1.0 / (math.factorial(n - 1) * mellin_omega(spec, 1))
    out, err = _eval_g(_shifted(spec, a=(-float(n),), d=(-1.0,)), y, spec.support, with_error=True)
    out, err = pref * out, pref * err
    if out.ndim == 0:
        out, err = float(out), float(err)
    return (out, err) if with_error else out


def kernel_K0_leibniz(spec, y):
    """``K(0, y)`` through the Leibniz expansion of the derivative.

    ``sum_k C(n-1, k) n!/(k+1)! y^k d^k omega``; an independent route to
    :func:`kernel_K0` kept for cross-checks.
    """
    _require_polya(spec)
    n = spec.n_t
    _check_smooth(spec, n - 1, "K(0, y)")
    y = np.asarray(y, dtype=float)
    total = np.zeros(y.shape)
    for k in range(n):
        total = total + math.comb(n - 1, k) * math.factorial(n) / math.factorial(k + 1) * (
            weight_omega(spec, y) if k == 0 else weight_derivative(spec, k, y)
        )
    out = total / (math.factorial(n - 1) * mellin_omega(spec, 1))
    return float(out) if out.ndim == 0 else out


def kernel_K(spec, x, y, method="polya", tol=1e-11):
    """Correlation kernel ``K(x, y)`` for real ``x`` and ``y > 0``.

    ``method="polya"`` integrates ``-n M(n+1)/M(n) int_0^1 p_{n-1}(xu) q_n(yu) du``;
    ``method="sum"`` evaluates ``sum_{j<n} p_j(x) q_j(y)`` (vectorised in ``y``).
    """
    _require_polya(spec)
    n = spec.n_t
    if method == "sum":
        y = np.asarray(y, dtype=float)
        total = np.zeros(y.shape)
        for j in range(n):
            total = total + poly_p(spec, j, x) * weight_q(spec, j, y)
        return float(total) if total.ndim == 0 else total
    if method != "polya":
        raise ValueError(f"unknown method {method!r}")
    x, y = float(x), float(y)
    _check_smooth(spec, n, "the integral kernel representation")
    pref = -n * mellin_omega(spec, n + 1) / mellin_omega(spec, n)

    def f(u):
        return poly_p(spec, n - 1, x * u) * weight_q(spec, n, y * u)

    points = [1.0 / y] if y * 1.0 > spec.support else None
    val, _ = quad_adaptive(f, 0.0, 1.0, tol, points=points)
    return pref * val


@dataclass(frozen=True, eq=False)
class KernelHandle:
    """Callable views of an ensemble kernel used by the generic formulas."""

    n_t: int
    k0: Callable
    k_shift: Callable | None
    support: float = math.inf
    full: Callable | None = None
    k0_err: Callable | None = None

    def K0(self, y):
        return self.k0(np.asarray(y, dtype=float))

    def K0_with_error(self, y):
        """``(K(0, y), error estimate)``; the error is zero for tabulated kernels."""
        y = np.asarray(y, dtype=float)
        if self.k0_err is None:
            return self.k0(y), np.zeros(y.shape)
        return self.k0_err(y)

    def K_shift(self, delta, y):
        if self.k_shift is None:
            raise ConfigError("kernel has no K(-1/delta, .) evaluator", field="kernel.shift")
        return self.k_shift(float(delta), np.asarray(y, dtype=float))

    def K(self, x, y):
        if self.full is None:
            raise ConfigError("kernel has no two-argument evaluator", field="kernel")
        return self.full(x, y)


def kernel_handle(spec):
    """Kernel views for any ensemble kind."""
    if spec.kind is EnsembleKind.GENERIC:
        g = spec.kernel
        return KernelHandle(spec.n_t, g.k0, g.k_shift, g.support)
    _check_smooth(spec, spec.n_t - 1, "the kernel of this Jacobi ensemble")
    return KernelHandle(
        spec.n_t,
        k0=lambda y: kernel_K0(spec, y),
        k_shift=lambda delta, y: kernel_K(spec, -1.0 / delta, y, method="sum"),
        support=spec.support,
        full=lambda x, y: kernel_K(spec, x, y, method="sum"),
        k0_err=lambda y: kernel_K0(spec, y, with_error=True),
    )


# ---------------------------------------------------------------------------
# sampling and energy normalisation


def sample_factors_product(spec, rng, size=None):
    """Draw ``H`` without transmit correlation, shape ``(size, n_r, n_t)``.

    Gaussian: ``H = P_M ... P_1`` with ``P_j`` Ginibre of size
    ``(n_t+nu_j) x (n_t+nu_{j-1})``.  Jacobi: ``P_j`` is the
    ``(n_t+nu_{j-1}) x (n_t+nu_j)`` corner of a Haar unitary of size
    ``n_t+mu_j``, and ``H = (P_1 ... P_M)^dagger``.
    """
    _require_polya(spec)
    n = spec.n_t
    dims = (0,) + spec.nu
    if spec.kind is EnsembleKind.GAUSSIAN:
        h = sample_ginibre(n + dims[1], n, rng, size=size)
        for j in range(2, spec.M + 1):
            h = sample_ginibre(n + dims[j], n + dims[j - 1], rng, size=size) @ h
        return h
    x = sample_haar_truncation(n + spec.mu[0], n, n + dims[1], rng, size=size)
    for j in range(2, spec.M + 1):
        x = x @ sample_haar_truncation(n + spec.mu[j - 1], n + dims[j - 1], n + dims[j], rng, size=size)
    return adjoint(x)


def normalization_alpha(spec, corr=None, *, samples=10_000, seed=0):
    """Energy normalisation ``alpha = n_t n_r / E[tr H^dagger H]``.

    Closed form for Gaussian products; Jacobi products use the Monte Carlo
    estimate of :func:`normalization_alpha_mc` (reproducible through ``seed``).
    """
    _require_polya(spec)
    corr = corr or CorrelationSpec.identity(spec.n_t)
    if spec.kind is EnsembleKind.GAUSSIAN:
        return spec.n_t * spec.n_r / (corr.trace * math.prod(spec.n_t + v for v in spec.nu))
    return normalization_alpha_mc(spec, corr, samples=samples, seed=seed)[0]


def normalization_alpha_mc(spec, corr=None, *, samples=10_000, seed=0, batch=2000):
    """Monte Carlo ``alpha`` and its standard error (delta method)."""
    corr = corr or CorrelationSpec.identity(spec.n_t)
    rng = make_rng(seed)
    root = corr.sqrt()
    traces = []
    left = samples
    while left > 0:
        m = min(batch, left)
        h = sample_factors_product(spec, rng, size=m)
        if root is not None:
            h = h @ root
        traces.append(np.sum(np.abs(h) ** 2, axis=(-2, -1)))
        left -= m
    t = np.concatenate(traces)
    mean = t.mean()
    se_mean = t.std(ddof=1) / math.sqrt(t.size) if t.size > 1 else math.inf
    alpha = spec.n_t * spec.n_r / mean
    return alpha, alpha * se_mean / mean
