"""Meijer G-function by numerical Mellin-Barnes integration.

Parameter layout (four real lists)::

    G(a; b | c; d | x) = 1/(2 pi i) \\int ds  x^s
        prod_j Gamma(c_j - s) prod_j Gamma(1 - a_j + s)
        ---------------------------------------------
        prod_j Gamma(b_j - s) prod_j Gamma(1 - d_j + s)

i.e. ``G^{m,n}_{n+p, m+q}`` with ``m = len(c)``, ``n = len(a)``, ``p = len(b)``,
``q = len(d)``.  The path runs upwards and keeps the poles of Gamma(c_j - s)
on its right and those of Gamma(1 - a_j + s) on its left.

Gamma ratios whose arguments differ by an integer are first reduced to
rational factors.  This removes spurious pole collisions (the sum-rate
expressions are full of them) and fixes the admissible strip.

Two contour shapes are used:

* a vertical line ``s = c + it`` whenever the gamma factors give exponential
  decay along it (``kappa > 0`` below); ``c`` is taken near the real saddle
  point of ``|integrand|`` so tiny values keep their relative accuracy;
* a parabola ``s = c +- a t^2 + it`` opening towards the side where ``x^s``
  decays, for the balanced class (``kappa == 0``, e.g. the Jacobi weights)
  whose integrand only decays algebraically on vertical lines.

The integral is real for real parameters and ``x > 0``, so only ``t >= 0`` is
integrated.  The trapezoid rule is spectrally accurate for these analytic
integrands; the step is halved until two successive sums agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from ..errors import InadmissibleParameters, PrecisionLoss

__all__ = ["MeijerGParams", "EvalDiagnostics", "meijer_g", "meijer_g_many", "admissible_strip"]

_INT_TOL = 1e-12
_LOG_TAIL = math.log(1e-18)
_MAX_T = 2.0e4
_MAX_HALVINGS = 16
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MeijerGParams:
    """The four parameter lists of a Meijer G-function."""

    a: tuple = ()
    b: tuple = ()
    c: tuple = ()
    d: tuple = ()

    def __post_init__(self):
        for name in "abcd":
            vals = tuple(float(v) for v in getattr(self, name))
            if not all(math.isfinite(v) for v in vals):
                raise InadmissibleParameters(f"non-finite entry in parameter list {name}")
            object.__setattr__(self, name, vals)

    def extend(self, a=(), b=(), c=(), d=()):
        """Return a copy with extra parameters appended to each list."""
        return MeijerGParams(self.a + tuple(a), self.b + tuple(b), self.c + tuple(c), self.d + tuple(d))

    @property
    def order(self):
        """(m, n, p, q) in the conventional ``G^{m,n}_{p,q}`` labelling."""
        m, n = len(self.c), len(self.a)
        return m, n, n + len(self.b), m + len(self.d)

    def __str__(self):
        m, n, p, q = self.order
        fmt = lambda v: ",".join(f"{x:g}" for x in v) or "-"
        return f"G^{{{m},{n}}}_{{{p},{q}}}({fmt(self.a)}; {fmt(self.b)} | {fmt(self.c)}; {fmt(self.d)})"


@dataclass(frozen=True)
class EvalDiagnostics:
    method: str
    nodes: int
    error: float
    abscissa: float | None = None
    notes: tuple = field(default_factory=tuple)


def _is_int(v):
    return abs(v - round(v)) < _INT_TOL


@dataclass
class _Structure:
    """Reduced form of the Mellin-Barnes integrand."""

    right: np.ndarray       # unpaired c:  Gamma(c - s)
    left: np.ndarray        # unpaired a:  Gamma(1 - a + s), stored as 1 - a
    right_den: np.ndarray   # unpaired b:  1 / Gamma(b - s)
    left_den: np.ndarray    # unpaired d:  1 / Gamma(1 - d + s), stored as 1 - d
    lin_const: np.ndarray   # rational part: prod (const + coef s)^power
    lin_coef: np.ndarray
    lin_pow: np.ndarray
    left_max: float
    right_min: float
    kappa: float
    n_up: int = 0           # len(a) + len(b) before pairing
    n_lo: int = 0           # len(c) + len(d) before pairing

    @property
    def closing(self):
        """Side on which the contour may be closed: +1 right, -1 left, 0 depends on x."""
        return int(np.sign(self.n_lo - self.n_up))

    def log_integrand(self, s):
        """log of the integrand without the x^s factor, complex ``s`` array."""
        s = np.asarray(s, dtype=complex)[..., None]
        out = np.zeros(s.shape[:-1], dtype=complex)
        if self.right.size:
            out += sp.loggamma(self.right - s).sum(-1)
        if self.left.size:
            out += sp.loggamma(self.left + s).sum(-1)
        if self.right_den.size:
            out -= sp.loggamma(self.right_den - s).sum(-1)
        if self.left_den.size:
            out -= sp.loggamma(self.left_den + s).sum(-1)
        if self.lin_const.size:
            with np.errstate(divide="ignore", invalid="ignore"):
                out += (self.lin_pow * np.log(self.lin_const + self.lin_coef * s)).sum(-1)
        return out

    def log_abs_real(self, sigma, with_zeros=False):
        """log|integrand| on the real axis (without x^s).

        Polynomial factors are skipped unless ``with_zeros``: their real zeros
        would otherwise attract the saddle search.
        """
        sigma = np.asarray(sigma, dtype=float)[..., None]
        out = np.zeros(sigma.shape[:-1])
        if self.right.size:
            out += sp.gammaln(self.right - sigma).sum(-1)
        if self.left.size:
            out += sp.gammaln(self.left + sigma).sum(-1)
        if self.right_den.size:
            out -= sp.gammaln(self.right_den - sigma).sum(-1)
        if self.left_den.size:
            out -= sp.gammaln(self.left_den + sigma).sum(-1)
        if self.lin_const.size:
            mask = self.lin_pow < 0 if not with_zeros else np.ones_like(self.lin_pow, bool)
            if mask.any():
                with np.errstate(divide="ignore"):
                    out += (self.lin_pow[mask] * np.log(np.abs(self.lin_const[mask] + self.lin_coef[mask] * sigma))).sum(-1)
        return out


def _pair_up(num, den, sigma):
    """Pair Gamma(p + sigma s) / Gamma(r + sigma s) with integer p - r.

    Returns unpaired numerators, unpaired denominators and linear factors
    (const, coef, power, pole-or-zero root).  Exact cancellations (p - r >= 0,
    a polynomial) are preferred over partial ones (finitely many poles).
    """
    num, den = list(num), list(den)
    cands = []
    for i, p in enumerate(num):
        for j, r in enumerate(den):
            k = p - r
            if _is_int(k):
                k = int(round(k))
                cands.append((k < 0, abs(k), i, j, k))
    cands.sort()
    used_n, used_d, lin = set(), set(), []
    for _, _, i, j, k in cands:
        if i in used_n or j in used_d:
            continue
        used_n.add(i)
        used_d.add(j)
        p = num[i]
        if k >= 0:
            # Gamma(z)/Gamma(z-k) = (z-1)...(z-k)
            lin.extend((p - l, sigma, 1) for l in range(1, k + 1))
        else:
            # Gamma(z)/Gamma(z+|k|) = 1/(z (z+1) ... (z+|k|-1))
            lin.extend((p + l, sigma, -1) for l in range(-k))
    rest_n = [p for i, p in enumerate(num) if i not in used_n]
    rest_d = [r for j, r in enumerate(den) if j not in used_d]
    return rest_n, rest_d, lin


def _analyse(params):
    left_num = [1.0 - a for a in params.a]
    left_den = [1.0 - d for d in params.d]
    ln, ld, lin_l = _pair_up(left_num, left_den, +1.0)
    rn, rd, lin_r = _pair_up(list(params.c), list(params.b), -1.0)

    # net multiplicity of each root of the rational part; only negative net
    # multiplicities are poles
    roots = {}
    for const, coef, pw in lin_l + lin_r:
        key = round(-const / coef, 9)
        side = "L" if coef > 0 else "R"
        mult, _ = roots.get(key, (0, side))
        roots[key] = (mult + pw, side)
    left_poles = [-p for p in ln]
    right_poles = list(rn)
    for root, (mult, side) in roots.items():
        if mult < 0:
            (left_poles if side == "L" else right_poles).append(root)

    lin = lin_l + lin_r
    kappa = 0.5 * (len(params.c) + len(params.a) - len(params.b) - len(params.d))
    return _Structure(
        right=np.array(rn, float),
        left=np.array(ln, float),
        right_den=np.array(rd, float),
        left_den=np.array(ld, float),
        lin_const=np.array([t[0] for t in lin], float),
        lin_coef=np.array([t[1] for t in lin], float),
        lin_pow=np.array([t[2] for t in lin], float),
        left_max=max(left_poles) if left_poles else -math.inf,
        right_min=min(right_poles) if right_poles else math.inf,
        kappa=kappa,
        n_up=len(params.a) + len(params.b),
        n_lo=len(params.c) + len(params.d),
    )


def admissible_strip(params):
    """Open interval of abscissae separating the left and right pole families.

    Raises :class:`InadmissibleParameters` when the families interlace.
    """
    st = _analyse(params)
    if not st.left_max < st.right_min:
        raise InadmissibleParameters(
            f"no separating contour for {params}: left poles reach {st.left_max:g}, "
            f"right poles start at {st.right_min:g}"
        )
    return st.left_max, st.right_min


def _abscissa_grid(st):
    lo, hi = st.left_max, st.right_min
    if math.isinf(lo) and math.isinf(hi):
        raise InadmissibleParameters("integrand has no poles; the G-function is not an ordinary function")
    if math.isfinite(lo) and math.isfinite(hi):
        m = min(0.5, (hi - lo) / 4.0)
        return np.linspace(lo + m, hi - m, 9)
    near = np.concatenate([np.arange(0.0, 4.0, 0.5), 4.0 * 1.25 ** np.arange(0, 60)])
    near = near[near < 1e6]
    if math.isfinite(hi):
        return (hi - 0.5) - near[::-1]
    return (lo + 0.5) + near


def _choose_abscissae(st, logx):
    """Saddle-point abscissa for each log(x), picked from a fixed grid."""
    grid = _abscissa_grid(st)
    phi = st.log_abs_real(grid)
    vals = phi[None, :] + np.outer(logx, grid)
    vals[~np.isfinite(vals)] = np.inf
    idx = np.argmin(vals, axis=1)
    return grid[idx]


def _path(c, a, direction, t):
    s = c + direction * a * t * t + 1j * t
    ds = 2.0 * direction * a * t + 1j
    return s, ds


def _tail_length(st, c, a, direction, logx_ref):
    """Smallest t beyond which |integrand| stays below 1e-18 of its peak."""
    step = 0.5 if a == 0 else min(0.5, 0.25 / max(a, 1e-3) + 0.05)
    t0 = 0.0
    peak = -math.inf
    below = 0
    while t0 < _MAX_T:
        t = t0 + step * np.arange(64)
        s, ds = _path(c, a, direction, t)
        lg = (st.log_integrand(s) + s * logx_ref).real + np.log(np.abs(ds))
        lg = np.where(np.isnan(lg), -math.inf, lg)
        for tk, v in zip(t, lg):
            peak = max(peak, v)
            if v < peak + _LOG_TAIL:
                below += 1
                if below >= 6:
                    return tk, peak
            else:
                below = 0
        t0 = t[-1] + step
    raise PrecisionLoss(f"Mellin-Barnes integrand did not decay before t={_MAX_T:g}")


def _trapezoid(st, c, a, direction, logx, rtol, atol):
    """Trapezoid sums on one contour for a vector of log(x).

    Returns values, error estimates, the number of integrand evaluations and
    the magnitude scale ``int |integrand| / pi`` (an upper bound on ``|G|``).
    """
    logx = np.atleast_1d(np.asarray(logx, float))
    if a == 0:
        tmax, _ = _tail_length(st, c, a, direction, float(np.mean(logx)))
    else:
        # a shared parabola must be long enough for the slowest member
        tmax = max(_tail_length(st, c, a, direction, float(v))[0] for v in {logx.min(), logx.max()})
    # distance from the contour to the nearest pole controls the trapezoid rate
    dist = min(c - st.left_max, st.right_min - c)
    width = dist if a == 0 else min(dist, 0.5 / a)
    h = min(0.5, max(width, 0.05))
    # resolve the x^{it} oscillation from the start
    h = min(h, math.pi / (4.0 * (float(np.max(np.abs(logx))) + 1.0)))

    def g(t):
        s, ds = _path(c, a, direction, t)
        core = st.log_integrand(s)
        re = core.real[:, None] + np.outer(s.real, logx)
        im = core.imag[:, None] + np.outer(s.imag, logx)
        # Im(exp(lg) ds) without forming the complex exponential
        with np.errstate(over="ignore", invalid="ignore"):
            if a == 0:
                vals = np.exp(re) * np.cos(im)
            else:
                vals = np.exp(re) * (np.sin(im) * ds.real[:, None] + np.cos(im) * ds.imag[:, None])
        return np.where(np.isfinite(vals), vals, 0.0)

    n = int(math.ceil(tmax / h))
    t = h * np.arange(n + 1)
    gv = g(t)
    weights = np.ones(n + 1)
    weights[0] = 0.5
    total = h * (weights @ gv)
    abs_sum = h * (weights @ np.abs(gv))
    evals = n + 1
    diffs = []
    for _ in range(_MAX_HALVINGS):
        h_new = h / 2.0
        n_new = int(math.ceil(tmax / h_new))
        t_odd = h_new * np.arange(1, n_new + 1, 2)
        go = g(t_odd)
        evals += t_odd.size
        new_total = 0.5 * total + h_new * go.sum(0)
        abs_sum = 0.5 * abs_sum + h_new * np.abs(go).sum(0)
        diff = np.abs(new_total - total)
        diffs.append(diff)
        total, h = new_total, h_new
        floor = 64.0 * _EPS * abs_sum
        tol = np.maximum(np.maximum(rtol * np.abs(total), atol), floor)
        if len(diffs) >= 2 and np.all(diff <= tol):
            break
    tail = math.exp(_LOG_TAIL) * abs_sum
    err = diffs[-1] + 64.0 * _EPS * abs_sum + tail
    return total / math.pi, err / math.pi, evals, abs_sum / math.pi


def _parabola_width(logx):
    if logx == 0.0:
        return 4.0
    return float(np.clip(40.0 / (abs(logx) * 1600.0), 0.1, 4.0))


def meijer_g_many(params, xs, *, rtol=1e-12, atol=0.0, check=True, with_scale=False):
    """Evaluate a G-function at many positive arguments.

    Returns ``(values, errors)`` as float arrays.  Arguments sharing a saddle
    abscissa share the gamma evaluations on their contour.  With
    ``with_scale`` a third array holds the magnitude scale of each value
    (the L1 norm of the contour integrand, or the sum of absolute residues),
    below which rounding makes the absolute error incompressible.
    """
    xs = np.asarray(xs, dtype=float)
    shape = xs.shape
    xf = xs.ravel()
    if np.any(~(xf > 0)):
        raise ValueError("Meijer G is only evaluated for x > 0")
    st = _analyse(params)
    if not st.left_max < st.right_min:
        raise InadmissibleParameters(
            f"no separating contour for {params}: left poles reach {st.left_max:g}, "
            f"right poles start at {st.right_min:g}"
        )
    values = np.zeros(xf.size)
    errors = np.zeros(xf.size)
    scales = np.zeros(xf.size)
    logx = np.log(xf)
    if st.kappa > 0:
        cs = _choose_abscissae(st, logx)
        for c in np.unique(cs):
            sel = np.nonzero(cs == c)[0]
            v, e, _, sc = _trapezoid(st, float(c), 0.0, 1.0, logx[sel], rtol, atol)
            values[sel], errors[sel], scales[sel] = v, e, sc
    elif st.kappa == 0:
        todo = np.ones(xf.size, dtype=bool)
        right_ok = logx < 0 if st.closing == 0 else np.full(xf.size, st.closing > 0)
        if not st.right.size and np.any(right_ok):
            # finitely many right-hand poles (Jacobi-type weights): where the
            # contour closes to the right the residues give an exact finite
            # sum, vectorised in x
            from .residues import finite_residue_sum

            sel = np.nonzero(right_ok)[0]
            v, e, sc = finite_residue_sum(params, xf[sel])
            # accept at 1/1000 of the output contract; the contour is only
            # worth its ~100x cost where the finite sum cancels badly
            ok = e <= np.maximum(np.maximum(atol, rtol * np.abs(v)), 1e-3 * np.maximum(1e-10, 1e-8 * np.abs(v)))
            values[sel[ok]], errors[sel[ok]], scales[sel[ok]] = v[ok], e[ok], sc[ok]
            todo[sel[ok]] = False
        idx = np.nonzero(todo)[0]
        if idx.size:
            values[idx], errors[idx], scales[idx] = _balanced_many(st, logx[idx], rtol, atol)
    else:
        raise InadmissibleParameters(f"{params}: integrand grows along vertical lines (unsupported class)")
    if check:
        _check(params, xf, values, errors)
    if with_scale:
        return values.reshape(shape), errors.reshape(shape), scales.reshape(shape)
    return values.reshape(shape), errors.reshape(shape)


def _balanced(st, logx, rtol, atol):
    # The gamma factors alone decide the side when the counts differ; with
    # equal counts x < 1 closes right (poles of Gamma(c - s)), x > 1 left.
    if st.closing == 0:
        if logx == 0.0:
            raise InadmissibleParameters("x = 1 lies on the singular circle of this G-function class")
        direction = -1.0 if logx < 0 else 1.0
    else:
        direction = -float(st.closing)
    if direction < 0 and math.isinf(st.right_min):
        return 0.0, 0.0, 0, 0.0
    if direction > 0 and math.isinf(st.left_max):
        return 0.0, 0.0, 0, 0.0
    c = float(_choose_abscissae(st, np.array([logx]))[0])
    # direction of opening: right for x<1 (Re s -> +inf), left for x>1
    return _trapezoid(st, c, _parabola_width(logx), -direction, np.array([logx]), rtol, atol)


_WIDTH_LADDER = 0.1 * np.sqrt(2.0) ** np.arange(11)


def _balanced_many(st, logx, rtol, atol):
    """Vectorised :func:`_balanced`: arguments that share a closing side,
    saddle abscissa and (rounded-down) parabola width share one contour."""
    values = np.zeros(logx.size)
    errors = np.zeros(logx.size)
    scales = np.zeros(logx.size)
    if st.closing == 0:
        if np.any(logx == 0.0):
            raise InadmissibleParameters("x = 1 lies on the singular circle of this G-function class")
        direction = np.where(logx < 0, -1.0, 1.0)
    else:
        direction = np.full(logx.size, -float(st.closing))
    live = np.where(direction < 0, math.isfinite(st.right_min), math.isfinite(st.left_max))
    cs = _choose_abscissae(st, logx)
    widths = np.array([_parabola_width(float(v)) for v in logx])
    rung = np.searchsorted(_WIDTH_LADDER, widths, side="right") - 1
    keys = np.stack([direction, cs, rung.astype(float)], axis=1)
    for key in np.unique(keys[live], axis=0):
        sel = np.nonzero(live & np.all(keys == key, axis=1))[0]
        d, c, r = float(key[0]), float(key[1]), int(key[2])
        v, e, _, sc = _trapezoid(st, c, float(_WIDTH_LADDER[r]), -d, logx[sel], rtol, atol)
        values[sel], errors[sel], scales[sel] = v, e, sc
    return values, errors, scales


def _check(params, xs, values, errors):
    bad = errors > np.maximum(1e-10, 1e-8 * np.abs(values))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise PrecisionLoss(
            f"{params} at x={xs[i]:.6g}: error estimate {errors[i]:.2e} exceeds tolerance",
            value=values[i],
            error=errors[i],
        )


def meijer_g(params, x, *, method="contour", rtol=1e-12, check=True):
    """Evaluate one G-function value.

    Parameters
    ----------
    params : MeijerGParams
    x : float
        Positive real argument.
    method : {"contour", "series"}
        ``"series"`` sums the residues of the right-hand poles; it converges
        when ``len(c) + len(d) > len(a) + len(b)`` or, for equal counts, when
        ``x < 1``.

    Returns
    -------
    value, EvalDiagnostics
    """
    x = float(x)
    if not x > 0:
        raise ValueError("Meijer G is only evaluated for x > 0")
    if method == "series":
        from .residues import residue_series

        return residue_series(params, x)
    if method != "contour":
        raise ValueError(f"unknown method {method!r}")
    st = _analyse(params)
    if not st.left_max < st.right_min:
        raise InadmissibleParameters(
            f"no separating contour for {params}: left poles reach {st.left_max:g}, "
            f"right poles start at {st.right_min:g}"
        )
    logx = math.log(x)
    if st.kappa > 0:
        c = float(_choose_abscissae(st, np.array([logx]))[0])
        v, e, n, _ = _trapezoid(st, c, 0.0, 1.0, np.array([logx]), rtol, 0.0)
        kind = "contour-vertical"
    elif st.kappa == 0:
        v, e, n, _ = _balanced(st, logx, rtol, 0.0)
        kind = "contour-parabola" if n else "vanishing"
        c = None
    else:
        raise InadmissibleParameters(f"{params}: integrand grows along vertical lines (unsupported class)")
    v, e = float(np.ravel(v)[0]), float(np.ravel(e)[0])
    if check:
        _check(params, np.array([x]), np.array([v]), np.array([e]))
    return v, EvalDiagnostics(kind, int(n), e, c)
