"""Monte Carlo oracle: channel draws, per-stream SINRs and goodness of fit.

SINRs come straight from their matrix definitions::

    zf:   delta / [(H^dagger H)^{-1}]_kk
    mmse: 1 / [(I + delta H^dagger H)^{-1}]_kk - 1

with diagonals of inverses taken from Cholesky factors.  Draws are split
across workers, each owning a child stream of the master seed, so results are
bit-stable for a fixed (seed, workers) pair.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .ensembles import CorrelationSpec, EnsembleSpec, normalization_alpha, sample_factors_product
from .errors import ConfigError, ExcessiveRejections, NotPositiveDefinite
from .linalg_rng import adjoint, inverse_diagonals, spawn
from .sinr_analytics import DensityCurve, Receiver

__all__ = [
    "MCConfig",
    "SinrDraws",
    "VerificationReport",
    "sample_channel",
    "sinr_samples",
    "draw_sinrs",
    "empirical_sumrate",
    "ks_distance",
    "compare",
    "dump_samples_csv",
]

MAX_REJECTION_RATE = 1e-3
_BATCH = 4096


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo experiment.

    Either ``delta`` or ``es`` must be given; with ``es`` the effective power is
    ``es * alpha / (n_t * n0)`` with ``alpha`` from :func:`normalization_alpha`.
    ``k`` selects one stream (1-based); ``k=None`` keeps all streams.
    ``bins`` is an int (>= 10) or ``"fd"`` for the Freedman-Diaconis rule.
    """

    spec: EnsembleSpec
    receiver: Receiver = Receiver.ZF
    delta: float | None = None
    es: float | None = None
    n0: float = 1.0
    corr: CorrelationSpec | None = None
    samples: int = 100_000
    seed: int = 0
    k: int | None = 1
    bins: int | str = "fd"
    workers: int = 1

    def __post_init__(self):
        try:
            object.__setattr__(self, "receiver", Receiver(getattr(self.receiver, "value", self.receiver)))
        except ValueError:
            raise ConfigError(f"unknown receiver {self.receiver!r}", field="receiver") from None
        if self.samples < 1:
            raise ConfigError("must be at least 1", field="samples")
        if self.workers < 1:
            raise ConfigError("must be at least 1", field="workers")
        if (self.delta is None) == (self.es is None):
            raise ConfigError("give exactly one of delta and es", field="delta")
        if self.delta is not None and not self.delta >= 0:
            raise ConfigError("must be non-negative", field="delta")
        if self.es is not None and not self.es >= 0:
            raise ConfigError("must be non-negative", field="es")
        if self.k is not None and not 1 <= self.k <= self.spec.n_t:
            raise ConfigError(f"stream index must lie in 1..{self.spec.n_t}", field="k")
        if isinstance(self.bins, str):
            if self.bins != "fd":
                raise ConfigError("must be an integer >= 10 or 'fd'", field="bins")
        elif self.bins < 10:
            raise ConfigError("must be at least 10", field="bins")
        if self.corr is not None and self.corr.n_t != self.spec.n_t:
            raise ConfigError("correlation size does not match n_t", field="sigma_t")
        if self.receiver is Receiver.MMSE and self.corr is not None and not self.corr.is_identity:
            raise ConfigError("MMSE analysis only covers Sigma_t = I", field="sigma_t")

    @property
    def effective_delta(self):
        if self.delta is not None:
            return float(self.delta)
        alpha = normalization_alpha(self.spec, self.corr, seed=self.seed)
        return self.es * alpha / (self.spec.n_t * self.n0)


@dataclass
class SinrDraws:
    """SINR samples; ``values`` has shape (draws,) for one stream, else (draws, n_t)."""

    values: np.ndarray
    drawn: int
    rejected: int


def sample_channel(spec, corr, rng, size=None):
    """Channel matrix ``H`` (or a batch) with transmit correlation applied.

    ``H = P sqrt(Sigma_t)``; for ``Sigma_t = I`` the product is skipped, so
    the draw is bit-identical to the uncorrelated one.
    """
    h = sample_factors_product(spec, rng, size=size)
    if corr is not None and not corr.is_identity:
        h = h @ corr.sqrt()
    return h


def _gram(h):
    return adjoint(h) @ h


def _safe_inverse_diagonals(m):
    """Inverse diagonals of a batch; rows with a failed Cholesky come back as NaN."""
    try:
        return inverse_diagonals(m)
    except NotPositiveDefinite:
        out = np.full(m.shape[:-1], np.nan)
        for i in range(m.shape[0]):
            try:
                out[i] = inverse_diagonals(m[i])
            except NotPositiveDefinite:
                pass
        return out


def _worker(spec, corr, deltas, count, rng, receivers):
    """Draw ``count`` channels; return {receiver: array (count, len(deltas), n_t)} and rejections."""
    n = spec.n_t
    out = {r: np.empty((count, len(deltas), n)) for r in receivers}
    keep = np.ones(count, dtype=bool)
    done = 0
    eye = np.eye(n)
    while done < count:
        b = min(_BATCH, count - done)
        a = _gram(sample_channel(spec, corr, rng, size=b))
        sl = slice(done, done + b)
        if Receiver.ZF in receivers:
            d = _safe_inverse_diagonals(a)
            bad = np.any(~np.isfinite(d), axis=1)
            keep[sl] &= ~bad
            for i, delta in enumerate(deltas):
                out[Receiver.ZF][sl, i, :] = delta / d
        if Receiver.MMSE in receivers:
            for i, delta in enumerate(deltas):
                d = _safe_inverse_diagonals(eye + delta * a)
                keep[sl] &= np.all(np.isfinite(d), axis=1)
                out[Receiver.MMSE][sl, i, :] = 1.0 / d - 1.0
        done += b
    return {r: v[keep] for r, v in out.items()}, int(np.count_nonzero(~keep))


def draw_sinrs(spec, corr, deltas, samples, seed, receivers=(Receiver.ZF, Receiver.MMSE), workers=1):
    """SINRs of all streams for several ``delta`` values from common channel draws.

    Returns ``({receiver: array (accepted, len(deltas), n_t)}, rejected)``.
    Draws are split evenly over ``workers`` child streams of ``seed``; the
    concatenation order is the worker order, so the result does not depend on
    scheduling.
    """
    receivers = tuple(Receiver(getattr(r, "value", r)) for r in receivers)
    deltas = [float(d) for d in np.atleast_1d(deltas)]
    rngs = spawn(seed, workers)
    counts = [samples // workers + (1 if i < samples % workers else 0) for i in range(workers)]
    jobs = [(spec, corr, deltas, c, r, receivers) for c, r in zip(counts, rngs)]
    if workers == 1:
        parts = [_worker(*jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _worker(*j), jobs))
    rejected = sum(p[1] for p in parts)
    if rejected > MAX_REJECTION_RATE * samples:
        raise ExcessiveRejections(
            f"{rejected} of {samples} channel draws were singular; the ensemble is probably misconfigured"
        )
    merged = {r: np.concatenate([p[0][r] for p in parts]) for r in receivers}
    return merged, rejected


def sinr_samples(config):
    """Per-draw SINRs for ``config`` (one stream, or all streams if ``k`` is None)."""
    delta = config.effective_delta
    vals, rejected = draw_sinrs(
        config.spec, config.corr, [delta], config.samples, config.seed, (config.receiver,), config.workers
    )
    v = vals[config.receiver][:, 0, :]
    if config.k is not None:
        v = v[:, config.k - 1]
    return SinrDraws(v, config.samples, rejected)


def empirical_sumrate(config):
    """Sample mean of ``sum_k ln(1 + gamma_k)`` and its standard error (nats).

    Draws are independent, so the standard error is the sample standard
    deviation of the per-draw totals over ``sqrt(N)``.
    """
    delta = config.effective_delta
    if delta == 0:
        return 0.0, 0.0
    vals, _ = draw_sinrs(config.spec, config.corr, [delta], config.samples, config.seed,
                         (config.receiver,), config.workers)
    per_draw = np.log1p(vals[config.receiver][:, 0, :]).sum(axis=1)
    se = per_draw.std(ddof=1) / math.sqrt(per_draw.size) if per_draw.size > 1 else math.inf
    return float(per_draw.mean()), float(se)


def ks_distance(samples, grid, cdf):
    """Kolmogorov-Smirnov distance between samples and a tabulated CDF (linear interpolation)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.interp(x, grid, cdf, left=0.0, right=1.0)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def _bin_edges(samples, bins, upper):
    x = np.asarray(samples, dtype=float)
    if bins == "fd":
        q75, q25 = np.percentile(x, [75, 25])
        width = 2.0 * (q75 - q25) / x.size ** (1.0 / 3.0)
        hi = min(float(x.max()), upper)
        count = int(np.clip(math.ceil(hi / width) if width > 0 else 10, 10, 10_000))
    else:
        hi, count = min(float(x.max()), upper), int(bins)
    return np.linspace(0.0, hi, count + 1)


@dataclass
class VerificationReport:
    """Analytic-versus-sampled comparison statistics."""

    samples: int
    seed: int | None
    ks_distance: float
    ks_threshold: float
    ks_pass: bool
    l1_distance: float
    bins: int
    sumrate_empirical: float | None = None
    sumrate_se: float | None = None
    sumrate_analytic: float | None = None
    sumrate_pass: bool | None = None
    rejected: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.ks_pass and self.sumrate_pass is not False

    @property
    def failures(self):
        out = []
        if not self.ks_pass:
            out.append(f"ks_distance={self.ks_distance:.4g} >= {self.ks_threshold:.4g}")
        if self.sumrate_pass is False:
            out.append(
                f"sumrate: |{self.sumrate_empirical:.6g} - {self.sumrate_analytic:.6g}| > 2 se ({self.sumrate_se:.3g})"
            )
        return out

    def attach_sumrate(self, empirical, se, analytic):
        self.sumrate_empirical, self.sumrate_se, self.sumrate_analytic = float(empirical), float(se), float(analytic)
        self.sumrate_pass = bool(abs(empirical - analytic) <= 2.0 * se)

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        d["failures"] = self.failures
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def compare(density: DensityCurve, samples, *, ks_threshold=0.01, bins="fd", seed=None,
            min_samples=1000, allow_small=False):
    """Compare SINR samples with an analytic density curve.

    KS distance uses the cumulative-trapezoid CDF of the curve; the binned L1
    distance ``sum |p_emp - p_ana|`` uses ``bins`` on ``[0, max sample]``
    with analytic bin masses from the same CDF.  With fewer than
    ``min_samples`` samples a ValueError is raised unless ``allow_small``,
    in which case the KS threshold is relaxed to the 1% critical value
    ``1.63/sqrt(n)`` and a note is added.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    notes = []
    if n < min_samples:
        if not allow_small:
            raise ValueError(f"insufficient samples: {n} < {min_samples}")
        relaxed = 1.63 / math.sqrt(n)
        if relaxed > ks_threshold:
            notes.append(
                f"insufficient samples for {ks_threshold:g} KS threshold; relaxed to 1.63/sqrt(n) = {relaxed:.4g}"
            )
            ks_threshold = relaxed
    grid = density.gamma
    cdf = density.cdf()
    ks = ks_distance(x, grid, cdf)
    edges = _bin_edges(x, bins, float(grid[-1]))
    counts, _ = np.histogram(x, bins=edges)
    p_emp = counts / n
    p_ana = np.diff(np.interp(edges, grid, cdf, left=0.0, right=1.0))
    l1 = float(np.abs(p_emp - p_ana).sum())
    return VerificationReport(
        samples=int(n),
        seed=seed,
        ks_distance=ks,
        ks_threshold=float(ks_threshold),
        ks_pass=bool(ks < ks_threshold),
        l1_distance=l1,
        bins=int(edges.size - 1),
        notes=notes,
    )


def dump_samples_csv(path, samples):
    """Write samples as a single-column CSV with header ``gamma``."""
    np.savetxt(path, np.asarray(samples, dtype=float).ravel(), fmt="%.17g", header="gamma", comments="")
