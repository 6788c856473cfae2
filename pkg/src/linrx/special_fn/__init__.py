"""Log-gamma, digamma and the Meijer G-function."""
from __future__ import annotations

import math

from .gamma import EULER_GAMMA, digamma, euler_plus_digamma, harmonic_number, log_gamma
from .meijer import EvalDiagnostics, MeijerGParams, admissible_strip, meijer_g, meijer_g_many
from .residues import limit_at_zero, residue_series

__all__ = [
    "EULER_GAMMA",
    "log_gamma",
    "digamma",
    "harmonic_number",
    "euler_plus_digamma",
    "MeijerGParams",
    "EvalDiagnostics",
    "admissible_strip",
    "meijer_g",
    "meijer_g_many",
    "residue_series",
    "limit_at_zero",
    "mellin_omega",
]


def mellin_omega(spec, s):
    """Mellin transform of the ensemble weight, ``int_0^inf x^{s-1} omega(x) dx``.

    Gaussian products give ``prod Gamma(s + nu_j)``; Jacobi products give
    ``prod Gamma(s + nu_j) / Gamma(s + mu_j)``, so that ``s = 1`` yields
    ``prod nu_j!`` and ``prod nu_j!/mu_j!`` respectively.
    """
    s = float(s)
    if not s > 0:
        raise ValueError(f"Mellin transform requires s > 0, got {s}")
    kind = getattr(spec.kind, "value", spec.kind)
    if kind not in ("gaussian", "jacobi"):
        raise ValueError(f"no weight function for ensemble kind {kind!r}")
    mu = spec.mu if kind == "jacobi" else ()
    logv = sum(math.lgamma(s + v) for v in spec.nu) - sum(math.lgamma(s + m) for m in mu)
    if abs(logv) < 600:
        # direct product keeps small integer cases exact
        out = 1.0
        for v in spec.nu:
            out *= math.gamma(s + v)
        for m in mu:
            out /= math.gamma(s + m)
        if math.isfinite(out) and out > 0:
            return out
    return math.exp(logv)
