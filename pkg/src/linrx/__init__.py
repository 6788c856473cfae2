"""Output-SINR statistics of linear MIMO receivers over product channels.

Closed-form densities and ergodic sum rates for zero-forcing and MMSE
receivers over Gaussian and Jacobi product ensembles (and generic kernels),
with a Monte Carlo oracle and a command-line front end.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .ensembles import CorrelationSpec, EnsembleKind, EnsembleSpec, GenericKernel, kernel_handle, normalization_alpha
from .errors import (
    ConfigError,
    ConsistencyError,
    ExcessiveRejections,
    InadmissibleParameters,
    LinrxError,
    MaxDepthExceeded,
    NotPositiveDefinite,
    PoleAtNonpositiveInteger,
    PrecisionLoss,
)
from .monte_carlo import MCConfig, VerificationReport, compare, empirical_sumrate, sinr_samples
from .sinr_analytics import (
    DensityCurve,
    Receiver,
    ReceiverConfig,
    SumRateResult,
    density_curve,
    mmse_pdf,
    mmse_sumrate,
    zf_pdf_generic,
    zf_pdf_specialized,
    zf_sumrate,
)

__all__ = [
    "__version__",
    "CorrelationSpec",
    "EnsembleKind",
    "EnsembleSpec",
    "GenericKernel",
    "kernel_handle",
    "normalization_alpha",
    "LinrxError",
    "ConfigError",
    "ConsistencyError",
    "ExcessiveRejections",
    "InadmissibleParameters",
    "MaxDepthExceeded",
    "NotPositiveDefinite",
    "PoleAtNonpositiveInteger",
    "PrecisionLoss",
    "MCConfig",
    "VerificationReport",
    "compare",
    "empirical_sumrate",
    "sinr_samples",
    "DensityCurve",
    "Receiver",
    "ReceiverConfig",
    "SumRateResult",
    "density_curve",
    "mmse_pdf",
    "mmse_sumrate",
    "zf_pdf_generic",
    "zf_pdf_specialized",
    "zf_sumrate",
]
