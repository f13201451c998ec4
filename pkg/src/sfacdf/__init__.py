"""Analytic CDFs of the stochastic-frontier composed error, with oracles."""

from .composed import (
    ExpComposedParams,
    Method,
    MethodError,
    Orientation,
    ParameterError,
    TruncNormalComposedParams,
    cdf,
    exp_cdf_direct,
    exp_cdf_emg,
    exp_pdf,
    half_normal_cdf,
    pdf,
    tn_cdf_bvn,
    tn_cdf_owen,
    tn_pdf,
)
from .special import (
    bvn_cdf,
    log_std_normal_cdf,
    owen_t,
    std_normal_cdf,
    std_normal_pdf,
)

__version__ = "0.1.0"

__all__ = [
    "ExpComposedParams",
    "Method",
    "MethodError",
    "Orientation",
    "ParameterError",
    "TruncNormalComposedParams",
    "bvn_cdf",
    "cdf",
    "exp_cdf_direct",
    "exp_cdf_emg",
    "exp_pdf",
    "half_normal_cdf",
    "log_std_normal_cdf",
    "owen_t",
    "pdf",
    "std_normal_cdf",
    "std_normal_pdf",
    "tn_cdf_bvn",
    "tn_cdf_owen",
    "tn_pdf",
]
