"""Goodness-of-fit testing for Weibull and exponential models on lower-record data."""

from .dist import ExponentialParams, WeibullParams
from .estimate import (
    ExponentialFit,
    SurvivalStep,
    WeibullFit,
    fit_exponential,
    fit_weibull,
    h_alpha,
    npmle,
    npmle_pooled,
)
from .gof import (
    GlrResult,
    GofResult,
    GofStatistics,
    cm_statistic,
    decide,
    ds_statistic,
    glr_test,
    gof_quadrature_oracle,
    gof_statistics,
    ks_statistic,
)
from .mc import CriticalTable, NullSampleSet, build_table, empirical_quantile, simulate_null_statistics
from .records import OrderedRecordView, RecordSample, extract_records, generate_records, ordered_view

__version__ = "0.1.0"

__all__ = [
    "CriticalTable",
    "ExponentialFit",
    "ExponentialParams",
    "GlrResult",
    "GofResult",
    "GofStatistics",
    "NullSampleSet",
    "OrderedRecordView",
    "RecordSample",
    "SurvivalStep",
    "WeibullFit",
    "WeibullParams",
    "build_table",
    "cm_statistic",
    "decide",
    "ds_statistic",
    "empirical_quantile",
    "extract_records",
    "fit_exponential",
    "fit_weibull",
    "generate_records",
    "glr_test",
    "gof_quadrature_oracle",
    "gof_statistics",
    "h_alpha",
    "ks_statistic",
    "npmle",
    "npmle_pooled",
    "ordered_view",
    "simulate_null_statistics",
]
