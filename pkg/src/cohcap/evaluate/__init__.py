"""Metrics and corpus statistics: relation/facet distributions, overlap
rates, genre breakdowns, Cohen's kappa, CIDEr, and report emission.
"""

from .agreement import AgreementReport, agreement_summary, cohen_kappa
from .cider import CiderResult, cider_score
from .report import ReportTable, distribution_table, emit_report, overlap_table
from .stats import (
    DistributionReport,
    GroupDistribution,
    OverlapRate,
    genre_distribution,
    overlap_rate,
    relation_distribution,
)

__all__ = [
    "AgreementReport",
    "agreement_summary",
    "cohen_kappa",
    "CiderResult",
    "cider_score",
    "ReportTable",
    "distribution_table",
    "overlap_table",
    "emit_report",
    "DistributionReport",
    "GroupDistribution",
    "OverlapRate",
    "genre_distribution",
    "overlap_rate",
    "relation_distribution",
]
