"""Quantitative evaluation of PAQ attribute translation candidates."""
from .circumplex import Axis, PaqAttribute, axis_of, neighbors
from .ingest import StudyConfig, filter_ccr, load_config, load_respondents, load_responses
from .pipeline import analyze_attribute, run_study
from .ranktests import (
    bonferroni,
    conover_iman,
    friedman,
    kruskal_wallis,
    mann_whitney,
    midranks,
    prentice,
)
from .scoring import Criterion, CriterionScores, RatingRecord, score_record

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "Criterion",
    "CriterionScores",
    "PaqAttribute",
    "RatingRecord",
    "StudyConfig",
    "analyze_attribute",
    "axis_of",
    "bonferroni",
    "conover_iman",
    "filter_ccr",
    "friedman",
    "kruskal_wallis",
    "load_config",
    "load_respondents",
    "load_responses",
    "mann_whitney",
    "midranks",
    "neighbors",
    "prentice",
    "run_study",
    "score_record",
]
