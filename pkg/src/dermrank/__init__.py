"""Differential ranking of diseases from expert symptom judgements.

The package is organised around an immutable knowledge base (``dermrank.kb``),
a log-domain ranking engine (``dermrank.engine``), a deliberately naive
linear-domain reference implementation used for cross-checking
(``dermrank.oracle``), an HTTP facade (``dermrank.service``) and a command
line front end (``dermrank.cli``).
"""

from dermrank.kb import (
    CategorySpec,
    Diagnostic,
    Disease,
    FrequencyLevel,
    Judgement,
    JudgementEntry,
    KnowledgeBase,
    PatientCase,
    Severity,
    Sex,
    SexRatio,
    frequency_to_prior,
    judgement_to_likelihood,
    parse_case,
    parse_kb,
    validate_kb,
)
from dermrank.engine import (
    ExclusionReport,
    RankedDisease,
    RankingConfig,
    category_score,
    exclude_diseases,
    rank_all,
    select_diagnoses,
    sex_factor,
    similarity,
)

__all__ = [
    "CategorySpec",
    "Diagnostic",
    "Disease",
    "ExclusionReport",
    "FrequencyLevel",
    "Judgement",
    "JudgementEntry",
    "KnowledgeBase",
    "PatientCase",
    "RankedDisease",
    "RankingConfig",
    "Severity",
    "Sex",
    "SexRatio",
    "category_score",
    "exclude_diseases",
    "frequency_to_prior",
    "judgement_to_likelihood",
    "parse_case",
    "parse_kb",
    "rank_all",
    "select_diagnoses",
    "sex_factor",
    "similarity",
    "validate_kb",
]

__version__ = "0.1.0"
