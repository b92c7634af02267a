"""Knowledge-base data model, document handling, validation and synthesis."""

from dermrank.kb.model import (
    DEFAULT_SEX_RATIO,
    FREQUENCY_PRIORS,
    LIKELIHOOD_NO,
    LIKELIHOOD_NO_EXCLUSIVE,
    LIKELIHOOD_UNLIKELY,
    LIKELIHOOD_YES,
    CaseParseError,
    CategorySpec,
    Diagnostic,
    Disease,
    DocumentError,
    ExclusivenessPolicy,
    FrequencyLevel,
    Judgement,
    JudgementEntry,
    KbParseError,
    KnowledgeBase,
    NoSignalError,
    PatientCase,
    Selection,
    Severity,
    Sex,
    SexRatio,
    Symptom,
    TemplateError,
    frequency_to_prior,
    judgement_to_likelihood,
)
from dermrank.kb.parse import (
    case_to_document,
    dump_case,
    dump_diagnostics,
    dump_kb,
    kb_to_document,
    parse_case,
    parse_kb,
    parse_template,
)
from dermrank.kb.synth import (
    JudgementDistribution,
    default_category_template,
    full_scale_template,
    generate_synthetic_case,
    generate_synthetic_kb,
)
from dermrank.kb.validate import has_errors, validate_kb

__all__ = [
    "DEFAULT_SEX_RATIO",
    "FREQUENCY_PRIORS",
    "LIKELIHOOD_NO",
    "LIKELIHOOD_NO_EXCLUSIVE",
    "LIKELIHOOD_UNLIKELY",
    "LIKELIHOOD_YES",
    "CaseParseError",
    "CategorySpec",
    "Diagnostic",
    "Disease",
    "DocumentError",
    "ExclusivenessPolicy",
    "FrequencyLevel",
    "Judgement",
    "JudgementDistribution",
    "JudgementEntry",
    "KbParseError",
    "KnowledgeBase",
    "NoSignalError",
    "PatientCase",
    "Selection",
    "Severity",
    "Sex",
    "SexRatio",
    "Symptom",
    "TemplateError",
    "case_to_document",
    "default_category_template",
    "dump_case",
    "dump_diagnostics",
    "dump_kb",
    "frequency_to_prior",
    "full_scale_template",
    "generate_synthetic_case",
    "generate_synthetic_kb",
    "has_errors",
    "judgement_to_likelihood",
    "kb_to_document",
    "parse_case",
    "parse_kb",
    "parse_template",
    "validate_kb",
]
