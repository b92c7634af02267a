"""Semantic validation of constructed knowledge bases.

This is the data-debugging half of the toolchain: it re-checks every
invariant the parser enforces so that programmatically built knowledge bases
get the same scrutiny as parsed documents.  ERROR findings make the knowledge
base unusable; WARNINGs flag suspicious but legal data.
"""

from __future__ import annotations

from collections import Counter

from dermrank.kb.model import (
    CategorySpec,
    Diagnostic,
    Disease,
    ExclusivenessPolicy,
    Judgement,
    KnowledgeBase,
    Severity,
)

SUPPORTED_SCHEMA_VERSIONS = ("1",)


def _error(code: str, location: str, message: str) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, location, message)


def _warning(code: str, location: str, message: str) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, location, message)


def validate_kb(kb: KnowledgeBase) -> list[Diagnostic]:
    """Return every finding about ``kb``; an empty list means fully clean."""
    findings: list[Diagnostic] = []

    if kb.schema_version not in SUPPORTED_SCHEMA_VERSIONS:
        findings.append(
            _error(
                "SCHEMA_VERSION_UNSUPPORTED",
                "schema_version",
                f"unsupported schema_version {kb.schema_version!r}; "
                f"supported: {', '.join(SUPPORTED_SCHEMA_VERSIONS)}",
            )
        )

    if not kb.categories or not kb.diseases:
        findings.append(
            _error(
                "EMPTY_KB",
                "document",
                "a knowledge base needs at least one category and one disease",
            )
        )

    findings.extend(_check_categories(kb.categories))
    symptom_ids = kb.symptom_ids()
    for disease in kb.diseases:
        findings.extend(_check_disease(kb, disease, symptom_ids))

    dupes = [i for i, n in Counter(d.id for d in kb.diseases).items() if n > 1]
    for disease_id in dupes:
        findings.append(
            _error("DUPLICATE_ID", disease_id, f"duplicate disease id {disease_id!r}")
        )

    return findings


def _check_categories(categories: tuple[CategorySpec, ...]) -> list[Diagnostic]:
    findings: list[Diagnostic] = []
    seen_categories: Counter[str] = Counter(c.id for c in categories)
    for category_id, n in seen_categories.items():
        if n > 1:
            findings.append(
                _error(
                    "DUPLICATE_ID", category_id, f"duplicate category id {category_id!r}"
                )
            )

    seen_symptoms: Counter[str] = Counter()
    for category in categories:
        if not category.symptoms:
            findings.append(
                _error(
                    "EMPTY_CATEGORY",
                    category.id,
                    f"category {category.id!r} declares no symptoms",
                )
            )
        if not 1 <= category.step <= 7:
            findings.append(
                _error(
                    "INVALID_STEP",
                    category.id,
                    f"category {category.id!r} has step {category.step}; "
                    "the wizard has steps 1-7",
                )
            )
        seen_symptoms.update(category.symptom_ids)
    for symptom_id, n in seen_symptoms.items():
        if n > 1:
            findings.append(
                _error(
                    "DUPLICATE_ID",
                    symptom_id,
                    f"symptom id {symptom_id!r} appears {n} times across the knowledge base",
                )
            )
    return findings


def _check_disease(
    kb: KnowledgeBase, disease: Disease, symptom_ids: tuple[str, ...]
) -> list[Diagnostic]:
    findings: list[Diagnostic] = []
    loc = disease.id

    ratio = disease.sex_ratio
    if ratio.male + ratio.female <= 0:
        findings.append(
            _error(
                "INVALID_SEX_RATIO",
                loc,
                f"disease {disease.id!r} has sex ratio "
                f"{ratio.male}:{ratio.female}; at least one component must be positive",
            )
        )

    # Dense matrix: exactly one judgement per knowledge-base symptom.
    missing = [s for s in symptom_ids if s not in disease.judgements]
    if missing:
        shown = ", ".join(missing[:5])
        if len(missing) > 5:
            shown += f" and {len(missing) - 5} more"
        findings.append(
            _error(
                "SPARSE_JUDGEMENT_MATRIX",
                loc,
                f"disease {disease.id!r} is missing judgements for: {shown}",
            )
        )
    known = set(symptom_ids)
    for symptom_id in disease.judgements:
        if symptom_id not in known:
            findings.append(
                _error(
                    "UNKNOWN_SYMPTOM",
                    loc,
                    f"disease {disease.id!r} judges unknown symptom {symptom_id!r}",
                )
            )

    all_no = bool(disease.judgements)
    for category in kb.categories:
        always_excluded = len(category.symptoms) > 0
        for symptom in category.symptoms:
            entry = disease.judgements.get(symptom.id)
            if entry is None:
                always_excluded = False
                continue
            if entry.judgement is not Judgement.NO:
                all_no = False
            if not (entry.judgement is Judgement.NO and entry.exclusive):
                always_excluded = False
            if entry.exclusive and entry.judgement is not Judgement.NO:
                findings.append(
                    _error(
                        "ILLEGAL_JUDGEMENT",
                        loc,
                        f"disease {disease.id!r}, symptom {symptom.id!r}: "
                        f"exclusive flag on a {entry.judgement.value!r} judgement",
                    )
                )
            if category.simplified and entry.judgement is Judgement.UNLIKELY:
                findings.append(
                    _error(
                        "UNLIKELY_IN_SIMPLIFIED",
                        loc,
                        f"disease {disease.id!r}, symptom {symptom.id!r}: "
                        f"'unlikely' is not used in simplified category {category.id!r}",
                    )
                )
            if entry.judgement is Judgement.NO:
                policy = category.exclusiveness_policy
                if policy is ExclusivenessPolicy.ALWAYS and not entry.exclusive:
                    findings.append(
                        _error(
                            "EXCLUSIVENESS_POLICY_CONFLICT",
                            loc,
                            f"disease {disease.id!r}, symptom {symptom.id!r}: "
                            f"non-exclusive 'no' in always-exclusive category {category.id!r}",
                        )
                    )
                elif policy is ExclusivenessPolicy.NEVER and entry.exclusive:
                    findings.append(
                        _error(
                            "EXCLUSIVENESS_POLICY_CONFLICT",
                            loc,
                            f"disease {disease.id!r}, symptom {symptom.id!r}: "
                            f"exclusive 'no' in never-exclusive category {category.id!r}",
                        )
                    )
        if always_excluded:
            findings.append(
                _warning(
                    "ALWAYS_EXCLUDED_BY_CATEGORY",
                    loc,
                    f"disease {disease.id!r} answers exclusive 'no' to every symptom "
                    f"of category {category.id!r}; any observation there excludes it",
                )
            )

    if all_no:
        findings.append(
            _warning(
                "ALL_NO",
                loc,
                f"disease {disease.id!r} answers 'no' to every symptom; "
                "it can never score well",
            )
        )

    return findings


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)
