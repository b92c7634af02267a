"""Validator findings: every ERROR and WARNING family."""

import json

import pytest

from dermrank.kb import (
    Judgement,
    JudgementEntry,
    KbParseError,
    Severity,
    SexRatio,
    has_errors,
    parse_kb,
    validate_kb,
)
from dermrank.kb.model import Disease, FrequencyLevel, KnowledgeBase


def parse_codes(document: dict) -> set[str]:
    with pytest.raises(KbParseError) as exc_info:
        parse_kb(json.dumps(document))
    return {d.code for d in exc_info.value.diagnostics}


def test_valid_fixture_yields_no_findings(kb):
    assert validate_kb(kb) == []


def test_unlikely_in_simplified_category(kb_document):
    kb_document["diseases"][0]["judgements"]["infant"] = "unlikely"
    assert "UNLIKELY_IN_SIMPLIFIED" in parse_codes(kb_document)


def test_plain_no_in_always_exclusive_category(kb_document):
    kb_document["diseases"][0]["judgements"]["multiple"] = "no"
    assert "EXCLUSIVENESS_POLICY_CONFLICT" in parse_codes(kb_document)


def test_exclusive_no_in_never_exclusive_category(kb_document):
    kb_document["diseases"][0]["judgements"]["red"] = "no_exclusive"
    assert "EXCLUSIVENESS_POLICY_CONFLICT" in parse_codes(kb_document)


def test_per_disease_category_allows_both_no_variants(kb_document):
    kb_document["diseases"][0]["judgements"]["leg"] = "no_exclusive"
    kb_document["diseases"][1]["judgements"]["leg"] = "no"
    parse_kb(json.dumps(kb_document))


def test_zero_sex_ratio(kb_document):
    kb_document["diseases"][0]["sex_ratio"] = {"male": 0, "female": 0}
    assert "INVALID_SEX_RATIO" in parse_codes(kb_document)


def test_duplicate_disease_id(kb_document):
    kb_document["diseases"][1]["id"] = "afx"
    assert "DUPLICATE_ID" in parse_codes(kb_document)


def test_duplicate_category_id(kb_document):
    kb_document["categories"][1]["id"] = "age_group"
    assert "DUPLICATE_ID" in parse_codes(kb_document)


def test_duplicate_symptom_id_across_categories(kb_document):
    kb_document["categories"][4]["symptoms"][0]["id"] = "itching"
    found = parse_codes(kb_document)
    assert "DUPLICATE_ID" in found


def test_step_out_of_range(kb_document):
    kb_document["categories"][0]["step"] = 8
    assert "INVALID_STEP" in parse_codes(kb_document)


def test_empty_category(kb_document):
    kb_document["categories"][0]["symptoms"] = []
    assert "EMPTY_CATEGORY" in parse_codes(kb_document)


def test_empty_kb():
    assert "EMPTY_KB" in parse_codes({"schema_version": "1", "categories": [], "diseases": []})


def test_all_exclusive_no_in_single_category_warns(kb_document):
    # afx already answers exclusive no to "multiple"; flip "single" too.
    kb_document["diseases"][0]["judgements"]["single"] = "no_exclusive"
    kb = parse_kb(json.dumps(kb_document))  # warnings do not block parsing
    findings = validate_kb(kb)
    assert any(
        f.code == "ALWAYS_EXCLUDED_BY_CATEGORY"
        and f.severity is Severity.WARNING
        and f.location == "afx"
        for f in findings
    )


def test_all_no_disease_warns(kb_document):
    kb_document["diseases"].append(
        {
            "id": "ghost",
            "name": "Ghost",
            "severe": False,
            "frequency": "rare",
            "judgements": {
                s["id"]: ("no_exclusive" if c["id"] == "lesion_count" else "no")
                for c in kb_document["categories"]
                for s in c["symptoms"]
            },
        }
    )
    kb = parse_kb(json.dumps(kb_document))
    findings = validate_kb(kb)
    assert any(f.code == "ALL_NO" and f.location == "ghost" for f in findings)
    assert not has_errors(findings)


def test_exclusive_flag_on_yes_judgement_is_caught(kb):
    # Not expressible in a document; build the bad entry programmatically.
    base = kb.diseases[0]
    judgements = dict(base.judgements)
    judgements["red"] = JudgementEntry(Judgement.YES, exclusive=True)
    broken = Disease(
        id=base.id,
        name=base.name,
        severe=base.severe,
        frequency=FrequencyLevel.RARE,
        sex_ratio=SexRatio(1.0, 1.0),
        judgements=judgements,
    )
    bad_kb = KnowledgeBase(
        schema_version="1",
        categories=kb.categories,
        diseases=(broken,) + kb.diseases[1:],
    )
    assert any(f.code == "ILLEGAL_JUDGEMENT" for f in validate_kb(bad_kb))
