"""Shared fixtures: a small handcrafted knowledge base covering all seven
wizard steps, every selection mode and every exclusiveness policy."""

from __future__ import annotations

import copy
import json

import pytest

from dermrank.kb import parse_kb

CATEGORIES = [
    {
        "id": "age_group",
        "name": "Predominant age group",
        "selection": "single",
        "simplified": True,
        "exclusiveness_policy": "never",
        "step": 1,
        "symptoms": [
            {"id": "infant", "name": "Infant"},
            {"id": "child", "name": "Child"},
            {"id": "adult", "name": "Adult"},
        ],
    },
    {
        "id": "lesion_count",
        "name": "Number of lesions",
        "selection": "single",
        "simplified": False,
        "exclusiveness_policy": "always",
        "step": 2,
        "symptoms": [
            {"id": "single", "name": "Single"},
            {"id": "multiple", "name": "Multiple"},
        ],
    },
    {
        "id": "form",
        "name": "Form",
        "selection": "multi",
        "simplified": False,
        "exclusiveness_policy": "never",
        "step": 3,
        "symptoms": [
            {"id": "domeShaped", "name": "Dome shaped"},
            {"id": "flatTopped", "name": "Flat topped"},
            {"id": "umbilicated", "name": "Umbilicated"},
        ],
    },
    {
        "id": "location",
        "name": "Location",
        "selection": "multi",
        "simplified": True,
        "exclusiveness_policy": "per_disease",
        "step": 4,
        "symptoms": [
            {"id": "head", "name": "Head"},
            {"id": "arm", "name": "Arm"},
            {"id": "leg", "name": "Leg"},
        ],
    },
    {
        "id": "color",
        "name": "Color",
        "selection": "multi",
        "simplified": False,
        "exclusiveness_policy": "never",
        "step": 5,
        "symptoms": [
            {"id": "red", "name": "Red"},
            {"id": "brown", "name": "Brown"},
        ],
    },
    {
        "id": "course",
        "name": "Course",
        "selection": "single",
        "simplified": False,
        "exclusiveness_policy": "never",
        "step": 6,
        "symptoms": [
            {"id": "acute", "name": "Acute"},
            {"id": "chronic", "name": "Chronic"},
        ],
    },
    {
        "id": "signs",
        "name": "Additional signs",
        "selection": "multi",
        "simplified": False,
        "exclusiveness_policy": "never",
        "step": 7,
        "symptoms": [
            {"id": "itching", "name": "Itching"},
            {"id": "pain", "name": "Pain"},
        ],
    },
]

ALL_SYMPTOMS = [s["id"] for c in CATEGORIES for s in c["symptoms"]]

# "no" is not legal in the always-exclusive lesion_count category.
_DEFAULTS = {s: "no" for s in ALL_SYMPTOMS}
_DEFAULTS["single"] = "no_exclusive"
_DEFAULTS["multiple"] = "no_exclusive"


def judgements(**overrides: str) -> dict[str, str]:
    """A dense judgement map: category-appropriate 'no' plus overrides."""
    result = dict(_DEFAULTS)
    for symptom, value in overrides.items():
        if symptom not in result:
            raise KeyError(symptom)
        result[symptom] = value
    return result


def fixture_kb_document() -> dict:
    """Fresh copy of the valid fixture document (mutate freely in tests)."""
    return copy.deepcopy(
        {
            "schema_version": "1",
            "categories": CATEGORIES,
            "diseases": [
                {
                    # Judgements in the ranking-formula worked example: form
                    # domeShaped/flatTopped yes, umbilicated unlikely.
                    "id": "afx",
                    "name": "Atypical fibroxanthoma",
                    "severe": True,
                    "frequency": "rare",
                    "judgements": judgements(
                        adult="yes",
                        single="yes",
                        domeShaped="yes",
                        flatTopped="yes",
                        umbilicated="unlikely",
                        head="yes",
                        arm="yes",
                        red="yes",
                        brown="unlikely",
                        chronic="yes",
                        pain="unlikely",
                    ),
                },
                {
                    "id": "eczema_like",
                    "name": "Eczema-like dermatitis",
                    "severe": False,
                    "frequency": "very_common",
                    "judgements": judgements(
                        infant="yes",
                        child="yes",
                        adult="yes",
                        multiple="yes",
                        head="yes",
                        arm="yes",
                        leg="yes",
                        red="yes",
                        acute="yes",
                        chronic="yes",
                        itching="yes",
                    ),
                },
                {
                    "id": "fem_only",
                    "name": "Female-only eruption",
                    "severe": False,
                    "frequency": "common",
                    "sex_ratio": {"male": 0, "female": 1},
                    "judgements": judgements(
                        adult="yes",
                        multiple="yes",
                        umbilicated="yes",
                        arm="yes",
                        red="yes",
                        acute="yes",
                        pain="yes",
                    ),
                },
                {
                    # Strict about location: an observed head lesion excludes it.
                    "id": "single_only",
                    "name": "Solitary nodule",
                    "severe": False,
                    "frequency": "uncommon",
                    "judgements": judgements(
                        adult="yes",
                        single="yes",
                        domeShaped="unlikely",
                        head="no_exclusive",
                        arm="yes",
                        red="unlikely",
                        brown="yes",
                        acute="yes",
                    ),
                },
            ],
        }
    )


@pytest.fixture
def kb_document() -> dict:
    return fixture_kb_document()


@pytest.fixture
def kb(kb_document):
    return parse_kb(json.dumps(kb_document))


@pytest.fixture
def kb_file(tmp_path, kb_document):
    path = tmp_path / "kb.json"
    path.write_text(json.dumps(kb_document, indent=2), encoding="utf-8")
    return path


def case_document(sex: str = "unspecified", **observations: list[str]) -> dict:
    return {"sex": sex, "observations": dict(observations)}


WORKED_CASE = case_document(form=["domeShaped", "umbilicated"])
