"""Parsing and serialisation of knowledge-base and patient-case documents.

Both document kinds are UTF-8 JSON.  Parsing is strict: unknown fields,
sparse judgement matrices and out-of-range values are reported as ERROR
diagnostics rather than silently defaulted, and a document either yields a
fully validated object or the complete list of findings (never a partially
valid one).
"""

from __future__ import annotations

import json
from typing import Any

from dermrank.kb.model import (
    CaseParseError,
    CategorySpec,
    Diagnostic,
    Disease,
    ExclusivenessPolicy,
    FrequencyLevel,
    Judgement,
    JudgementEntry,
    KbParseError,
    KnowledgeBase,
    PatientCase,
    Selection,
    Severity,
    Sex,
    SexRatio,
    Symptom,
)
from dermrank.kb.validate import has_errors, validate_kb

_JUDGEMENT_VALUES = {
    "yes": JudgementEntry(Judgement.YES),
    "unlikely": JudgementEntry(Judgement.UNLIKELY),
    "no": JudgementEntry(Judgement.NO, exclusive=False),
    "no_exclusive": JudgementEntry(Judgement.NO, exclusive=True),
}

_KB_KEYS = {"schema_version", "categories", "diseases"}
_CATEGORY_KEYS = {"id", "name", "selection", "simplified", "exclusiveness_policy", "step", "symptoms"}
_SYMPTOM_KEYS = {"id", "name"}
_DISEASE_KEYS = {"id", "name", "severe", "frequency", "sex_ratio", "judgements"}
_DISEASE_REQUIRED = _DISEASE_KEYS - {"sex_ratio"}
_CASE_KEYS = {"sex", "observations"}


class _Collector:
    """Accumulates diagnostics while parsing continues past bad fields."""

    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []

    def error(self, code: str, location: str, message: str) -> None:
        self.diagnostics.append(Diagnostic(Severity.ERROR, code, location, message))

    @property
    def failed(self) -> bool:
        return has_errors(self.diagnostics)


def _load_json(raw: bytes | str, out: _Collector) -> Any:
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            out.error("SYNTAX_ERROR", f"byte {exc.start}", f"document is not UTF-8: {exc.reason}")
            return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        out.error("SYNTAX_ERROR", f"line {exc.lineno}, column {exc.colno}", exc.msg)
        return None


def _check_keys(obj: dict, allowed: set, required: set, where: str, out: _Collector) -> None:
    for key in obj:
        if key not in allowed:
            out.error("UNKNOWN_FIELD", where, f"unknown field {key!r}")
    for key in sorted(required):
        if key not in obj:
            out.error("MISSING_FIELD", where, f"missing required field {key!r}")


def _string(obj: dict, key: str, where: str, out: _Collector, allow_empty: bool = False) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or (not allow_empty and not value):
        if key in obj:
            out.error("INVALID_FIELD", where, f"field {key!r} must be a nonempty string")
        return ""
    return value


def _boolean(obj: dict, key: str, where: str, out: _Collector) -> bool:
    value = obj.get(key)
    if not isinstance(value, bool):
        if key in obj:
            out.error("INVALID_FIELD", where, f"field {key!r} must be a boolean")
        return False
    return value


def _number(value: Any) -> float | None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    return float(value)


def parse_kb(raw: bytes | str) -> KnowledgeBase:
    """Parse and fully validate a knowledge-base document.

    Raises :class:`KbParseError` carrying the complete diagnostic list when
    the document has any ERROR-level finding.
    """
    out = _Collector()
    doc = _load_json(raw, out)
    if doc is None:
        raise KbParseError(out.diagnostics)
    if not isinstance(doc, dict):
        out.error("INVALID_FIELD", "document", "top level must be a JSON object")
        raise KbParseError(out.diagnostics)

    _check_keys(doc, _KB_KEYS, _KB_KEYS, "document", out)
    schema_version = _string(doc, "schema_version", "schema_version", out)

    categories = _parse_categories(doc.get("categories"), out)
    diseases = _parse_diseases(doc.get("diseases"), out)

    # Structurally bad fields were replaced by placeholders above, so the
    # semantic validator can still run and the caller sees every finding.
    kb = KnowledgeBase(
        schema_version=schema_version,
        categories=tuple(categories),
        diseases=tuple(diseases),
    )
    findings = validate_kb(kb)
    if out.failed or has_errors(findings):
        raise KbParseError(out.diagnostics + findings)
    return kb


def _parse_categories(node: Any, out: _Collector) -> list[CategorySpec]:
    if not isinstance(node, list):
        if node is not None:
            out.error("INVALID_FIELD", "categories", "'categories' must be an array")
        return []
    categories = []
    for i, raw in enumerate(node):
        where = f"categories[{i}]"
        if not isinstance(raw, dict):
            out.error("INVALID_FIELD", where, "category must be an object")
            continue
        _check_keys(raw, _CATEGORY_KEYS, _CATEGORY_KEYS, where, out)
        category_id = _string(raw, "id", where, out)
        where = category_id or where

        selection_raw = _string(raw, "selection", where, out)
        try:
            selection = Selection(selection_raw)
        except ValueError:
            out.error("INVALID_FIELD", where, f"selection must be 'single' or 'multi', got {selection_raw!r}")
            selection = Selection.MULTI

        policy_raw = _string(raw, "exclusiveness_policy", where, out)
        try:
            policy = ExclusivenessPolicy(policy_raw)
        except ValueError:
            out.error(
                "INVALID_FIELD",
                where,
                f"exclusiveness_policy must be 'always', 'never' or 'per_disease', got {policy_raw!r}",
            )
            policy = ExclusivenessPolicy.NEVER

        step = raw.get("step")
        if isinstance(step, bool) or not isinstance(step, int):
            if "step" in raw:
                out.error("INVALID_FIELD", where, "step must be an integer")
            step = 0

        symptoms = []
        symptoms_raw = raw.get("symptoms")
        if not isinstance(symptoms_raw, list):
            if symptoms_raw is not None:
                out.error("INVALID_FIELD", where, "'symptoms' must be an array")
            symptoms_raw = []
        for j, sym in enumerate(symptoms_raw):
            sym_where = f"{where}.symptoms[{j}]"
            if not isinstance(sym, dict):
                out.error("INVALID_FIELD", sym_where, "symptom must be an object")
                continue
            _check_keys(sym, _SYMPTOM_KEYS, _SYMPTOM_KEYS, sym_where, out)
            symptoms.append(
                Symptom(id=_string(sym, "id", sym_where, out), name=_string(sym, "name", sym_where, out))
            )

        categories.append(
            CategorySpec(
                id=category_id,
                name=_string(raw, "name", where, out),
                selection=selection,
                simplified=_boolean(raw, "simplified", where, out),
                exclusiveness_policy=policy,
                step=step,
                symptoms=tuple(symptoms),
            )
        )
    return categories


def _parse_diseases(node: Any, out: _Collector) -> list[Disease]:
    if not isinstance(node, list):
        if node is not None:
            out.error("INVALID_FIELD", "diseases", "'diseases' must be an array")
        return []
    diseases = []
    for i, raw in enumerate(node):
        where = f"diseases[{i}]"
        if not isinstance(raw, dict):
            out.error("INVALID_FIELD", where, "disease must be an object")
            continue
        _check_keys(raw, _DISEASE_KEYS, _DISEASE_REQUIRED, where, out)
        disease_id = _string(raw, "id", where, out)
        where = disease_id or where

        frequency_raw = _string(raw, "frequency", where, out)
        try:
            frequency = FrequencyLevel(frequency_raw)
        except ValueError:
            out.error(
                "INVALID_FIELD",
                where,
                f"frequency must be one of {', '.join(f.value for f in FrequencyLevel)}; got {frequency_raw!r}",
            )
            frequency = FrequencyLevel.COMMON

        sex_ratio = _parse_sex_ratio(raw.get("sex_ratio"), where, out)

        judgements: dict[str, JudgementEntry] = {}
        judgements_raw = raw.get("judgements")
        if not isinstance(judgements_raw, dict):
            if judgements_raw is not None:
                out.error("INVALID_FIELD", where, "'judgements' must be an object")
            judgements_raw = {}
        for symptom_id, value in judgements_raw.items():
            entry = _JUDGEMENT_VALUES.get(value) if isinstance(value, str) else None
            if entry is None:
                out.error(
                    "ILLEGAL_JUDGEMENT",
                    where,
                    f"illegal judgement {value!r} for symptom {symptom_id!r}; "
                    "expected 'yes', 'unlikely', 'no' or 'no_exclusive'",
                )
                continue
            judgements[symptom_id] = entry

        diseases.append(
            Disease(
                id=disease_id,
                name=_string(raw, "name", where, out),
                severe=_boolean(raw, "severe", where, out),
                frequency=frequency,
                sex_ratio=sex_ratio,
                judgements=judgements,
            )
        )
    return diseases


def _parse_sex_ratio(node: Any, where: str, out: _Collector) -> SexRatio:
    if node is None:
        return SexRatio(1.0, 1.0)
    if not isinstance(node, dict):
        out.error("INVALID_FIELD", where, "'sex_ratio' must be an object with 'male' and 'female'")
        return SexRatio(1.0, 1.0)
    _check_keys(node, {"male", "female"}, {"male", "female"}, where, out)
    male = _number(node.get("male"))
    female = _number(node.get("female"))
    if male is None or female is None or male < 0 or female < 0:
        out.error(
            "INVALID_SEX_RATIO",
            where,
            "sex ratio components must be nonnegative numbers",
        )
        return SexRatio(1.0, 1.0)
    return SexRatio(male, female)


def parse_case(raw: bytes | str, kb: KnowledgeBase) -> PatientCase:
    """Parse a patient-case document against ``kb``.

    Observed symptom lists are deduplicated and normalised to knowledge-base
    declaration order; empty lists count as "category not observed".  Raises
    :class:`CaseParseError` on any ERROR finding.
    """
    out = _Collector()
    doc = _load_json(raw, out)
    if doc is None:
        raise CaseParseError(out.diagnostics)
    if not isinstance(doc, dict):
        out.error("INVALID_FIELD", "document", "top level must be a JSON object")
        raise CaseParseError(out.diagnostics)

    _check_keys(doc, _CASE_KEYS, _CASE_KEYS, "document", out)

    sex_raw = doc.get("sex")
    sex = Sex.UNSPECIFIED
    if isinstance(sex_raw, str):
        try:
            sex = Sex(sex_raw)
        except ValueError:
            out.error("INVALID_SEX", "sex", f"sex must be 'male', 'female' or 'unspecified', got {sex_raw!r}")
    elif "sex" in doc:
        out.error("INVALID_SEX", "sex", "sex must be a string")

    observations: dict[str, tuple[str, ...]] = {}
    observations_raw = doc.get("observations")
    if not isinstance(observations_raw, dict):
        if observations_raw is not None:
            out.error("INVALID_FIELD", "observations", "'observations' must be an object")
        observations_raw = {}

    for category in kb.categories:
        if category.id not in observations_raw:
            continue
        selected = observations_raw[category.id]
        if not isinstance(selected, list) or not all(isinstance(s, str) for s in selected):
            out.error("INVALID_FIELD", category.id, "observed symptoms must be an array of symptom ids")
            continue
        in_category = set(category.symptom_ids)
        chosen: set[str] = set()
        for symptom_id in selected:
            if symptom_id in in_category:
                chosen.add(symptom_id)
            elif kb.category_of_symptom(symptom_id) is not None:
                out.error(
                    "SYMPTOM_NOT_IN_CATEGORY",
                    symptom_id,
                    f"symptom {symptom_id!r} does not belong to category {category.id!r}",
                )
            else:
                out.error("UNKNOWN_SYMPTOM", symptom_id, f"unknown symptom {symptom_id!r}")
        if not chosen:
            continue
        if category.selection is Selection.SINGLE and len(chosen) > 1:
            out.error(
                "MUTUAL_EXCLUSION",
                category.id,
                f"category {category.id!r} allows at most one selection; got {len(chosen)}",
            )
            continue
        observations[category.id] = tuple(s for s in category.symptom_ids if s in chosen)

    known_categories = {c.id for c in kb.categories}
    for category_id in observations_raw:
        if category_id not in known_categories:
            out.error("UNKNOWN_CATEGORY", category_id, f"unknown category {category_id!r}")

    if out.failed:
        raise CaseParseError(out.diagnostics)
    return PatientCase(sex=sex, observations=observations)


def kb_to_document(kb: KnowledgeBase) -> dict:
    """Project a knowledge base back onto its canonical document form."""
    categories = []
    for c in kb.categories:
        categories.append(
            {
                "id": c.id,
                "name": c.name,
                "selection": c.selection.value,
                "simplified": c.simplified,
                "exclusiveness_policy": c.exclusiveness_policy.value,
                "step": c.step,
                "symptoms": [{"id": s.id, "name": s.name} for s in c.symptoms],
            }
        )
    symptom_order = kb.symptom_ids()
    diseases = []
    for d in kb.diseases:
        record: dict[str, Any] = {
            "id": d.id,
            "name": d.name,
            "severe": d.severe,
            "frequency": d.frequency.value,
        }
        if d.sex_ratio != SexRatio(1.0, 1.0):
            record["sex_ratio"] = {"male": d.sex_ratio.male, "female": d.sex_ratio.female}
        judgements = {}
        for symptom_id in symptom_order:
            entry = d.judgements.get(symptom_id)
            if entry is None:
                continue
            if entry.judgement is Judgement.NO and entry.exclusive:
                judgements[symptom_id] = "no_exclusive"
            else:
                judgements[symptom_id] = entry.judgement.value
        record["judgements"] = judgements
        diseases.append(record)
    return {"schema_version": kb.schema_version, "categories": categories, "diseases": diseases}


def dump_kb(kb: KnowledgeBase) -> str:
    """Serialise deterministically: fixed key order, two-space indent."""
    return json.dumps(kb_to_document(kb), indent=2, ensure_ascii=False) + "\n"


def case_to_document(case: PatientCase) -> dict:
    return {
        "sex": case.sex.value,
        "observations": {cid: list(symptoms) for cid, symptoms in case.observations.items()},
    }


def dump_case(case: PatientCase) -> str:
    return json.dumps(case_to_document(case), indent=2, ensure_ascii=False) + "\n"


def dump_diagnostics(diagnostics: list[Diagnostic]) -> str:
    """Render findings as JSON lines, one object per finding."""
    return "".join(json.dumps(d.to_json_object(), ensure_ascii=False) + "\n" for d in diagnostics)


def parse_template(raw: bytes | str) -> list[CategorySpec]:
    """Parse a category template: either {"categories": [...]} or a bare array.

    Raises :class:`TemplateError` on structural problems; cross-category
    checks (duplicate ids, steps) are re-run by the generator.
    """
    from dermrank.kb.model import TemplateError
    from dermrank.kb.validate import _check_categories

    out = _Collector()
    doc = _load_json(raw, out)
    if doc is None:
        raise TemplateError(out.diagnostics)
    if isinstance(doc, dict):
        _check_keys(doc, {"categories"}, {"categories"}, "document", out)
        doc = doc.get("categories")
    if not isinstance(doc, list):
        out.error("INVALID_FIELD", "document", "template must be an array of categories")
        raise TemplateError(out.diagnostics)
    categories = _parse_categories(doc, out)
    if not categories and not out.failed:
        out.error("EMPTY_KB", "document", "template declares no categories")
    out.diagnostics.extend(_check_categories(tuple(categories)))
    if out.failed:
        raise TemplateError(out.diagnostics)
    return categories
