"""Seeded synthetic knowledge bases and patient cases.

The real disease database is proprietary, so tests, benchmarks and demos run
on deterministic synthetic stand-ins: same seed, same bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from random import Random

from dermrank.kb.model import (
    CategorySpec,
    Disease,
    ExclusivenessPolicy,
    FrequencyLevel,
    Judgement,
    JudgementEntry,
    KnowledgeBase,
    NoSignalError,
    PatientCase,
    Selection,
    Sex,
    SexRatio,
    Symptom,
    TemplateError,
)
from dermrank.kb.validate import _check_categories, has_errors, validate_kb


@dataclass(frozen=True)
class JudgementDistribution:
    """Probabilities used to draw one judgement per disease and symptom.

    Simplified categories fold the 'unlikely' mass into the non-exclusive
    'no'; category-wide exclusiveness policies fold the two 'no' masses into
    whichever variant the policy mandates.
    """

    yes: float = 0.20
    unlikely: float = 0.15
    no: float = 0.55
    no_exclusive: float = 0.10

    def __post_init__(self) -> None:
        parts = (self.yes, self.unlikely, self.no, self.no_exclusive)
        if any(p < 0 for p in parts) or abs(sum(parts) - 1.0) > 1e-9:
            raise ValueError("judgement distribution must be nonnegative and sum to 1")


_SEX_RATIO_CHOICES = (
    SexRatio(2.0, 1.0),
    SexRatio(1.0, 2.0),
    SexRatio(3.0, 1.0),
    SexRatio(1.0, 3.0),
    SexRatio(0.0, 1.0),
    SexRatio(1.0, 0.0),
)


def _prettify(symptom_id: str) -> str:
    words = re.sub(r"([a-z])([A-Z])", r"\1 \2", symptom_id).replace("_", " ").lower()
    return words[:1].upper() + words[1:]


def _category(
    category_id: str,
    selection: Selection,
    simplified: bool,
    policy: ExclusivenessPolicy,
    step: int,
    symptom_ids: list[str],
    name: str | None = None,
) -> CategorySpec:
    return CategorySpec(
        id=category_id,
        name=name or _prettify(category_id),
        selection=selection,
        simplified=simplified,
        exclusiveness_policy=policy,
        step=step,
        symptoms=tuple(Symptom(s, _prettify(s)) for s in symptom_ids),
    )


def default_category_template() -> list[CategorySpec]:
    """A compact seven-step template (10 categories, 37 symptoms)."""
    single, multi = Selection.SINGLE, Selection.MULTI
    never, always, per_disease = (
        ExclusivenessPolicy.NEVER,
        ExclusivenessPolicy.ALWAYS,
        ExclusivenessPolicy.PER_DISEASE,
    )
    return [
        _category("age_group", single, True, never, 1, ["infant", "child", "adolescent", "adult", "elder"]),
        _category("skin_type", single, True, never, 1, ["type_i", "type_ii", "type_iii", "type_iv"]),
        _category("lesion_count", single, False, always, 2, ["single", "multiple"]),
        _category("distribution", single, False, never, 2, ["localized", "widespread"]),
        _category("form", multi, False, never, 3, ["domeShaped", "flatTopped", "umbilicated"]),
        _category("surface", multi, False, never, 3, ["smooth", "scaly", "crusted", "ulcerated"]),
        _category("location", multi, True, per_disease, 4, ["head", "neck", "arm", "trunk", "leg"]),
        _category("color", multi, False, never, 5, ["red", "brown", "blue", "white", "black"]),
        _category("course", single, False, never, 6, ["acute", "chronic", "recurrent"]),
        _category("signs", multi, False, never, 7, ["itching", "pain", "bleeding", "fever"]),
    ]


def full_scale_template() -> list[CategorySpec]:
    """A production-sized seven-step template with 133 symptoms."""
    single, multi = Selection.SINGLE, Selection.MULTI
    never, always, per_disease = (
        ExclusivenessPolicy.NEVER,
        ExclusivenessPolicy.ALWAYS,
        ExclusivenessPolicy.PER_DISEASE,
    )
    return [
        _category("age_group", single, True, never, 1, ["infant", "child", "adolescent", "adult", "elder"]),
        _category("skin_type", single, True, never, 1, ["type_i_ii", "type_iii_iv", "type_v_vi"]),
        _category("lesion_count", single, False, always, 2, ["single", "multiple"]),
        _category("distribution", single, False, never, 2, ["localized", "widespread"]),
        _category(
            "arrangement", multi, False, never, 2,
            ["grouped", "scattered", "linear", "annular", "arciform", "reticular",
             "herpetiform", "zosteriform", "serpiginous", "targetoid", "confluent",
             "discrete", "symmetric", "asymmetric", "follicular", "segmental",
             "generalized", "photodistributed"],
        ),
        _category(
            "primary_lesion", multi, False, never, 3,
            ["macule", "patch", "papule", "plaque", "nodule", "tumor", "vesicle",
             "bulla", "pustule", "cyst", "wheal", "comedo", "erosion", "ulcer",
             "fissure", "atrophy", "scar", "lichenification", "telangiectasia",
             "petechia"],
        ),
        _category("form", multi, False, never, 3, ["domeShaped", "flatTopped", "umbilicated"]),
        _category(
            "surface", multi, False, never, 3,
            ["smooth", "rough", "scaly", "crusted", "hyperkeratotic", "verrucous",
             "eroded", "ulcerated"],
        ),
        _category("consistency", single, False, never, 3, ["soft", "firm", "indurated"]),
        _category("border", single, False, never, 3, ["sharp", "blurred", "irregular"]),
        _category(
            "location", multi, True, per_disease, 4,
            ["scalp", "face", "ear", "neck", "chest", "abdomen", "back", "buttock",
             "arm", "forearm", "hand", "palm", "thigh", "leg", "foot", "sole",
             "genital"],
        ),
        _category("color_count", single, False, never, 5, ["single_color", "multiple_colors"]),
        _category(
            "color", multi, False, never, 5,
            ["red", "pink", "brown", "black", "blue", "gray", "white", "yellow",
             "orange", "purple", "violet", "skin_colored", "hypopigmented",
             "hyperpigmented"],
        ),
        _category("onset", single, False, never, 6, ["sudden", "gradual", "congenital"]),
        _category("course", single, False, never, 6, ["acute", "subacute", "chronic", "recurrent"]),
        _category("change", multi, False, never, 6, ["growing", "shrinking", "stable", "fluctuating"]),
        _category(
            "sensation", multi, False, never, 7,
            ["itching", "pain", "burning", "stinging", "numbness", "tenderness"],
        ),
        _category(
            "general", multi, False, never, 7,
            ["fever", "malaise", "weight_loss", "lymphadenopathy", "joint_pain",
             "headache", "fatigue", "night_sweats"],
        ),
        _category(
            "secondary", multi, False, never, 7,
            ["bleeding", "oozing", "scaling_off", "crust_shedding", "hair_loss",
             "nail_changes", "mucosal_involvement", "photosensitivity"],
        ),
    ]


def _validate_template(template: list[CategorySpec]) -> None:
    findings = _check_categories(tuple(template))
    if not template:
        raise TemplateError(findings)
    if has_errors(findings):
        raise TemplateError([f for f in findings])


def _judgement_thresholds(
    distribution: JudgementDistribution, category: CategorySpec
) -> tuple[float, float, float]:
    yes, unlikely = distribution.yes, distribution.unlikely
    no, no_exclusive = distribution.no, distribution.no_exclusive
    if category.simplified:
        no += unlikely
        unlikely = 0.0
    if category.exclusiveness_policy is ExclusivenessPolicy.ALWAYS:
        no_exclusive += no
        no = 0.0
    elif category.exclusiveness_policy is ExclusivenessPolicy.NEVER:
        no += no_exclusive
        no_exclusive = 0.0
    return yes, yes + unlikely, yes + unlikely + no


def generate_synthetic_kb(
    n_diseases: int,
    category_template: list[CategorySpec] | None = None,
    seed: int = 0,
    distribution: JudgementDistribution | None = None,
    severe_rate: float = 0.10,
) -> KnowledgeBase:
    """Generate a validated knowledge base, deterministically per seed."""
    if n_diseases < 1:
        raise ValueError("n_diseases must be at least 1")
    template = list(category_template) if category_template is not None else default_category_template()
    _validate_template(template)
    distribution = distribution or JudgementDistribution()

    rng = Random(seed)
    frequency_levels = list(FrequencyLevel)
    thresholds = {c.id: _judgement_thresholds(distribution, c) for c in template}

    diseases = []
    for i in range(1, n_diseases + 1):
        severe = rng.random() < severe_rate
        frequency = rng.choice(frequency_levels)
        sex_ratio = rng.choice(_SEX_RATIO_CHOICES) if rng.random() < 0.30 else SexRatio(1.0, 1.0)
        judgements: dict[str, JudgementEntry] = {}
        for category in template:
            t_yes, t_unlikely, t_no = thresholds[category.id]
            for symptom in category.symptoms:
                r = rng.random()
                if r < t_yes:
                    entry = JudgementEntry(Judgement.YES)
                elif r < t_unlikely:
                    entry = JudgementEntry(Judgement.UNLIKELY)
                elif r < t_no:
                    entry = JudgementEntry(Judgement.NO, exclusive=False)
                else:
                    entry = JudgementEntry(Judgement.NO, exclusive=True)
                judgements[symptom.id] = entry
        diseases.append(
            Disease(
                id=f"d{i}",
                name=f"Disease {i}",
                severe=severe,
                frequency=frequency,
                sex_ratio=sex_ratio,
                judgements=judgements,
            )
        )

    kb = KnowledgeBase(schema_version="1", categories=tuple(template), diseases=tuple(diseases))
    findings = validate_kb(kb)
    if has_errors(findings):
        raise RuntimeError(f"generator produced an invalid knowledge base: {findings[0].message}")
    return kb


def generate_synthetic_case(
    kb: KnowledgeBase,
    target_disease: str,
    noise: float = 0.0,
    seed: int = 0,
    max_categories: int | None = None,
) -> PatientCase:
    """Build a case whose observations point at ``target_disease``.

    With ``noise`` = 0 every observed symptom carries a 'yes' judgement for
    the target; with positive noise each observation is independently
    replaced, with that probability, by a uniformly random symptom of the
    same category.  The patient's sex is drawn compatibly with the target's
    sex ratio so the target itself is never excluded by sex.
    """
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")
    disease = kb.disease(target_disease)
    if disease is None:
        raise ValueError(f"unknown disease {target_disease!r}")

    rng = Random(seed)
    if disease.sex_ratio.male == 0:
        sex = Sex.FEMALE
    elif disease.sex_ratio.female == 0:
        sex = Sex.MALE
    else:
        sex = rng.choice((Sex.MALE, Sex.FEMALE, Sex.UNSPECIFIED))

    signal_categories = []
    for category in kb.categories:
        yes_symptoms = tuple(
            s
            for s in category.symptom_ids
            if disease.judgements[s].judgement is Judgement.YES
        )
        if yes_symptoms:
            signal_categories.append((category, yes_symptoms))
    if not signal_categories:
        raise NoSignalError(f"disease {target_disease!r} has no 'yes' symptom in any category")
    if max_categories is not None:
        signal_categories = signal_categories[:max_categories]

    observations: dict[str, tuple[str, ...]] = {}
    for category, yes_symptoms in signal_categories:
        if category.selection is Selection.SINGLE:
            chosen = [rng.choice(yes_symptoms)]
        else:
            chosen = [s for s in yes_symptoms if rng.random() < 0.8]
            if not chosen:
                chosen = [rng.choice(yes_symptoms)]
        if noise > 0:
            chosen = [
                rng.choice(category.symptom_ids) if rng.random() < noise else s
                for s in chosen
            ]
        picked = set(chosen)
        observations[category.id] = tuple(s for s in category.symptom_ids if s in picked)

    return PatientCase(sex=sex, observations=observations)
