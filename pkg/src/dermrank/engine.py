"""Three-phase disease ranking: exclusion, log-domain scoring, selection.

All accumulation happens in natural-log space: a fully specified case touches
up to 133 symptoms whose likelihoods go down to 0.001, and the corresponding
linear product underflows double precision long before that.  Linear values
appear only in the small-instance reference implementation
(:mod:`dermrank.oracle`).
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from dermrank.kb.model import (
    CategorySpec,
    Disease,
    KnowledgeBase,
    Judgement,
    PatientCase,
    Sex,
    SexRatio,
    frequency_to_prior,
    judgement_to_likelihood,
)

# Pseudo category/symptom ids used in exclusion reports when a disease is
# ruled out by the patient's sex rather than by an observed symptom.
SEX_CATEGORY_ID = "sex"


class ExclusionNotApplied(RuntimeError):
    """An observed symptom with zero likelihood reached the scoring phase."""


@dataclass(frozen=True)
class RankingConfig:
    """Scoring knobs: per-category weights, selection thresholds, list size.

    Both thresholds are log-domain.  Weights default to 1.0, which reproduces
    the unweighted scoring formula exactly.
    """

    category_weights: Mapping[str, float] = field(default_factory=dict)
    similarity_threshold: float = math.log(1e-12)
    rank_threshold: float = math.log(1e-18)
    max_results: int = 20

    def __post_init__(self) -> None:
        for category_id, w in self.category_weights.items():
            if not w > 0:
                raise ValueError(f"weight for category {category_id!r} must be positive, got {w}")
        if self.max_results < 1:
            raise ValueError("max_results must be at least 1")

    def weight(self, category_id: str) -> float:
        return self.category_weights.get(category_id, 1.0)


@dataclass(frozen=True)
class ExclusionReport:
    """Why a disease was ruled out: the first observed trigger in
    declaration order, or the pseudo symptom ``sex:<sex>`` for a zero
    component of the disease's sex ratio."""

    disease: str
    triggering_symptom: str
    category: str


@dataclass(frozen=True)
class RankedDisease:
    """Per-disease ranking outcome.  Log fields are ``None`` for excluded
    diseases, finite for every survivor."""

    disease: str
    log_similarity: float | None
    log_rank: float | None
    excluded: bool
    exclusion: ExclusionReport | None
    selected: bool
    severe: bool


def exclude_diseases(
    kb: KnowledgeBase, case: PatientCase
) -> tuple[list[str], list[ExclusionReport]]:
    """Remove diseases contradicted outright by the case.

    A disease is excluded iff some observed symptom carries an exclusive
    'no' for it, or the patient's sex hits a zero component of its sex
    ratio.  Non-exclusive 'no' only penalises, never excludes.
    """
    observed = [
        (category, case.observations[category.id])
        for category in kb.categories
        if case.observations.get(category.id)
    ]
    survivors: list[str] = []
    reports: list[ExclusionReport] = []
    for disease in kb.diseases:
        report = _sex_exclusion(disease, case.sex)
        if report is None:
            for category, symptoms in observed:
                for symptom_id in symptoms:
                    entry = disease.judgements[symptom_id]
                    if entry.judgement is Judgement.NO and entry.exclusive:
                        report = ExclusionReport(disease.id, symptom_id, category.id)
                        break
                if report is not None:
                    break
        if report is None:
            survivors.append(disease.id)
        else:
            reports.append(report)
    return survivors, reports


def _sex_exclusion(disease: Disease, sex: Sex) -> ExclusionReport | None:
    ratio = disease.sex_ratio
    if sex is Sex.MALE and ratio.male == 0:
        return ExclusionReport(disease.id, "sex:male", SEX_CATEGORY_ID)
    if sex is Sex.FEMALE and ratio.female == 0:
        return ExclusionReport(disease.id, "sex:female", SEX_CATEGORY_ID)
    return None


def category_score_from_values(
    observed_values: Sequence[float], all_values: Sequence[float]
) -> float:
    """Normalised geometric mean: k-th root of the observed product over the
    sum of the whole category.

    Evaluated as exp(mean(ln observed) - ln(sum)) so that large categories
    cannot underflow.  When every value in the category is the same the
    result is algebraically 1/n independent of the observation, and that
    exact value is returned directly.
    """
    if not observed_values:
        raise ValueError("at least one observed value is required")
    first = all_values[0]
    if all(v == first for v in all_values) and all(v == first for v in observed_values):
        return 1.0 / len(all_values)
    total = math.fsum(all_values)
    log_mean = math.fsum(math.log(v) for v in observed_values) / len(observed_values)
    return math.exp(log_mean - math.log(total))


def category_score(
    category: CategorySpec, observed: Iterable[str], disease: Disease
) -> float:
    """Score one category of a surviving disease; result lies in (0, 1].

    Raises :class:`ExclusionNotApplied` if an observed symptom has zero
    likelihood: such diseases must be removed by exclusion before scoring.
    """
    observed = tuple(observed)
    observed_values = []
    for symptom_id in observed:
        value = judgement_to_likelihood(disease.judgements[symptom_id])
        if value == 0.0:
            raise ExclusionNotApplied(
                f"symptom {symptom_id!r} has zero likelihood for disease "
                f"{disease.id!r}; run exclusion before scoring"
            )
        observed_values.append(value)
    all_values = [judgement_to_likelihood(disease.judgements[s]) for s in category.symptom_ids]
    return category_score_from_values(observed_values, all_values)


def sex_factor(sex: Sex, ratio: SexRatio) -> float:
    """The patient-sex share of the disease's sex ratio, in [0, 1]."""
    if sex is Sex.MALE:
        return ratio.male / (ratio.male + ratio.female)
    if sex is Sex.FEMALE:
        return ratio.female / (ratio.male + ratio.female)
    return 1.0


def similarity(
    kb: KnowledgeBase,
    case: PatientCase,
    disease: Disease,
    config: RankingConfig | None = None,
) -> float:
    """Log similarity: weighted sum of log category scores over observed
    categories.  An empty case yields 0.0 (the empty product)."""
    config = config if config is not None else RankingConfig()
    total = 0.0
    for category in kb.categories:
        observed = case.observations.get(category.id)
        if not observed:
            continue
        total += config.weight(category.id) * math.log(
            category_score(category, observed, disease)
        )
    return total


class _KbIndex:
    """Ranking-ready arrays derived once per knowledge base.

    Everything here is case-independent: the (diseases x symptoms) log
    likelihood matrix, per-category log denominators, log frequency priors
    and log sex shares.
    """

    def __init__(self, kb: KnowledgeBase):
        symptom_order = [s for c in kb.categories for s in c.symptom_ids]
        self.row = {d.id: i for i, d in enumerate(kb.diseases)}
        self.col = {s: j for j, s in enumerate(symptom_order)}
        likelihoods = np.array(
            [
                [judgement_to_likelihood(d.judgements[s]) for s in symptom_order]
                for d in kb.diseases
            ],
            dtype=np.float64,
        )
        with np.errstate(divide="ignore"):
            self.log_likelihood = np.log(likelihoods)
            self.log_denominator = np.empty((len(kb.diseases), len(kb.categories)))
            for k, category in enumerate(kb.categories):
                cols = [self.col[s] for s in category.symptom_ids]
                self.log_denominator[:, k] = np.log(likelihoods[:, cols].sum(axis=1))
        self.log_prior = np.array(
            [math.log(frequency_to_prior(d.frequency)) for d in kb.diseases]
        )
        self.log_sex_share = {
            Sex.MALE: np.array([_log_share(sex_factor(Sex.MALE, d.sex_ratio)) for d in kb.diseases]),
            Sex.FEMALE: np.array([_log_share(sex_factor(Sex.FEMALE, d.sex_ratio)) for d in kb.diseases]),
        }


def _log_share(share: float) -> float:
    return math.log(share) if share > 0 else -math.inf


_INDEX_CACHE: "weakref.WeakKeyDictionary[KnowledgeBase, _KbIndex]" = weakref.WeakKeyDictionary()


def _index(kb: KnowledgeBase) -> _KbIndex:
    index = _INDEX_CACHE.get(kb)
    if index is None:
        index = _KbIndex(kb)
        _INDEX_CACHE[kb] = index
    return index


def rank_all(
    kb: KnowledgeBase, case: PatientCase, config: RankingConfig | None = None
) -> list[RankedDisease]:
    """Rank every disease for the case.

    Survivors come first, ordered by log rank descending with ties broken by
    log similarity descending and then disease id ascending; excluded
    diseases follow, flagged and ordered by id.  The whole computation is a
    pure function of its inputs.
    """
    config = config if config is not None else RankingConfig()
    survivors, reports = exclude_diseases(kb, case)
    index = _index(kb)

    scored: list[RankedDisease] = []
    if survivors:
        rows = np.fromiter((index.row[d] for d in survivors), dtype=np.intp, count=len(survivors))
        log_sim = np.zeros(len(survivors))
        for k, category in enumerate(kb.categories):
            observed = case.observations.get(category.id)
            if not observed:
                continue
            cols = np.fromiter((index.col[s] for s in observed), dtype=np.intp, count=len(observed))
            mean_log = index.log_likelihood[rows[:, None], cols[None, :]].mean(axis=1)
            log_sim = log_sim + config.weight(category.id) * (
                mean_log - index.log_denominator[rows, k]
            )
        log_rank = log_sim + index.log_prior[rows]
        if case.sex is not Sex.UNSPECIFIED:
            log_rank = log_rank + index.log_sex_share[case.sex][rows]

        severe = {d.id: d.severe for d in kb.diseases}
        scored = [
            RankedDisease(
                disease=disease_id,
                log_similarity=float(log_sim[i]),
                log_rank=float(log_rank[i]),
                excluded=False,
                exclusion=None,
                selected=False,
                severe=severe[disease_id],
            )
            for i, disease_id in enumerate(survivors)
        ]
        scored.sort(key=lambda r: (-r.log_rank, -r.log_similarity, r.disease))

    severe_all = {d.id: d.severe for d in kb.diseases}
    excluded = [
        RankedDisease(
            disease=report.disease,
            log_similarity=None,
            log_rank=None,
            excluded=True,
            exclusion=report,
            selected=False,
            severe=severe_all[report.disease],
        )
        for report in sorted(reports, key=lambda r: r.disease)
    ]
    return scored + excluded


def select_diagnoses(
    ranked: list[RankedDisease], config: RankingConfig | None = None
) -> list[RankedDisease]:
    """Pick the diagnoses: survivors above both thresholds, top ``max_results``.

    The returned entries carry ``selected=True`` and keep the rank order.
    Numeric scores travel with them for machine consumers, but anything
    presenting to humans must not display them.
    """
    config = config if config is not None else RankingConfig()
    selected = [
        replace(r, selected=True)
        for r in ranked
        if not r.excluded
        and r.log_similarity >= config.similarity_threshold
        and r.log_rank >= config.rank_threshold
    ]
    return selected[: config.max_results]


def ranking_to_documents(
    kb: KnowledgeBase, ranked: list[RankedDisease], include_scores: bool = True
) -> list[dict]:
    """Serialise ranking output for the CLI and service wire formats."""
    names = {d.id: d.name for d in kb.diseases}
    documents = []
    for r in ranked:
        doc: dict = {
            "disease_id": r.disease,
            "name": names.get(r.disease, r.disease),
            "severe": r.severe,
            "excluded": r.excluded,
            "selected": r.selected,
        }
        if include_scores:
            doc["log_similarity"] = r.log_similarity
            doc["log_rank"] = r.log_rank
        if r.exclusion is not None:
            doc["exclusion"] = {
                "symptom_id": r.exclusion.triggering_symptom,
                "category_id": r.exclusion.category,
            }
        documents.append(doc)
    return documents
