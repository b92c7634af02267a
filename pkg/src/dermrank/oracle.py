"""Deliberately naive linear-domain reference ranking.

This module recomputes similarity and rank exactly as the formulas read:
products, k-th roots and plain division, no log transform.  It exists purely
to cross-check the engine on instances small enough not to underflow, so it
keeps its own transcription of the likelihood and frequency constants and
shares no scoring code with :mod:`dermrank.engine`.  The discrete exclusion
phase and the tie-break rule are shared deliberately: they admit no numeric
divergence, and re-deriving them would only create false alarms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from dermrank.engine import RankedDisease, RankingConfig, exclude_diseases
from dermrank.kb.model import (
    FrequencyLevel,
    Judgement,
    JudgementEntry,
    KnowledgeBase,
    PatientCase,
    Sex,
    SexRatio,
)

# Log-domain gap below which two scores count as the same value.  Double
# rounding differs between the product and ln-sum paths, so exact equality
# between engine and oracle is unattainable.
TIE_LOG_TOLERANCE = 1e-12

_UNDERFLOW_LIMIT = 1e-300

# Independent transcription of the judgement and frequency encodings; keep
# these literals out of sync with nothing -- they ARE the second opinion.
_PRIORS = {
    FrequencyLevel.EXCEPTIONAL: 1e-07,
    FrequencyLevel.RARE: 1e-06,
    FrequencyLevel.UNCOMMON: 1e-05,
    FrequencyLevel.LESS_COMMON: 1e-04,
    FrequencyLevel.COMMON: 1e-03,
    FrequencyLevel.VERY_COMMON: 1e-02,
}


def _likelihood(entry: JudgementEntry) -> float:
    if entry.judgement is Judgement.YES:
        return 1.0
    if entry.judgement is Judgement.UNLIKELY:
        return 0.02
    return 0.0 if entry.exclusive else 0.001


def _sex_share(sex: Sex, ratio: SexRatio) -> float:
    if sex is Sex.MALE:
        return ratio.male / (ratio.male + ratio.female)
    if sex is Sex.FEMALE:
        return ratio.female / (ratio.male + ratio.female)
    return 1.0


class OracleUnderflowError(Exception):
    """A linear intermediate dropped below the representable guard limit."""

    code = "UNDERFLOW"


class LengthMismatchError(Exception):
    """Engine and oracle disagree about which diseases survived."""

    code = "LENGTH_MISMATCH"


@dataclass(frozen=True)
class OrderingReport:
    """Outcome of an engine-vs-oracle comparison.

    ``first_divergence`` is (position, engine disease id, oracle disease id)
    for the first position that cannot be explained by a tie.
    """

    agree: bool
    first_divergence: tuple[int, str, str] | None
    max_relative_value_error: float


def oracle_rank_all(
    kb: KnowledgeBase, case: PatientCase, config: RankingConfig | None = None
) -> list[tuple[str, float]]:
    """Rank survivors with straight linear arithmetic.

    Returns (disease id, linear rank value) pairs in ranking order.  Raises
    :class:`OracleUnderflowError` whenever an intermediate product falls
    below 1e-300; callers must keep instances small.
    """
    config = config if config is not None else RankingConfig()
    survivors, _ = exclude_diseases(kb, case)
    by_id = {d.id: d for d in kb.diseases}

    rows: list[tuple[str, float, float]] = []
    for disease_id in survivors:
        disease = by_id[disease_id]
        similarity_value = 1.0
        for category in kb.categories:
            observed = case.observations.get(category.id)
            if not observed:
                continue
            product = 1.0
            for symptom_id in observed:
                product *= _likelihood(disease.judgements[symptom_id])
            if product < _UNDERFLOW_LIMIT:
                raise OracleUnderflowError(
                    f"observed-likelihood product underflowed for disease {disease_id!r}"
                )
            root = product ** (1.0 / len(observed))
            total = 0.0
            for symptom_id in category.symptom_ids:
                total += _likelihood(disease.judgements[symptom_id])
            similarity_value *= (root / total) ** config.weight(category.id)
            if similarity_value < _UNDERFLOW_LIMIT:
                raise OracleUnderflowError(
                    f"similarity underflowed for disease {disease_id!r}"
                )
        value = similarity_value * _PRIORS[disease.frequency] * _sex_share(case.sex, disease.sex_ratio)
        if value < _UNDERFLOW_LIMIT:
            raise OracleUnderflowError(f"rank value underflowed for disease {disease_id!r}")
        rows.append((disease_id, value, similarity_value))

    rows.sort(key=lambda row: (-row[1], -row[2], row[0]))
    return [(disease_id, value) for disease_id, value, _ in rows]


def compare_orderings(
    engine_output: list[RankedDisease], oracle_output: list[tuple[str, float]]
) -> OrderingReport:
    """Check that both orderings agree once ties are collapsed.

    Two diseases tie when their scores are closer than ``TIE_LOG_TOLERANCE``
    in log domain; any permutation inside a tie group is accepted.  Also
    reports the largest relative gap between exp(log_rank) and the oracle's
    linear value over all survivors.
    """
    engine_rows = [r for r in engine_output if not r.excluded]
    engine_ids = [r.disease for r in engine_rows]
    oracle_ids = [disease_id for disease_id, _ in oracle_output]
    if set(engine_ids) != set(oracle_ids):
        raise LengthMismatchError(
            f"survivor sets differ: engine has {len(engine_ids)}, oracle has {len(oracle_ids)}"
        )

    engine_log = {r.disease: r.log_rank for r in engine_rows}
    oracle_log = {disease_id: math.log(value) for disease_id, value in oracle_output}
    engine_pos = {disease_id: i for i, disease_id in enumerate(engine_ids)}

    max_error = 0.0
    for disease_id, value in oracle_output:
        error = abs(math.exp(engine_log[disease_id]) - value) / value
        max_error = max(max_error, error)

    def conflicting(a: str, b: str) -> bool:
        # Oracle prefers a over b; a genuine conflict needs the engine to
        # prefer b with both gaps wider than the tie tolerance.
        return (
            engine_pos[a] > engine_pos[b]
            and abs(engine_log[a] - engine_log[b]) >= TIE_LOG_TOLERANCE
            and abs(oracle_log[a] - oracle_log[b]) >= TIE_LOG_TOLERANCE
        )

    agree = True
    for i in range(len(oracle_ids)):
        for j in range(i + 1, len(oracle_ids)):
            if conflicting(oracle_ids[i], oracle_ids[j]):
                agree = False
                break
        if not agree:
            break

    first_divergence = None
    if not agree:
        for position, (engine_id, oracle_id) in enumerate(zip(engine_ids, oracle_ids)):
            if engine_id == oracle_id:
                continue
            engine_gap = abs(engine_log[engine_id] - engine_log[oracle_id])
            oracle_gap = abs(oracle_log[engine_id] - oracle_log[oracle_id])
            if engine_gap >= TIE_LOG_TOLERANCE and oracle_gap >= TIE_LOG_TOLERANCE:
                first_divergence = (position, engine_id, oracle_id)
                break
        if first_divergence is None:
            for position, (engine_id, oracle_id) in enumerate(zip(engine_ids, oracle_ids)):
                if engine_id != oracle_id:
                    first_divergence = (position, engine_id, oracle_id)
                    break

    return OrderingReport(
        agree=agree,
        first_divergence=first_divergence,
        max_relative_value_error=max_error,
    )
