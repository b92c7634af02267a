"""Core data model: judgements, their numeric encodings, and the immutable
knowledge-base / patient-case value types shared by every other module."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

# Numeric encoding of expert judgements.  These four constants are the only
# likelihood values a legal knowledge base can produce.
LIKELIHOOD_YES = 1.0
LIKELIHOOD_UNLIKELY = 0.02
LIKELIHOOD_NO = 0.001  # penalised but kept in the ranking
LIKELIHOOD_NO_EXCLUSIVE = 0.0  # removed during the exclusion phase


class Judgement(Enum):
    """Expert statement about whether a symptom occurs with a disease."""

    YES = "yes"
    UNLIKELY = "unlikely"
    NO = "no"


@dataclass(frozen=True)
class JudgementEntry:
    """A judgement plus its exclusiveness flag.

    ``exclusive`` is meaningful only for ``NO`` judgements: an exclusive "no"
    removes the disease from consideration as soon as the symptom is observed,
    a non-exclusive "no" merely penalises it.
    """

    judgement: Judgement
    exclusive: bool = False


def judgement_to_likelihood(entry: JudgementEntry) -> float:
    """Map a judgement entry onto its numeric likelihood.

    Pure and total: yes -> 1.0, unlikely -> 0.02, non-exclusive no -> 0.001,
    exclusive no -> 0.0.
    """
    if entry.judgement is Judgement.YES:
        return LIKELIHOOD_YES
    if entry.judgement is Judgement.UNLIKELY:
        return LIKELIHOOD_UNLIKELY
    if entry.exclusive:
        return LIKELIHOOD_NO_EXCLUSIVE
    return LIKELIHOOD_NO


class FrequencyLevel(Enum):
    """Six-level, order-of-magnitude scale for overall disease frequency."""

    EXCEPTIONAL = "exceptional"
    RARE = "rare"
    UNCOMMON = "uncommon"
    LESS_COMMON = "less_common"
    COMMON = "common"
    VERY_COMMON = "very_common"


FREQUENCY_PRIORS: Mapping[FrequencyLevel, float] = {
    FrequencyLevel.EXCEPTIONAL: 1e-7,
    FrequencyLevel.RARE: 1e-6,
    FrequencyLevel.UNCOMMON: 1e-5,
    FrequencyLevel.LESS_COMMON: 1e-4,
    FrequencyLevel.COMMON: 1e-3,
    FrequencyLevel.VERY_COMMON: 1e-2,
}


def frequency_to_prior(level: FrequencyLevel) -> float:
    """Return the prior probability approximation for a frequency level."""
    return FREQUENCY_PRIORS[level]


class Selection(Enum):
    """Whether a category allows one observed symptom or several."""

    SINGLE = "single"
    MULTI = "multi"


class ExclusivenessPolicy(Enum):
    """How the exclusive flag of "no" judgements is fixed within a category.

    ``ALWAYS`` / ``NEVER`` pin the flag category-wide; ``PER_DISEASE`` (used
    for body-site categories) lets each disease choose.
    """

    ALWAYS = "always"
    NEVER = "never"
    PER_DISEASE = "per_disease"


class Sex(Enum):
    MALE = "male"
    FEMALE = "female"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class SexRatio:
    """A male:female prevalence ratio; a zero component confines the disease
    to one sex.

    Negative components are rejected on construction; the degenerate 0:0
    ratio is representable so that the validator can report it as a finding
    instead of the parser crashing.
    """

    male: float
    female: float

    def __post_init__(self) -> None:
        if self.male < 0 or self.female < 0:
            raise ValueError("sex ratio components must be nonnegative")


DEFAULT_SEX_RATIO = SexRatio(1.0, 1.0)


@dataclass(frozen=True)
class Symptom:
    id: str
    name: str


@dataclass(frozen=True)
class CategorySpec:
    """A group of symptoms scored together.

    ``step`` is the wizard page (1-7) the category is entered on; the engine
    ignores it.  ``simplified`` categories restrict judgements to yes/no.
    """

    id: str
    name: str
    selection: Selection
    simplified: bool
    exclusiveness_policy: ExclusivenessPolicy
    step: int
    symptoms: tuple[Symptom, ...]

    @property
    def symptom_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.symptoms)


@dataclass(frozen=True)
class Disease:
    """One disease record: a dense judgement map plus epidemiology.

    ``judgements`` must contain exactly one entry for every symptom in the
    knowledge base; sparseness is a data-entry error, not a default.
    """

    id: str
    name: str
    severe: bool
    frequency: FrequencyLevel
    judgements: Mapping[str, JudgementEntry]
    sex_ratio: SexRatio = DEFAULT_SEX_RATIO


@dataclass(frozen=True, eq=False)
class KnowledgeBase:
    """Immutable container for categories and diseases.

    Identity semantics (``eq=False``) so instances can key weak caches; two
    knowledge bases are compared through their serialised documents.
    """

    schema_version: str
    categories: tuple[CategorySpec, ...]
    diseases: tuple[Disease, ...]

    def symptom_ids(self) -> tuple[str, ...]:
        """All symptom ids in declaration order (categories, then symptoms)."""
        return tuple(s.id for c in self.categories for s in c.symptoms)

    def category(self, category_id: str) -> CategorySpec | None:
        for c in self.categories:
            if c.id == category_id:
                return c
        return None

    def disease(self, disease_id: str) -> Disease | None:
        for d in self.diseases:
            if d.id == disease_id:
                return d
        return None

    def category_of_symptom(self, symptom_id: str) -> CategorySpec | None:
        for c in self.categories:
            if symptom_id in c.symptom_ids:
                return c
        return None


@dataclass(frozen=True)
class PatientCase:
    """Observed symptom selections per category plus the patient's sex.

    ``observations`` maps category id to a deduplicated, declaration-ordered
    tuple of observed symptom ids; categories with no observation are absent.
    The canonical ordering keeps every downstream computation deterministic.
    """

    sex: Sex
    observations: Mapping[str, tuple[str, ...]]


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding about a knowledge base or a patient case.

    ``code`` is a stable machine-readable identifier; ``location`` names the
    offending disease/category/symptom id or a document position.
    """

    severity: Severity
    code: str
    location: str
    message: str

    def to_json_object(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "location": self.location,
            "message": self.message,
        }


class DocumentError(Exception):
    """Raised when a document cannot be turned into a valid object.

    Carries the complete list of diagnostics explaining the rejection.
    """

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        summary = f"{first.code}: {first.message}" if first else "invalid document"
        extra = len(self.diagnostics) - 1
        if extra > 0:
            summary += f" (+{extra} more)"
        super().__init__(summary)


class KbParseError(DocumentError):
    """A knowledge-base document was rejected."""


class CaseParseError(DocumentError):
    """A patient-case document was rejected."""


class TemplateError(DocumentError):
    """A category template handed to the synthetic generator is invalid."""


class NoSignalError(Exception):
    """The target disease has no 'yes' symptom to build a case from."""

    code = "NO_SIGNAL"
