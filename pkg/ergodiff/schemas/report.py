"""Recurrence classification report schemas"""
import enum

from pydantic import BaseModel, Field


class Criterion(str, enum.Enum):
    CR1 = "cr1"  # recurrence
    CR2 = "cr2"  # transience
    CR4 = "cr4"  # finite invariant measure
    CR5 = "cr5"  # no finite invariant measure


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class Summary(str, enum.Enum):
    RECURRENT = "recurrent"
    TRANSIENT = "transient"
    POSITIVE_RECURRENT = "positive_recurrent"
    RECURRENT_NO_FINITE_MEASURE = "recurrent_no_finite_measure"
    INCONCLUSIVE = "inconclusive"


class OuterSign(str, enum.Enum):
    """Integrand of an outer criterion integral"""
    EXP_MINUS_UPPER = "exp_minus_upper"  # exp(-I_upper), cr1
    EXP_MINUS_LOWER = "exp_minus_lower"  # exp(-I_lower), cr2
    EXP_PLUS_UPPER = "exp_plus_upper"    # exp(+I_upper), cr4


class CriterionVerdict(BaseModel):
    """Verdict of one criterion with its evidence [(N, log partial value), ...]"""
    name: Criterion
    verdict: Verdict
    evidence: list[tuple[float, float]] = []
    r0: float = Field(gt=0)
    heuristic: str = ""

    @property
    def criterion(self) -> Criterion:
        return self.name


class ClassificationReport(BaseModel):
    profile: str
    r0: float = Field(gt=0)
    criteria: list[CriterionVerdict]
    summary: Summary
    notes: str = ""

    def verdict(self, criterion: Criterion | str) -> Verdict:
        criterion = Criterion(criterion)
        for item in self.criteria:
            if item.name is criterion:
                return item.verdict
        raise KeyError(criterion.value)
