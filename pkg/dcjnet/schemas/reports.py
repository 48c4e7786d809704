from pydantic import BaseModel, computed_field
from typing import Dict, List, Optional


class Violation(BaseModel):
    sites: List[int]
    counts: List[int]
    occupancy: List[int]
    lhs: float
    rhs: float
    relative_error: float
    log_scale: bool = False  # lhs and rhs are natural logs


class ValidationReport(BaseModel):
    condition: str
    description: str = ""
    tolerance: float
    checked: int = 0
    violation_count: int = 0
    max_relative_error: float = 0.0
    violations: List[Violation] = []
    truncated_domain: bool = False  # enumeration budget hit before the domain was exhausted
    applicable: bool = True

    @computed_field
    @property
    def passed(self) -> bool:
        return self.violation_count == 0


class SeriesValue(BaseModel):
    series: str
    value: float
    log_value: float
    truncation_index: int
    tail_bound: float
    converged: bool


class SeriesVerdict(BaseModel):
    series: str
    site: Optional[int] = None
    occupancy: Optional[List[int]] = None
    converged: bool
    value: Optional[float] = None
    tail_bound: Optional[float] = None
    detail: str = ""


class SubcriticalityReport(BaseModel):
    verdicts: List[SeriesVerdict] = []
    messages: List[str] = []

    @computed_field
    @property
    def passed(self) -> bool:
        return all(v.converged for v in self.verdicts)


class BalanceOffender(BaseModel):
    state: str
    target: str
    kind: str
    lhs: float  # log of w(state) * rate
    rhs: float  # log of w(target) * reverse rate


class BalanceReport(BaseModel):
    tolerance: float
    checked: int = 0
    skipped_boundary: int = 0
    skipped_null: int = 0
    max_residual: float = 0.0
    worst: Optional[BalanceOffender] = None

    @computed_field
    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


class IrreducibilityVerdict(BaseModel):
    irreducible: bool
    state_count: int
    component_count: int
    source: Optional[str] = None
    unreachable_target: Optional[str] = None


class OracleComparison(BaseModel):
    state_count: int
    method: str
    max_abs_error: float
    total_variation: float
    residual_norm: float
    tolerance: float

    @computed_field
    @property
    def passed(self) -> bool:
        return self.max_abs_error <= self.tolerance


class Marginals(BaseModel):
    dc_location: List[float]
    mean_queue: List[float]
    mean_dcs: List[float]
    covered_mass: float


class RunHeader(BaseModel):
    """Provenance stamped on every output file"""
    config_hash: str
    seed: int
    version: str
    tolerances: Dict[str, float]


class ValidateResult(BaseModel):
    header: RunHeader
    variant: str
    conditions: List[ValidationReport]
    subcriticality: SubcriticalityReport

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions) and self.subcriticality.passed


class VerifyResult(BaseModel):
    header: RunHeader
    variant: str
    state_count: Optional[int] = None
    balance: Optional[BalanceReport] = None
    oracle: Optional[OracleComparison] = None
    notices: List[str] = []
    failure: Optional[str] = None

    @computed_field
    @property
    def passed(self) -> bool:
        if self.failure or self.balance is None or not self.balance.passed:
            return False
        return self.oracle is None or self.oracle.passed


class ReplicaSummary(BaseModel):
    replica: int
    seed: int
    events: int
    total_time: float
    overflow_mass: Optional[float] = None
    total_variation: Optional[float] = None
    kind_counts: Dict[str, int] = {}


class SimulateSummary(BaseModel):
    header: RunHeader
    variant: str
    initial_state: str
    replicas: List[ReplicaSummary]
    merged_total_variation: Optional[float] = None
    exact_reference: bool = False


class FullReport(BaseModel):
    header: RunHeader
    variant: str
    state_dimension: str
    validation: List[ValidationReport]
    subcriticality: SubcriticalityReport
    partition_function: Optional[SeriesValue] = None
    balance: Optional[BalanceReport] = None
    oracle: Optional[OracleComparison] = None
    marginals: Optional[Marginals] = None
    notices: List[str] = []

    @computed_field
    @property
    def passed(self) -> bool:
        checks = [c.passed for c in self.validation] + [self.subcriticality.passed]
        if self.balance is not None:
            checks.append(self.balance.passed)
        if self.oracle is not None:
            checks.append(self.oracle.passed)
        return all(checks)
