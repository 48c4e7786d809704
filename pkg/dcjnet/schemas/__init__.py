from .config import ModelConfig, FamilyConfig, ArrayConfig, TruncationConfig, ToleranceConfig, InitialStateConfig
from .reports import (
    Violation, ValidationReport, SeriesValue, SeriesVerdict, SubcriticalityReport,
    BalanceOffender, BalanceReport, IrreducibilityVerdict, OracleComparison, Marginals, RunHeader,
    ValidateResult, VerifyResult, ReplicaSummary, SimulateSummary, FullReport,
)

__all__ = [
    "ModelConfig", "FamilyConfig", "ArrayConfig", "TruncationConfig", "ToleranceConfig", "InitialStateConfig",
    "Violation", "ValidationReport", "SeriesValue", "SeriesVerdict", "SubcriticalityReport",
    "BalanceOffender", "BalanceReport", "IrreducibilityVerdict", "OracleComparison", "Marginals", "RunHeader",
    "ValidateResult", "VerifyResult", "ReplicaSummary", "SimulateSummary", "FullReport",
]
