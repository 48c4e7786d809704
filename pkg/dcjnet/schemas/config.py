from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Any, Dict, List, Optional

from dcjnet.models import settings
from dcjnet.models.variants import Variant


class FamilyConfig(BaseModel):
    """Built-in family selection: {"kind": ..., "params": ...}"""
    model_config = ConfigDict(extra="forbid")

    kind: str
    params: Dict[str, Any] = {}


class ArrayConfig(BaseModel):
    """Rate array B, Theta, E or T; a bare nested list is read as a constant matrix"""
    model_config = ConfigDict(extra="forbid")

    kind: str = "matrix"  # zero | matrix | balanced
    params: Dict[str, Any] = {}

    @model_validator(mode="before")
    @classmethod
    def bare_matrix(cls, data: Any) -> Any:
        if isinstance(data, list):
            return {"kind": "matrix", "params": {"values": data}}
        return data


class TruncationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_max: Optional[int] = None
    y_max: Optional[int] = None


class ToleranceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    validation: float = Field(settings.VALIDATION_TOLERANCE, gt=0)
    series: float = Field(settings.SERIES_TOLERANCE, gt=0)
    balance: float = Field(settings.BALANCE_TOLERANCE, gt=0)
    oracle: float = Field(settings.ORACLE_TOLERANCE, gt=0)


class InitialStateConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    y: List[int]
    n: List[int]


class ModelConfig(BaseModel):
    """JSON model configuration"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    variant: Variant
    sites: int = Field(ge=1)
    labels: Optional[List[str]] = None
    lam: FamilyConfig = Field(alias="lambda")
    mu: FamilyConfig
    gamma: FamilyConfig = FamilyConfig(kind="unit")
    beta: Optional[ArrayConfig] = None
    theta: Optional[ArrayConfig] = None
    epsilon: Optional[ArrayConfig] = None
    tau: Optional[ArrayConfig] = None
    xi: Optional[List[float]] = None
    eta: Optional[List[float]] = None
    phi: Optional[List[float]] = None
    M: Optional[int] = None
    N: Optional[int] = None
    truncation: TruncationConfig = TruncationConfig()
    tolerances: ToleranceConfig = ToleranceConfig()
    seed: int = Field(0, ge=0, lt=2 ** 64)
    initial_state: Optional[InitialStateConfig] = None

    def canonical(self) -> Dict[str, Any]:
        """Plain JSON-ready dict with aliases and without unset optionals"""
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)
