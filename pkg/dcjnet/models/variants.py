import enum
from dataclasses import dataclass
from typing import Optional

from dcjnet.errors import SchemaError


class ParticleKind(str, enum.Enum):
    NONE = "none"
    SINGLE_DC = "single-dc"
    EXCLUSION = "exclusion"
    ZERO_RANGE = "zero-range"


class Boundary(str, enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


class Variant(str, enum.Enum):
    V1 = "V1"    # plain Jackson network, no DC
    V2 = "V2"    # basic single-DC model, constant families
    V3 = "V3"    # single DC, general families, open tasks
    V4 = "V4"    # single DC, closed tasks
    V5 = "V5"    # exclusion, closed DC / open tasks
    V6 = "V6"    # exclusion, open DC / open tasks
    V7 = "V7"    # exclusion, closed DC / closed tasks
    V8 = "V8"    # exclusion, open DC / closed tasks
    V9 = "V9"    # zero-range, closed DC / open tasks
    V10 = "V10"  # zero-range, open DC / open tasks
    V11 = "V11"  # zero-range, closed DC / closed tasks
    V12 = "V12"  # zero-range, open DC / closed tasks


# (particle kind, task boundary, dc boundary)
VARIANT_TABLE = {
    Variant.V1: (ParticleKind.NONE, Boundary.OPEN, Boundary.CLOSED),
    Variant.V2: (ParticleKind.SINGLE_DC, Boundary.OPEN, Boundary.CLOSED),
    Variant.V3: (ParticleKind.SINGLE_DC, Boundary.OPEN, Boundary.CLOSED),
    Variant.V4: (ParticleKind.SINGLE_DC, Boundary.CLOSED, Boundary.CLOSED),
    Variant.V5: (ParticleKind.EXCLUSION, Boundary.OPEN, Boundary.CLOSED),
    Variant.V6: (ParticleKind.EXCLUSION, Boundary.OPEN, Boundary.OPEN),
    Variant.V7: (ParticleKind.EXCLUSION, Boundary.CLOSED, Boundary.CLOSED),
    Variant.V8: (ParticleKind.EXCLUSION, Boundary.CLOSED, Boundary.OPEN),
    Variant.V9: (ParticleKind.ZERO_RANGE, Boundary.OPEN, Boundary.CLOSED),
    Variant.V10: (ParticleKind.ZERO_RANGE, Boundary.OPEN, Boundary.OPEN),
    Variant.V11: (ParticleKind.ZERO_RANGE, Boundary.CLOSED, Boundary.CLOSED),
    Variant.V12: (ParticleKind.ZERO_RANGE, Boundary.CLOSED, Boundary.OPEN),
}


@dataclass(frozen=True)
class VariantTag:
    """Model variant plus its conserved quantities M (DCs) and N (tasks)"""
    variant: Variant
    M: Optional[int] = None
    N: Optional[int] = None

    def __post_init__(self):
        kind, tasks, dcs = VARIANT_TABLE[self.variant]
        if tasks is Boundary.CLOSED and self.N is None:
            raise SchemaError(f"{self.variant.value} conserves tasks and requires N", field="N")
        if tasks is Boundary.OPEN and self.N is not None:
            raise SchemaError(f"{self.variant.value} has open task boundary; N is not allowed", field="N")
        needs_m = dcs is Boundary.CLOSED and kind is not ParticleKind.NONE
        if needs_m and self.M is None:
            if kind is ParticleKind.SINGLE_DC:
                object.__setattr__(self, "M", 1)
            else:
                raise SchemaError(f"{self.variant.value} conserves DCs and requires M", field="M")
        if not needs_m and self.M is not None:
            raise SchemaError(f"{self.variant.value} does not conserve DCs; M is not allowed", field="M")
        if kind is ParticleKind.SINGLE_DC and self.M != 1:
            raise SchemaError("single-DC variants carry exactly one DC (M = 1)", field="M")
        for name in ("M", "N"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise SchemaError(f"{name} must be non-negative", field=name)

    @classmethod
    def from_parts(
        cls,
        particle_kind: ParticleKind,
        task_boundary: Boundary,
        dc_boundary: Boundary,
        M: Optional[int] = None,
        N: Optional[int] = None,
        basic: bool = False,
    ) -> "VariantTag":
        """Map a (kind, boundaries) combination onto its variant; `basic` picks V2 over V3"""
        key = (ParticleKind(particle_kind), Boundary(task_boundary), Boundary(dc_boundary))
        matches = [v for v, parts in VARIANT_TABLE.items() if parts == key]
        if not matches:
            raise SchemaError(f"no variant for combination {key[0].value}/{key[1].value}/{key[2].value}")
        if len(matches) > 1:
            matches = [Variant.V2] if basic else [Variant.V3]
        return cls(matches[0], M=M, N=N)

    @property
    def particle_kind(self) -> ParticleKind:
        return VARIANT_TABLE[self.variant][0]

    @property
    def task_boundary(self) -> Boundary:
        return VARIANT_TABLE[self.variant][1]

    @property
    def dc_boundary(self) -> Boundary:
        return VARIANT_TABLE[self.variant][2]

    @property
    def open_tasks(self) -> bool:
        return self.task_boundary is Boundary.OPEN

    @property
    def open_dcs(self) -> bool:
        return self.dc_boundary is Boundary.OPEN

    @property
    def exclusive(self) -> bool:
        """At most one DC per site (single-DC and exclusion variants)"""
        return self.particle_kind in (ParticleKind.SINGLE_DC, ParticleKind.EXCLUSION)

    @property
    def zero_range(self) -> bool:
        return self.particle_kind is ParticleKind.ZERO_RANGE

    @property
    def has_dcs(self) -> bool:
        return self.particle_kind is not ParticleKind.NONE
