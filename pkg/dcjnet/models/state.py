import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

from dcjnet.errors import ExclusionViolated, NegativeCount, ParseError, SchemaError


@dataclass(frozen=True)
class SiteGraph:
    """The finite site set; sites are indexed 0..site_count-1"""
    site_count: int
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.site_count < 1:
            raise SchemaError("site count must be at least 1", field="sites")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.site_count)))
        if len(self.labels) != self.site_count:
            raise SchemaError(
                f"expected {self.site_count} site labels, got {len(self.labels)}", field="labels"
            )
        if len(set(self.labels)) != len(self.labels):
            raise SchemaError("site labels must be unique", field="labels")

    @property
    def sites(self) -> range:
        return range(self.site_count)

    def index(self, label: str) -> int:
        return self.labels.index(label)


class NetworkState(NamedTuple):
    """Pair (occupancy y, tasks n); both vectors have one entry per site"""
    occupancy: Tuple[int, ...]
    tasks: Tuple[int, ...]

    @property
    def dc_total(self) -> int:
        return sum(self.occupancy)

    @property
    def task_total(self) -> int:
        return sum(self.tasks)

    def loaded(self, site: int) -> bool:
        return self.occupancy[site] >= 1

    def __str__(self) -> str:
        return format_state(self)


class EditKind(str, enum.Enum):
    TASK_ADD = "task+"
    TASK_REMOVE = "task-"
    TASK_MOVE = "task-move"
    DC_MOVE = "dc-move"
    DC_ADD = "dc+"
    DC_REMOVE = "dc-"


class Edit(NamedTuple):
    kind: EditKind
    site: int
    target: Optional[int] = None


def _bump(vector: Tuple[int, ...], site: int, delta: int) -> Tuple[int, ...]:
    value = vector[site] + delta
    if value < 0:
        raise NegativeCount(f"count at site {site} would become {value}")
    return vector[:site] + (value,) + vector[site + 1:]


def apply_edit(state: NetworkState, edit: Edit, exclusive: bool = False) -> NetworkState:
    """Apply a unit-vector edit and return the new state"""
    y, n = state
    if edit.kind is EditKind.TASK_ADD:
        n = _bump(n, edit.site, 1)
    elif edit.kind is EditKind.TASK_REMOVE:
        n = _bump(n, edit.site, -1)
    elif edit.kind is EditKind.TASK_MOVE:
        n = _bump(_bump(n, edit.site, -1), edit.target, 1)
    elif edit.kind is EditKind.DC_MOVE:
        y = _bump(_bump(y, edit.site, -1), edit.target, 1)
    elif edit.kind is EditKind.DC_ADD:
        y = _bump(y, edit.site, 1)
    elif edit.kind is EditKind.DC_REMOVE:
        y = _bump(y, edit.site, -1)

    if exclusive and any(v > 1 for v in y):
        raise ExclusionViolated(f"edit {edit.kind.value} would stack DCs: y={y}")
    return NetworkState(y, n)


def format_state(state: NetworkState) -> str:
    """Serialize as 'y=<ints>|n=<ints>' with semicolon separators"""
    y = ";".join(str(v) for v in state.occupancy)
    n = ";".join(str(v) for v in state.tasks)
    return f"y={y}|n={n}"


def parse_state(text: str) -> NetworkState:
    try:
        y_part, n_part = text.strip().split("|")
        if not (y_part.startswith("y=") and n_part.startswith("n=")):
            raise ValueError(text)
        y = tuple(int(v) for v in y_part[2:].split(";"))
        n = tuple(int(v) for v in n_part[2:].split(";"))
    except ValueError:
        raise ParseError(f"cannot parse state '{text}'")
    return NetworkState(y, n)


def make_state(occupancy: Sequence[int], tasks: Sequence[int]) -> NetworkState:
    return NetworkState(tuple(int(v) for v in occupancy), tuple(int(v) for v in tasks))
