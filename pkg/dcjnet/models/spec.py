import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple, Union

from dcjnet.errors import BadParameter, BudgetExceeded, InadmissibleState
from dcjnet.models import settings
from dcjnet.models.state import NetworkState, SiteGraph
from dcjnet.models.variants import VariantTag

Occupancy = Tuple[int, ...]
Tasks = Tuple[int, ...]

SiteRate = Callable[[int, int, Occupancy], float]
GaugeRate = Callable[[int, int], float]
PairRate = Callable[[int, int, int, int, Occupancy], float]
LeapRate = Callable[[int, int, Tasks, Occupancy], float]


def zero_pair_rate(src: int, dst: int, n_src: int, n_dst: int, y: Occupancy) -> float:
    return 0.0


def zero_leap_rate(src: int, dst: int, n: Tasks, y: Occupancy) -> float:
    return 0.0


def unit_gauge(site: int, n: int) -> float:
    return 1.0


@dataclass(frozen=True)
class RateFamilies:
    """Intensity functions of a model; all are total functions queried lazily"""
    lam: SiteRate
    mu: SiteRate
    gamma: GaugeRate = unit_gauge
    beta: PairRate = zero_pair_rate
    theta: PairRate = zero_pair_rate
    epsilon: PairRate = zero_pair_rate
    tau: LeapRate = zero_leap_rate
    xi: Optional[Tuple[float, ...]] = None
    eta: Optional[Tuple[float, ...]] = None
    phi: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class Truncation:
    n_max: Optional[int] = None
    y_max: Optional[int] = None

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 1:
            raise BadParameter("n_max must be at least 1", field="truncation.n_max")
        if self.y_max is not None and self.y_max < 1:
            raise BadParameter("y_max must be at least 1", field="truncation.y_max")


@dataclass(frozen=True)
class Tolerances:
    validation: float = settings.VALIDATION_TOLERANCE
    series: float = settings.SERIES_TOLERANCE
    balance: float = settings.BALANCE_TOLERANCE
    oracle: float = settings.ORACLE_TOLERANCE


@dataclass(frozen=True)
class ModelSpec:
    graph: SiteGraph
    variant: VariantTag
    rates: RateFamilies
    truncation: Truncation = field(default_factory=Truncation)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    config: Any = field(default=None, compare=False, repr=False)
    # memo tables (cumulative products, series, validation status)
    cache: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ("xi", "eta", "phi"):
            values = getattr(self.rates, name)
            if values is not None and len(values) != self.graph.site_count:
                raise BadParameter(
                    f"{name} needs {self.graph.site_count} entries, got {len(values)}", field=name
                )

    @property
    def site_count(self) -> int:
        return self.graph.site_count

    @property
    def sites(self) -> range:
        return self.graph.sites

    def require_n_max(self) -> int:
        if self.truncation.n_max is None:
            raise BadParameter(
                f"{self.variant.variant.value} has open task boundary; set truncation.n_max",
                field="truncation.n_max",
            )
        return self.truncation.n_max

    def require_y_max(self) -> int:
        if self.truncation.y_max is None:
            raise BadParameter(
                f"{self.variant.variant.value} has an unbounded DC count; set truncation.y_max",
                field="truncation.y_max",
            )
        return self.truncation.y_max


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All vectors of `parts` non-negative integers summing to `total`, in lexicographic order"""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def occupancies(spec: ModelSpec) -> List[Occupancy]:
    """Admissible occupancy vectors (truncated at y_max for open zero-range variants)"""
    tag = spec.variant
    count = spec.site_count
    if not tag.has_dcs:
        return [(0,) * count]
    if tag.exclusive:
        if tag.open_dcs:
            return [tuple(v) for v in itertools.product((0, 1), repeat=count)]
        result = []
        for chosen in itertools.combinations(range(count), tag.M):
            result.append(tuple(1 if s in chosen else 0 for s in range(count)))
        return result
    if tag.open_dcs:
        y_max = spec.require_y_max()
        return [tuple(v) for v in itertools.product(range(y_max + 1), repeat=count)]
    return list(compositions(tag.M, count))


def task_vectors(spec: ModelSpec) -> List[Tasks]:
    tag = spec.variant
    if tag.open_tasks:
        n_max = spec.require_n_max()
        return [tuple(v) for v in itertools.product(range(n_max + 1), repeat=spec.site_count)]
    return list(compositions(tag.N, spec.site_count))


def state_dimension(spec: ModelSpec) -> Union[int, str]:
    """Cardinality of the constrained (or truncated) state space, or 'unbounded'"""
    tag = spec.variant
    count = spec.site_count
    if not tag.has_dcs:
        y_count = 1
    elif tag.exclusive:
        y_count = 2 ** count if tag.open_dcs else math.comb(count, tag.M)
    elif tag.open_dcs:
        if spec.truncation.y_max is None:
            return "unbounded"
        y_count = (spec.truncation.y_max + 1) ** count
    else:
        y_count = math.comb(tag.M + count - 1, count - 1)

    if tag.open_tasks:
        if spec.truncation.n_max is None:
            return "unbounded"
        n_count = (spec.truncation.n_max + 1) ** count
    else:
        n_count = math.comb(tag.N + count - 1, count - 1)
    return y_count * n_count


def enumerate_states(spec: ModelSpec, budget: Optional[int] = None) -> List[NetworkState]:
    """Every state of the constrained or truncated space, occupancy-major"""
    budget = settings.STATE_BUDGET if budget is None else budget
    size = state_dimension(spec)
    if size == "unbounded":
        spec.require_n_max()
        spec.require_y_max()
    if size > budget:
        raise BudgetExceeded(f"state space has {size} states, budget is {budget}")
    tasks = task_vectors(spec)
    return [NetworkState(y, n) for y in occupancies(spec) for n in tasks]


def check_admissible(spec: ModelSpec, state: NetworkState, conserved: bool = True) -> None:
    """Raise InadmissibleState unless the state fits the variant; `conserved` also checks |y| = M and |n| = N"""
    tag = spec.variant
    y, n = state
    count = spec.site_count
    if len(y) != count or len(n) != count:
        raise InadmissibleState(f"state {state} does not have {count} sites")
    if min(y) < 0 or min(n) < 0:
        raise InadmissibleState(f"state {state} has negative entries")
    if not tag.has_dcs and any(y):
        raise InadmissibleState(f"{tag.variant.value} carries no DCs: {state}")
    if tag.exclusive and max(y) > 1:
        raise InadmissibleState(f"exclusion violated in {state}")
    if not conserved:
        return
    if tag.has_dcs and not tag.open_dcs and sum(y) != tag.M:
        raise InadmissibleState(f"state {state} has |y|={sum(y)}, expected M={tag.M}")
    if not tag.open_tasks and sum(n) != tag.N:
        raise InadmissibleState(f"state {state} has |n|={sum(n)}, expected N={tag.N}")


def in_box(spec: ModelSpec, state: NetworkState) -> bool:
    """Whether a state lies inside the truncation caps"""
    n_max = spec.truncation.n_max
    if spec.variant.open_tasks and n_max is not None and max(state.tasks) > n_max:
        return False
    y_max = spec.truncation.y_max
    if spec.variant.open_dcs and spec.variant.zero_range and y_max is not None:
        return max(state.occupancy) <= y_max
    return True
