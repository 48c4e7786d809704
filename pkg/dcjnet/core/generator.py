import enum
import logging
from collections import deque
from typing import FrozenSet, List, NamedTuple, Optional, Tuple

from dcjnet.errors import BudgetExceeded
from dcjnet.models import settings
from dcjnet.models.spec import ModelSpec, check_admissible, in_box
from dcjnet.models.state import NetworkState
from dcjnet.core.rates import products_for

logger = logging.getLogger(__name__)


class TransitionKind(str, enum.Enum):
    TASK_ARRIVAL = "task-arrival"
    TASK_EXIT = "task-exit"
    TASK_JUMP_UNLOADED = "task-jump-unloaded"
    TASK_JUMP_FROM_LOADED = "task-jump-from-loaded"
    TASK_JUMP_TO_LOADED = "task-jump-to-loaded"
    TASK_JUMP_LOADED_LOADED = "task-jump-loaded-loaded"
    DC_LEAP = "dc-leap"
    DC_ARRIVAL = "dc-arrival"
    DC_EXIT = "dc-exit"


KIND_ORDER = {kind: position for position, kind in enumerate(TransitionKind)}
TASK_JUMPS = (
    TransitionKind.TASK_JUMP_UNLOADED,
    TransitionKind.TASK_JUMP_FROM_LOADED,
    TransitionKind.TASK_JUMP_TO_LOADED,
    TransitionKind.TASK_JUMP_LOADED_LOADED,
)


class Transition(NamedTuple):
    target: NetworkState
    rate: float
    kind: TransitionKind
    source_site: int
    target_site: Optional[int] = None


TransitionSet = Tuple[Transition, ...]


class ReachableSet(NamedTuple):
    states: FrozenSet[NetworkState]
    boundary_clipped: bool


def _with(vector: Tuple[int, ...], site: int, delta: int) -> Tuple[int, ...]:
    return vector[:site] + (vector[site] + delta,) + vector[site + 1:]


def _moved(vector: Tuple[int, ...], src: int, dst: int) -> Tuple[int, ...]:
    values = list(vector)
    values[src] -= 1
    values[dst] += 1
    return tuple(values)


def exact_transitions(spec: ModelSpec, state: NetworkState) -> TransitionSet:
    """All positive-rate transitions of the exact (untruncated) model, in canonical order"""
    tag = spec.variant
    rates = spec.rates
    products = products_for(rates)
    y, n = state
    sites = spec.sites
    zero_range = tag.zero_range

    def gauge(site: int, count: int) -> float:
        # gamma raised to the local DC count (exponent 1 for exclusive variants)
        if y[site] == 0:
            return 1.0
        value = rates.gamma(site, count)
        return value ** y[site] if zero_range else value

    arrivals: List[Transition] = []
    exits: List[Transition] = []
    jumps = {kind: [] for kind in TASK_JUMPS}
    leaps: List[Transition] = []
    dc_arrivals: List[Transition] = []
    dc_exits: List[Transition] = []

    if tag.open_tasks:
        for p in sites:
            rate = rates.lam(p, n[p], y) * gauge(p, n[p])
            if rate > 0:
                arrivals.append(Transition(NetworkState(y, _with(n, p, 1)), rate, TransitionKind.TASK_ARRIVAL, p))
        for p in sites:
            if n[p] >= 1:
                rate = rates.mu(p, n[p], y)
                if rate > 0:
                    exits.append(Transition(NetworkState(y, _with(n, p, -1)), rate, TransitionKind.TASK_EXIT, p))

    for k in sites:
        if n[k] < 1:
            continue
        k_loaded = y[k] >= 1
        for l in sites:
            if l == k:
                continue
            l_loaded = y[l] >= 1
            if not k_loaded and not l_loaded:
                kind = TransitionKind.TASK_JUMP_UNLOADED
                rate = rates.beta(k, l, n[k], n[l], y)
            elif k_loaded and not l_loaded:
                kind = TransitionKind.TASK_JUMP_FROM_LOADED
                rate = rates.theta(k, l, n[k], n[l], y)
            elif not k_loaded:
                kind = TransitionKind.TASK_JUMP_TO_LOADED
                rate = rates.theta(k, l, n[k], n[l], y) * gauge(l, n[l])
            else:
                kind = TransitionKind.TASK_JUMP_LOADED_LOADED
                rate = rates.epsilon(k, l, n[k], n[l], y)
            if rate > 0:
                jumps[kind].append(Transition(NetworkState(y, _moved(n, k, l)), rate, kind, k, l))

    if tag.has_dcs:
        for j in sites:
            if y[j] < 1:
                continue
            for jp in sites:
                if jp == j:
                    continue
                if zero_range:
                    scale = products.gam_bar(j, n[j]) ** -y[j] * products.gam_bar(jp, n[jp]) ** -y[jp]
                else:
                    if y[jp] >= 1:
                        continue
                    scale = 1.0 / products.gam_bar(j, n[j])
                rate = rates.tau(j, jp, n, y) * scale
                if rate > 0:
                    leaps.append(Transition(NetworkState(_moved(y, j, jp), n), rate, TransitionKind.DC_LEAP, j, jp))

        if tag.open_dcs:
            xi, eta = rates.xi, rates.eta
            for k in sites:
                if tag.exclusive and y[k] >= 1:
                    continue
                rate = xi[k] * products.gam_bar(k, n[k])
                if rate > 0:
                    dc_arrivals.append(Transition(NetworkState(_with(y, k, 1), n), rate, TransitionKind.DC_ARRIVAL, k))
            for i in sites:
                if y[i] >= 1 and eta[i] > 0:
                    dc_exits.append(Transition(NetworkState(_with(y, i, -1), n), eta[i], TransitionKind.DC_EXIT, i))

    ordered = arrivals + exits
    for kind in TASK_JUMPS:
        ordered.extend(jumps[kind])
    return tuple(ordered + leaps + dc_arrivals + dc_exits)


def transitions(spec: ModelSpec, state: NetworkState, truncated: bool = False) -> TransitionSet:
    """Outgoing transitions; the truncated view censors targets outside the truncation box"""
    check_admissible(spec, state)
    result = exact_transitions(spec, state)
    if truncated:
        result = tuple(t for t in result if in_box(spec, t.target))
    return result


def total_rate(spec: ModelSpec, state: NetworkState, truncated: bool = False) -> float:
    return sum(t.rate for t in transitions(spec, state, truncated=truncated))


def reachable_states(spec: ModelSpec, seed: NetworkState, budget: Optional[int] = None) -> ReachableSet:
    """Breadth-first closure of `seed` under the truncated transitions"""
    budget = settings.STATE_BUDGET if budget is None else budget
    if spec.variant.open_tasks:
        spec.require_n_max()
    if spec.variant.open_dcs and spec.variant.zero_range:
        spec.require_y_max()
    check_admissible(spec, seed)

    seen = {seed}
    frontier = deque([seed])
    clipped = False
    while frontier:
        state = frontier.popleft()
        for t in exact_transitions(spec, state):
            if not in_box(spec, t.target):
                clipped = True
                continue
            if t.target not in seen:
                seen.add(t.target)
                if len(seen) > budget:
                    raise BudgetExceeded(f"reachable set exceeds {budget} states")
                frontier.append(t.target)
    logger.info(f"Reached {len(seen)} states from {seed} (boundary clipped: {clipped})")
    return ReachableSet(frozenset(seen), clipped)
