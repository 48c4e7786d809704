"""Exact-clock continuous-time simulation with time-weighted occupation measures."""
import logging
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from dcjnet.errors import AbsorbingState, BadParameter, EmptyTrajectory
from dcjnet.models.spec import ModelSpec, check_admissible, in_box
from dcjnet.models.state import NetworkState
from dcjnet.core.generator import TransitionKind, transitions

logger = logging.getLogger(__name__)

BATCH = 4096
TRANSITION_CACHE_LIMIT = 500000
OVERFLOW = "overflow"


class StepResult(NamedTuple):
    holding: float
    state: NetworkState
    kind: TransitionKind


class EventRecord(NamedTuple):
    holding: float
    kind: TransitionKind
    target: NetworkState


class Snapshot(NamedTuple):
    time: float
    occupation: Dict[NetworkState, float]
    overflow_time: float


class EmpiricalDistribution(NamedTuple):
    probabilities: Dict[NetworkState, float]
    overflow_mass: float

    def with_overflow(self) -> Dict[object, float]:
        result: Dict[object, float] = dict(self.probabilities)
        result[OVERFLOW] = self.overflow_mass
        return result


@dataclass
class Trajectory:
    initial: NetworkState
    seed: int
    replica: int = 0
    total_time: float = 0.0
    events: int = 0
    final: Optional[NetworkState] = None
    occupation: Dict[NetworkState, float] = field(default_factory=dict)
    overflow_time: float = 0.0
    kind_counts: Dict[str, int] = field(default_factory=dict)
    event_log: Optional[List[EventRecord]] = None
    checkpoints: Dict[int, Snapshot] = field(default_factory=dict)


def make_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Counter-based Philox stream; replicas get independent spawn keys"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replica,))))


def step(spec: ModelSpec, state: NetworkState, rng: np.random.Generator) -> StepResult:
    """Draw one holding time and the next state"""
    options = transitions(spec, state)
    if not options:
        raise AbsorbingState(f"state {state} has no outgoing transitions")
    cumulative = list(accumulate(t.rate for t in options))
    total = cumulative[-1]
    holding = rng.standard_exponential() / total
    index = min(bisect_right(cumulative, rng.random() * total), len(options) - 1)
    chosen = options[index]
    return StepResult(holding, chosen.target, chosen.kind)


def run(
    spec: ModelSpec,
    init: NetworkState,
    max_events: Optional[int] = None,
    max_time: Optional[float] = None,
    seed: Optional[int] = None,
    replica: int = 0,
    record_events: bool = False,
    checkpoints: Sequence[int] = (),
) -> Trajectory:
    """Simulate the exact model from `init` until the event or time budget is spent"""
    if max_events is None and max_time is None:
        raise BadParameter("simulation needs a budget: max events or max time", field="budget")
    check_admissible(spec, init)
    seed = spec.seed if seed is None else seed
    rng = make_rng(seed, replica)
    traj = Trajectory(initial=init, seed=seed, replica=replica, final=init)
    if record_events:
        traj.event_log = []
    if max_events == 0 or max_time == 0:
        return traj

    marks = set(checkpoints)
    cache = {}
    occupation = traj.occupation
    kinds: Counter = Counter()
    overflow = 0.0
    time = 0.0
    events = 0
    holds: List[float] = []
    draws: List[float] = []
    position = BATCH
    state = init

    while max_events is None or events < max_events:
        entry = cache.get(state)
        if entry is None:
            options = transitions(spec, state)
            if not options:
                raise AbsorbingState(f"state {state} has no outgoing transitions")
            cumulative = list(accumulate(t.rate for t in options))
            entry = (options, cumulative, cumulative[-1], in_box(spec, state))
            if len(cache) < TRANSITION_CACHE_LIMIT:
                cache[state] = entry
        options, cumulative, total, inside = entry

        if position == BATCH:
            holds = rng.standard_exponential(BATCH).tolist()
            draws = rng.random(BATCH).tolist()
            position = 0
        hold = holds[position] / total
        u = draws[position] * total
        position += 1

        stop = max_time is not None and time + hold >= max_time
        if stop:
            hold = max_time - time
        if inside:
            occupation[state] = occupation.get(state, 0.0) + hold
        else:
            overflow += hold
        time += hold
        if stop:
            time = max_time
            break

        chosen = options[min(bisect_right(cumulative, u), len(options) - 1)]
        state = chosen.target
        events += 1
        kinds[chosen.kind.value] += 1
        if record_events:
            traj.event_log.append(EventRecord(hold, chosen.kind, state))
        if events in marks:
            traj.checkpoints[events] = Snapshot(time, dict(occupation), overflow)

    traj.total_time = time
    traj.events = events
    traj.final = state
    traj.overflow_time = overflow
    traj.kind_counts = dict(kinds)
    logger.info(f"Replica {replica}: {events} events over simulated time {time:.6g} ({len(occupation)} states visited)")
    return traj


def _normalize(occupation: Dict[NetworkState, float], overflow: float) -> EmpiricalDistribution:
    total = sum(occupation.values()) + overflow
    if total <= 0:
        raise EmptyTrajectory("trajectory has zero simulated time")
    return EmpiricalDistribution({s: t / total for s, t in occupation.items()}, overflow / total)


def empirical_distribution(traj: Trajectory) -> EmpiricalDistribution:
    """Residence time per state over total time; overflow mass reported separately"""
    return _normalize(traj.occupation, traj.overflow_time)


def snapshot_distribution(snapshot: Snapshot) -> EmpiricalDistribution:
    return _normalize(snapshot.occupation, snapshot.overflow_time)


def merge_trajectories(trajectories: Iterable[Trajectory]) -> Trajectory:
    """Pool occupation measures of independent replicas; order does not matter"""
    trajectories = list(trajectories)
    if not trajectories:
        raise EmptyTrajectory("nothing to merge")
    merged = Trajectory(initial=trajectories[0].initial, seed=trajectories[0].seed, replica=-1)
    kinds: Counter = Counter()
    shared_marks = set.intersection(*(set(t.checkpoints) for t in trajectories))
    for traj in trajectories:
        merged.total_time += traj.total_time
        merged.events += traj.events
        merged.overflow_time += traj.overflow_time
        kinds.update(traj.kind_counts)
        for state, residence in traj.occupation.items():
            merged.occupation[state] = merged.occupation.get(state, 0.0) + residence
    for mark in sorted(shared_marks):
        occupation: Dict[NetworkState, float] = {}
        time = overflow = 0.0
        for traj in trajectories:
            snap = traj.checkpoints[mark]
            time += snap.time
            overflow += snap.overflow_time
            for state, residence in snap.occupation.items():
                occupation[state] = occupation.get(state, 0.0) + residence
        merged.checkpoints[mark] = Snapshot(time, occupation, overflow)
    merged.kind_counts = dict(kinds)
    return merged
