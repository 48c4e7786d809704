import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from dcjnet.errors import EXIT_OK, DCJException
from dcjnet.models import settings
from dcjnet.models.spec import ModelSpec, enumerate_states
from dcjnet.models.state import NetworkState, format_state
from dcjnet.core.simulate import (
    OVERFLOW, EmpiricalDistribution, Trajectory, empirical_distribution, merge_trajectories, run,
    snapshot_distribution,
)
from dcjnet.core.stationary import log_weight, partition_function
from dcjnet.core.verify import align_distributions, total_variation
from dcjnet.commands.loader import build_spec, dump_model, initial_state, parse_config, run_header
from dcjnet.schemas.reports import ReplicaSummary, SimulateSummary
from dcjnet.utils.io import header_comments, write_csv, write_json

logger = logging.getLogger(__name__)

SUMMARY_NAME = "simulate_summary.json"
MERGED_NAME = "occupation_merged.csv"
TV_NAME = "tv_vs_events.csv"
FIRST_CHECKPOINT = 100
OCCUPATION_COLUMNS = ["state", "residence_time", "probability"]
TV_COLUMNS = ["events", "replica", "total_variation"]


def replica_file(replica: int) -> str:
    return f"occupation_replica_{replica}.csv"


def checkpoint_marks(max_events: Optional[int]) -> List[int]:
    """Event counts 100, 1000, ... up to the budget"""
    if not max_events:
        return []
    marks = []
    mark = FIRST_CHECKPOINT
    while mark < max_events:
        marks.append(mark)
        mark *= 10
    return marks


def _replica_worker(args: Tuple) -> Trajectory:
    """Module-level so the process pool can pickle it; rebuilds the spec from canonical JSON"""
    config_text, init, max_events, max_time, seed, replica, marks = args
    spec = build_spec(parse_config(config_text))
    return run(spec, init, max_events=max_events, max_time=max_time, seed=seed, replica=replica, checkpoints=marks)


def run_replicas(
    spec: ModelSpec,
    init: NetworkState,
    replicas: int,
    max_events: Optional[int] = None,
    max_time: Optional[float] = None,
    seed: Optional[int] = None,
    marks: Sequence[int] = (),
) -> List[Trajectory]:
    """Independent replicas ordered by index; parallel up to DCJ_THREADS workers"""
    seed = spec.seed if seed is None else seed
    workers = min(settings.thread_cap(), replicas)
    if workers <= 1:
        return [
            run(spec, init, max_events=max_events, max_time=max_time, seed=seed, replica=k, checkpoints=marks)
            for k in range(replicas)
        ]

    config_text = dump_model(spec)
    jobs = [(config_text, init, max_events, max_time, seed, k, tuple(marks)) for k in range(replicas)]
    results: Dict[int, Trajectory] = {}
    logger.info(f"Running {replicas} replicas on {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_replica_worker, job) for job in jobs]
        for future in as_completed(futures):
            traj = future.result()
            results[traj.replica] = traj
    return [results[k] for k in range(replicas)]


def exact_reference(spec: ModelSpec) -> Optional[Dict[object, float]]:
    """Exact law on the enumerated box, with the mass outside it under the overflow key"""
    try:
        states = enumerate_states(spec)
        xi = partition_function(spec)
    except DCJException as e:
        logger.warning(f"No exact reference for the simulation: {e.detail}")
        return None
    if not xi.converged:
        logger.warning("No exact reference for the simulation: partition function not certified")
        return None
    reference: Dict[object, float] = {}
    for state in states:
        lw = log_weight(spec, state)
        if lw != -math.inf:
            reference[state] = math.exp(lw - xi.log_value)
    reference[OVERFLOW] = max(0.0, 1.0 - math.fsum(reference.values()))
    return reference


def distance(reference: Dict[object, float], empirical: EmpiricalDistribution) -> float:
    p, q = align_distributions(reference, empirical.with_overflow())
    return total_variation(p, q)


def occupation_frame(traj: Trajectory) -> pd.DataFrame:
    total = sum(traj.occupation.values()) + traj.overflow_time
    rows = []
    for state in sorted(traj.occupation):
        residence = traj.occupation[state]
        rows.append((format_state(state), residence, residence / total))
    if traj.overflow_time > 0:
        rows.append((OVERFLOW, traj.overflow_time, traj.overflow_time / total))
    return pd.DataFrame(rows, columns=OCCUPATION_COLUMNS)


def _tv_rows(label: str, traj: Trajectory, reference: Dict[object, float], events: int = None) -> List[tuple]:
    """TV per checkpoint plus the final distance; `events` counts per replica"""
    rows = []
    for mark in sorted(traj.checkpoints):
        rows.append((mark, label, distance(reference, snapshot_distribution(traj.checkpoints[mark]))))
    rows.append((traj.events if events is None else events, label, distance(reference, empirical_distribution(traj))))
    return rows


def cmd_simulate(
    spec: ModelSpec,
    out_dir: Path,
    max_events: Optional[int] = None,
    max_time: Optional[float] = None,
    replicas: int = 1,
    seed: Optional[int] = None,
) -> int:
    out_dir = Path(out_dir)
    seed = spec.seed if seed is None else seed
    init = initial_state(spec)
    header = run_header(spec)
    header.seed = seed
    marks = checkpoint_marks(max_events)
    logger.info(
        f"Simulating {spec.variant.variant.value} from {format_state(init)}: {replicas} replica(s), "
        f"events={max_events}, time={max_time}, seed={seed}"
    )

    trajectories = run_replicas(spec, init, replicas, max_events=max_events, max_time=max_time, seed=seed, marks=marks)
    merged = merge_trajectories(trajectories)
    empty = merged.total_time <= 0
    reference = None if empty else exact_reference(spec)

    summary = SimulateSummary(
        header=header, variant=spec.variant.variant.value, initial_state=format_state(init),
        replicas=[], exact_reference=reference is not None,
    )
    tv_rows = []
    for traj in trajectories:
        comments = header_comments(header, {"replica": traj.replica, "events": traj.events})
        write_csv(out_dir / replica_file(traj.replica), occupation_frame(traj), comments)
        entry = ReplicaSummary(
            replica=traj.replica, seed=seed, events=traj.events, total_time=traj.total_time,
            kind_counts=traj.kind_counts,
        )
        if traj.total_time > 0:
            entry.overflow_mass = empirical_distribution(traj).overflow_mass
        if reference is not None and traj.total_time > 0:
            rows = _tv_rows(str(traj.replica), traj, reference)
            entry.total_variation = rows[-1][2]
            tv_rows.extend(rows)
        summary.replicas.append(entry)

    write_csv(out_dir / MERGED_NAME, occupation_frame(merged), header_comments(header, {"replicas": replicas}))
    if reference is not None:
        rows = _tv_rows("merged", merged, reference, events=max(t.events for t in trajectories))
        summary.merged_total_variation = rows[-1][2]
        tv_rows.extend(rows)
        write_csv(out_dir / TV_NAME, pd.DataFrame(tv_rows, columns=TV_COLUMNS), header_comments(header))
        logger.info(f"Merged TV distance to the exact law: {summary.merged_total_variation:.4g}")
    write_json(out_dir / SUMMARY_NAME, summary)
    return EXIT_OK
