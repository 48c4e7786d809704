import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from dcjnet.errors import EXIT_FAILURE, EXIT_OK, Diverged
from dcjnet.models.spec import ModelSpec, enumerate_states
from dcjnet.models.state import format_state
from dcjnet.core.stationary import log_weight, partition_function
from dcjnet.commands.loader import run_header
from dcjnet.utils.io import header_comments, write_csv

logger = logging.getLogger(__name__)

CSV_NAME = "stationary.csv"
COLUMNS = ["state", "log_weight", "probability"]


def stationary_table(spec: ModelSpec):
    """(frame, summary) with one row per enumerated state, probabilities normalized by the exact Xi"""
    xi = partition_function(spec)
    if not xi.converged:
        raise Diverged(
            f"partition function not certified after {xi.truncation_index} terms", series=xi.series
        )
    states = enumerate_states(spec)
    logs = np.array([log_weight(spec, s) for s in states])
    frame = pd.DataFrame({
        "state": [format_state(s) for s in states],
        "log_weight": logs,
        "probability": np.exp(logs - xi.log_value),
    }, columns=COLUMNS)
    box_mass = math.exp(float(logsumexp(logs)) - xi.log_value) if len(states) else 0.0
    summary = {
        "variant": spec.variant.variant.value,
        "partition_function": repr(xi.value),
        "log_partition_function": repr(xi.log_value),
        "tail_bound": repr(xi.tail_bound),
        "box_mass": repr(box_mass),
        "states": len(states),
    }
    return frame, summary


def cmd_stationary(spec: ModelSpec, out_dir: Path) -> int:
    logger.info(f"Evaluating product-form law of {spec.variant.variant.value}")
    try:
        frame, summary = stationary_table(spec)
    except Diverged as e:
        logger.error(f"Stationary law undefined: {e.detail}")
        return EXIT_FAILURE
    logger.info(
        f"Xi = {summary['partition_function']} (tail bound {summary['tail_bound']}), "
        f"{summary['states']} states carry mass {summary['box_mass']}"
    )
    write_csv(Path(out_dir) / CSV_NAME, frame, header_comments(run_header(spec), summary))
    return EXIT_OK
