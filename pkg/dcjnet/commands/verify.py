import logging
from pathlib import Path

from dcjnet.errors import EXIT_FAILURE, EXIT_OK, BudgetExceeded, MissingReverse, Reducible
from dcjnet.models import settings
from dcjnet.models.spec import ModelSpec, enumerate_states, state_dimension
from dcjnet.core.verify import check_detailed_balance, compare_with_oracle
from dcjnet.commands.loader import run_header
from dcjnet.schemas.reports import VerifyResult
from dcjnet.utils.io import write_json

logger = logging.getLogger(__name__)

REPORT_NAME = "verify_report.json"


def verify_model(spec: ModelSpec, oracle_budget: int = None) -> VerifyResult:
    """Detailed balance over the enumerated box, then the oracle when the box is small enough"""
    oracle_budget = settings.ORACLE_BUDGET if oracle_budget is None else oracle_budget
    result = VerifyResult(header=run_header(spec), variant=spec.variant.variant.value)
    try:
        states = enumerate_states(spec)
    except BudgetExceeded as e:
        # DCJ_STATE_BUDGET bounds the detailed-balance sweep
        result.failure = f"detailed balance skipped: {e.detail}; raise DCJ_STATE_BUDGET or lower --nmax/--ymax"
        return result
    result.state_count = len(states)

    try:
        result.balance = check_detailed_balance(spec, states)
    except MissingReverse as e:
        result.failure = e.detail
        return result

    size = state_dimension(spec)
    if size > oracle_budget:
        notice = f"oracle skipped: {size} states exceed the oracle budget of {oracle_budget}"
        logger.warning(notice)
        result.notices.append(notice)
        return result
    try:
        result.oracle = compare_with_oracle(spec, budget=oracle_budget)
    except Reducible as e:
        result.failure = e.detail
    return result


def cmd_verify(spec: ModelSpec, out_dir: Path) -> int:
    logger.info(f"Verifying {spec.variant.variant.value} model")
    result = verify_model(spec)
    write_json(Path(out_dir) / REPORT_NAME, result)

    if result.failure:
        logger.error(result.failure)
        print(f"FAIL: {result.failure}")
        return EXIT_FAILURE
    balance = result.balance
    print(f"detailed balance: max residual {balance.max_residual:.3e} over {balance.checked} transitions")
    if balance.worst is not None and not balance.passed:
        worst = balance.worst
        print(f"worst offender: {worst.kind} {worst.state} -> {worst.target} (log lhs {worst.lhs:.12g}, log rhs {worst.rhs:.12g})")
    if result.oracle is not None:
        print(
            f"oracle ({result.oracle.method}): max abs error {result.oracle.max_abs_error:.3e}, "
            f"TV {result.oracle.total_variation:.3e}"
        )
    for notice in result.notices:
        print(notice)
    return EXIT_OK if result.passed else EXIT_FAILURE
