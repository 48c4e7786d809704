import logging
from pathlib import Path

from dcjnet.errors import EXIT_FAILURE, EXIT_OK
from dcjnet.models.spec import ModelSpec
from dcjnet.core.rates import validate_all
from dcjnet.core.stationary import check_subcriticality
from dcjnet.commands.loader import run_header
from dcjnet.schemas.reports import ValidateResult
from dcjnet.utils.io import write_json

logger = logging.getLogger(__name__)

REPORT_NAME = "validate_report.json"


def validate_model(spec: ModelSpec) -> ValidateResult:
    """Every symmetry condition the variant requires plus the sub-criticality verdicts"""
    return ValidateResult(
        header=run_header(spec),
        variant=spec.variant.variant.value,
        conditions=validate_all(spec),
        subcriticality=check_subcriticality(spec),
    )


def cmd_validate(spec: ModelSpec, out_dir: Path) -> int:
    logger.info(f"Validating {spec.variant.variant.value} model")
    result = validate_model(spec)
    write_json(Path(out_dir) / REPORT_NAME, result)

    for condition in result.conditions:
        if not condition.passed:
            logger.error(
                f"Condition {condition.condition} violated at {condition.violation_count} point(s), "
                f"max relative error {condition.max_relative_error:.3e}"
            )
        elif condition.truncated_domain:
            logger.warning(f"Condition {condition.condition} checked on a truncated domain only")
    for message in result.subcriticality.messages:
        if not result.subcriticality.passed:
            logger.error(message)

    return EXIT_OK if result.passed else EXIT_FAILURE
