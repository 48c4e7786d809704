import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import dcjnet
from dcjnet.errors import EXIT_INPUT_ERROR, EXIT_OK, DCJException
from dcjnet.models import settings
from dcjnet.schemas.config import ModelConfig
from dcjnet.commands.loader import load_model
from dcjnet.commands.report import cmd_report
from dcjnet.commands.simulate import cmd_simulate
from dcjnet.commands.stationary import cmd_stationary
from dcjnet.commands.validate import cmd_validate
from dcjnet.commands.verify import cmd_verify

logger = logging.getLogger(__name__)

VERBS = ("validate", "stationary", "verify", "simulate", "report")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcjnet",
        description="Reversible random walks of distinguished customers in queueing networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {dcjnet.__version__}")
    verbs = parser.add_subparsers(dest="verb", required=True)

    for verb in VERBS:
        sub = verbs.add_parser(verb)
        sub.add_argument("--config", required=True, type=Path, help="JSON model config")
        sub.add_argument("--out", type=Path, default=Path(settings.OUTPUT_DIR), help="output directory")
        sub.add_argument("--seed", type=_seed)
        sub.add_argument("--tol", type=float, help="validation and balance tolerance")
        sub.add_argument("--nmax", type=int, help="truncation cap on tasks per site")
        sub.add_argument("--ymax", type=int, help="truncation cap on DCs per site")
        if verb == "simulate":
            sub.add_argument("--events", type=int, help="event budget per replica")
            sub.add_argument("--time", type=float, help="simulated-time budget per replica")
            sub.add_argument("--replicas", type=int, default=1)

    verbs.add_parser("schema", help="print the JSON schema of model configs")
    return parser


def run_command(args: argparse.Namespace) -> int:
    if args.verb == "schema":
        print(json.dumps(ModelConfig.model_json_schema(by_alias=True), indent=2))
        return EXIT_OK

    overrides = {"seed": args.seed, "tol": args.tol, "n_max": args.nmax, "y_max": args.ymax}
    spec = load_model(args.config, overrides)
    if args.verb == "validate":
        return cmd_validate(spec, args.out)
    if args.verb == "stationary":
        return cmd_stationary(spec, args.out)
    if args.verb == "verify":
        return cmd_verify(spec, args.out)
    if args.verb == "report":
        return cmd_report(spec, args.out)

    if args.events is None and args.time is None:
        logger.error("simulate needs --events or --time")
        return EXIT_INPUT_ERROR
    if (args.events is not None and args.events < 0) or (args.time is not None and args.time < 0) or args.replicas < 1:
        logger.error("--events and --time must be non-negative and --replicas positive")
        return EXIT_INPUT_ERROR
    return cmd_simulate(spec, args.out, max_events=args.events, max_time=args.time, replicas=args.replicas)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=settings.LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return run_command(args)
    except DCJException as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        return e.status_code


if __name__ == "__main__":
    sys.exit(main())
