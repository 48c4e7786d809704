import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

from pydantic import ValidationError

import dcjnet
from dcjnet.errors import BadParameter, ConfigError, ParseError, SchemaError
from dcjnet.models.spec import ModelSpec, RateFamilies, Tolerances, Truncation, check_admissible, occupancies
from dcjnet.models.state import NetworkState, SiteGraph
from dcjnet.models.variants import ParticleKind, Variant, VariantTag
from dcjnet.core.rates import FamilyContext, builtin_array, builtin_family
from dcjnet.schemas.config import ModelConfig
from dcjnet.schemas.reports import RunHeader
from dcjnet.utils.io import config_hash

logger = logging.getLogger(__name__)

ARRAYS = ("beta", "theta", "epsilon", "tau")
# cap used for load-time positivity sweeps when no truncation is given
DEFAULT_SWEEP = 32


def _locate(text: Optional[str], field: Optional[str]) -> Optional[int]:
    """Line of the first occurrence of the innermost named key of a dotted field path"""
    if not text or not field:
        return None
    keys = [part for part in field.split(".") if part and not part.isdigit()]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def parse_config(text: str) -> ModelConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno)
    try:
        return ModelConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise SchemaError(first["msg"], field=field or None, line=_locate(text, field))


def _array_names(tag: VariantTag) -> Sequence[str]:
    if not tag.has_dcs:
        return ("beta",)
    if tag.particle_kind is ParticleKind.SINGLE_DC:
        return ("beta", "theta", "tau")
    return ARRAYS


def _check_basic_model(config: ModelConfig) -> None:
    """The basic single-DC model only admits constant families"""
    for name, family in (("lambda", config.lam), ("mu", config.mu)):
        if family.kind != "constant" or isinstance(family.params.get("value"), list):
            raise SchemaError(f"{config.variant.value} needs a global constant {name}", field=f"{name}.kind")
    if config.gamma.kind not in ("exp", "unit"):
        raise SchemaError("the basic model uses the constant gauge exp(phi)", field="gamma.kind")
    for name in ("beta", "theta", "tau"):
        array = getattr(config, name)
        if array is not None and array.kind not in ("matrix", "zero"):
            raise SchemaError(f"{config.variant.value} needs a constant {name} matrix", field=f"{name}.kind")


def _sweep_positive(spec: ModelSpec) -> None:
    """Service rates must be positive for n >= 1 and gauges positive wherever used"""
    tag = spec.variant
    cap = spec.truncation.n_max if tag.open_tasks else tag.N
    cap = DEFAULT_SWEEP if cap is None else cap
    try:
        contexts = occupancies(spec)
    except BadParameter:
        contexts = [(0,) * spec.site_count]
    for i in spec.sites:
        if tag.open_tasks:
            for y in contexts:
                for n in range(1, cap + 1):
                    if not spec.rates.mu(i, n, y) > 0:
                        raise BadParameter(
                            f"service rate mu must be strictly positive for n >= 1 (site {i}, n={n})", field="mu"
                        )
        if tag.has_dcs:
            for n in range(0, cap + 1):
                if not spec.rates.gamma(i, n) > 0:
                    raise BadParameter(f"gauge gamma must be positive (site {i}, n={n})", field="gamma")


def build_spec(config: ModelConfig) -> ModelSpec:
    """Construct the immutable ModelSpec described by a validated config"""
    tag = VariantTag(config.variant, M=config.M, N=config.N)
    graph = SiteGraph(config.sites, tuple(config.labels or ()))
    count = config.sites
    if config.variant is Variant.V2:
        _check_basic_model(config)

    xi = eta = None
    if tag.open_dcs:
        for name in ("xi", "eta"):
            values = getattr(config, name)
            if values is None:
                raise SchemaError(f"{config.variant.value} has an open DC boundary and requires {name}", field=name)
            if any(not v > 0 for v in values):
                raise BadParameter(f"{name} entries must be positive", field=name)
        xi, eta = tuple(config.xi), tuple(config.eta)
    phi = tuple(config.phi) if config.phi is not None else None

    lam = builtin_family("lambda", config.lam.kind, config.lam.params, count)
    mu = builtin_family("mu", config.mu.kind, config.mu.params, count)
    gamma = builtin_family("gamma", config.gamma.kind, config.gamma.params, count, phi=phi)
    ctx = FamilyContext(tag=tag, site_count=count, lam=lam, mu=mu, gamma=gamma, xi=xi, eta=eta)

    arrays: Dict[str, Any] = {}
    used = _array_names(tag)
    for name in ARRAYS:
        array = getattr(config, name)
        if array is None:
            continue
        if name not in used:
            logger.warning(f"{name} is not used by {config.variant.value}; ignoring it")
            continue
        arrays[name] = builtin_array(name, array.kind, array.params, ctx)

    rates = RateFamilies(lam=lam, mu=mu, gamma=gamma, xi=xi, eta=eta, phi=phi, **arrays)
    tolerances = Tolerances(**config.tolerances.model_dump())
    truncation = Truncation(config.truncation.n_max, config.truncation.y_max)
    spec = ModelSpec(graph, tag, rates, truncation, tolerances, seed=config.seed, config=config)
    _sweep_positive(spec)
    return spec


def load_model(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ModelSpec:
    """Read, validate and build a model from a JSON config file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read config {path}: {e.strerror}")
    config = parse_config(text)
    if overrides:
        config = apply_overrides(config, overrides)
    try:
        spec = build_spec(config)
    except ConfigError as e:
        if e.line is None and e.field:
            raise type(e)(e.reason, field=e.field, line=_locate(text, e.field))
        raise
    logger.info(f"Loaded {config.variant.value} model with {config.sites} sites from {path}")
    return spec


def apply_overrides(config: ModelConfig, overrides: Dict[str, Any]) -> ModelConfig:
    """Apply command-line overrides (seed, tol, n_max, y_max)"""
    data = config.canonical()
    if overrides.get("seed") is not None:
        data["seed"] = overrides["seed"]
    if overrides.get("tol") is not None:
        tolerances = data.setdefault("tolerances", {})
        tolerances["validation"] = overrides["tol"]
        tolerances["balance"] = overrides["tol"]
    for key in ("n_max", "y_max"):
        if overrides.get(key) is not None:
            data.setdefault("truncation", {})[key] = overrides[key]
    return ModelConfig.model_validate(data)


def dump_model(spec: ModelSpec) -> str:
    """Canonical JSON config that reloads into an identical spec"""
    if spec.config is None:
        raise SchemaError("spec was not built from a config and cannot be emitted")
    return json.dumps(spec.config.canonical(), indent=2, sort_keys=True) + "\n"


def run_header(spec: ModelSpec) -> RunHeader:
    canonical = spec.config.canonical() if spec.config is not None else {}
    tolerances = spec.tolerances
    return RunHeader(
        config_hash=config_hash(canonical),
        seed=spec.seed,
        version=dcjnet.__version__,
        tolerances={
            "validation": tolerances.validation,
            "series": tolerances.series,
            "balance": tolerances.balance,
            "oracle": tolerances.oracle,
        },
    )


def initial_state(spec: ModelSpec) -> NetworkState:
    """Initial state from the config, or the canonical default"""
    config = spec.config
    if config is not None and config.initial_state is not None:
        state = NetworkState(tuple(config.initial_state.y), tuple(config.initial_state.n))
        check_admissible(spec, state)
        return state
    tag = spec.variant
    count = spec.site_count
    y = [0] * count
    if tag.has_dcs and not tag.open_dcs:
        # first M sites occupied; extra zero-range DCs pile onto site 0
        for k in range(tag.M):
            y[k if k < count else 0] += 1
    n = [0] * count
    if not tag.open_tasks:
        n[0] = tag.N
    return NetworkState(tuple(y), tuple(n))
