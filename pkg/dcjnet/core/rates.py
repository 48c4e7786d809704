"""Built-in rate families, cumulative products and the symmetry-condition validators.

Every validator checks a pointwise identity over the truncated (or conserved)
count domain and every admissible occupancy, and reports each point where the
two sides disagree beyond ``|L - R| <= tol * max(|L|, |R|, 1)``. DC leap balance
is compared on logs, as ``1 - min/max <= tol``.
"""
import logging
import math
import threading
import weakref
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from dcjnet.errors import BadParameter, MissingXiEta
from dcjnet.models import settings
from dcjnet.models.spec import (
    GaugeRate, LeapRate, ModelSpec, Occupancy, PairRate, RateFamilies, SiteRate, Tasks,
    occupancies, task_vectors, unit_gauge, zero_leap_rate, zero_pair_rate,
)
from dcjnet.models.variants import ParticleKind, VariantTag
from dcjnet.schemas.reports import ValidationReport, Violation

logger = logging.getLogger(__name__)

MAX_RECORDED_VIOLATIONS = 200


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

def _per_site(params: Mapping[str, Any], key: str, site_count: int, field: str) -> Tuple[float, ...]:
    """Read a scalar-or-per-site numeric parameter"""
    if key not in params:
        raise BadParameter(f"missing parameter '{key}'", field=f"{field}.params.{key}")
    value = params[key]
    if isinstance(value, (list, tuple)):
        if len(value) != site_count:
            raise BadParameter(
                f"parameter '{key}' needs {site_count} entries, got {len(value)}",
                field=f"{field}.params.{key}",
            )
        return tuple(float(v) for v in value)
    return (float(value),) * site_count


def _positive(values: Sequence[float], key: str, field: str, condition: str = "") -> Tuple[float, ...]:
    for v in values:
        if not v > 0 or math.isinf(v):
            raise BadParameter(
                f"'{key}' must be a finite positive rate, got {v}{condition}", field=f"{field}.params.{key}"
            )
    return tuple(values)


SERVICE_POSITIVITY = " (service positivity: mu(n) > 0 for every n >= 1 keeps lam_bar / mu_bar finite)"


def _integer(values: Sequence[float], key: str, field: str) -> Tuple[int, ...]:
    result = []
    for v in values:
        if not float(v).is_integer() or v < 1:
            raise BadParameter(f"'{key}' must be an integer >= 1, got {v}", field=f"{field}.params.{key}")
        result.append(int(v))
    return tuple(result)


def _lambda_family(kind: str, params: Mapping[str, Any], count: int) -> SiteRate:
    field = "lambda"
    if kind == "constant":
        rate = _positive(_per_site(params, "value", count, field), "value", field)
        return lambda i, n, y: rate[i]
    if kind == "blocked":
        rate = _positive(_per_site(params, "rate", count, field), "rate", field)
        cap = _integer(_per_site(params, "capacity", count, field), "capacity", field)
        return lambda i, n, y: rate[i] if n < cap[i] else 0.0
    if kind == "loaded_constant":
        unloaded = _positive(_per_site(params, "unloaded", count, field), "unloaded", field)
        loaded = _positive(_per_site(params, "loaded", count, field), "loaded", field)
        return lambda i, n, y: loaded[i] if y[i] >= 1 else unloaded[i]
    if kind == "loaded_blocked":
        unloaded = _positive(_per_site(params, "unloaded", count, field), "unloaded", field)
        loaded = _positive(_per_site(params, "loaded", count, field), "loaded", field)
        cap = _integer(_per_site(params, "capacity", count, field), "capacity", field)

        def lam(i, n, y):
            if n >= cap[i]:
                return 0.0
            return loaded[i] if y[i] >= 1 else unloaded[i]
        return lam
    if kind == "occupancy_linear":
        # base + slope * y_i; the slope makes arrivals depend on the local DC count
        base = _positive(_per_site(params, "base", count, field), "base", field)
        slope = _per_site(params, "slope", count, field)
        if any(s < 0 for s in slope):
            raise BadParameter("'slope' must be non-negative", field=f"{field}.params.slope")
        return lambda i, n, y: base[i] + slope[i] * y[i]
    raise BadParameter(f"unknown lambda family '{kind}'", field=f"{field}.kind")


def _mu_family(kind: str, params: Mapping[str, Any], count: int) -> SiteRate:
    field = "mu"
    if kind == "constant":
        rate = _positive(_per_site(params, "value", count, field), "value", field, SERVICE_POSITIVITY)
        return lambda i, n, y: rate[i] if n >= 1 else 0.0
    if kind == "servers":
        rate = _positive(_per_site(params, "rate", count, field), "rate", field, SERVICE_POSITIVITY)
        servers = _integer(_per_site(params, "servers", count, field), "servers", field)
        return lambda i, n, y: rate[i] * min(n, servers[i])
    if kind == "loaded_constant":
        unloaded = _positive(_per_site(params, "unloaded", count, field), "unloaded", field, SERVICE_POSITIVITY)
        loaded = _positive(_per_site(params, "loaded", count, field), "loaded", field, SERVICE_POSITIVITY)

        def mu(i, n, y):
            if n < 1:
                return 0.0
            return loaded[i] if y[i] >= 1 else unloaded[i]
        return mu
    if kind == "loaded_servers":
        unloaded = _positive(_per_site(params, "unloaded", count, field), "unloaded", field, SERVICE_POSITIVITY)
        loaded = _positive(_per_site(params, "loaded", count, field), "loaded", field, SERVICE_POSITIVITY)
        servers = _integer(_per_site(params, "servers", count, field), "servers", field)
        return lambda i, n, y: (loaded[i] if y[i] >= 1 else unloaded[i]) * min(n, servers[i])
    raise BadParameter(f"unknown mu family '{kind}'", field=f"{field}.kind")


def _gamma_family(kind: str, params: Mapping[str, Any], count: int, phi: Optional[Sequence[float]]) -> GaugeRate:
    field = "gamma"
    if kind == "unit":
        return unit_gauge
    if "phi" in params:
        phis = _per_site(params, "phi", count, field)
    elif phi is not None:
        phis = tuple(float(v) for v in phi)
    else:
        phis = (0.0,) * count
    scale = tuple(math.exp(p) for p in phis)
    if kind == "exp":
        # constant gauge of the basic model, including n = 0
        return lambda i, n: scale[i]
    if kind == "exp_over_n":
        return lambda i, n: scale[i] / n if n >= 1 else 1.0
    if kind == "n_exp":
        return lambda i, n: n * scale[i] if n >= 1 else 1.0
    raise BadParameter(f"unknown gamma family '{kind}'", field=f"{field}.kind")


def builtin_family(
    component: str,
    kind: str,
    params: Optional[Mapping[str, Any]] = None,
    site_count: int = 1,
    phi: Optional[Sequence[float]] = None,
) -> Callable:
    """Build lambda, mu or gamma from a named built-in family"""
    params = params or {}
    if component == "lambda":
        return _lambda_family(kind, params, site_count)
    if component == "mu":
        return _mu_family(kind, params, site_count)
    if component == "gamma":
        return _gamma_family(kind, params, site_count, phi)
    raise BadParameter(f"unknown rate component '{component}'", field=component)


@dataclass(frozen=True)
class FamilyContext:
    """What the constructive array forms need to know about the rest of the model"""
    tag: VariantTag
    site_count: int
    lam: SiteRate
    mu: SiteRate
    gamma: GaugeRate = unit_gauge
    xi: Optional[Tuple[float, ...]] = None
    eta: Optional[Tuple[float, ...]] = None


def _matrix(params: Mapping[str, Any], count: int, field: str) -> Tuple[Tuple[float, ...], ...]:
    values = params.get("values")
    if values is None:
        raise BadParameter("missing matrix 'values'", field=f"{field}.params.values")
    if len(values) != count or any(len(row) != count for row in values):
        raise BadParameter(f"matrix must be {count}x{count}", field=f"{field}.params.values")
    matrix = tuple(tuple(float(v) for v in row) for row in values)
    for k, row in enumerate(matrix):
        for l, v in enumerate(row):
            if v < 0 or math.isinf(v):
                raise BadParameter(f"entry [{k}][{l}] must be a finite non-negative rate", field=f"{field}.params.values")
            if k == l and v != 0:
                raise BadParameter(f"diagonal entry [{k}][{k}] must be 0", field=f"{field}.params.values")
    return matrix


def _destination_factor(ctx: FamilyContext, with_gauge: bool) -> Callable[[int, int, Occupancy], float]:
    """Factor D_dst(n_dst; y) that makes c[src][dst] * D_dst satisfy the pair symmetry"""
    open_tasks = ctx.tag.open_tasks
    zero_range = ctx.tag.zero_range
    lam, mu, gamma = ctx.lam, ctx.mu, ctx.gamma

    def factor(dst: int, n_dst: int, y: Occupancy) -> float:
        value = lam(dst, n_dst, y) / mu(dst, n_dst + 1, y) if open_tasks else 1.0
        if with_gauge:
            value *= gamma(dst, n_dst) ** (y[dst] if zero_range else 1)
        return value
    return factor


def _balanced_tau(c: Tuple[Tuple[float, ...], ...], ctx: FamilyContext) -> LeapRate:
    """tau[j][j'](n; y) = c[j][j'] * A(n; y') * rho[j'] with y' the post-leap occupancy"""
    open_tasks = ctx.tag.open_tasks
    lam, mu = ctx.lam, ctx.mu
    if ctx.tag.open_dcs:
        if ctx.xi is None or ctx.eta is None:
            raise MissingXiEta("balanced tau on an open-DC variant needs xi and eta")
        rho = tuple(x / e for x, e in zip(ctx.xi, ctx.eta))
    else:
        rho = (1.0,) * ctx.site_count

    @lru_cache(maxsize=65536)
    def environment(n: Tasks, y: Occupancy) -> float:
        if not open_tasks:
            return 1.0
        value = 1.0
        for q, n_q in enumerate(n):
            for m in range(n_q):
                value *= lam(q, m, y) / mu(q, m + 1, y)
        return value

    def tau(j: int, jp: int, n: Tasks, y: Occupancy) -> float:
        if j == jp or c[j][jp] == 0.0:
            return 0.0
        after = list(y)
        after[j] -= 1
        after[jp] += 1
        return c[j][jp] * environment(n, tuple(after)) * rho[jp]
    return tau


def builtin_array(
    component: str,
    kind: str,
    params: Optional[Mapping[str, Any]],
    ctx: FamilyContext,
) -> Callable:
    """Build beta, theta, epsilon or tau as a constant matrix or a balanced form"""
    params = params or {}
    count = ctx.site_count
    is_tau = component == "tau"
    if kind == "zero":
        return zero_leap_rate if is_tau else zero_pair_rate
    matrix = _matrix(params, count, component)
    if kind == "matrix":
        if is_tau:
            return lambda j, jp, n, y: matrix[j][jp]
        return lambda src, dst, n_src, n_dst, y: matrix[src][dst]
    if kind == "balanced":
        if is_tau:
            return _balanced_tau(matrix, ctx)
        factor = _destination_factor(ctx, with_gauge=component == "epsilon")
        return lambda src, dst, n_src, n_dst, y: matrix[src][dst] * factor(dst, n_dst, y)
    raise BadParameter(f"unknown {component} form '{kind}'", field=f"{component}.kind")


# ---------------------------------------------------------------------------
# Cumulative products
# ---------------------------------------------------------------------------

class CumulativeProducts:
    """Memoized running products lam_bar, mu_bar, gam_bar per (site, occupancy)"""

    def __init__(self, rates: RateFamilies):
        self.rates = rates
        self._tables: Dict[tuple, Tuple[List[float], List[float]]] = {}
        self._lock = threading.Lock()

    def _factor(self, name: str, site: int, m: int, y: Optional[Occupancy]) -> float:
        if name == "lam":
            return self.rates.lam(site, m, y)
        if name == "mu":
            return self.rates.mu(site, m + 1, y)
        return self.rates.gamma(site, m)

    def _table(self, name: str, site: int, n: int, y: Optional[Occupancy]):
        key = (name, site, y)
        table = self._tables.get(key)
        if table is None:
            table = ([1.0], [0.0])
            self._tables[key] = table
        direct, logs = table
        if len(direct) <= n:
            with self._lock:
                while len(direct) <= n:
                    factor = self._factor(name, site, len(direct) - 1, y)
                    # direct values saturate at inf or 0; weights read the log tables
                    direct.append(direct[-1] * factor)
                    logs.append(logs[-1] + math.log(factor) if factor > 0 else -math.inf)
        return table

    def lam_bar(self, site: int, n: int, y: Occupancy) -> float:
        return self._table("lam", site, n, y)[0][n]

    def mu_bar(self, site: int, n: int, y: Occupancy) -> float:
        return self._table("mu", site, n, y)[0][n]

    def gam_bar(self, site: int, n: int) -> float:
        return self._table("gam", site, n, None)[0][n]

    def log_lam_bar(self, site: int, n: int, y: Occupancy) -> float:
        return self._table("lam", site, n, y)[1][n]

    def log_mu_bar(self, site: int, n: int, y: Occupancy) -> float:
        return self._table("mu", site, n, y)[1][n]

    def log_gam_bar(self, site: int, n: int) -> float:
        return self._table("gam", site, n, None)[1][n]


_products: "weakref.WeakKeyDictionary[RateFamilies, CumulativeProducts]" = weakref.WeakKeyDictionary()
_products_lock = threading.Lock()


def products_for(rates: RateFamilies) -> CumulativeProducts:
    with _products_lock:
        products = _products.get(rates)
        if products is None:
            products = CumulativeProducts(rates)
            _products[rates] = products
        return products


def cumulative(rates: RateFamilies, site: int, n: int, occupancy: Occupancy) -> Tuple[float, float, float]:
    """(lam_bar, mu_bar, gam_bar) at count n"""
    products = products_for(rates)
    return products.lam_bar(site, n, occupancy), products.mu_bar(site, n, occupancy), products.gam_bar(site, n)


def log_site_factor(spec: ModelSpec, site: int, n: int, y: Occupancy) -> float:
    """log of lam_bar / mu_bar at one site; 0 for closed task boundaries"""
    if not spec.variant.open_tasks:
        return 0.0
    products = products_for(spec.rates)
    lam = products.log_lam_bar(site, n, y)
    if lam == -math.inf:
        return lam
    return lam - products.log_mu_bar(site, n, y)


def log_environment(spec: ModelSpec, n: Tasks, y: Occupancy) -> float:
    """log A(n; y) = sum over sites of log(lam_bar / mu_bar)"""
    if not spec.variant.open_tasks:
        return 0.0
    total = 0.0
    for q, n_q in enumerate(n):
        total += log_site_factor(spec, q, n_q, y)
        if total == -math.inf:
            break
    return total


def log_rho(spec: ModelSpec, site: int) -> float:
    if not spec.variant.open_dcs:
        return 0.0
    xi, eta = spec.rates.xi, spec.rates.eta
    if xi is None or eta is None:
        raise MissingXiEta(f"{spec.variant.variant.value} has an open DC boundary and needs xi and eta")
    return math.log(xi[site] / eta[site]) if xi[site] > 0 else -math.inf


# ---------------------------------------------------------------------------
# Validators
# ---------------------------------------------------------------------------

def relative_error(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def log_relative_error(log_lhs: float, log_rhs: float) -> float:
    """1 - min/max of two positive quantities given as logs; 1 when exactly one is zero"""
    if log_lhs == log_rhs:
        return 0.0
    if log_lhs == -math.inf or log_rhs == -math.inf:
        return 1.0
    return -math.expm1(-abs(log_lhs - log_rhs))


def _log(value: float) -> float:
    return math.log(value) if value > 0 else -math.inf


class _Collector:
    """Accumulates checks into a ValidationReport, honouring the enumeration budget"""

    def __init__(self, condition: str, description: str, tol: float, budget: int):
        self.report = ValidationReport(condition=condition, description=description, tolerance=tol)
        self.tol = tol
        self.budget = budget

    @property
    def exhausted(self) -> bool:
        if self.report.checked >= self.budget:
            self.report.truncated_domain = True
            return True
        return False

    def check(self, lhs: float, rhs: float, sites, counts, occupancy) -> None:
        self._record(relative_error(lhs, rhs), lhs, rhs, sites, counts, occupancy, log_scale=False)

    def check_log(self, log_lhs: float, log_rhs: float, sites, counts, occupancy) -> None:
        """Compare two quantities given as natural logs, -inf meaning zero"""
        self._record(log_relative_error(log_lhs, log_rhs), log_lhs, log_rhs, sites, counts, occupancy, log_scale=True)

    def _record(self, error: float, lhs: float, rhs: float, sites, counts, occupancy, log_scale: bool) -> None:
        self.report.checked += 1
        if error > self.report.max_relative_error:
            self.report.max_relative_error = error
        if error > self.tol:
            self.report.violation_count += 1
            if len(self.report.violations) < MAX_RECORDED_VIOLATIONS:
                self.report.violations.append(Violation(
                    sites=list(sites), counts=list(counts), occupancy=list(occupancy),
                    lhs=lhs, rhs=rhs, relative_error=error, log_scale=log_scale,
                ))

    def finish(self) -> ValidationReport:
        report = self.report
        if report.truncated_domain:
            logger.warning(f"{report.condition}: enumeration budget {self.budget} reached, domain truncated")
        logger.info(
            f"{report.condition}: {report.checked} points checked, "
            f"{report.violation_count} violations, max relative error {report.max_relative_error:.3e}"
        )
        return report


def _tolerance(spec: ModelSpec, tol: Optional[float]) -> float:
    return spec.tolerances.validation if tol is None else tol


def _count_pairs(spec: ModelSpec):
    """(n_src, n_dst) pairs with n_src >= 1 that stay inside the truncation or conservation bound"""
    if spec.variant.open_tasks:
        n_max = spec.require_n_max()
        for n_src in range(1, n_max + 1):
            for n_dst in range(0, n_max):
                yield n_src, n_dst
    else:
        total = spec.variant.N
        for n_src in range(1, total + 1):
            for n_dst in range(0, total - n_src + 1):
                yield n_src, n_dst


def _ratio_factor(spec: ModelSpec, site: int, n: int, y: Occupancy) -> float:
    """lambda(n) / mu(n + 1), or 1 when tasks are conserved"""
    if not spec.variant.open_tasks:
        return 1.0
    return spec.rates.lam(site, n, y) / spec.rates.mu(site, n + 1, y)


def _gauge_power(spec: ModelSpec, site: int, n: int, y: Occupancy) -> float:
    exponent = y[site] if spec.variant.zero_range else 1
    return spec.rates.gamma(site, n) ** exponent


def _validate_pairs(
    spec: ModelSpec,
    rate: PairRate,
    condition: str,
    description: str,
    src_loaded: bool,
    dst_loaded: bool,
    gauged: bool,
    tol: Optional[float],
    budget: Optional[int],
) -> ValidationReport:
    collector = _Collector(condition, description, _tolerance(spec, tol),
                           settings.VALIDATION_BUDGET if budget is None else budget)
    pairs = list(_count_pairs(spec))
    for y in occupancies(spec):
        for src in spec.sites:
            if (y[src] >= 1) != src_loaded:
                continue
            for dst in spec.sites:
                if dst == src or (y[dst] >= 1) != dst_loaded:
                    continue
                for n_src, n_dst in pairs:
                    if collector.exhausted:
                        return collector.finish()
                    lhs = _ratio_factor(spec, src, n_src - 1, y) * rate(src, dst, n_src, n_dst, y)
                    rhs = _ratio_factor(spec, dst, n_dst, y) * rate(dst, src, n_dst + 1, n_src - 1, y)
                    if gauged:
                        lhs *= _gauge_power(spec, src, n_src - 1, y)
                        rhs *= _gauge_power(spec, dst, n_dst, y)
                    collector.check(lhs, rhs, (src, dst), (n_src, n_dst), y)
    return collector.finish()


def validate_beta(spec: ModelSpec, tol: Optional[float] = None, budget: Optional[int] = None) -> ValidationReport:
    """Symmetry of task jumps between unloaded sites"""
    return _validate_pairs(
        spec, spec.rates.beta, "beta-symmetry",
        "task jumps between unloaded sites balance against their reverse jumps",
        src_loaded=False, dst_loaded=False, gauged=False, tol=tol, budget=budget,
    )


def validate_theta(spec: ModelSpec, tol: Optional[float] = None, budget: Optional[int] = None) -> ValidationReport:
    """Symmetry of task jumps between a loaded and an unloaded site"""
    return _validate_pairs(
        spec, spec.rates.theta, "theta-symmetry",
        "task jumps out of loaded sites balance against gauge-weighted jumps into them",
        src_loaded=True, dst_loaded=False, gauged=False, tol=tol, budget=budget,
    )


def validate_epsilon(spec: ModelSpec, tol: Optional[float] = None, budget: Optional[int] = None) -> ValidationReport:
    """Gauge-weighted symmetry of task jumps between loaded sites"""
    return _validate_pairs(
        spec, spec.rates.epsilon, "epsilon-gauge-symmetry",
        "task jumps between loaded sites balance with gauge exponents from the occupancy",
        src_loaded=True, dst_loaded=True, gauged=True, tol=tol, budget=budget,
    )


def validate_tau(spec: ModelSpec, tol: Optional[float] = None, budget: Optional[int] = None) -> ValidationReport:
    """Balance of DC leaps, weighted by the task environment and xi/eta ratios"""
    tag = spec.variant
    if tag.open_dcs:
        condition = "tau-balance-open-dc"
        description = "DC leaps balance with xi/eta ratios of source and destination"
        # raises MissingXiEta
        log_rhos = [log_rho(spec, q) for q in spec.sites]
    else:
        condition = "tau-balance" if tag.open_tasks else "tau-symmetry-closed-tasks"
        description = "DC leaps balance once weighted by the task environment before and after the leap"
        log_rhos = [0.0] * spec.site_count
    collector = _Collector(condition, description, _tolerance(spec, tol),
                           settings.VALIDATION_BUDGET if budget is None else budget)
    tasks = task_vectors(spec)
    tau = spec.rates.tau
    for y in occupancies(spec):
        for j in spec.sites:
            if y[j] < 1:
                continue
            for jp in spec.sites:
                if jp == j or (tag.exclusive and y[jp] >= 1):
                    continue
                after = list(y)
                after[j] -= 1
                after[jp] += 1
                after = tuple(after)
                for n in tasks:
                    if collector.exhausted:
                        return collector.finish()
                    # A(n; y) leaves the float range on large boxes
                    lhs = log_environment(spec, n, y) + log_rhos[j] + _log(tau(j, jp, n, y))
                    rhs = log_environment(spec, n, after) + log_rhos[jp] + _log(tau(jp, j, n, after))
                    collector.check_log(lhs, rhs, (j, jp), n, y)
    return collector.finish()


def validate_environment_independence(
    spec: ModelSpec, tol: Optional[float] = None, budget: Optional[int] = None
) -> ValidationReport:
    """A(n; y) = prod lam_bar / mu_bar must not depend on the occupancy y"""
    collector = _Collector(
        "environment-independence",
        "task environment weight is identical across occupancy configurations",
        _tolerance(spec, tol), settings.VALIDATION_BUDGET if budget is None else budget,
    )
    if not spec.variant.open_dcs:
        collector.report.applicable = False
        return collector.finish()
    configs = occupancies(spec)
    for n in task_vectors(spec):
        if collector.exhausted:
            break
        logs = [log_environment(spec, n, y) for y in configs]
        high = max(range(len(logs)), key=lambda k: logs[k])
        low = min(range(len(logs)), key=lambda k: logs[k])
        top, bottom = logs[high], logs[low]
        if top == -math.inf:
            spread = 0.0
        else:
            spread = 1.0 - math.exp(bottom - top)
        collector.report.checked += 1
        collector.report.max_relative_error = max(collector.report.max_relative_error, spread)
        if spread > collector.tol:
            collector.report.violation_count += 1
            if len(collector.report.violations) < MAX_RECORDED_VIOLATIONS:
                collector.report.violations.append(Violation(
                    sites=[], counts=list(n), occupancy=list(configs[high]),
                    lhs=math.exp(top), rhs=math.exp(bottom), relative_error=spread,
                ))
    return collector.finish()


VALIDATORS: Dict[str, Callable[..., ValidationReport]] = {
    "beta": validate_beta,
    "theta": validate_theta,
    "epsilon": validate_epsilon,
    "environment": validate_environment_independence,
    "tau": validate_tau,
}


def required_validators(tag: VariantTag) -> List[str]:
    names = ["beta"]
    if tag.has_dcs:
        names.append("theta")
    if tag.has_dcs and tag.particle_kind is not ParticleKind.SINGLE_DC:
        names.append("epsilon")
    if tag.open_dcs:
        names.append("environment")
    if tag.has_dcs:
        names.append("tau")
    return names


def validate_all(spec: ModelSpec, tol: Optional[float] = None) -> List[ValidationReport]:
    """Run every validator the variant requires"""
    reports = [VALIDATORS[name](spec, tol=tol) for name in required_validators(spec.variant)]
    spec.cache["validated"] = all(r.passed for r in reports)
    return reports


def is_validated(spec: ModelSpec) -> bool:
    """Cached verdict of validate_all"""
    if "validated" not in spec.cache:
        validate_all(spec)
    return spec.cache["validated"]
