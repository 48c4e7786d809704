"""Product-form stationary weights, weight series and partition functions.

Weights are handled as natural logs throughout; -inf encodes a zero weight.
Series are summed term by term until the ratio-test tail bound certifies the
requested relative tolerance.
"""
import logging
import math
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from dcjnet.errors import Diverged
from dcjnet.models import settings
from dcjnet.models.spec import (
    ModelSpec, Occupancy, check_admissible, enumerate_states, occupancies, task_vectors,
)
from dcjnet.models.state import NetworkState
from dcjnet.models.variants import Variant
from dcjnet.core.rates import is_validated, log_environment, log_rho, log_site_factor, products_for
from dcjnet.schemas.reports import Marginals, SeriesValue, SeriesVerdict, SubcriticalityReport

logger = logging.getLogger(__name__)

# tolerance on "non-increasing" when comparing consecutive log ratios
RATIO_SLACK = 1e-12


class WeightValue(NamedTuple):
    log_weight: float
    verified: bool = False

    @property
    def value(self) -> float:
        return math.exp(self.log_weight)


def _on_manifold(spec: ModelSpec, state: NetworkState) -> bool:
    tag = spec.variant
    if tag.has_dcs and not tag.open_dcs and state.dc_total != tag.M:
        return False
    if not tag.open_tasks and state.task_total != tag.N:
        return False
    return True


def log_weight(spec: ModelSpec, state: NetworkState) -> float:
    """log of the unnormalized product-form weight"""
    check_admissible(spec, state, conserved=False)
    if not _on_manifold(spec, state):
        return -math.inf
    y, n = state
    products = products_for(spec.rates)
    total = log_environment(spec, n, y)
    for q, count in enumerate(y):
        if count and total != -math.inf:
            total += count * (log_rho(spec, q) + products.log_gam_bar(q, n[q]))
    return total


def weight(spec: ModelSpec, state: NetworkState) -> WeightValue:
    """Unnormalized stationary weight, flagged with the validators' verdict"""
    return WeightValue(log_weight(spec, state), is_validated(spec))


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------

def sum_series(
    label: str,
    log_term: Callable[[int], float],
    tol: float,
    window: Optional[int] = None,
    max_terms: Optional[int] = None,
    log_ratio_bound: Optional[Callable[[int], float]] = None,
) -> SeriesValue:
    """Sum exp(log_term(n)) over n >= 0 with a certified ratio-test tail bound

    Stops once the bound t_n * r / (1 - r) on the remainder is at most tol * min(sum, 1),
    valid while term ratios r stay below 1 and non-increasing. Raises Diverged after
    `window` consecutive ratios >= 1.

    `log_ratio_bound(n)`, when given, must bound every log ratio after term n and replaces
    the observed ratio in the tail bound.
    """
    window = settings.SERIES_WINDOW if window is None else window
    max_terms = settings.SERIES_MAX_TERMS if max_terms is None else max_terms
    log_sum = log_term(0)
    previous = log_sum
    previous_ratio = math.inf
    growing = 0
    log_tol = math.log(tol) if tol > 0 else -math.inf

    for n in range(1, max_terms):
        current = log_term(n)
        if current == -math.inf:
            # monotone support: every later term vanishes too
            return SeriesValue(series=label, value=math.exp(log_sum), log_value=log_sum,
                               truncation_index=n - 1, tail_bound=0.0, converged=True)
        log_sum = float(np.logaddexp(log_sum, current))
        log_ratio = current - previous
        if log_ratio >= 0:
            growing += 1
            if growing >= window:
                raise Diverged(
                    f"series {label}: term ratio stayed >= 1 for {window} consecutive terms (last ratio "
                    f"{math.exp(min(log_ratio, 700.0)):.6g} at n={n})",
                    series=label,
                )
        else:
            growing = 0
            bound = log_ratio if log_ratio_bound is None else log_ratio_bound(n)
            certifiable = log_ratio <= previous_ratio + RATIO_SLACK if log_ratio_bound is None else bound < 0
            if certifiable:
                log_tail = current + bound - math.log1p(-math.exp(bound))
                # relative to the sum, and absolute once the sum exceeds 1
                if log_tail <= log_tol + min(log_sum, 0.0):
                    return SeriesValue(series=label, value=math.exp(log_sum), log_value=log_sum,
                                       truncation_index=n, tail_bound=math.exp(log_tail), converged=True)
        previous_ratio = log_ratio
        previous = current

    logger.warning(f"Series {label} not certified after {max_terms} terms")
    return SeriesValue(series=label, value=math.exp(log_sum), log_value=log_sum,
                       truncation_index=max_terms - 1, tail_bound=math.inf, converged=False)


def _cached_series(spec: ModelSpec, key: tuple, label: str, log_term: Callable[[int], float],
                   log_ratio_bound: Optional[Callable[[int], float]] = None) -> SeriesValue:
    table = spec.cache.setdefault("series", {})
    if key not in table:
        table[key] = sum_series(label, log_term, spec.tolerances.series, log_ratio_bound=log_ratio_bound)
    return table[key]


def series_U(spec: ModelSpec, site: int, occupancy: Occupancy) -> SeriesValue:
    """sum_n lam_bar / mu_bar at an unloaded site"""
    return _cached_series(
        spec, ("U", site, occupancy), f"U[{site}]",
        lambda n: log_site_factor(spec, site, n, occupancy),
    )


def series_L(spec: ModelSpec, site: int, occupancy: Occupancy) -> SeriesValue:
    """sum_n lam_bar * gam_bar / mu_bar at a site loaded by a single DC"""
    products = products_for(spec.rates)
    return _cached_series(
        spec, ("L", site, occupancy), f"L[{site}]",
        lambda n: log_site_factor(spec, site, n, occupancy) + products.log_gam_bar(site, n),
    )


def series_C(spec: ModelSpec, site: int, occupancy: Occupancy) -> SeriesValue:
    """sum_n (lam_bar / mu_bar) * gam_bar ** y_site at a zero-range site"""
    products = products_for(spec.rates)
    power = occupancy[site]
    return _cached_series(
        spec, ("C", site, occupancy), f"C[{site}]",
        lambda n: log_site_factor(spec, site, n, occupancy) + power * products.log_gam_bar(site, n),
    )


def _site_series(spec: ModelSpec, site: int, occupancy: Occupancy) -> SeriesValue:
    if occupancy[site] == 0:
        return series_U(spec, site, occupancy)
    if spec.variant.zero_range:
        return series_C(spec, site, occupancy)
    return series_L(spec, site, occupancy)


def _geometric_site_series(spec: ModelSpec, site: int) -> SeriesValue:
    """sum_n a(n) / (1 - rho * gam_bar(n)): the DC count at an open zero-range site summed out"""
    products = products_for(spec.rates)
    rho = log_rho(spec, site)
    context = (0,) * spec.site_count
    label = f"G[{site}]"

    def log_term(n: int) -> float:
        base = log_site_factor(spec, site, n, context)
        if base == -math.inf:
            return base
        log_x = rho + products.log_gam_bar(site, n)
        if log_x >= 0:
            raise Diverged(
                f"series {label}: xi/eta * gam_bar = {math.exp(log_x):.6g} >= 1 at n={n}", series=label
            )
        return base - math.log1p(-math.exp(log_x))

    def log_ratio_bound(n: int) -> float:
        # 1 / (1 - rho * gam_bar) stops growing once gamma <= 1, leaving the queue ratio as the bound
        if spec.rates.gamma(site, n) > 1:
            return math.inf
        now = log_site_factor(spec, site, n + 1, context) - log_site_factor(spec, site, n, context)
        before = log_site_factor(spec, site, n, context) - log_site_factor(spec, site, n - 1, context)
        return now if now <= before + RATIO_SLACK else math.inf
    return _cached_series(spec, ("G", site), label, log_term, log_ratio_bound)


# ---------------------------------------------------------------------------
# Partition function
# ---------------------------------------------------------------------------

def _from_log(label: str, log_value: float, tail: float, index: int, converged: bool = True) -> SeriesValue:
    return SeriesValue(series=label, value=math.exp(log_value), log_value=log_value,
                       truncation_index=index, tail_bound=tail, converged=converged)


def _product_with_tail(values: Sequence[SeriesValue]) -> tuple:
    """(value, tail) of a product of series, the tail bounding prod(v + t) - prod(v)"""
    value = 1.0
    upper = 1.0
    for s in values:
        value *= s.value
        upper *= s.value + s.tail_bound
    return value, upper - value


def _xi_open_tasks(spec: ModelSpec) -> SeriesValue:
    total = 0.0
    tail = 0.0
    converged = True
    index = 0
    for y in occupancies(spec):
        factors = [_site_series(spec, q, y) for q in spec.sites]
        value, extra = _product_with_tail(factors)
        scale = math.exp(sum(y[q] * log_rho(spec, q) for q in spec.sites if y[q]))
        total += scale * value
        tail += scale * extra
        converged = converged and all(s.converged for s in factors)
        index = max([index] + [s.truncation_index for s in factors])
    return _from_log("Xi", math.log(total), tail, index, converged)


def _xi_open_zero_range(spec: ModelSpec) -> SeriesValue:
    factors = [_geometric_site_series(spec, q) for q in spec.sites]
    value, tail = _product_with_tail(factors)
    index = max(s.truncation_index for s in factors)
    return _from_log("Xi", math.log(value), tail, index, all(s.converged for s in factors))


def _xi_closed_tasks_open_zero_range(spec: ModelSpec) -> SeriesValue:
    """Tasks conserved, DC counts unbounded: each site contributes 1 / (1 - rho * gam_bar(n))"""
    products = products_for(spec.rates)
    logs = []
    for n in task_vectors(spec):
        total = 0.0
        for q in spec.sites:
            log_x = log_rho(spec, q) + products.log_gam_bar(q, n[q])
            if log_x >= 0:
                raise Diverged(
                    f"xi/eta * gam_bar = {math.exp(log_x):.6g} >= 1 at site {q} with {n[q]} tasks",
                    series=f"G[{q}]",
                )
            total -= math.log1p(-math.exp(log_x))
        logs.append(total)
    return _from_log("Xi", float(logsumexp(logs)), 0.0, len(logs))


def _xi_enumerated(spec: ModelSpec) -> SeriesValue:
    states = enumerate_states(spec)
    logs = np.array([log_weight(spec, s) for s in states])
    return _from_log("Xi", float(logsumexp(logs)), 0.0, len(states))


def partition_function(spec: ModelSpec) -> SeriesValue:
    """Normalizing constant of the exact model, with a certified tail bound"""
    if "partition" in spec.cache:
        return spec.cache["partition"]
    tag = spec.variant
    if tag.open_tasks:
        if tag.open_dcs and tag.zero_range:
            result = _xi_open_zero_range(spec)
        else:
            result = _xi_open_tasks(spec)
    elif tag.open_dcs and tag.zero_range:
        result = _xi_closed_tasks_open_zero_range(spec)
    else:
        result = _xi_enumerated(spec)
    logger.info(f"Partition function for {tag.variant.value}: {result.value:.12g} (tail bound {result.tail_bound:.3e})")
    spec.cache["partition"] = result
    return result


def probability(spec: ModelSpec, state: NetworkState) -> float:
    xi = partition_function(spec)
    if not xi.converged:
        raise Diverged("partition function is not certified; probabilities are undefined", series="Xi")
    return math.exp(log_weight(spec, state) - xi.log_value)


def product_form_distribution(spec: ModelSpec, states: Iterable[NetworkState]) -> Dict[NetworkState, float]:
    """Product-form weights renormalized over the given states"""
    states = list(states)
    logs = np.array([log_weight(spec, s) for s in states])
    probs = np.exp(logs - logsumexp(logs))
    return dict(zip(states, probs.tolist()))


# ---------------------------------------------------------------------------
# Sub-criticality
# ---------------------------------------------------------------------------

def _verdict(series: str, site: Optional[int], occupancy: Optional[Occupancy], compute) -> SeriesVerdict:
    try:
        value = compute()
    except Diverged as e:
        return SeriesVerdict(series=series, site=site, occupancy=list(occupancy) if occupancy else None,
                             converged=False, detail=e.detail)
    return SeriesVerdict(
        series=series, site=site, occupancy=list(occupancy) if occupancy else None,
        converged=value.converged, value=value.value, tail_bound=value.tail_bound,
        detail="" if value.converged else "tail bound not certified",
    )


def _basic_model_messages(spec: ModelSpec) -> List[SeriesVerdict]:
    rates = spec.rates
    verdicts = []
    for j in spec.sites:
        y = tuple(1 if s == j else 0 for s in spec.sites)
        ratio = rates.lam(j, 0, y) / rates.mu(j, 1, y)
        loaded_ratio = ratio * rates.gamma(j, 0)
        verdicts.append(SeriesVerdict(
            series="lambda/mu", site=j, converged=ratio < 1, value=ratio,
            detail=f"lambda/mu = {ratio:.6g}" + (" >= 1" if ratio >= 1 else " < 1"),
        ))
        verdicts.append(SeriesVerdict(
            series="lambda*exp(phi)/mu", site=j, converged=loaded_ratio < 1, value=loaded_ratio,
            detail=f"lambda*exp(phi)/mu = {loaded_ratio:.6g}" + (" >= 1" if loaded_ratio >= 1 else " < 1"),
        ))
    return verdicts


def check_subcriticality(spec: ModelSpec) -> SubcriticalityReport:
    """Per-site, per-occupancy convergence verdicts of the weight series"""
    tag = spec.variant
    report = SubcriticalityReport()
    if not tag.open_tasks and not (tag.open_dcs and tag.zero_range):
        report.messages.append("finite state space: no series required")
        report.verdicts.append(SeriesVerdict(series="finite", converged=True, detail="finite state space"))
        return report

    if tag.variant is Variant.V2:
        report.verdicts.extend(_basic_model_messages(spec))

    if not tag.open_tasks:
        report.verdicts.append(_verdict("Xi", None, None, lambda: _xi_closed_tasks_open_zero_range(spec)))
    elif tag.open_dcs and tag.zero_range:
        for q in spec.sites:
            report.verdicts.append(_verdict(f"G[{q}]", q, None, lambda q=q: _geometric_site_series(spec, q)))
    else:
        for y in occupancies(spec):
            for q in spec.sites:
                label = "U" if y[q] == 0 else ("C" if tag.zero_range else "L")
                report.verdicts.append(_verdict(label, q, y, lambda q=q, y=y: _site_series(spec, q, y)))

    for v in report.verdicts:
        if not v.converged:
            where = f" at site {v.site}" if v.site is not None else ""
            report.messages.append(f"series {v.series}{where} diverges: {v.detail}")
    logger.info(f"Sub-criticality for {tag.variant.value}: {'pass' if report.passed else 'fail'}")
    return report


# ---------------------------------------------------------------------------
# Reference closed forms and marginals
# ---------------------------------------------------------------------------

def jackson_probability(lam: float, mu: float, tasks: Sequence[int]) -> float:
    """Product of geometric laws of a symmetric Jackson network with constant rates"""
    rho = lam / mu
    return math.prod((1 - rho) * rho ** n for n in tasks)


def basic_model_partition(lam: float, mu: float, phi: float, site_count: int) -> float:
    rho = lam / mu
    return site_count / (1 - rho * math.exp(phi)) / (1 - rho) ** (site_count - 1)


def basic_model_probability(lam: float, mu: float, phi: float, state: NetworkState) -> float:
    """Stationary law of the basic single-DC model: (lam/mu)^|n| * exp(phi * n_j) / Xi"""
    j = state.occupancy.index(1)
    site_count = len(state.tasks)
    numerator = (lam / mu) ** state.task_total * math.exp(phi * state.tasks[j])
    return numerator / basic_model_partition(lam, mu, phi, site_count)


def marginals(spec: ModelSpec, states: Optional[Iterable[NetworkState]] = None) -> Marginals:
    """DC-location probabilities and mean queue lengths over the enumerated space"""
    states = enumerate_states(spec) if states is None else list(states)
    distribution = product_form_distribution(spec, states)
    count = spec.site_count
    located = [0.0] * count
    queues = [0.0] * count
    dcs = [0.0] * count
    for state, p in distribution.items():
        for q in range(count):
            if state.occupancy[q]:
                located[q] += p
                dcs[q] += p * state.occupancy[q]
            queues[q] += p * state.tasks[q]

    covered = 1.0
    if spec.variant.open_tasks or spec.variant.open_dcs:
        xi = partition_function(spec)
        logs = np.array([log_weight(spec, s) for s in states])
        covered = float(math.exp(logsumexp(logs) - xi.log_value))
    return Marginals(dc_location=located, mean_queue=queues, mean_dcs=dcs, covered_mass=covered)
