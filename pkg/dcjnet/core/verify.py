import logging
import math
from typing import Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.sparse.linalg import spsolve

from dcjnet.errors import BudgetExceeded, DomainMismatch, MissingReverse, Reducible
from dcjnet.models import settings
from dcjnet.models.spec import ModelSpec, check_admissible, enumerate_states, in_box
from dcjnet.models.state import NetworkState, format_state
from dcjnet.core.generator import TransitionSet, exact_transitions
from dcjnet.core.rates import log_relative_error
from dcjnet.core.stationary import log_weight, product_form_distribution
from dcjnet.schemas.reports import BalanceOffender, BalanceReport, IrreducibilityVerdict, OracleComparison

logger = logging.getLogger(__name__)

DENSE_LIMIT = 3000
POWER_MAX_ITERATIONS = 200000
POWER_TOLERANCE = 1e-15


class OracleResult(NamedTuple):
    states: List[NetworkState]
    pi: np.ndarray
    method: str
    residual_norm: float

    def as_dict(self) -> Dict[NetworkState, float]:
        return dict(zip(self.states, self.pi.tolist()))


def check_detailed_balance(
    spec: ModelSpec,
    states: Optional[Iterable[NetworkState]] = None,
    tol: Optional[float] = None,
) -> BalanceReport:
    """Check w(s) r(s->s') = w(s') r(s'->s) for every transition with both ends inside the box"""
    tol = spec.tolerances.balance if tol is None else tol
    states = enumerate_states(spec) if states is None else list(states)
    report = BalanceReport(tolerance=tol)
    outgoing: Dict[NetworkState, TransitionSet] = {}
    weights: Dict[NetworkState, float] = {}

    def transitions_of(state: NetworkState) -> TransitionSet:
        if state not in outgoing:
            outgoing[state] = exact_transitions(spec, state)
        return outgoing[state]

    def weight_of(state: NetworkState) -> float:
        if state not in weights:
            weights[state] = log_weight(spec, state)
        return weights[state]

    for state in states:
        check_admissible(spec, state)
        if not in_box(spec, state):
            continue
        w_state = weight_of(state)
        for t in transitions_of(state):
            if not in_box(spec, t.target):
                report.skipped_boundary += 1
                continue
            reverse = sum(r.rate for r in transitions_of(t.target) if r.target == state)
            w_target = weight_of(t.target)
            if reverse == 0:
                if w_state == -math.inf:
                    report.skipped_null += 1
                    continue
                raise MissingReverse(
                    f"{t.kind.value} {format_state(state)} -> {format_state(t.target)} has rate {t.rate:.6g} "
                    f"but no reverse transition"
                )
            if w_state == -math.inf and w_target == -math.inf:
                report.skipped_null += 1
                continue
            lhs = w_state + math.log(t.rate)
            rhs = w_target + math.log(reverse)
            residual = log_relative_error(lhs, rhs)
            report.checked += 1
            if residual > report.max_residual or report.worst is None:
                report.max_residual = max(report.max_residual, residual)
                report.worst = BalanceOffender(
                    state=format_state(state), target=format_state(t.target), kind=t.kind.value, lhs=lhs, rhs=rhs,
                )

    logger.info(
        f"Detailed balance: {report.checked} transitions checked, {report.skipped_boundary} clipped, "
        f"max residual {report.max_residual:.3e}"
    )
    return report


def _generator_matrix(spec: ModelSpec, states: Sequence[NetworkState]) -> sp.csr_matrix:
    """Generator of the truncated-reflecting chain restricted to `states`"""
    index = {s: i for i, s in enumerate(states)}
    rows, cols, values = [], [], []
    for i, state in enumerate(states):
        for t in exact_transitions(spec, state):
            j = index.get(t.target)
            if j is None:
                continue
            rows.append(i)
            cols.append(j)
            values.append(t.rate)
    size = len(states)
    Q = sp.csr_matrix((values, (rows, cols)), shape=(size, size))
    out_rates = np.asarray(Q.sum(axis=1)).ravel()
    return (Q - sp.diags(out_rates)).tocsr()


def _witness(Q: sp.csr_matrix, states: Sequence[NetworkState]) -> Tuple[NetworkState, NetworkState]:
    """A source and a state it cannot reach"""
    adjacency = (Q - sp.diags(Q.diagonal())).tocsr()
    adjacency.eliminate_zeros()
    reached = set(breadth_first_order(adjacency, 0, directed=True, return_predecessors=False).tolist())
    for j in range(len(states)):
        if j not in reached:
            return states[0], states[j]
    # everything is reachable from the first state, so some state cannot reach back
    back = set(breadth_first_order(adjacency.T.tocsr(), 0, directed=True, return_predecessors=False).tolist())
    for j in range(len(states)):
        if j not in back:
            return states[j], states[0]
    return states[0], states[0]


def _irreducibility(Q: sp.csr_matrix, states: Sequence[NetworkState]) -> IrreducibilityVerdict:
    count, _ = connected_components(Q, directed=True, connection="strong")
    verdict = IrreducibilityVerdict(irreducible=count == 1, state_count=len(states), component_count=count)
    if count > 1:
        source, target = _witness(Q, states)
        verdict.source = format_state(source)
        verdict.unreachable_target = format_state(target)
    return verdict


def check_irreducibility(spec: ModelSpec, budget: Optional[int] = None) -> IrreducibilityVerdict:
    """Strong connectivity of the truncated transition graph over the whole enumerated space"""
    states = enumerate_states(spec, budget=budget)
    verdict = _irreducibility(_generator_matrix(spec, states), states)
    logger.info(f"Irreducibility: {verdict.component_count} strongly connected component(s) over {len(states)} states")
    return verdict


def _power_iteration(Q: sp.csr_matrix) -> np.ndarray:
    """Stationary vector of the uniformized chain P = I + Q / (1.01 max rate)"""
    size = Q.shape[0]
    uniform = 1.01 * float(np.max(-Q.diagonal()))
    P = (sp.identity(size, format="csr") + Q / uniform).T.tocsr()
    pi = np.full(size, 1.0 / size)
    for _ in range(POWER_MAX_ITERATIONS):
        nxt = P @ pi
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < POWER_TOLERANCE:
            return nxt
        pi = nxt
    logger.warning(f"Power iteration stopped after {POWER_MAX_ITERATIONS} iterations")
    return pi


def _residual_norm(Q: sp.csr_matrix, pi: np.ndarray) -> float:
    return float(np.max(np.abs(Q.T @ pi)))


def oracle_stationary(spec: ModelSpec, budget: Optional[int] = None) -> OracleResult:
    """Solve pi Q = 0, sum(pi) = 1 on the enumerated (truncated-reflecting) space"""
    budget = settings.ORACLE_BUDGET if budget is None else budget
    try:
        states = enumerate_states(spec, budget=budget)
    except BudgetExceeded as e:
        raise BudgetExceeded(f"oracle skipped: {e.detail}")
    Q = _generator_matrix(spec, states)
    verdict = _irreducibility(Q, states)
    if not verdict.irreducible:
        raise Reducible(
            f"transition graph has {verdict.component_count} strongly connected components; "
            f"{verdict.unreachable_target} is unreachable from {verdict.source}"
        )

    size = len(states)
    scale = float(np.max(np.abs(Q.data))) if Q.nnz else 1.0
    A = Q.T.tolil()
    A[size - 1, :] = np.ones(size)
    b = np.zeros(size)
    b[size - 1] = 1.0
    method = "dense-solve" if size <= DENSE_LIMIT else "sparse-solve"
    try:
        if size <= DENSE_LIMIT:
            pi = np.linalg.solve(A.toarray(), b)
        else:
            pi = spsolve(A.tocsc(), b)
        ok = np.all(np.isfinite(pi)) and pi.min() >= -1e-12 and _residual_norm(Q, pi) <= 1e-10 * scale
    except np.linalg.LinAlgError:
        ok = False
    if not ok:
        logger.warning("Linear solve ill-conditioned, falling back to power iteration")
        pi = _power_iteration(Q)
        method = "power-iteration"
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    residual = _residual_norm(Q, pi)
    logger.info(f"Oracle ({method}) over {size} states, residual {residual:.3e}")
    return OracleResult(states, pi, method, residual)


def align_distributions(
    p: Mapping[Hashable, float], q: Mapping[Hashable, float]
) -> Tuple[Dict[Hashable, float], Dict[Hashable, float]]:
    """Extend both distributions to the union of their supports with zeros"""
    keys = list(dict.fromkeys(list(p) + list(q)))
    return {k: p.get(k, 0.0) for k in keys}, {k: q.get(k, 0.0) for k in keys}


def total_variation(
    p: Union[Mapping[Hashable, float], Sequence[float], np.ndarray],
    q: Union[Mapping[Hashable, float], Sequence[float], np.ndarray],
) -> float:
    """Half the L1 distance between two distributions on a common index set"""
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        if not (isinstance(p, Mapping) and isinstance(q, Mapping)):
            raise DomainMismatch("cannot compare a mapping with a sequence")
        if set(p) != set(q):
            raise DomainMismatch(f"index sets differ in {len(set(p) ^ set(q))} entries")
        return 0.5 * math.fsum(abs(p[k] - q[k]) for k in p)
    a = np.asarray(p, dtype=float)
    b = np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise DomainMismatch(f"distribution shapes differ: {a.shape} vs {b.shape}")
    return float(0.5 * np.abs(a - b).sum())


def compare_with_oracle(spec: ModelSpec, budget: Optional[int] = None) -> OracleComparison:
    """Oracle solution against the product form renormalized over the same space"""
    oracle = oracle_stationary(spec, budget=budget)
    exact = product_form_distribution(spec, oracle.states)
    product = np.array([exact[s] for s in oracle.states])
    return OracleComparison(
        state_count=len(oracle.states),
        method=oracle.method,
        max_abs_error=float(np.max(np.abs(product - oracle.pi))),
        total_variation=total_variation(product, oracle.pi),
        residual_norm=oracle.residual_norm,
        tolerance=spec.tolerances.oracle,
    )
