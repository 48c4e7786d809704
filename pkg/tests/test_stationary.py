import math
import random

import numpy as np
import pytest
from scipy.special import logsumexp

from dcjnet.core.stationary import (
    basic_model_partition, basic_model_probability, check_subcriticality, jackson_probability, log_weight,
    marginals, partition_function, probability, product_form_distribution, series_C, series_L, series_U,
    sum_series, weight,
)
from dcjnet.errors import Diverged
from dcjnet.models import enumerate_states, make_state, occupancies, task_vectors

from conftest import constant, golden_config, make_spec, spec_from

POSITIVE_3 = [[0, 1, 2], [1, 0, 3], [2, 3, 0]]


def basic(sites: int, phi: float, **fields):
    return make_spec(
        "V2", sites, gamma={"kind": "exp", "params": {"phi": phi}},
        beta=[row[:sites] for row in POSITIVE_3[:sites]],
        **fields,
    )


def test_basic_model_probability_of_empty_network():
    spec = basic(2, 0.0)
    assert probability(spec, make_state((1, 0), (0, 0))) == pytest.approx(1 / 8, rel=1e-10)


def test_basic_model_without_gauge_is_uniform_over_dc_position():
    spec = basic(3, 0.0, truncation={"n_max": 3})
    for state in enumerate_states(spec)[::7]:
        expected = jackson_probability(1.0, 2.0, state.tasks) / 3
        assert probability(spec, state) == pytest.approx(expected, rel=1e-10)


def test_basic_model_closed_form():
    spec = spec_from(golden_config("V2"))
    assert partition_function(spec).value == pytest.approx(basic_model_partition(1.0, 2.0, -0.5, 3), rel=1e-10)
    for state in enumerate_states(spec)[::13]:
        assert probability(spec, state) == pytest.approx(basic_model_probability(1.0, 2.0, -0.5, state), rel=1e-10)


def test_general_single_dc_reduces_to_basic_model():
    spec = make_spec(
        "V3", 3, gamma={"kind": "exp", "params": {"phi": 0.3}},
        beta=POSITIVE_3, theta=POSITIVE_3, tau=POSITIVE_3, truncation={"n_max": 6},
    )
    states = random.Random(0).sample(enumerate_states(spec), 150)
    offsets = [log_weight(spec, s) - math.log(basic_model_probability(1.0, 2.0, 0.3, s)) for s in states]
    assert max(offsets) - min(offsets) < 1e-9
    assert partition_function(spec).value == pytest.approx(basic_model_partition(1.0, 2.0, 0.3, 3), rel=1e-8)


def test_jackson_network_matches_geometric_laws():
    spec = make_spec("V1", 2, truncation={"n_max": 3})
    for state in enumerate_states(spec):
        assert probability(spec, state) == pytest.approx(jackson_probability(1.0, 2.0, state.tasks), rel=1e-10)


def test_unit_gauge_closed_zero_range_is_uniform():
    spec = make_spec("V11", 3, M=1, N=2)
    logs = {log_weight(spec, s) for s in enumerate_states(spec)}
    assert logs == {0.0}
    assert partition_function(spec).value == pytest.approx(18)


def test_full_occupancy_leaves_one_configuration():
    spec = make_spec("V7", 3, M=3, N=2, gamma={"kind": "n_exp", "params": {"phi": [0.1, 0.2, 0.3]}})
    assert occupancies(spec) == [(1, 1, 1)]
    states = enumerate_states(spec)
    expected = logsumexp([log_weight(spec, s) for s in states])
    assert partition_function(spec).log_value == pytest.approx(expected)


def test_off_manifold_state_has_zero_weight():
    spec = spec_from(golden_config("V11"))
    state = make_state((1, 0, 0), (2, 0, 0))
    assert log_weight(spec, state) == -math.inf
    assert probability(spec, state) == 0.0


@pytest.mark.parametrize("variant", ["V4", "V7", "V8", "V11"])
def test_closed_spaces_normalize(variant):
    spec = spec_from(golden_config(variant))
    total = math.fsum(probability(spec, s) for s in enumerate_states(spec))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_weight_flags_validation():
    good = spec_from(golden_config("V5"))
    state = enumerate_states(good)[5]
    assert weight(good, state).verified
    data = golden_config("V5")
    data["tau"] = [[0, 1, 0], [2, 0, 1], [0, 1, 0]]
    assert not weight(spec_from(data), state).verified


def test_geometric_series():
    spec = make_spec("V1", 1)
    result = series_U(spec, 0, (0,))
    assert result.converged
    assert result.value == pytest.approx(2.0, abs=1e-11)
    assert result.tail_bound <= 1e-12


def test_loaded_series_equals_unloaded_without_gauge():
    spec = make_spec("V3", 2)
    assert series_L(spec, 0, (1, 0)).value == pytest.approx(series_U(spec, 1, (1, 0)).value)
    assert series_L(spec, 0, (1, 0)).value == pytest.approx(2.0, abs=1e-11)


def test_zero_range_series_uses_local_dc_count():
    spec = make_spec("V9", 2, M=2, gamma={"kind": "exp_over_n", "params": {"phi": 0.0}})
    # gam_bar(n) = 1 / (n-1)! for n >= 1
    expected = 1 + math.fsum(0.5 ** n / math.factorial(n - 1) ** 2 for n in range(1, 40))
    assert series_C(spec, 0, (2, 0)).value == pytest.approx(expected, rel=1e-12)


def test_supercritical_series_diverges():
    spec = make_spec("V1", 1, **{"lambda": constant(2.0)}, mu=constant(1.0))
    with pytest.raises(Diverged) as e:
        series_U(spec, 0, (0,))
    assert e.value.series == "U[0]"


def test_sum_series_stops_on_vanishing_terms():
    result = sum_series("finite", lambda n: 0.0 if n < 3 else -math.inf, tol=1e-12)
    assert result.value == pytest.approx(3.0)
    assert result.tail_bound == 0.0


def test_sum_series_reports_unconverged():
    # ratios creep towards 1 so the tail bound never certifies
    result = sum_series("slow", lambda n: -2 * math.log(n + 1), tol=1e-12, max_terms=500)
    assert not result.converged
    assert result.tail_bound == math.inf


def test_sum_series_with_ratio_bound_certifies_rising_ratios():
    # sum 2^-n * (1 + 1/(n+1)) = 2 + 2 ln 2, with ratios rising towards 1/2
    log_term = lambda n: -n * math.log(2) + math.log1p(1 / (n + 1))
    plain = sum_series("rising", log_term, tol=1e-12, max_terms=2000)
    assert not plain.converged
    bounded = sum_series("rising", log_term, tol=1e-12, max_terms=2000, log_ratio_bound=lambda n: -math.log(2))
    assert bounded.converged
    assert bounded.value == pytest.approx(2 + 2 * math.log(2), abs=1e-11)


def test_subcriticality_trivial_for_closed_variants():
    report = check_subcriticality(spec_from(golden_config("V11")))
    assert report.passed
    assert report.messages == ["finite state space: no series required"]


def test_open_zero_range_partition_function():
    spec = spec_from(golden_config("V10"))
    phis = (-0.2, 0.0, -0.5)
    rhos = (0.5 / 1.5, 0.4 / 1.5, 0.6 / 1.5)
    expected = 1.0
    for phi, rho in zip(phis, rhos):
        site = 0.0
        for n in range(80):
            gam_bar = 1.0 if n == 0 else math.exp(phi * (n - 1)) / math.factorial(n - 1)
            site += 0.5 ** n / (1 - rho * gam_bar)
        expected *= site
    assert partition_function(spec).value == pytest.approx(expected, rel=1e-10)


def test_closed_task_open_zero_range_partition_function():
    spec = spec_from(golden_config("V12"))
    phis = (0.3, -0.2, 0.0)
    rhos = (0.5, 0.4, 0.3)

    def gam_bar(q, n):
        # gamma(0) = 1 and gamma(m) = m * exp(phi) for m >= 1
        return math.prod(1.0 if m == 0 else m * math.exp(phis[q]) for m in range(n))
    expected = math.fsum(
        math.prod(1 / (1 - rhos[q] * gam_bar(q, n[q])) for q in range(3)) for n in task_vectors(spec)
    )
    assert partition_function(spec).value == pytest.approx(expected, rel=1e-12)


def test_open_zero_range_diverges_when_dc_inflow_dominates():
    spec = make_spec("V12", 2, N=1, xi=[3, 1], eta=[1, 1], truncation={"y_max": 2})
    with pytest.raises(Diverged):
        partition_function(spec)
    assert not check_subcriticality(spec).passed


def test_product_form_distribution_normalizes():
    spec = spec_from(golden_config("V6"))
    distribution = product_form_distribution(spec, enumerate_states(spec))
    assert math.fsum(distribution.values()) == pytest.approx(1.0)


def test_marginals_of_single_dc_closed_network():
    spec = spec_from(golden_config("V4"))
    result = marginals(spec)
    assert sum(result.dc_location) == pytest.approx(1.0)
    assert sum(result.mean_queue) == pytest.approx(3.0)
    assert result.covered_mass == 1.0


def test_marginals_follow_gauge_sign():
    # a positive phi lengthens the queue wherever the DC sits
    attract = marginals(basic(2, 0.5, truncation={"n_max": 8}))
    repel = marginals(basic(2, -0.5, truncation={"n_max": 8}))
    assert attract.covered_mass < 1.0
    assert np.isclose(sum(attract.dc_location), 1.0)
    assert attract.dc_location[0] == pytest.approx(0.5)
    assert attract.mean_queue[0] > repel.mean_queue[0]
