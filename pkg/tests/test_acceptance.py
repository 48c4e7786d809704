"""End-to-end checks of the product-form results on the shipped configs."""
import json
import math
import statistics

import pytest

from dcjnet.commands.verify import REPORT_NAME, cmd_verify
from dcjnet.core.generator import TransitionKind, transitions
from dcjnet.core.simulate import empirical_distribution, merge_trajectories, run, snapshot_distribution
from dcjnet.core.stationary import (
    basic_model_partition, check_subcriticality, log_weight, partition_function, product_form_distribution,
    series_U,
)
from dcjnet.core.verify import align_distributions, check_detailed_balance, compare_with_oracle, total_variation
from dcjnet.commands.loader import initial_state
from dcjnet.models import enumerate_states, make_state

from conftest import VARIANTS, acceptance_config, golden_config, make_spec, perturb, spec_from

V2_CONFIGS = ["v2_phi_neg", "v2_phi_zero", "v2_phi_pos"]


@pytest.mark.parametrize("name", V2_CONFIGS)
def test_basic_model_detailed_balance(name):
    report = check_detailed_balance(spec_from(acceptance_config(name)))
    assert report.passed
    assert report.max_residual <= 1e-12


@pytest.mark.parametrize("name, phi", [("v2_phi_neg", -0.5), ("v2_phi_zero", 0.0)])
def test_basic_model_box_normalization(name, phi):
    spec = spec_from(acceptance_config(name))
    xi = partition_function(spec)
    box = math.fsum(math.exp(log_weight(spec, s)) for s in enumerate_states(spec))
    exact = basic_model_partition(1.0, 2.0, phi, 3)
    partial = lambda x: (1 - x ** 7) / (1 - x)
    loaded = 0.5 * math.exp(phi)
    assert box == pytest.approx(3 * partial(0.5) ** 2 * partial(loaded), rel=1e-12)
    assert xi.value == pytest.approx(exact, rel=1e-10)
    assert box < xi.value


@pytest.mark.parametrize("name", ["v7_four_sites", "v11_three_sites"])
def test_oracle_equivalence(name):
    comparison = compare_with_oracle(spec_from(acceptance_config(name)))
    assert comparison.max_abs_error <= 1e-10


@pytest.mark.parametrize("variant", VARIANTS)
def test_detailed_balance_suite(variant):
    report = check_detailed_balance(spec_from(golden_config(variant)))
    assert report.passed, report.worst
    assert report.checked > 0


@pytest.mark.parametrize("variant", VARIANTS)
def test_perturbed_jump_array_flips_verification(variant, out_dir):
    array = "beta" if variant == "V1" else "theta"
    spec = spec_from(perturb(golden_config(variant), array))
    assert cmd_verify(spec, out_dir) == 1
    report = json.loads((out_dir / REPORT_NAME).read_text())
    assert 0.05 <= report["balance"]["max_residual"] <= 0.2


@pytest.mark.parametrize("variant, array", [("V5", "epsilon"), ("V5", "tau"), ("V8", "tau"), ("V11", "epsilon")])
def test_perturbed_dc_arrays_flip_verification(variant, array, out_dir):
    spec = spec_from(perturb(golden_config(variant), array))
    assert cmd_verify(spec, out_dir) == 1
    report = json.loads((out_dir / REPORT_NAME).read_text())
    assert 0.05 <= report["balance"]["max_residual"] <= 0.2


def test_weights_independent_of_jump_arrays():
    data = golden_config("V2")
    scaled = json.loads(json.dumps(data))
    for name in ("beta", "theta", "tau"):
        scaled[name] = [[3 * v for v in row] for row in data[name]]
    spec, spec3 = spec_from(data), spec_from(scaled)
    for state in enumerate_states(spec):
        assert log_weight(spec, state) == log_weight(spec3, state)
        jumps = [t.rate for t in transitions(spec, state) if t.source_site is not None and t.target_site is not None]
        jumps3 = [t.rate for t in transitions(spec3, state) if t.source_site is not None and t.target_site is not None]
        assert jumps3 == pytest.approx([3 * r for r in jumps])


def test_subcriticality_gate():
    critical = make_spec(
        "V2", 3, gamma={"kind": "exp", "params": {"phi": math.log(3)}},
        beta=golden_config("V2")["beta"], truncation={"n_max": 4},
    )
    report = check_subcriticality(critical)
    assert not report.passed
    assert any("lambda*exp(phi)/mu" in m and ">= 1" in m for m in report.messages)
    calm = make_spec("V2", 3, gamma={"kind": "exp", "params": {"phi": 0.0}}, beta=golden_config("V2")["beta"])
    assert check_subcriticality(calm).passed
    geometric = series_U(make_spec("V1", 1), 0, (0,))
    assert geometric.value == pytest.approx(2.0)
    assert geometric.tail_bound <= 1e-12


@pytest.mark.parametrize("phi, sign", [(-0.3, 1), (0.3, -1)])
def test_dc_leap_monotone_in_queue(phi, sign):
    spec = make_spec(
        "V2", 2, gamma={"kind": "exp", "params": {"phi": phi}},
        beta=[[0, 1.0], [1.0, 0]], tau=[[0, 1.0], [1.0, 0]],
    )
    rates = [
        next(t.rate for t in transitions(spec, make_state((1, 0), (n, 0))) if t.kind is TransitionKind.DC_LEAP)
        for n in range(7)
    ]
    assert all(sign * (b - a) > 0 for a, b in zip(rates, rates[1:]))


@pytest.mark.slow
def test_simulation_converges_to_exact_law():
    spec = spec_from(golden_config("V11"))
    exact = product_form_distribution(spec, enumerate_states(spec))
    init = initial_state(spec)
    trajectories = [run(spec, init, max_events=1000000, replica=k, checkpoints=(10000, 100000)) for k in range(5)]

    def distance(distribution):
        return total_variation(*align_distributions(distribution.probabilities, exact))

    merged = merge_trajectories(trajectories)
    assert distance(empirical_distribution(merged)) < 0.02
    medians = [
        statistics.median(distance(snapshot_distribution(t.checkpoints[mark])) for t in trajectories)
        for mark in (10000, 100000)
    ]
    medians.append(statistics.median(distance(empirical_distribution(t)) for t in trajectories))
    assert medians[0] > medians[1] > medians[2]
