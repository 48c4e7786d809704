import json

import pytest

from dcjnet.commands.loader import build_spec, dump_model, initial_state, load_model, parse_config
from dcjnet.commands.report import CHART_NAME, REPORT_NAME, build_report, cmd_report
from dcjnet.commands.simulate import (
    MERGED_NAME, SUMMARY_NAME, TV_NAME, checkpoint_marks, cmd_simulate, replica_file,
)
from dcjnet.commands.stationary import CSV_NAME, cmd_stationary
from dcjnet.commands.validate import REPORT_NAME as VALIDATE_REPORT, cmd_validate
from dcjnet.commands.verify import REPORT_NAME as VERIFY_REPORT, cmd_verify, verify_model
from dcjnet.errors import EXIT_FAILURE, EXIT_INPUT_ERROR, EXIT_OK, BadParameter, ParseError, SchemaError
from dcjnet.main import main
from dcjnet.models import make_state, settings
from dcjnet.utils.io import read_comments, read_csv

from conftest import ACCEPTANCE_DIR, acceptance_config, golden_config, golden_path, perturb, spec_from

MINIMAL = """{
  "variant": "V1",
  "sites": 2,
  "lambda": {"kind": "constant", "params": {"value": 1.0}},
  "mu": {"kind": "constant", "params": {"value": 2.0}},
  "truncation": {"n_max": 3}
}
"""


def write_config(tmp_path, data, name="model.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data, indent=2))
    return path


def load_json(path):
    return json.loads(path.read_text())


# --- loading -----------------------------------------------------------------

def test_load_minimal_config(tmp_path):
    spec = load_model(write_config(tmp_path, MINIMAL))
    assert spec.site_count == 2
    assert spec.truncation.n_max == 3
    assert spec.graph.labels == ("0", "1")


def test_missing_task_count(tmp_path):
    data = golden_config("V4")
    del data["N"]
    with pytest.raises(SchemaError) as e:
        load_model(write_config(tmp_path, data))
    assert e.value.field == "N"
    assert e.value.status_code == EXIT_INPUT_ERROR


def test_zero_service_rate_rejected(tmp_path):
    text = MINIMAL.replace('"value": 2.0', '"value": 0')
    with pytest.raises(BadParameter) as e:
        load_model(write_config(tmp_path, text))
    assert e.value.field == "mu.params.value"
    assert "service positivity" in e.value.detail
    assert e.value.status_code == EXIT_INPUT_ERROR


def test_non_positive_xi_rejected():
    data = golden_config("V6")
    data["xi"] = [1.0, 0.0, 0.8]
    with pytest.raises(BadParameter) as e:
        spec_from(data)
    assert e.value.field == "xi"


def test_bad_json_reports_line(tmp_path):
    text = MINIMAL.replace('"sites": 2,', '"sites": 2')
    with pytest.raises(ParseError) as e:
        load_model(write_config(tmp_path, text))
    assert e.value.line == 4


def test_unknown_field_rejected_with_location(tmp_path):
    text = MINIMAL.replace('"sites": 2,', '"sites": 2,\n  "gravity": 9.8,')
    with pytest.raises(SchemaError) as e:
        load_model(write_config(tmp_path, text))
    assert e.value.field == "gravity"
    assert e.value.line == 4


def test_missing_config_file(tmp_path):
    with pytest.raises(ParseError):
        load_model(tmp_path / "absent.json")


def test_overrides(tmp_path):
    spec = load_model(write_config(tmp_path, MINIMAL), {"seed": 7, "tol": 1e-9, "n_max": 5, "y_max": None})
    assert spec.seed == 7
    assert spec.truncation.n_max == 5
    assert spec.tolerances.validation == 1e-9
    assert spec.tolerances.balance == 1e-9


def test_dump_model_round_trip():
    spec = load_model(golden_path("V7"))
    text = dump_model(spec)
    again = build_spec(parse_config(text))
    assert dump_model(again) == text
    assert json.loads(text)["lambda"]["kind"] == "constant"


def test_initial_state_defaults():
    assert initial_state(spec_from(golden_config("V7"))) == make_state((1, 1, 0), (3, 0, 0))
    assert initial_state(spec_from(golden_config("V6"))) == make_state((0, 0, 0), (0, 0, 0))
    data = golden_config("V11")
    data["initial_state"] = {"y": [0, 2, 0], "n": [1, 1, 0]}
    assert initial_state(spec_from(data)) == make_state((0, 2, 0), (1, 1, 0))


# --- validate ------------------------------------------------------------------

def test_validate_passes_on_golden(out_dir):
    assert cmd_validate(load_model(golden_path("V5")), out_dir) == EXIT_OK
    report = load_json(out_dir / VALIDATE_REPORT)
    assert report["passed"]
    assert report["header"]["seed"] == 15


def test_validate_flags_asymmetric_leaps(out_dir):
    spec = spec_from(perturb(golden_config("V5"), "tau"))
    assert cmd_validate(spec, out_dir) == EXIT_FAILURE
    report = load_json(out_dir / VALIDATE_REPORT)
    failed = [c["condition"] for c in report["conditions"] if not c["passed"]]
    assert failed == ["tau-balance"]


def test_validate_flags_supercritical_gauge(out_dir):
    spec = spec_from(acceptance_config("v2_phi_pos"))
    assert cmd_validate(spec, out_dir) == EXIT_FAILURE
    report = load_json(out_dir / VALIDATE_REPORT)
    assert all(c["passed"] for c in report["conditions"])
    assert not report["subcriticality"]["passed"]


# --- stationary ----------------------------------------------------------------

def test_stationary_table_of_closed_network(out_dir):
    assert cmd_stationary(load_model(golden_path("V11")), out_dir) == EXIT_OK
    frame = read_csv(out_dir / CSV_NAME)
    assert list(frame.columns) == ["state", "log_weight", "probability"]
    assert frame["probability"].sum() == pytest.approx(1.0, abs=1e-12)
    comments = read_comments(out_dir / CSV_NAME)
    assert comments["variant"] == "V11"
    assert comments["seed"] == "21"
    assert len(comments["config_hash"]) == 16


def test_stationary_box_mass_of_open_network(out_dir):
    assert cmd_stationary(spec_from(golden_config("V2")), out_dir) == EXIT_OK
    frame = read_csv(out_dir / CSV_NAME)
    box_mass = float(read_comments(out_dir / CSV_NAME)["box_mass"])
    assert frame["probability"].sum() == pytest.approx(box_mass)
    assert 0.9 < box_mass < 1.0


def test_stationary_refuses_divergent_model(out_dir):
    assert cmd_stationary(spec_from(acceptance_config("v2_phi_pos")), out_dir) == EXIT_FAILURE
    assert not (out_dir / CSV_NAME).exists()


# --- verify --------------------------------------------------------------------

def test_verify_passes_on_acceptance_config(out_dir, capsys):
    assert cmd_verify(spec_from(acceptance_config("v7_four_sites")), out_dir) == EXIT_OK
    printed = capsys.readouterr().out
    assert "detailed balance" in printed
    assert "oracle (dense-solve)" in printed
    assert load_json(out_dir / VERIFY_REPORT)["passed"]


def test_verify_names_worst_offender(out_dir, capsys):
    spec = spec_from(perturb(golden_config("V11"), "theta"))
    assert cmd_verify(spec, out_dir) == EXIT_FAILURE
    assert "worst offender" in capsys.readouterr().out


def test_verify_reports_missing_reverse(out_dir, capsys):
    data = json.loads(MINIMAL)
    data["beta"] = [[0, 1.0], [0, 0]]
    assert cmd_verify(spec_from(data), out_dir) == EXIT_FAILURE
    assert capsys.readouterr().out.startswith("FAIL:")
    assert load_json(out_dir / VERIFY_REPORT)["failure"]


def test_verify_skips_oracle_over_budget(out_dir, capsys, monkeypatch):
    monkeypatch.setattr(settings, "ORACLE_BUDGET", 10)
    assert cmd_verify(spec_from(golden_config("V11")), out_dir) == EXIT_OK
    assert "oracle skipped" in capsys.readouterr().out
    result = verify_model(spec_from(golden_config("V11")), oracle_budget=1000)
    assert result.oracle is not None and result.oracle.passed


def test_verify_stops_before_sweep_over_state_budget(out_dir, capsys, monkeypatch):
    monkeypatch.setattr(settings, "STATE_BUDGET", 10)
    assert cmd_verify(spec_from(acceptance_config("v7_four_sites")), out_dir) == EXIT_FAILURE
    printed = capsys.readouterr().out
    assert printed.startswith("FAIL: detailed balance skipped")
    assert "DCJ_STATE_BUDGET" in printed
    report = load_json(out_dir / VERIFY_REPORT)
    assert not report["passed"]
    assert report["balance"] is None


def test_verify_reports_reducible_chain():
    data = golden_config("V4")
    del data["tau"]
    result = verify_model(spec_from(data))
    assert result.balance.passed
    assert "strongly connected" in result.failure
    assert not result.passed


# --- simulate ------------------------------------------------------------------

def test_checkpoint_marks():
    assert checkpoint_marks(2000) == [100, 1000]
    assert checkpoint_marks(100) == []
    assert checkpoint_marks(None) == []


def test_simulate_writes_outputs(out_dir, single_thread):
    spec = load_model(golden_path("V11"))
    assert cmd_simulate(spec, out_dir, max_events=2000, replicas=2) == EXIT_OK
    for name in (replica_file(0), replica_file(1), MERGED_NAME, TV_NAME, SUMMARY_NAME):
        assert (out_dir / name).exists()
    merged = read_csv(out_dir / MERGED_NAME)
    assert merged["probability"].sum() == pytest.approx(1.0)
    tv = read_csv(out_dir / TV_NAME)
    assert list(tv.columns) == ["events", "replica", "total_variation"]
    assert set(tv["replica"].astype(str)) == {"0", "1", "merged"}
    summary = load_json(out_dir / SUMMARY_NAME)
    assert summary["exact_reference"]
    assert [r["events"] for r in summary["replicas"]] == [2000, 2000]
    assert 0 <= summary["merged_total_variation"] <= 1


def test_simulate_is_deterministic(tmp_path, single_thread):
    spec = load_model(golden_path("V9"))
    first, second = tmp_path / "a", tmp_path / "b"
    cmd_simulate(spec, first, max_events=1500, replicas=2, seed=42)
    cmd_simulate(spec, second, max_events=1500, replicas=2, seed=42)
    assert (first / MERGED_NAME).read_text() == (second / MERGED_NAME).read_text()
    assert (first / TV_NAME).read_text() == (second / TV_NAME).read_text()


def test_parallel_replicas_match_sequential(tmp_path, monkeypatch):
    spec = load_model(golden_path("V11"))
    monkeypatch.setenv("DCJ_THREADS", "1")
    cmd_simulate(spec, tmp_path / "seq", max_events=1000, replicas=3)
    monkeypatch.setenv("DCJ_THREADS", "3")
    cmd_simulate(spec, tmp_path / "par", max_events=1000, replicas=3)
    for name in (replica_file(2), MERGED_NAME):
        assert (tmp_path / "seq" / name).read_text() == (tmp_path / "par" / name).read_text()


def test_simulate_zero_budget(out_dir, single_thread):
    spec = load_model(golden_path("V11"))
    assert cmd_simulate(spec, out_dir, max_events=0) == EXIT_OK
    summary = load_json(out_dir / SUMMARY_NAME)
    assert summary["replicas"][0]["events"] == 0
    assert not summary["exact_reference"]
    assert not (out_dir / TV_NAME).exists()


# --- report --------------------------------------------------------------------

def test_report_after_simulation(out_dir, single_thread):
    spec = load_model(golden_path("V11"))
    cmd_simulate(spec, out_dir, max_events=2000)
    assert cmd_report(spec, out_dir) == EXIT_OK
    report = load_json(out_dir / REPORT_NAME)
    assert report["passed"]
    assert report["marginals"]["covered_mass"] == 1.0
    assert (out_dir / CHART_NAME).exists()


def test_report_on_supercritical_model():
    report = build_report(spec_from(acceptance_config("v2_phi_pos")))
    assert not report.passed
    assert "partition function skipped: weight series diverge" in report.notices
    assert report.balance is not None and report.balance.passed


# --- command line --------------------------------------------------------------

def test_main_validate_and_stationary(tmp_path):
    out = tmp_path / "out"
    assert main(["validate", "--config", str(golden_path("V1")), "--out", str(out)]) == EXIT_OK
    assert main(["stationary", "--config", str(golden_path("V1")), "--out", str(out), "--nmax", "2"]) == EXIT_OK
    assert len(read_csv(out / CSV_NAME)) == 27


def test_main_exit_codes(tmp_path):
    out = str(tmp_path / "out")
    v2_pos = str(ACCEPTANCE_DIR / "v2_phi_pos.json")
    assert main(["stationary", "--config", v2_pos, "--out", out]) == EXIT_FAILURE
    assert main(["stationary", "--config", str(tmp_path / "absent.json"), "--out", out]) == EXIT_INPUT_ERROR
    assert main(["simulate", "--config", str(golden_path("V11")), "--out", out]) == EXIT_INPUT_ERROR
    assert main(["simulate", "--config", str(golden_path("V11")), "--out", out, "--events", "-5"]) == EXIT_INPUT_ERROR
    with pytest.raises(SystemExit) as e:
        main(["validate", "--config", str(golden_path("V1")), "--seed", "-1"])
    assert e.value.code == EXIT_INPUT_ERROR


def test_main_validate_on_large_box(tmp_path):
    data = {
        "variant": "V3",
        "sites": 2,
        "lambda": {"kind": "constant", "params": {"value": 6.0}},
        "mu": {"kind": "constant", "params": {"value": 1.0}},
        "beta": [[0, 1.0], [1.0, 0]],
        "theta": [[0, 1.0], [1.0, 0]],
        "tau": [[0, 1.0], [1.0, 0]],
        "truncation": {"n_max": 250},
    }
    out = tmp_path / "out"
    # symmetric arrays pass; the task series diverge
    assert main(["validate", "--config", str(write_config(tmp_path, data)), "--out", str(out)]) == EXIT_FAILURE
    report = load_json(out / VALIDATE_REPORT)
    tau = next(c for c in report["conditions"] if c["condition"] == "tau-balance")
    assert tau["passed"]
    assert tau["checked"] == 2 * 251 ** 2
    assert not report["subcriticality"]["passed"]


def test_main_schema(capsys):
    assert main(["schema"]) == EXIT_OK
    schema = json.loads(capsys.readouterr().out)
    assert "lambda" in schema["properties"]
    assert "variant" in schema["required"]
