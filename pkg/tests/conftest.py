import copy
import json
from pathlib import Path

import pytest

from dcjnet.commands.loader import build_spec, load_model
from dcjnet.schemas.config import ModelConfig

ROOT = Path(__file__).resolve().parent.parent
GOLDEN_DIR = ROOT / "configs" / "golden"
ACCEPTANCE_DIR = ROOT / "configs" / "acceptance"
VARIANTS = [f"V{k}" for k in range(1, 13)]


def golden_path(variant: str) -> Path:
    return GOLDEN_DIR / f"{variant.lower()}.json"


def golden_config(variant: str) -> dict:
    return json.loads(golden_path(variant).read_text())


def acceptance_config(name: str) -> dict:
    return json.loads((ACCEPTANCE_DIR / f"{name}.json").read_text())


def spec_from(data: dict):
    """Build a spec from a plain config dict"""
    return build_spec(ModelConfig.model_validate(copy.deepcopy(data)))


def constant(value: float) -> dict:
    return {"kind": "constant", "params": {"value": value}}


def make_spec(variant: str, sites: int, **fields):
    """Spec with constant lambda=1, mu=2 unless overridden"""
    data = {"variant": variant, "sites": sites, "lambda": constant(1.0), "mu": constant(2.0)}
    data.update(fields)
    return spec_from(data)


def perturb(data: dict, array: str, factor: float = 1.1, entry=(0, 1)) -> dict:
    """Copy of a config with one base-matrix entry of `array` scaled"""
    data = copy.deepcopy(data)
    value = data[array]
    matrix = value if isinstance(value, list) else value["params"]["values"]
    k, l = entry
    matrix[k][l] *= factor
    return data


@pytest.fixture
def golden():
    """Loader for the validator-passing configs, one per variant"""
    def _load(variant: str):
        return load_model(golden_path(variant))
    return _load


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def single_thread(monkeypatch):
    monkeypatch.setenv("DCJ_THREADS", "1")
