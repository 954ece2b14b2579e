from pathlib import Path

import pytest

from config import PipelineConfig, load_config
from utils.errors import ConfigError


def test_defaults():
    config = load_config(overrides={"synthetic_spec": "default"})
    assert (config.k, config.alpha, config.n_samples, config.seed) == (3, 0.05, 20_000, 0)
    assert config.train_fraction == 0.6
    assert config.measure == "ellipsoid"
    assert config.designs == ["cluster_dummies", "aggregate", "combined"]
    assert config.experiments == ["predict", "forecast"]
    assert config.severity is None


def test_designs_accept_a_comma_separated_string():
    config = PipelineConfig(synthetic_spec="default", designs="aggregate, combined,aggregate")
    assert config.designs == ["aggregate", "combined"]


@pytest.mark.parametrize(
    "overrides",
    [
        {},
        {"input_path": "accounts.csv", "synthetic_spec": "default"},
        {"synthetic_spec": "default", "alpha": 1.5},
        {"synthetic_spec": "default", "k": 1},
        {"synthetic_spec": "default", "n_samples": 10},
        {"synthetic_spec": "default", "measure": "manhattan"},
        {"synthetic_spec": "default", "designs": ""},
        {"synthetic_spec": "default", "h_severity_a": 2.0},
        {"synthetic_spec": "default", "unknown_key": 1},
    ],
)
def test_invalid_configurations(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_flags_override_the_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("SYNTHETIC_SPEC=default\nK=4\nALPHA=0.1\nSTRATIFY=true\n", encoding="utf-8")
    config = load_config(path, {"k": 5, "alpha": None})
    assert config.k == 5
    assert config.alpha == 0.1
    assert config.stratify is True


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.env", {"synthetic_spec": "default"})


def test_severity_pair():
    config = PipelineConfig(synthetic_spec="default", h_severity_a=2.0, h_severity_b=3.0)
    assert config.severity == (2.0, 3.0)


def test_manifest_view_is_host_independent(tmp_path):
    config = PipelineConfig(input_path=tmp_path / "data" / "accounts.csv", output_dir=tmp_path / "out", threads=7)
    values = config.manifest_dict()
    assert "output_dir" not in values
    assert "threads" not in values
    assert values["input_path"] == "accounts.csv"
    assert values["synthetic_spec"] is None
    assert PipelineConfig(input_path=Path("accounts.csv"), threads=1).manifest_dict() == values
