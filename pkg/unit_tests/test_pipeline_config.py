import json

import pytest
from pydantic import ValidationError

from core.errors import ConfigError
from pipeline.config import RunConfig, config_help_epilog, config_keys, load_run_config


def test_defaults_are_consistent():
    cfg = load_run_config(None)
    assert tuple(cfg.dataset.patch_size) == tuple(cfg.network.input_size)
    assert cfg.train.loss_weights == (0.5, 0.5, 0.0)


def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"train": {"lr": 0.1}}))
    with pytest.raises(ValidationError, match="lr"):
        load_run_config(path)


def test_yaml_config_is_accepted(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("train:\n  epochs: 3\n  learning_rate: 0.001\nio:\n  export_images: false\n")
    cfg = load_run_config(path)
    assert (cfg.train.epochs, cfg.train.learning_rate, cfg.io.export_images) == (3, 0.001, False)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "absent.json")


def test_unparseable_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="Cannot parse"):
        load_run_config(path)


def test_config_must_be_a_mapping(tmp_path):
    path = tmp_path / "run.yml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_run_config(path)


def test_patch_size_must_match_network_input():
    with pytest.raises(ValidationError, match="must equal network.input_size"):
        RunConfig.model_validate({"dataset": {"patch_size": [16, 16]}, "network": {"input_size": [32, 32]}})


def test_root_seed_splits_deterministically():
    first = RunConfig().with_root_seed(42)
    second = RunConfig().with_root_seed(42)
    assert (first.dataset.seed, first.train.seed) == (second.dataset.seed, second.train.seed)
    assert first.dataset.seed != first.train.seed
    assert first.dataset.seed != RunConfig().with_root_seed(43).dataset.seed


def test_resolved_json_reloads_to_same_config(tmp_path):
    cfg = RunConfig().with_root_seed(7)
    path = tmp_path / "config.json"
    path.write_text(cfg.resolved_json())
    assert load_run_config(path) == cfg
    assert list(json.loads(cfg.resolved_json())) == sorted(json.loads(cfg.resolved_json()))


def test_config_keys_cover_nested_sections():
    keys = {key: default for key, default, _ in config_keys()}
    assert keys["train.learning_rate"] == "0.01"
    assert keys["dataset.wavelet.peak_frequency"] == "30.0"
    assert keys["train.ssim.window"] == "11"
    assert keys["baseline.chi"] == "null"
    assert keys["dataset.section_shape"] == "[64, 64]"


def test_help_epilog_lists_every_key():
    epilog = config_help_epilog()
    for key, _, _ in config_keys():
        assert f"  {key} = " in epilog
