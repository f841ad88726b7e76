import os
from pathlib import Path

import pytest

from core import config as config_module
from core.config import (
    RuntimeSettings,
    _load_dotenv_if_exists,
    _parse_dotenv_value,
    load_runtime_settings,
    read_dotenv,
    resolve_threads,
)


def _point_dotenv_at(monkeypatch, tmp_path: Path):
    monkeypatch.setattr(config_module, "__file__", str(tmp_path / "core" / "config.py"))


def test_resolve_threads_prefers_cli_value(monkeypatch):
    monkeypatch.setenv("ORTHOSEIS_THREADS", "8")
    assert resolve_threads(3) == 3


def test_resolve_threads_falls_back_to_env(monkeypatch):
    monkeypatch.setenv("ORTHOSEIS_THREADS", "4")
    assert resolve_threads(None) == 4


def test_resolve_threads_defaults_to_one(monkeypatch):
    monkeypatch.delenv("ORTHOSEIS_THREADS", raising=False)
    assert resolve_threads(None) == 1


def test_resolve_threads_rejects_non_positive_cli():
    with pytest.raises(RuntimeError, match="--threads must be a positive integer"):
        resolve_threads(0)


def test_resolve_threads_rejects_bad_env(monkeypatch):
    monkeypatch.setenv("ORTHOSEIS_THREADS", "many")
    with pytest.raises(RuntimeError, match="ORTHOSEIS_THREADS"):
        resolve_threads(None)


def test_runtime_settings_parallel_flag():
    assert RuntimeSettings(threads=2, log_level="INFO").parallel is True
    assert RuntimeSettings(threads=1, log_level="INFO").parallel is False


def test_load_runtime_settings_rejects_unknown_log_level(monkeypatch, tmp_path: Path):
    _point_dotenv_at(monkeypatch, tmp_path)
    monkeypatch.setenv("ORTHOSEIS_LOG_LEVEL", "CHATTY")
    with pytest.raises(RuntimeError, match="ORTHOSEIS_LOG_LEVEL"):
        load_runtime_settings()


def test_load_runtime_settings_cli_log_level_wins(monkeypatch, tmp_path: Path):
    _point_dotenv_at(monkeypatch, tmp_path)
    monkeypatch.setenv("ORTHOSEIS_LOG_LEVEL", "WARNING")
    settings = load_runtime_settings(cli_threads=2, cli_log_level="debug")
    assert settings == RuntimeSettings(threads=2, log_level="DEBUG")


def test_parse_dotenv_value_unmatched_quote_raises():
    with pytest.raises(RuntimeError, match="unmatched quote"):
        _parse_dotenv_value('"abc', 1)


def test_read_dotenv_handles_export_quotes_and_comments(tmp_path: Path):
    env_file = tmp_path / ".env"
    env_file.write_text(
        "# threads for the laptop\n"
        "\n"
        "ORTHOSEIS_THREADS=4\n"
        "export ORTHOSEIS_LOG_LEVEL='debug'\n"
        "RUN_NOTE=\"keep # this\"\n"
        "RUN_TAG=wedge # trailing note\n"
        "EMPTY=\n",
        encoding="utf-8",
    )
    assert read_dotenv(env_file) == {
        "ORTHOSEIS_THREADS": "4",
        "ORTHOSEIS_LOG_LEVEL": "debug",
        "RUN_NOTE": "keep # this",
        "RUN_TAG": "wedge",
        "EMPTY": "",
    }


def test_read_dotenv_rejects_missing_key(tmp_path: Path):
    env_file = tmp_path / ".env"
    env_file.write_text("OK=1\n=2\n", encoding="utf-8")
    with pytest.raises(RuntimeError, match="line 2: missing key"):
        read_dotenv(env_file)


def test_dotenv_values_feed_runtime_settings(monkeypatch, tmp_path: Path):
    (tmp_path / ".env").write_text("ORTHOSEIS_THREADS=3\nORTHOSEIS_LOG_LEVEL=warning\n", encoding="utf-8")
    monkeypatch.delenv("ORTHOSEIS_THREADS", raising=False)
    monkeypatch.delenv("ORTHOSEIS_LOG_LEVEL", raising=False)
    _point_dotenv_at(monkeypatch, tmp_path)

    assert load_runtime_settings() == RuntimeSettings(threads=3, log_level="WARNING")
    assert os.environ["ORTHOSEIS_THREADS"] == "3"


def test_load_dotenv_if_exists_preserves_existing_env(monkeypatch, tmp_path: Path):
    (tmp_path / ".env").write_text("ORTHOSEIS_THREADS=9\n", encoding="utf-8")
    monkeypatch.setenv("ORTHOSEIS_THREADS", "2")
    _point_dotenv_at(monkeypatch, tmp_path)

    assert load_runtime_settings().threads == 2


def test_load_dotenv_if_exists_rejects_invalid_line(monkeypatch, tmp_path: Path):
    (tmp_path / ".env").write_text("NOT_VALID\n", encoding="utf-8")
    _point_dotenv_at(monkeypatch, tmp_path)
    with pytest.raises(RuntimeError, match="expected KEY=VALUE"):
        _load_dotenv_if_exists()


def test_load_runtime_settings_rejects_unknown_cli_log_level(monkeypatch, tmp_path: Path):
    _point_dotenv_at(monkeypatch, tmp_path)
    with pytest.raises(RuntimeError, match="--log-level"):
        load_runtime_settings(cli_log_level="loud")
