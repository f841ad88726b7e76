"""Process-level settings: worker threads and log level.

Sources in priority order: CLI flag, environment, optional ``.env`` at the
repo root (never overrides variables already set), built-in default.
"""
from dataclasses import dataclass
import logging
import os
from pathlib import Path
import re

THREADS_ENV = "ORTHOSEIS_THREADS"
LOG_LEVEL_ENV = "ORTHOSEIS_LOG_LEVEL"

_DOTENV_LINE = re.compile(r"^(?:export\s+)?(?P<key>[^=]*)=(?P<value>.*)$")


def _parse_dotenv_value(raw: str, line_number: int) -> str:
    """Strip one pair of matching quotes, or a trailing `` # comment`` on unquoted values."""
    text = raw.strip()
    if text[:1] in ("'", '"'):
        if len(text) < 2 or not text.endswith(text[0]):
            raise RuntimeError(f"Invalid .env line {line_number}: unmatched quote")
        return text[1:-1]
    return text.partition(" #")[0].rstrip()


def read_dotenv(path: Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        match = _DOTENV_LINE.match(line)
        if match is None:
            raise RuntimeError(f"Invalid .env line {line_number}: expected KEY=VALUE")
        key = match["key"].strip()
        if not key:
            raise RuntimeError(f"Invalid .env line {line_number}: missing key")
        entries[key] = _parse_dotenv_value(match["value"], line_number)
    return entries


def _load_dotenv_if_exists() -> None:
    env_path = Path(__file__).resolve().parent.parent / ".env"
    if env_path.exists():
        for key, value in read_dotenv(env_path).items():
            os.environ.setdefault(key, value)


def _positive_int_env(name: str) -> int | None:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return None
    try:
        parsed = int(value.strip())
    except ValueError:
        raise RuntimeError(f"Environment variable {name} must be a positive integer, got: {value!r}") from None
    if parsed < 1:
        raise RuntimeError(f"Environment variable {name} must be a positive integer, got: {parsed}")
    return parsed


def _check_log_level(value: str, source: str) -> str:
    value = value.strip().upper()
    if not isinstance(logging.getLevelName(value), int):
        raise RuntimeError(f"{source} must be a logging level name, got: {value!r}")
    return value


def _log_level_env(name: str) -> str:
    return _check_log_level(os.getenv(name) or "INFO", f"Environment variable {name}")


def resolve_threads(cli_value: int | None) -> int:
    """--threads wins, then ORTHOSEIS_THREADS, then 1."""
    if cli_value is not None:
        if cli_value < 1:
            raise RuntimeError(f"--threads must be a positive integer, got: {cli_value}")
        return cli_value
    return _positive_int_env(THREADS_ENV) or 1


@dataclass(frozen=True)
class RuntimeSettings:
    threads: int
    log_level: str

    @property
    def parallel(self) -> bool:
        return self.threads > 1


def load_runtime_settings(cli_threads: int | None = None, cli_log_level: str | None = None) -> RuntimeSettings:
    _load_dotenv_if_exists()
    log_level = _check_log_level(cli_log_level, "--log-level") if cli_log_level else _log_level_env(LOG_LEVEL_ENV)
    return RuntimeSettings(threads=resolve_threads(cli_threads), log_level=log_level)
