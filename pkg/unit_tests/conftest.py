from pathlib import Path
import os
import sys

import pytest


ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

os.environ.setdefault("ORTHOSEIS_THREADS", "1")
os.environ.setdefault("ORTHOSEIS_LOG_LEVEL", "INFO")


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="Run acceptance-scale tests.")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
