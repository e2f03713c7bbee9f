import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emurig import config as cfgmod
from emurig.cli import _builtin_config_text
from emurig.machine import build_machine
from emurig.registry import default_registry


def make_machine(name: str, step_budget: int | None = None):
    cfg = cfgmod.parse_config(_builtin_config_text(name))
    return build_machine(cfg, default_registry(), step_budget=step_budget)


@pytest.fixture
def tinyvn_machine():
    return make_machine("tinyvn")


@pytest.fixture
def ram_machine():
    return make_machine("ram")
