import sys

import pytest

from iopsim.geometry import LayerStack
from iopsim.materials import MaterialDb


@pytest.fixture(scope="session")
def db():
    return MaterialDb.presets()


@pytest.fixture(scope="session")
def stack(db):
    return LayerStack.from_db(db, 2e-3)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
