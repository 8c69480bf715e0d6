import pytest

from dsm_imaging.forward import AnalyticField, born_synthesize
from dsm_imaging.scene import default_scene

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ref_scene():
    return default_scene()


@pytest.fixture(scope="session")
def ref_data(ref_scene):
    return born_synthesize(ref_scene)


@pytest.fixture(scope="session")
def ref_source(ref_scene):
    return AnalyticField.for_scene(ref_scene)


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
