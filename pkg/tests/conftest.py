import pytest
from hypothesis import HealthCheck, settings

from hscsearch.metapath import parse_metapath
from hscsearch.workbench.fixture import build_fixture_d2, build_fixture_fix1

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def fix1():
    return build_fixture_fix1()


@pytest.fixture
def d2():
    return build_fixture_d2()


@pytest.fixture
def mp():
    def parse(g, text):
        return parse_metapath(text, g.schema)

    return parse


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
