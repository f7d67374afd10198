import pytest
from hypothesis import HealthCheck, settings

from support import load_named

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def scratch(tmp_path_factory):
    return tmp_path_factory.mktemp("datasets")


@pytest.fixture(scope="session")
def dataset(scratch):
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_named(name, scratch)
        return cache[name]

    return get


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def verdict():
    """Record one acceptance line; the criterion still fails through its assertion."""

    def record(number, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2} {title}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
