import pytest

from scalebf.filter3d import Dim3

_acceptance_results: dict[str, str] = {}


@pytest.fixture
def small_dims():
    return Dim3(5, 11, 13)


@pytest.fixture
def mid_dims():
    return Dim3(13, 17, 19)


@pytest.fixture
def keys():
    def make(n, prefix="key"):
        return [f"{prefix}:{i}".encode() for i in range(n)]
    return make


@pytest.fixture
def record_criterion():
    """Record a one-line verdict for the acceptance summary."""
    def record(name, passed, detail=""):
        _acceptance_results[name] = f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip()
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_results, key=lambda s: int(s.split(".")[0])):
        terminalreporter.write_line(_acceptance_results[name])
