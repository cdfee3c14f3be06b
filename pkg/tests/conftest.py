import pytest

from polbsa.circuit import build_symmetric, build_symmetry_broken

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def broken():
    return build_symmetry_broken()


@pytest.fixture
def symmetric():
    return build_symmetric()


@pytest.fixture(params=["broken", "symmetric"])
def scheme(request):
    return {"broken": build_symmetry_broken, "symmetric": build_symmetric}[request.param]()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
