import pytest

_OUTCOMES: dict[int, list[bool]] = {}
_DETAILS: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    _OUTCOMES.setdefault(marker.args[0], []).append(call.excinfo is None)


@pytest.fixture
def note(request):
    """Attach a one-line detail to the criterion of the requesting test."""
    marker = request.node.get_closest_marker("criterion")

    def add(text: str) -> None:
        if marker is not None:
            _DETAILS.setdefault(marker.args[0], []).append(text)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_OUTCOMES):
        status = "PASS" if all(_OUTCOMES[k]) else "FAIL"
        detail = "; ".join(_DETAILS.get(k, []))
        terminalreporter.write_line(f"criterion {k:2d}: {status}" + (f"  ({detail})" if detail else ""))
