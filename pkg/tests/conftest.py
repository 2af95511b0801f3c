import pytest

from qnetsim.kernel import HAVE_COMPILED, make_timeline

BACKENDS = ["python"] + (["cython"] if HAVE_COMPILED else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def timeline(backend):
    return make_timeline(1, backend)


def check_conservation(tl):
    """scheduled = executed + cancelled + pending must hold at every quiescent point."""
    assert tl.scheduled_count == tl.executed_count + tl.cancelled_count + tl.pending_count
    assert tl.pending_count >= 0


# -- acceptance reporting ----------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    n, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[n] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, verdict, detail = _CRITERIA[n]
        line = f"criterion {n} {verdict}: {title}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)
