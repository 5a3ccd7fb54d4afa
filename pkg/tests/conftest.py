import pytest

from entail_eval.gateway import Gateway, ReplayBackend, TranscriptCache

import support

_criteria: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    _criteria.setdefault(marker, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = f"{m.args[0]:>2}. {m.args[1]}"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        return int(key.split(".")[0])

    for key in sorted(_criteria, key=order):
        outcomes = _criteria[key]
        if all(o == "passed" for o in outcomes):
            status = "PASS"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {key}")


@pytest.fixture
def fixture_items():
    return list(support.ITEMS)


@pytest.fixture
def replay_gateway():
    return Gateway(ReplayBackend(), TranscriptCache(support.CACHE_PATH), replay_only=True)


@pytest.fixture
def scripted():
    return support.scripted_gateway()
