import pytest

from gvmspdc.database import load


@pytest.fixture(scope="session")
def db():
    return load()


@pytest.fixture(scope="session")
def ktp(db):
    return db.get("KTP")


@pytest.fixture(scope="session")
def mgoln(db):
    return db.get("MgO:LN")


@pytest.fixture(scope="session")
def slt(db):
    return db.get("SLT")


_CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        details = [v for k, v in item.user_properties if k == "detail"]
        _CRITERIA.append((marker.args[0], marker.args[1], report.outcome, details))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, details in sorted(_CRITERIA):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number} {status}: {title}")
        for d in details:
            terminalreporter.write_line(f"    {d}")
