import pytest
from hypothesis import settings

from t2m import corpus

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def machines():
    return corpus.load_all()


# One PASS/FAIL line per acceptance criterion at the end of the run.
_criteria = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or report.failed:
        detail = ""
        if report.failed and hasattr(report.longrepr, "reprcrash"):
            detail = report.longrepr.reprcrash.message.splitlines()[0]
        _criteria.setdefault(name, (report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_criteria):
        outcome, detail = _criteria[name]
        _, _, num, *slug = name.split("_")
        line = f"criterion {int(num):2d} ({' '.join(slug)}): {'PASS' if outcome == 'passed' else 'FAIL'}"
        if detail:
            line += f"  -- {detail}"
        terminalreporter.write_line(line)
