import hypothesis
import pytest

hypothesis.settings.register_profile("default", deadline=None, max_examples=60)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")

# criterion number -> {test name: outcome}
_criteria: dict[int, dict[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(mark.args[0], {})[item.name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        tests = _criteria[number]
        passed = sum(outcome == "passed" for outcome in tests.values())
        ok = passed == len(tests)
        names = ", ".join(sorted({name.split("[")[0] for name in tests}))
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {passed}/{len(tests)} ({names})"
        failed = sorted(name for name, outcome in tests.items() if outcome != "passed")
        if failed:
            line += " failed: " + ", ".join(failed)
        terminalreporter.write_line(line)
