from collections import defaultdict

_outcomes = defaultdict(list)
_titles = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            number, title = m.args
            _titles[number] = title
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[number].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        passed = results.count("passed")
        verdict = "PASS" if passed == len(results) else "FAIL"
        tr.write_line(
            f"criterion {number:>2}: {verdict}  {_titles[number]} ({passed}/{len(results)} checks)"
        )
