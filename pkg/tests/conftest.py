_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one acceptance criterion per test")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(name)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[name] = ("PASS" if report.outcome == "passed" else "FAIL", report.user_properties)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (verdict, props) in _ACCEPTANCE.items():
        extra = " ".join(f"{k}={v}" for k, v in props)
        terminalreporter.write_line(f"{verdict} {name[5:]} {extra}".rstrip())
