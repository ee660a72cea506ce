def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full-scale acceptance criteria (slow)")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import CHECKS, SUMMARY_LINES

    if not SUMMARY_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in CHECKS:
        if name in SUMMARY_LINES:
            terminalreporter.write_line(SUMMARY_LINES[name])
