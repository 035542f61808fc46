import sys


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion that ran in this session
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(mod.line(n, ok, detail))
