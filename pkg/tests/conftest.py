import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.TITLES):
        if n not in mod.RESULTS:
            terminalreporter.write_line(f"criterion {n:>2}: NOT RUN  {mod.TITLES[n]}")
            continue
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {mod.TITLES[n]} -- {detail}")
