import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)\w*", report.nodeid)
    if not m or (report.when != "call" and report.passed):
        return
    outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    _ACCEPTANCE.setdefault(int(m.group(1)), []).append((report.nodeid.split("::")[-1], outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[n]
        status = "FAIL" if any(o == "FAIL" for _, o in parts) else parts[0][1]
        line = f"criterion {n}: {status}  {CRITERIA[n]}"
        if len(parts) > 1:
            line += "  [" + ", ".join(f"{name.split('_', 3)[-1]}={o}" for name, o in parts) + "]"
        terminalreporter.write_line(line)
