import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance check, whatever else the run did."""
    rows = []
    for outcome, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            if rep.when != "call" and verdict == "PASS":
                continue
            name = nodeid.split("::")[-1]
            rows.append((name, verdict))
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance checks")
    seen = set()
    for name, verdict in rows:
        if name in seen:
            continue
        seen.add(name)
        terminalreporter.write_line(f"{name}: {verdict}")
