def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = []
    for key in ("passed", "failed"):
        reports.extend(terminalreporter.stats.get(key, []))
    acceptance = [
        r for r in reports
        if getattr(r, "when", "call") == "call" and "test_acceptance.py::" in r.nodeid
    ]
    if not acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for r in sorted(acceptance, key=lambda rep: rep.nodeid):
        name = r.nodeid.split("::")[-1]
        verdict = "PASS" if r.passed else "FAIL"
        terminalreporter.write_line("%-64s %s" % (name, verdict))
