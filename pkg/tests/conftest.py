"""Collects acceptance verdicts and prints them in the terminal summary."""

ACCEPTANCE = {}


def record(number: int, name: str, passed: bool, detail: str):
    line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'} {name}: {detail}"
    ACCEPTANCE[(number, name)] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
