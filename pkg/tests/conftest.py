import pytest

# criterion number -> (passed, summary line); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(n, ok, text):
        ACCEPTANCE[n] = (bool(ok), text)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
