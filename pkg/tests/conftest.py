import pytest

# filled by test_acceptance.py; one entry per criterion
ACCEPTANCE = {}


def record(key, title, passed, detail=""):
    ACCEPTANCE[key] = (title, bool(passed), detail)
    print(f"[{'PASS' if passed else 'FAIL'}] {key} {title}: {detail}")


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abcd")), k)):
        title, passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key:<3} {title}  ({detail})")
