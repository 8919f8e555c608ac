import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.REPORT):
            terminalreporter.write_line(line)
