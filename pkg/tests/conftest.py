import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))


def arb_close(ball, value, slack=1e-40):
    """True when the high-precision ``value`` lies within ``ball`` widened by ``slack``."""
    import mpmath

    with mpmath.workdps(80):
        mid = mpmath.mpf(ball.mid().str(70, radius=False))
        rad = mpmath.mpf(ball.rad().str(20, radius=False)) if ball.rad() != 0 else mpmath.mpf(0)
        return abs(mid - mpmath.mpf(value)) <= rad + slack


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
