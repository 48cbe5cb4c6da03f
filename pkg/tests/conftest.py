import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def line_graph():
    """s=0, c=1, r=2 with c a friend of both endpoints."""
    from gstrsim.social import SocialGraph

    return SocialGraph(range(3), [(0, 1), (1, 2)])


def pytest_terminal_summary(terminalreporter):
    from report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
