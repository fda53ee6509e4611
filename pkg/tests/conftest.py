import pytest
from hypothesis import HealthCheck, settings

from lvlab.graph import DegreeDistribution, Graph, configuration_graph
from lvlab.rng import substream

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def k4():
    return Graph.complete(4)


def random_graph(n, seed, law="3:1.0"):
    return configuration_graph(DegreeDistribution.parse(law), n, substream(seed))


def connected_graph(n, seed, law="3:1.0"):
    for attempt in range(100):
        g = random_graph(n, 1000 * seed + attempt, law)
        if g.is_connected():
            return g
    raise RuntimeError("no connected sample")


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
