import numpy as np
import pytest

from mfrank import reproduce as rp
from mfrank.graph import from_edge_list
from mfrank.synth import generate


def random_graph(seed, n, edges, dangling_fraction=0.0):
    """Random multigraph where a given fraction of nodes has no out-links."""
    rng = np.random.default_rng(seed)
    n_dangling = int(round(dangling_fraction * n))
    senders = rng.permutation(n)[n_dangling:]
    src = rng.choice(senders, size=edges)
    # every sender keeps at least one out-link
    src[: len(senders)] = senders[: min(len(senders), edges)]
    dst = rng.integers(0, n, size=edges)
    return from_edge_list(np.stack([src, dst], axis=1), node_count=n)


@pytest.fixture
def cycle3():
    return from_edge_list([(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def two_node():
    return from_edge_list([(0, 1)])


@pytest.fixture
def star():
    return from_edge_list([(1, 0), (2, 0), (3, 0)])


@pytest.fixture(scope="session")
def synthetic_graph():
    return generate(rp.default_spec())


@pytest.fixture(scope="session")
def pipeline(synthetic_graph):
    return rp.run_pipeline(synthetic_graph)


@pytest.fixture(scope="session")
def checks(pipeline):
    return rp.evaluate(pipeline)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k[2:].rstrip("ab")), k)):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key:5s} {'PASS' if passed else 'FAIL'}  {detail}")
