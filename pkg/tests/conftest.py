import random

import pytest

from sidkit import Graph, GraphKind
from sidkit.simbench import GenConfig, random_dag, pair_rng

# nodes: X1, X2, Y1, Y2, Y3
X1, X2, Y1, Y2, Y3 = range(5)
G_EDGES = [(X1, X2), (X1, Y1), (X1, Y2), (X1, Y3), (X2, Y1), (X2, Y2), (X2, Y3)]

# confounded treatment graph with a mediator that has its own child
FIG_NAMES = "X Y Q P A B W".split()
X, Y, Q, P, A, B, W = range(7)
FIG_EDGES = [(Q, X), (P, X), (P, Y), (X, A), (X, B), (B, W), (B, Y)]


def dag(p, edges):
    return Graph.from_edges(p, edges, kind=GraphKind.DAG)


def two_parent_fan(p):
    """X1 -> X2, both pointing into each of the p - 2 remaining nodes."""
    edges = [(0, 1)] + [(a, k) for k in range(2, p) for a in (0, 1)]
    return dag(p, edges)


@pytest.fixture
def fan():
    return dag(5, G_EDGES)


@pytest.fixture
def fan_extra_edge():
    return dag(5, G_EDGES + [(Y1, Y2)])


@pytest.fixture
def fan_flipped():
    return dag(5, [(X2, X1)] + G_EDGES[1:])


@pytest.fixture
def fig():
    return dag(7, FIG_EDGES)


def random_dags(n, sizes, seed=0, regimes=("sparse", "dense")):
    """Deterministic stream of ``n`` random DAGs cycling over sizes and regimes."""
    rnd = random.Random(seed)
    out = []
    for k in range(n):
        p = sizes[k % len(sizes)]
        cfg = GenConfig.for_regime(p, regimes[k // len(sizes) % len(regimes)], seed)
        out.append(random_dag(cfg, pair_rng(seed, k, rnd.randrange(1 << 30))))
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
