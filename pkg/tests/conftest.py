import numpy as np
import pytest

from imlgraph.community import LouvainConfig, detect_communities
from imlgraph.datasets import preset_graph
from imlgraph.graph import Graph, graph_from_edges


@pytest.fixture(scope="session")
def medium_graph():
    return preset_graph("medium")


@pytest.fixture(scope="session")
def medium_hierarchy(medium_graph):
    return detect_communities(medium_graph, LouvainConfig(seed=7))


@pytest.fixture(scope="session")
def easy_graph():
    return preset_graph("easy")


@pytest.fixture(scope="session")
def easy_hierarchy(easy_graph):
    return detect_communities(easy_graph, LouvainConfig(seed=7))


@pytest.fixture
def two_triangles() -> Graph:
    """Two triangles joined by a single bridge edge. The classic case where
    the optimal partition is obvious by inspection."""
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
    return graph_from_edges(6, edges)


@pytest.fixture
def path_graph() -> Graph:
    return graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    """Erdos-Renyi sample, possibly disconnected."""
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return graph_from_edges(n, edges)
