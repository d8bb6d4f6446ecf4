import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fusenet.graphdata import Graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_graph():
    """5 nodes, 8 undirected edges."""
    edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (0, 4)]
    return Graph.from_edges(5, edges)


@pytest.fixture
def star_graph():
    """Hub 0 connected to 1, 2, 3."""
    return Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
