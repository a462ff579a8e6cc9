import numpy as np
import pytest

from quint.graph import Graph
from quint.synth import erdos_renyi


def brute_force_sketch_bits(adj: np.ndarray, buckets: np.ndarray, d: int) -> np.ndarray:
    """bit j of row i = OR over k with buckets[k] == j of adj[i, k]."""
    n = adj.shape[0]
    out = np.zeros((n, d), dtype=bool)
    for i in range(n):
        for k in range(n):
            if adj[i, k]:
                out[i, buckets[k]] = True
    return out


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def path4():
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def random_graph():
    return erdos_renyi(50, 0.1, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# --- acceptance report --------------------------------------------------------

_ACCEPTANCE_LINES: list[str] = []


class AcceptanceRecorder:
    def record(self, criterion: str, status: str, detail: str) -> None:
        line = f"[{status}] criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)


@pytest.fixture
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
