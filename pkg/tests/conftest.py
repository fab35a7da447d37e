import json
from importlib import resources

import numpy as np
import pytest

from stabmetro.graph import Graph, is_connected


def load_preset(name: str) -> dict:
    return json.loads(resources.files("stabmetro").joinpath(f"data/{name}.json").read_text())


def random_connected_graph(rng: np.random.Generator, n: int, p: float = 0.45) -> Graph:
    while True:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        g = Graph.from_edges(n, edges)
        if is_connected(g):
            return g


def random_alpha(rng: np.random.Generator, n: int) -> int:
    return int(rng.integers(1, 1 << n))


@pytest.fixture
def fig1a() -> Graph:
    return Graph.from_json(load_preset("fig1a"))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
