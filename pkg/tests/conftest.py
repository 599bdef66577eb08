from pathlib import Path

import numpy as np
import pytest

from loopy_spectra._accel import HAVE_NUMBA
from loopy_spectra.graph import Motif, adjacency, build_factor_graph, load_network

FIXTURES = Path(__file__).parent / "fixtures"

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


def fixture_network(name):
    return load_network(FIXTURES / f"{name}.json")


def single_edge():
    return build_factor_graph(2, [Motif.edge(0, 1)])


def k3():
    return build_factor_graph(3, [Motif.triangle(0, 1, 2)])


def path3():
    return build_factor_graph(3, [Motif.edge(0, 1), Motif.edge(1, 2)])


def dense_rho(fg, z):
    """-(1/(n pi)) Tr (zI - A)^{-1} by a dense solve."""
    A = adjacency(fg).to_dense()
    R = np.linalg.solve(z * np.eye(fg.n) - A, np.eye(fg.n))
    return -np.trace(R) / (fg.n * np.pi)


def random_edge_tree(n, rng):
    motifs = [Motif.edge(int(rng.integers(v)), v) for v in range(1, n)]
    return build_factor_graph(n, motifs)


def random_motif_tree(max_n, rng):
    """Factor-graph tree mixing edges, triangles and 4-/5-cycles: each new
    motif hangs off one existing node and brings only fresh nodes."""
    n = 1
    motifs = []
    while True:
        kind = rng.choice(["edge", "triangle", "cycle4", "cycle5"])
        size = {"edge": 2, "triangle": 3, "cycle4": 4, "cycle5": 5}[kind]
        if n + size - 1 > max_n:
            break
        anchor = int(rng.integers(n))
        fresh = list(range(n, n + size - 1))
        nodes = [anchor] + fresh
        if kind == "edge":
            motifs.append(Motif.edge(*nodes))
        elif kind == "triangle":
            motifs.append(Motif.triangle(*nodes))
        else:
            rng.shuffle(nodes)
            motifs.append(Motif.cycle(nodes))
        n += size - 1
    return build_factor_graph(n, motifs)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def fig1():
    return fixture_network("fig1")


# --- acceptance report -------------------------------------------------------------

ACCEPTANCE = []


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
