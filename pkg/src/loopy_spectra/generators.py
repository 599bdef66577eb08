"""Random motif-network ensembles.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``; a given
seed and numpy version reproduce the same network on every platform.

Collisions (self-pairs, repeated triangle corners, edges that duplicate an
existing edge) are rejected and redrawn: the stubs of the offending groups
go back into a pool together with the stubs of an equal number of randomly
chosen accepted groups, and the pool is reshuffled.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationFailed, NotGraphical, NotMultipleOfSix, OddDegreeSum
from .graph import FactorGraph, Motif, adjacency, build_factor_graph

MAX_REDRAW_ROUNDS = 10_000

REGULAR_ET = "regular-et"
POISSON_ET = "poisson-et"
CONFIG_MODEL = "config-model"
MODELS = (REGULAR_ET, POISSON_ET, CONFIG_MODEL)


def make_rng(seed: int) -> np.random.Generator:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _pairs(u, v):
    return (u, v) if u < v else (v, u)


def _group(stubs, size, rng, edges_taken):
    """Partition ``stubs`` into groups of ``size`` distinct nodes whose
    internal edges are all new. ``edges_taken`` is updated in place."""
    stubs = np.asarray(stubs, dtype=np.int64)
    if len(stubs) == 0:
        return []
    accepted = []
    pool = stubs
    for _ in range(MAX_REDRAW_ROUNDS):
        pool = rng.permutation(pool)
        rejected = []
        for grp in pool.reshape(-1, size):
            grp = tuple(int(v) for v in grp)
            inner = [_pairs(grp[a], grp[b]) for a in range(size) for b in range(a + 1, size)]
            if len(set(grp)) < size or any(e in edges_taken for e in inner):
                rejected.append(grp)
                continue
            edges_taken.update(inner)
            accepted.append(grp)
        if not rejected:
            return accepted
        # free as many accepted groups as were rejected so the pool can mix
        k = min(len(rejected), len(accepted))
        freed_idx = set(rng.choice(len(accepted), size=k, replace=False).tolist()) if k else set()
        freed = [accepted[i] for i in sorted(freed_idx)]
        accepted = [grp for i, grp in enumerate(accepted) if i not in freed_idx]
        for grp in freed:
            for a in range(size):
                for b in range(a + 1, size):
                    edges_taken.discard(_pairs(grp[a], grp[b]))
        pool = np.array([v for grp in rejected + freed for v in grp], dtype=np.int64)
    raise GenerationFailed(
        f"could not place {len(stubs) // size} collision-free groups of size {size} "
        f"after {MAX_REDRAW_ROUNDS} redraw rounds")


def _assemble(n, edge_groups, tri_groups) -> FactorGraph:
    edges = sorted(tuple(sorted(e)) for e in edge_groups)
    tris = sorted(tuple(sorted(t)) for t in tri_groups)
    motifs = [Motif.edge(*e) for e in edges] + [Motif.triangle(*t) for t in tris]
    return build_factor_graph(n, motifs)


def _edge_triangle(n, edge_stubs, corner_stubs, rng) -> FactorGraph:
    taken = set()
    tris = _group(corner_stubs, 3, rng, taken)
    edges = _group(edge_stubs, 2, rng, taken)
    return _assemble(n, edges, tris)


def gen_regular_edge_triangle(n: int, seed: int) -> FactorGraph:
    """Every node in exactly one single edge and exactly one triangle."""
    if n < 6 or n % 6:
        raise NotMultipleOfSix(f"node count must be a positive multiple of six, got {n}")
    rng = make_rng(seed)
    nodes = np.arange(n, dtype=np.int64)
    return _edge_triangle(n, nodes, nodes, rng)


def gen_poisson_edge_triangle(n: int, mean_edges: float, mean_triangles: float,
                              seed: int) -> FactorGraph:
    """Per-node edge and triangle counts drawn from independent Poissons."""
    if n < 3:
        raise ValueError("poisson edge-triangle networks need n >= 3")
    for name, val in (("mean_edges", mean_edges), ("mean_triangles", mean_triangles)):
        if not (np.isfinite(val) and val >= 0):
            raise ValueError(f"{name} must be finite and non-negative")
    rng = make_rng(seed)
    k_edge = rng.poisson(mean_edges, n)
    k_tri = rng.poisson(mean_triangles, n)
    while k_edge.sum() % 2:
        k_edge[rng.integers(n)] += 1
    while k_tri.sum() % 3:
        k_tri[rng.integers(n)] += 1
    nodes = np.arange(n, dtype=np.int64)
    return _edge_triangle(n, np.repeat(nodes, k_edge), np.repeat(nodes, k_tri), rng)


def is_graphical(degrees) -> bool:
    """Erdos-Gallai test for a simple-graph degree sequence."""
    d = np.sort(np.asarray(degrees, dtype=np.int64))[::-1]
    if d.sum() % 2:
        return False
    n = len(d)
    prefix = np.cumsum(d)
    for k in range(1, n + 1):
        rest = np.minimum(d[k:], k).sum()
        if prefix[k - 1] > k * (k - 1) + rest:
            return False
    return True


def gen_configuration_model(degrees, seed: int) -> FactorGraph:
    """Single edges only, matched uniformly to the given degree sequence."""
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.ndim != 1 or (degrees < 0).any():
        raise ValueError("degrees must be a list of non-negative integers")
    if degrees.sum() % 2:
        raise OddDegreeSum(f"degree sum {int(degrees.sum())} is odd")
    if not is_graphical(degrees):
        raise NotGraphical("no simple graph has this degree sequence")
    rng = make_rng(seed)
    stubs = np.repeat(np.arange(len(degrees), dtype=np.int64), degrees)
    edges = _group(stubs, 2, rng, set())
    return _assemble(len(degrees), edges, [])


def degrees_of(fg: FactorGraph) -> list:
    return adjacency(fg).degrees.tolist()


@dataclass(frozen=True)
class GenSpec:
    model: str
    n: int = 0
    seed: int = 0
    mean_edges: float = 0.0
    mean_triangles: float = 0.0
    degrees: tuple = field(default=())


def generate(spec: GenSpec) -> FactorGraph:
    if spec.model == REGULAR_ET:
        return gen_regular_edge_triangle(spec.n, spec.seed)
    if spec.model == POISSON_ET:
        return gen_poisson_edge_triangle(spec.n, spec.mean_edges, spec.mean_triangles, spec.seed)
    if spec.model == CONFIG_MODEL:
        return gen_configuration_model(list(spec.degrees), spec.seed)
    raise ValueError(f"unknown model {spec.model!r}; choose from {MODELS}")
