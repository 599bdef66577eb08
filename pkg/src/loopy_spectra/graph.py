"""Motif networks and their factor graphs.

A network is a node count plus a list of motifs. Each motif is a small
connected subgraph on distinct nodes. The factor graph is the bipartite
node/motif incidence structure; message passing runs on it.

Incidences are numbered motif-major: the incidence of member ``p`` of motif
``s`` has id ``motif_ptr[s] + p``. Every per-incidence array in the package
(messages, kernel inputs) uses this order.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DisconnectedMotif,
    MalformedMotif,
    NetworkFormatError,
    OutOfRangeNode,
)

EDGE = "edge"
TRIANGLE = "triangle"
CYCLE = "cycle"
GENERAL = "general"
KINDS = (EDGE, TRIANGLE, CYCLE, GENERAL)

# kernel dispatch codes; cycles go through the general dense solve
KIND_CODES = {EDGE: 0, TRIANGLE: 1, CYCLE: 2, GENERAL: 2}


def _connected(k, edges):
    adj = [[] for _ in range(k)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == k


def _canonical_ring(nodes):
    """Rotate a ring so its smallest node is first and its second node is
    the smaller of that node's two ring neighbours."""
    start = nodes.index(min(nodes))
    ring = nodes[start:] + nodes[:start]
    if ring[1] > ring[-1]:
        ring = [ring[0]] + ring[1:][::-1]
    return ring


@dataclass(frozen=True)
class Motif:
    """A connected subgraph of the network.

    ``members`` are global node ids; ``edges`` are pairs of positions into
    ``members`` (``i < j``). Instances are canonical: edge and triangle and
    general members are sorted, cycle members are in canonical ring order.
    Build them with :meth:`make`, or the ``edge``/``triangle``/``cycle``/
    ``general`` shortcuts, not the raw constructor.
    """

    kind: str
    members: tuple
    edges: tuple

    @classmethod
    def make(cls, kind: str, nodes: Sequence[int], edges=None) -> "Motif":
        if kind not in KINDS:
            raise MalformedMotif(f"unknown motif kind {kind!r}")
        try:
            nodes = [int(v) for v in nodes]
        except (TypeError, ValueError):
            raise MalformedMotif(f"{kind} members must be integers") from None
        if len(set(nodes)) != len(nodes):
            raise MalformedMotif(f"{kind} has repeated members {nodes}")
        if kind != GENERAL and edges is not None:
            raise MalformedMotif("explicit edges are only allowed for general motifs")

        if kind == EDGE:
            if len(nodes) != 2:
                raise MalformedMotif(f"edge needs 2 members, got {len(nodes)}")
            return cls(EDGE, tuple(sorted(nodes)), ((0, 1),))
        if kind == TRIANGLE:
            if len(nodes) != 3:
                raise MalformedMotif(f"triangle needs 3 members, got {len(nodes)}")
            return cls(TRIANGLE, tuple(sorted(nodes)), ((0, 1), (0, 2), (1, 2)))
        if kind == CYCLE:
            L = len(nodes)
            if L < 3:
                raise MalformedMotif(f"cycle needs at least 3 members, got {L}")
            ring = _canonical_ring(nodes)
            ring_edges = [(i, i + 1) for i in range(L - 1)] + [(0, L - 1)]
            return cls(CYCLE, tuple(ring), tuple(sorted(ring_edges)))

        if edges is None:
            raise MalformedMotif("general motif requires an edge list")
        k = len(nodes)
        if k < 2:
            raise MalformedMotif("general motif needs at least 2 members")
        order = sorted(range(k), key=lambda p: nodes[p])
        where = {old: new for new, old in enumerate(order)}
        local = set()
        for pair in edges:
            try:
                i, j = (int(x) for x in pair)
            except (TypeError, ValueError):
                raise MalformedMotif(f"bad internal edge {pair!r}") from None
            if not (0 <= i < k and 0 <= j < k):
                raise MalformedMotif(f"internal edge {pair!r} outside member range 0..{k - 1}")
            if i == j:
                raise MalformedMotif(f"internal self-loop at member {i}")
            a, b = sorted((where[i], where[j]))
            if (a, b) in local:
                raise MalformedMotif(f"repeated internal edge {pair!r}")
            local.add((a, b))
        if not local:
            raise MalformedMotif("general motif has no edges")
        if not _connected(k, local):
            raise DisconnectedMotif(f"general motif on {sorted(nodes)} is not connected")
        return cls(GENERAL, tuple(nodes[p] for p in order), tuple(sorted(local)))

    @classmethod
    def edge(cls, u, v):
        return cls.make(EDGE, (u, v))

    @classmethod
    def triangle(cls, u, v, w):
        return cls.make(TRIANGLE, (u, v, w))

    @classmethod
    def cycle(cls, nodes):
        return cls.make(CYCLE, nodes)

    @classmethod
    def general(cls, nodes, edges):
        return cls.make(GENERAL, nodes, edges)

    @property
    def size(self) -> int:
        return len(self.members)

    def local_adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency over member positions."""
        B = np.zeros((self.size, self.size))
        for i, j in self.edges:
            B[i, j] = B[j, i] = 1.0
        return B

    def global_edges(self):
        return [(self.members[i], self.members[j]) for i, j in self.edges]


@dataclass(frozen=True)
class FactorGraph:
    """Bipartite node/motif incidence structure of a motif network."""

    n: int
    motifs: tuple
    motif_ptr: np.ndarray = field(repr=False, compare=False)
    inc_node: np.ndarray = field(repr=False, compare=False)
    inc_motif: np.ndarray = field(repr=False, compare=False)
    inc_pos: np.ndarray = field(repr=False, compare=False)
    node_ptr: np.ndarray = field(repr=False, compare=False)
    node_inc: np.ndarray = field(repr=False, compare=False)

    @property
    def n_motifs(self) -> int:
        return len(self.motifs)

    @property
    def n_incidences(self) -> int:
        return int(self.motif_ptr[-1])

    def incidences_of(self, u: int) -> np.ndarray:
        """Incidence ids at node ``u``."""
        return self.node_inc[self.node_ptr[u]:self.node_ptr[u + 1]]

    @property
    def incidence(self):
        """``S_u`` for every node: list of ``(motif id, member position)``."""
        return [
            [(int(self.inc_motif[i]), int(self.inc_pos[i])) for i in self.incidences_of(u)]
            for u in range(self.n)
        ]

    def incidence_id(self, u: int, sigma: int) -> int:
        members = self.motifs[sigma].members
        try:
            return int(self.motif_ptr[sigma]) + members.index(u)
        except ValueError:
            raise KeyError(f"node {u} is not a member of motif {sigma}") from None

    def kernel_arrays(self):
        """Flat arrays consumed by :mod:`loopy_spectra.kernels` (cached)."""
        cached = self.__dict__.get("_kernel_arrays")
        if cached is None:
            m = self.n_motifs
            kind = np.array([KIND_CODES[s.kind] for s in self.motifs], dtype=np.int64)
            sizes = np.diff(self.motif_ptr)
            adj_ptr = np.zeros(m + 1, dtype=np.int64)
            adj_ptr[1:] = np.cumsum(sizes * sizes)
            adj_data = np.zeros(int(adj_ptr[-1]))
            for s, motif in enumerate(self.motifs):
                if kind[s] == 2:
                    adj_data[adj_ptr[s]:adj_ptr[s + 1]] = motif.local_adjacency().ravel()
            cached = dict(
                node_ptr=self.node_ptr,
                node_inc=self.node_inc,
                inc_node=self.inc_node,
                motif_ptr=self.motif_ptr,
                motif_kind=kind,
                adj_ptr=adj_ptr,
                adj_data=adj_data,
                kmax=int(sizes.max()) if m else 1,
            )
            object.__setattr__(self, "_kernel_arrays", cached)
        return cached


def build_factor_graph(n: int, motifs: Iterable) -> FactorGraph:
    """Validate motifs against ``n`` nodes and build the incidence structure.

    ``motifs`` may hold :class:`Motif` instances or ``(kind, nodes)`` /
    ``(kind, nodes, edges)`` tuples. Motif ids follow input order.
    """
    n = int(n)
    if n < 0:
        raise ValueError("node count must be non-negative")
    built = []
    for s, motif in enumerate(motifs):
        if not isinstance(motif, Motif):
            motif = Motif.make(*motif)
        for v in motif.members:
            if not 0 <= v < n:
                raise OutOfRangeNode(f"motif {s} references node {v}, network has n={n}")
        built.append(motif)

    sizes = np.array([mo.size for mo in built], dtype=np.int64)
    motif_ptr = np.zeros(len(built) + 1, dtype=np.int64)
    motif_ptr[1:] = np.cumsum(sizes)
    n_inc = int(motif_ptr[-1])
    inc_node = np.fromiter(
        (v for mo in built for v in mo.members), dtype=np.int64, count=n_inc
    )
    inc_motif = np.repeat(np.arange(len(built), dtype=np.int64), sizes)
    inc_pos = np.arange(n_inc, dtype=np.int64) - np.repeat(motif_ptr[:-1], sizes)

    node_inc = np.argsort(inc_node, kind="stable").astype(np.int64)
    counts = np.bincount(inc_node, minlength=n) if n_inc else np.zeros(n, dtype=np.int64)
    node_ptr = np.zeros(n + 1, dtype=np.int64)
    node_ptr[1:] = np.cumsum(counts)
    return FactorGraph(
        n=n,
        motifs=tuple(built),
        motif_ptr=motif_ptr,
        inc_node=inc_node,
        inc_motif=inc_motif,
        inc_pos=inc_pos,
        node_ptr=node_ptr,
        node_inc=node_inc,
    )


@dataclass(frozen=True)
class AdjacencyView:
    """Plain adjacency derived from the motifs.

    ``edges`` keeps one row per motif edge, so an edge shared by two motifs
    appears twice and ``has_duplicates`` is set.
    """

    n: int
    edges: np.ndarray
    degrees: np.ndarray
    has_duplicates: bool
    duplicates: tuple

    def to_sparse(self) -> sp.csr_matrix:
        """Symmetric CSR matrix; duplicate edges add up."""
        if len(self.edges) == 0:
            return sp.csr_matrix((self.n, self.n))
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def neighbours(self):
        """Adjacency lists with multiplicity."""
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(int(v))
            adj[v].append(int(u))
        return adj


def adjacency(fg: FactorGraph) -> AdjacencyView:
    pairs = [tuple(sorted(e)) for mo in fg.motifs for e in mo.global_edges()]
    edges = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    degrees = np.zeros(fg.n, dtype=np.int64)
    if len(edges):
        np.add.at(degrees, edges[:, 0], 1)
        np.add.at(degrees, edges[:, 1], 1)
    seen = set()
    dup = set()
    for e in pairs:
        if e in seen:
            dup.add(e)
        seen.add(e)
    return AdjacencyView(
        n=fg.n,
        edges=edges,
        degrees=degrees,
        has_duplicates=bool(dup),
        duplicates=tuple(sorted(dup)),
    )


def factor_graph_girth_check(fg: FactorGraph, max_depth: int):
    """Length of the shortest cycle in the factor graph, or ``None``.

    Cycles longer than ``max_depth`` are not searched for. Lengths are
    counted in factor-graph steps, so they are always even (node, motif,
    node, motif, ... back to the start).
    """
    n, m = fg.n, fg.n_motifs
    # bipartite vertices: nodes 0..n-1, motifs n..n+m-1
    nbrs = [[] for _ in range(n + m)]
    for i in range(fg.n_incidences):
        u = int(fg.inc_node[i])
        s = n + int(fg.inc_motif[i])
        nbrs[u].append(s)
        nbrs[s].append(u)

    best = None
    radius = max_depth // 2 + 1
    for root in range(n + m):
        if not nbrs[root]:
            continue
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            if dist[v] >= radius:
                break
            for w in nbrs[v]:
                if w == parent[v]:
                    continue
                if w in dist:
                    length = dist[v] + dist[w] + 1
                    if length <= max_depth and (best is None or length < best):
                        best = length
                else:
                    dist[w] = dist[v] + 1
                    parent[w] = v
                    queue.append(w)
        if best == 4:  # shortest possible without repeated incidences
            break
    return best


# --- JSON network files -----------------------------------------------------

def network_to_dict(fg: FactorGraph) -> dict:
    out = []
    for mo in fg.motifs:
        item = {"kind": mo.kind, "nodes": list(mo.members)}
        if mo.kind == GENERAL:
            item["edges"] = [list(e) for e in mo.edges]
        out.append(item)
    return {"n": fg.n, "motifs": out}


def dumps_network(fg: FactorGraph) -> str:
    """Serialize with one motif per line; stable for a given network."""
    d = network_to_dict(fg)
    lines = [json.dumps(item, separators=(", ", ": ")) for item in d["motifs"]]
    if not lines:
        return '{"n": %d, "motifs": []}\n' % fg.n
    body = ",\n  ".join(lines)
    return '{"n": %d, "motifs": [\n  %s\n]}\n' % (fg.n, body)


def network_from_dict(data) -> FactorGraph:
    if not isinstance(data, dict):
        raise NetworkFormatError("network file must hold a JSON object")
    unknown = set(data) - {"n", "motifs"}
    if unknown:
        raise NetworkFormatError(f"unknown top-level keys {sorted(unknown)}")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise NetworkFormatError(f"'n' must be a non-negative integer, got {n!r}")
    items = data.get("motifs")
    if not isinstance(items, list):
        raise NetworkFormatError("'motifs' must be a list")
    motifs = []
    for idx, item in enumerate(items):
        where = f"motifs[{idx}]"
        if not isinstance(item, dict):
            raise NetworkFormatError(f"{where}: expected an object")
        extra = set(item) - {"kind", "nodes", "edges"}
        if extra:
            raise NetworkFormatError(f"{where}: unknown keys {sorted(extra)}")
        kind = item.get("kind")
        if kind not in KINDS:
            raise NetworkFormatError(f"{where}: unknown kind {kind!r}")
        nodes = item.get("nodes")
        if not isinstance(nodes, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in nodes
        ):
            raise NetworkFormatError(f"{where}: 'nodes' must be a list of integers")
        if kind == GENERAL and "edges" not in item:
            raise NetworkFormatError(f"{where}: general motif needs 'edges'")
        if kind != GENERAL and "edges" in item:
            raise NetworkFormatError(f"{where}: 'edges' is only allowed for general motifs")
        try:
            motif = Motif.make(kind, nodes, item.get("edges"))
        except MalformedMotif as exc:
            raise NetworkFormatError(f"{where}: {exc}") from exc
        for v in motif.members:
            if not 0 <= v < n:
                raise NetworkFormatError(f"{where}: node {v} out of range for n={n}")
        motifs.append(motif)
    return build_factor_graph(n, motifs)


def loads_network(text: str) -> FactorGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return network_from_dict(data)


def load_network(path: str | PathLike) -> FactorGraph:
    with open(path, encoding="utf-8") as fh:
        return loads_network(fh.read())


def save_network(fg: FactorGraph, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_network(fg))
