"""
Immutable weighted multigraphs.

A :class:`WeightedGraph` is a finite connected multigraph whose edges carry a
positive length (read as an electrical resistance). Loops and parallel edges
are allowed because edge contraction produces them even from simple inputs.
Every mutator returns a new graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from .errors import (
    DanglingEndpoint,
    DisconnectedGraph,
    DuplicateId,
    GraphError,
    LoopSubdivision,
    NonpositiveLength,
    SplitOutOfRange,
    UnknownEdge,
    UnknownVertex,
)

VertexId = Hashable
EdgeId = str

__all__ = [
    "Edge",
    "WeightedGraph",
    "Structure",
    "ContractionMap",
    "validate",
    "degree",
    "is_bridge",
    "subdivide",
    "contract",
    "remove_edge",
    "suppress_degree_two",
]


@dataclass(frozen=True)
class Edge:
    """One edge ``u -- v`` with a positive length. ``u == v`` is a loop."""

    id: EdgeId
    u: VertexId
    v: VertexId
    length: float

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def other(self, w):
        return self.v if w == self.u else self.u


@dataclass(frozen=True)
class Structure:
    """Index arrays describing the topology of a graph (lengths excluded).

    The flow integrator evaluates curvature thousands of times on one
    topology; keeping the integer bookkeeping here lets those evaluations
    work on a bare length vector.
    """

    vertices: tuple
    index: Mapping[VertexId, int]
    tail: np.ndarray
    head: np.ndarray
    loop: np.ndarray
    bridge: np.ndarray
    degree: np.ndarray
    incidence: np.ndarray
    degree_term: np.ndarray  # 1/deg(u) + 1/deg(v) per edge
    block: np.ndarray  # biconnected block label per edge
    block_size: np.ndarray  # edges per block
    proper: np.ndarray  # indices of the non-loop edges

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.tail)


def _check_length(edge_id, length):
    if isinstance(length, bool) or not isinstance(length, (int, float, np.floating, np.integer)):
        raise NonpositiveLength(f"edge {edge_id!r}: length {length!r} is not a number")
    if not math.isfinite(length) or length <= 0:
        raise NonpositiveLength(
            f"edge {edge_id!r}: length must be positive and finite, got {length!r}")


@dataclass(frozen=True)
class WeightedGraph:
    """Connected multigraph with positive edge lengths.

    Parameters
    ----------
    vertices : sequence of hashable
        Vertex labels (strings or integers), unique.
    edges : sequence of Edge
        Edges in a fixed order; that order indexes every per-edge array
        returned by this package.
    """

    vertices: tuple
    edges: tuple
    _edge_pos: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_edge_pos", {e.id: i for i, e in enumerate(edges)})
        validate(self)

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence], vertices: Iterable | None = None):
        """Build a graph from ``(u, v, length)`` or ``(u, v, length, id)`` tuples.

        Missing ids become ``e0, e1, ...`` by position. Vertices default to
        the endpoints in order of first appearance.
        """
        records = []
        for k, item in enumerate(edges):
            if len(item) == 3:
                u, v, length = item
                eid = f"e{k}"
            else:
                u, v, length, eid = item
            records.append(Edge(str(eid), u, v, length))
        if vertices is None:
            seen = {}
            for e in records:
                seen.setdefault(e.u, None)
                seen.setdefault(e.v, None)
            vertices = list(seen)
        return cls(tuple(vertices), tuple(records))

    # -- lookups -------------------------------------------------------------

    @property
    def edge_ids(self) -> tuple:
        return tuple(e.id for e in self.edges)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges], dtype=float)

    @property
    def total_length(self) -> float:
        return math.fsum(e.length for e in self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge(self, edge_id: EdgeId) -> Edge:
        return self.edges[self.edge_index(edge_id)]

    def edge_index(self, edge_id: EdgeId) -> int:
        try:
            return self._edge_pos[edge_id]
        except KeyError:
            raise UnknownEdge(f"unknown edge {edge_id!r}") from None

    def vertex_index(self, v: VertexId) -> int:
        try:
            return self.structure.index[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v!r}") from None

    def incident(self, v: VertexId) -> list:
        """Edges touching ``v`` (a loop appears once)."""
        self.vertex_index(v)
        return [e for e in self.edges if e.u == v or e.v == v]

    @cached_property
    def structure(self) -> Structure:
        index = {v: i for i, v in enumerate(self.vertices)}
        tail = np.array([index[e.u] for e in self.edges], dtype=np.intp)
        head = np.array([index[e.v] for e in self.edges], dtype=np.intp)
        loop = tail == head
        deg = np.zeros(len(self.vertices), dtype=np.intp)
        np.add.at(deg, tail, 1)
        np.add.at(deg, head, 1)
        bridge, block = _find_blocks(len(self.vertices), tail, head)
        # Signed edge-vertex incidence; loop rows cancel to zero.
        inc = np.zeros((len(self.edges), len(self.vertices)))
        rows = np.arange(len(self.edges))
        np.add.at(inc, (rows, tail), 1.0)
        np.add.at(inc, (rows, head), -1.0)
        inv_deg = 1.0 / np.maximum(deg, 1)
        return Structure(self.vertices, index, tail, head, loop, bridge, deg, inc,
                         inv_deg[tail] + inv_deg[head], block,
                         np.bincount(block, minlength=block.max(initial=-1) + 1),
                         np.flatnonzero(~loop))

    # -- derived graphs -------------------------------------------------------

    def with_lengths(self, lengths) -> WeightedGraph:
        """Same topology, new lengths (array in edge order or id -> length map)."""
        if isinstance(lengths, Mapping):
            new = [Edge(e.id, e.u, e.v, float(lengths.get(e.id, e.length))) for e in self.edges]
        else:
            lengths = np.asarray(lengths, dtype=float)
            if lengths.shape != (self.n_edges,):
                raise ValueError(f"expected {self.n_edges} lengths, got shape {lengths.shape}")
            new = [Edge(e.id, e.u, e.v, float(x)) for e, x in zip(self.edges, lengths)]
        for e in new:
            _check_length(e.id, e.length)
        g = object.__new__(WeightedGraph)
        object.__setattr__(g, "vertices", self.vertices)
        object.__setattr__(g, "edges", tuple(new))
        object.__setattr__(g, "_edge_pos", self._edge_pos)
        if "structure" in self.__dict__:
            g.__dict__["structure"] = self.__dict__["structure"]
        return g

    def scaled(self, factor: float) -> WeightedGraph:
        return self.with_lengths(self.lengths * factor)


def _find_blocks(n, tail, head) -> tuple[np.ndarray, np.ndarray]:
    """Bridge mask and biconnected-block label per edge, by one low-link DFS.

    Parallel edges are handled by skipping only the edge id used to enter a
    vertex, never the parent vertex itself. Each loop is its own block.
    """
    m = len(tail)
    adj = [[] for _ in range(n)]
    for k in range(m):
        a, b = int(tail[k]), int(head[k])
        if a != b:
            adj[a].append((b, k))
            adj[b].append((a, k))
    disc = [-1] * n
    low = [0] * n
    bridge = np.zeros(m, dtype=bool)
    block = np.full(m, -1, dtype=np.intp)
    n_blocks = 0
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        pending = []
        while stack:
            x, via, it = stack[-1]
            advanced = False
            for y, k in it:
                if k == via:
                    continue
                if disc[y] == -1:
                    pending.append(k)
                    disc[y] = low[y] = timer
                    timer += 1
                    stack.append((y, k, iter(adj[y])))
                    advanced = True
                    break
                if disc[y] < disc[x]:
                    # Back edge to an ancestor (or a parallel copy of the tree edge).
                    pending.append(k)
                    low[x] = min(low[x], disc[y])
            if advanced:
                continue
            stack.pop()
            if stack:
                p = stack[-1][0]
                low[p] = min(low[p], low[x])
                if low[x] > disc[p]:
                    bridge[via] = True
                if low[x] >= disc[p]:
                    while True:
                        k = pending.pop()
                        block[k] = n_blocks
                        if k == via:
                            break
                    n_blocks += 1
    for k in np.flatnonzero(block < 0):
        block[k] = n_blocks
        n_blocks += 1
    return bridge, block


def validate(g: WeightedGraph) -> None:
    """Raise a :class:`GraphError` subclass naming the first violated invariant."""
    if len(g.vertices) == 0:
        raise GraphError("graph has no vertices")
    seen = set()
    for v in g.vertices:
        if v in seen:
            raise DuplicateId(f"duplicate vertex {v!r}")
        seen.add(v)
    ids = set()
    for e in g.edges:
        if e.id in ids:
            raise DuplicateId(f"duplicate edge id {e.id!r}")
        ids.add(e.id)
        for w in (e.u, e.v):
            if w not in seen:
                raise DanglingEndpoint(f"edge {e.id!r} has undeclared endpoint {w!r}")
        _check_length(e.id, e.length)
    ds = DisjointSet(g.vertices)
    for e in g.edges:
        if e.u != e.v:
            ds.merge(e.u, e.v)
    if ds.n_subsets != 1:
        parts = sorted((sorted(map(str, s)) for s in ds.subsets()), key=len)
        raise DisconnectedGraph(
            f"graph has {ds.n_subsets} components; e.g. vertices {parts[0]} are cut off")


def degree(g: WeightedGraph, v: VertexId) -> int:
    """Number of edge endpoints at ``v``; a loop counts twice."""
    return int(g.structure.degree[g.vertex_index(v)])


def is_bridge(g: WeightedGraph, edge_id: EdgeId) -> bool:
    return bool(g.structure.bridge[g.edge_index(edge_id)])


def _fresh(base: str, taken) -> str:
    name, k = base, 1
    while name in taken:
        name = f"{base}_{k}"
        k += 1
    return name


def _fresh_vertex(g: WeightedGraph, edge_id: EdgeId):
    if all(isinstance(v, int) and not isinstance(v, bool) for v in g.vertices):
        return max(g.vertices) + 1
    return _fresh(f"{edge_id}:x", set(g.vertices))


def subdivide(g: WeightedGraph, edge_id: EdgeId, split: float = 0.5) -> WeightedGraph:
    """Replace edge ``u -- v`` by ``u -- x -- v`` with a new midpoint vertex ``x``.

    The new edges get lengths ``split * l`` and ``(1 - split) * l`` and ids
    ``<id>.1`` (the ``u`` side) and ``<id>.2``; they take the old edge's
    position in the edge order.
    """
    e = g.edge(edge_id)
    if e.is_loop:
        raise LoopSubdivision(f"edge {edge_id!r} is a loop and cannot be subdivided")
    if not (0.0 < split < 1.0):
        raise SplitOutOfRange(f"split must lie in (0, 1), got {split!r}")
    x = _fresh_vertex(g, edge_id)
    taken = set(g.edge_ids)
    id1 = _fresh(f"{edge_id}.1", taken)
    id2 = _fresh(f"{edge_id}.2", taken | {id1})
    l1 = split * e.length
    new_edges = []
    for f in g.edges:
        if f.id == edge_id:
            new_edges.append(Edge(id1, e.u, x, l1))
            new_edges.append(Edge(id2, x, e.v, e.length - l1))
        else:
            new_edges.append(f)
    return WeightedGraph(g.vertices + (x,), tuple(new_edges))


@dataclass(frozen=True)
class ContractionMap:
    """Bookkeeping for :func:`contract`.

    Attributes
    ----------
    vertex_map : dict
        Old vertex -> surviving vertex (identity for untouched vertices).
    removed_edges : tuple of str
        Ids of the contracted (deleted) edges.
    looped_edges : tuple of str
        Surviving edges that became loops because their endpoints merged.
    """

    vertex_map: Mapping
    removed_edges: tuple
    looped_edges: tuple


def contract(g: WeightedGraph, edge_ids: Iterable[EdgeId]) -> tuple[WeightedGraph, ContractionMap]:
    """Contract a set of edges, keeping every other edge and its length.

    Each merged class of vertices is represented by its highest-degree member
    (earliest in vertex order on ties), so names stay stable along a flow.
    """
    es = list(dict.fromkeys(edge_ids))
    for eid in es:
        g.edge_index(eid)
    removed = set(es)
    ds = DisjointSet(g.vertices)
    for eid in es:
        e = g.edge(eid)
        ds.merge(e.u, e.v)
    deg = g.structure.degree
    pos = g.structure.index
    rep = {}
    for cls in ds.subsets():
        best = max(cls, key=lambda w: (deg[pos[w]], -pos[w]))
        for w in cls:
            rep[w] = best
    vertex_map = {v: rep[v] for v in g.vertices}
    new_vertices = tuple(v for v in g.vertices if rep[v] == v)
    new_edges, looped = [], []
    for e in g.edges:
        if e.id in removed:
            continue
        u, v = rep[e.u], rep[e.v]
        if u == v and e.u != e.v:
            looped.append(e.id)
        new_edges.append(Edge(e.id, u, v, e.length))
    cmap = ContractionMap(vertex_map, tuple(es), tuple(looped))
    return WeightedGraph(new_vertices, tuple(new_edges)), cmap


def remove_edge(g: WeightedGraph, edge_id: EdgeId) -> WeightedGraph:
    """``G \\ e``; raises DisconnectedGraph when ``e`` is a bridge."""
    g.edge_index(edge_id)
    return WeightedGraph(g.vertices, tuple(e for e in g.edges if e.id != edge_id))


def suppress_degree_two(g: WeightedGraph) -> WeightedGraph:
    """Smooth away degree-2 vertices, merging their two edges into one.

    This is the inverse of subdivision and returns the smallest graph
    representing the same metric graph. The merged edge keeps the id and
    position of whichever of the two edges comes first. A cycle reduces to
    one vertex carrying a single loop.
    """
    vertices = list(g.vertices)
    edges = list(g.edges)
    while True:
        target = None
        for x in vertices:
            inc = [k for k, e in enumerate(edges) if e.u == x or e.v == x]
            if len(inc) == 2 and not any(edges[k].is_loop for k in inc):
                target = x, inc
                break
        if target is None:
            break
        x, (i, j) = target
        a, b = edges[i], edges[j]
        merged = Edge(a.id, a.other(x), b.other(x), a.length + b.length)
        edges[i] = merged
        del edges[j]
        vertices.remove(x)
    if len(edges) == len(g.edges):
        return g
    return WeightedGraph(tuple(vertices), tuple(edges))
