"""Named small graphs and a seeded random multigraph generator."""

from __future__ import annotations

import itertools

import numpy as np

from .curvature import curvature_vector
from .graph import Edge, WeightedGraph

__all__ = [
    "single_edge",
    "path",
    "cycle",
    "complete",
    "star",
    "branched_tree",
    "barbell",
    "minimal_barbell",
    "house",
    "theta",
    "random_multigraph",
    "random_corpus",
    "random_positively_curved",
]


def single_edge(length=1.0) -> WeightedGraph:
    return WeightedGraph.from_edges([("a", "b", length)])


def path(n_edges: int, length=1.0) -> WeightedGraph:
    return WeightedGraph.from_edges([(i, i + 1, length) for i in range(n_edges)])


def cycle(lengths) -> WeightedGraph:
    """Cycle ``0 - 1 - ... - (n-1) - 0``; ``lengths`` may be an int for a unit cycle."""
    if isinstance(lengths, int):
        lengths = [1.0] * lengths
    n = len(lengths)
    if n == 1:
        return WeightedGraph((0,), (Edge("e0", 0, 0, float(lengths[0])),))
    return WeightedGraph.from_edges([(i, (i + 1) % n, float(l)) for i, l in enumerate(lengths)])


def complete(n: int, length=1.0) -> WeightedGraph:
    return WeightedGraph.from_edges([(i, j, length) for i, j in itertools.combinations(range(n), 2)])


def star(leaves: int, lengths=None) -> WeightedGraph:
    if lengths is None:
        lengths = [1.0] * leaves
    return WeightedGraph.from_edges([("c", f"l{i}", float(l)) for i, l in enumerate(lengths)])


def branched_tree() -> WeightedGraph:
    """Unit path A-B-C-D-E-F with a pendant edge C-G.

    Curvatures along the path are 1/2, -1/6, -1/6, 0, 1/2 and 1/3 on C-G.
    """
    return WeightedGraph.from_edges([
        ("A", "B", 1.0, "AB"), ("B", "C", 1.0, "BC"), ("C", "D", 1.0, "CD"),
        ("D", "E", 1.0, "DE"), ("E", "F", 1.0, "EF"), ("C", "G", 1.0, "CG"),
    ])


def barbell() -> WeightedGraph:
    """Two unit triangles {1,2,3} and {4,5,6} joined by the bridge 3-4."""
    return WeightedGraph.from_edges([
        (3, 1, 1.0, "31"), (1, 2, 1.0, "12"), (2, 3, 1.0, "23"),
        (3, 4, 1.0, "34"),
        (4, 5, 1.0, "45"), (5, 6, 1.0, "56"), (6, 4, 1.0, "64"),
    ])


def minimal_barbell(loop=3.0, bridge=1.0) -> WeightedGraph:
    """Barbell with its triangles smoothed into loops: two vertices, three edges."""
    return WeightedGraph((3, 4), (
        Edge("loop3", 3, 3, loop), Edge("34", 3, 4, bridge), Edge("loop4", 4, 4, loop)))


def house() -> WeightedGraph:
    """Unit square 1-2-4-3 with a roof apex 5 over the edge 3-4."""
    return WeightedGraph.from_edges([
        (1, 2, 1.0, "12"), (2, 4, 1.0, "24"), (4, 3, 1.0, "43"),
        (3, 1, 1.0, "31"), (3, 5, 1.0, "35"), (5, 4, 1.0, "54"),
    ])


def theta(lengths=(3.0, 1.0, 2.0)) -> WeightedGraph:
    """Three parallel edges between vertices 3 and 4.

    With the default lengths this is the house graph with its degree-2
    vertices smoothed: "floor" (3) replaces 3-1-2-4, "mid" (1) is 4-3 and
    "roof" (2) replaces 3-5-4.
    """
    names = ("floor", "mid", "roof")
    return WeightedGraph((3, 4), tuple(Edge(n, 3, 4, float(l)) for n, l in zip(names, lengths)))


def random_multigraph(rng: np.random.Generator, max_vertices=8, max_edges=14,
                      low=0.1, high=10.0, loops=True) -> WeightedGraph:
    """Connected multigraph: a random spanning tree plus random extra edges.

    Extra edges may repeat a pair or (with ``loops``) be loops. Lengths are
    log-uniform on ``[low, high]``.
    """
    n = int(rng.integers(2, max_vertices + 1))
    m = int(rng.integers(n - 1, max(n - 1, max_edges) + 1))
    order = rng.permutation(n)
    pairs = []
    for k in range(1, n):
        pairs.append((int(order[k]), int(order[rng.integers(0, k)])))
    while len(pairs) < m:
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n))
        if a == b and not loops:
            continue
        pairs.append((a, b))
    pairs = [pairs[k] for k in rng.permutation(len(pairs))]
    lengths = np.exp(rng.uniform(np.log(low), np.log(high), size=len(pairs)))
    edges = tuple(Edge(f"e{k}", a, b, float(l)) for k, ((a, b), l) in enumerate(zip(pairs, lengths)))
    return WeightedGraph(tuple(range(n)), edges)


def random_corpus(seed: int = 0, count: int = 200, **kwargs) -> list:
    rng = np.random.default_rng(seed)
    return [random_multigraph(rng, **kwargs) for _ in range(count)]


def random_positively_curved(seed: int = 1, count: int = 20, max_vertices=6, max_edges=10,
                             low=0.5, high=2.0) -> list:
    """Loop-free random multigraphs with every edge curvature positive, by rejection."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        g = random_multigraph(rng, max_vertices, max_edges, low, high, loops=False)
        if np.min(curvature_vector(g.structure, g.lengths)) > 0.0:
            out.append(g)
    return out
