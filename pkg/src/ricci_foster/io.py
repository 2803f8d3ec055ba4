"""Reading and writing graphs: canonical JSON and whitespace edge lists."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

from .errors import GraphError, NonpositiveLength
from .graph import Edge, WeightedGraph

__all__ = [
    "graph_to_dict",
    "graph_from_dict",
    "dumps_graph",
    "loads_graph",
    "parse_edgelist",
    "format_float",
    "atomic_write",
]


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def graph_to_dict(g: WeightedGraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "u": e.u, "v": e.v, "length": e.length} for e in g.edges],
    }


def _vertex_label(raw, where):
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise GraphError(f"{where}: vertex id must be a string or integer, got {raw!r}")
    return raw


def graph_from_dict(data) -> WeightedGraph:
    if not isinstance(data, dict) or "edges" not in data:
        raise GraphError("graph JSON must be an object with 'vertices' and 'edges'")
    raw_edges = data["edges"]
    if not isinstance(raw_edges, list):
        raise GraphError("'edges' must be a list")
    edges = []
    for k, item in enumerate(raw_edges):
        if not isinstance(item, dict):
            raise GraphError(f"edge #{k} is not an object")
        missing = {"u", "v", "length"} - item.keys()
        if missing:
            raise GraphError(f"edge #{k} is missing {sorted(missing)}")
        eid = item.get("id", f"e{k}")
        if not isinstance(eid, str):
            raise GraphError(f"edge #{k}: id must be a string, got {eid!r}")
        length = item["length"]
        if isinstance(length, bool) or not isinstance(length, (int, float)):
            raise NonpositiveLength(f"edge {eid!r}: length {length!r} is not a number")
        edges.append(Edge(eid, _vertex_label(item["u"], f"edge {eid!r}"),
                          _vertex_label(item["v"], f"edge {eid!r}"), float(length)))
    if "vertices" in data:
        if not isinstance(data["vertices"], list):
            raise GraphError("'vertices' must be a list")
        vertices = [_vertex_label(v, "vertices") for v in data["vertices"]]
    else:
        vertices = list(dict.fromkeys(w for e in edges for w in (e.u, e.v)))
    return WeightedGraph(tuple(vertices), tuple(edges))


def dumps_graph(g: WeightedGraph, indent: int | None = 2) -> str:
    return json.dumps(graph_to_dict(g), indent=indent)


def loads_graph(text: str) -> WeightedGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from None
    return graph_from_dict(data)


def parse_edgelist(text: str) -> WeightedGraph:
    """Parse ``u v length [id]`` lines; ``#`` starts a comment.

    Vertex labels stay strings. Lines without an id get ``e<k>`` where ``k``
    counts edges in file order.
    """
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise GraphError(f"line {lineno}: expected 'u v length [id]', got {line!r}")
        try:
            length = float(parts[2])
        except ValueError:
            raise NonpositiveLength(f"line {lineno}: length {parts[2]!r} is not a number") from None
        if not math.isfinite(length) or length <= 0:
            raise NonpositiveLength(f"line {lineno}: length must be positive and finite, got {parts[2]}")
        eid = parts[3] if len(parts) == 4 else f"e{len(edges)}"
        edges.append(Edge(eid, parts[0], parts[1], length))
    if not edges:
        raise GraphError("edge list contains no edges")
    vertices = tuple(dict.fromkeys(w for e in edges for w in (e.u, e.v)))
    return WeightedGraph(vertices, tuple(edges))


def atomic_write(path, text: str) -> None:
    """Write via a temporary sibling file and rename, so readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
