"""
Ricci-Foster edge curvature and the quantities built from it.

For an edge ``e = uv``::

    K_e = 1/deg(u) + 1/deg(v) - omega_uv / l_e

Each edge splits into two arcs ``K(u->v) = 1/deg(u) - omega_uv / (2 l_e)``;
summing the arcs leaving a vertex gives its scalar curvature. The Foster
coefficient ``F(e) = 1 - omega_e / l_e`` is the share of the cycle rank
carried by ``e``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import Structure, WeightedGraph, remove_edge, subdivide
from .resistance import ResistanceProfile, edge_ratios

__all__ = [
    "Arc",
    "CurvatureReport",
    "SubdivisionCheck",
    "curvature_report",
    "curvature_of_edge",
    "curvature_vector",
    "curvature_partials",
    "verify_subdivision_additivity",
]


class Arc(NamedTuple):
    edge_id: str
    tail: object
    head: object
    curvature: float


def _from_ratios(structure: Structure, ratios: np.ndarray) -> np.ndarray:
    return structure.degree_term - ratios


def curvature_vector(structure: Structure, lengths) -> np.ndarray:
    """Edge curvatures for a topology and a length vector (flow hot path)."""
    return _from_ratios(structure, edge_ratios(structure, lengths))


@dataclass(frozen=True)
class CurvatureReport:
    """Curvature data for one weighted graph.

    Per-edge arrays follow ``graph.edges`` order.

    Attributes
    ----------
    curvature : ndarray
        Edge curvature ``K_e``.
    foster : ndarray
        Foster coefficient ``F(e)`` in [0, 1].
    ratios : ndarray
        Resistance ratio ``omega_e / l_e`` used for both of the above.
    scalar : dict
        Vertex -> scalar curvature ``p_u``.
    arcs : tuple of Arc
        Two arcs per edge; a loop contributes two arcs at its vertex.
    """

    graph: WeightedGraph
    curvature: np.ndarray
    foster: np.ndarray
    ratios: np.ndarray
    scalar: dict
    arcs: tuple

    @property
    def edge_ids(self) -> tuple:
        return self.graph.edge_ids

    @property
    def total(self) -> float:
        return float(np.sum(self.curvature))

    def __getitem__(self, edge_id) -> float:
        return float(self.curvature[self.graph.edge_index(edge_id)])

    def foster_of(self, edge_id) -> float:
        return float(self.foster[self.graph.edge_index(edge_id)])

    def as_dict(self) -> dict:
        return {
            "edges": [
                {"id": e.id, "u": e.u, "v": e.v, "length": e.length,
                 "curvature": float(k), "foster": float(f)}
                for e, k, f in zip(self.graph.edges, self.curvature, self.foster)
            ],
            "vertices": [{"id": v, "scalar_curvature": p} for v, p in self.scalar.items()],
            "total_curvature": self.total,
            "total_foster": float(np.sum(self.foster)),
        }


def curvature_report(g: WeightedGraph, profile: ResistanceProfile | None = None) -> CurvatureReport:
    """Edge, arc and vertex curvatures of ``g``.

    ``profile`` may be passed to reuse an existing factorisation.
    """
    s = g.structure
    ratios = np.array(profile.ratios if profile is not None else edge_ratios(s, g.lengths))
    curv = _from_ratios(s, ratios)
    arcs = []
    scalar = dict.fromkeys(g.vertices, 0.0)
    for e, r in zip(g.edges, ratios):
        for tail, head in ((e.u, e.v), (e.v, e.u)):
            k = 1.0 / s.degree[s.index[tail]] - 0.5 * r
            arcs.append(Arc(e.id, tail, head, float(k)))
            scalar[tail] += float(k)
    return CurvatureReport(g, curv, 1.0 - ratios, ratios, scalar, tuple(arcs))


def curvature_of_edge(g: WeightedGraph, edge_id) -> float:
    k = g.edge_index(edge_id)
    return float(curvature_vector(g.structure, g.lengths)[k])


def curvature_partials(g: WeightedGraph, edge_id) -> dict:
    """``d K_e / d l_f`` for every edge ``f``, from the deletion closed forms.

    With ``w = omega_e(G \\ e)`` the diagonal entry is ``w / (l_e + w)^2``
    and an off-diagonal entry is ``-l_e / (l_e + w)^2 * d w / d l_f``; the
    latter derivative is a squared unit current in ``G \\ e``. Loops and
    bridges have length-independent curvature, so their map is all zeros.
    """
    idx = g.edge_index(edge_id)
    e = g.edges[idx]
    s = g.structure
    if s.loop[idx] or s.bridge[idx]:
        return {f.id: 0.0 for f in g.edges}
    deleted = ResistanceProfile(remove_edge(g, edge_id))
    w = deleted.omega(e.u, e.v)
    cur = deleted.current(e.u, e.v)
    denom = (e.length + w) ** 2
    out = {}
    for f in g.edges:
        if f.id == edge_id:
            out[f.id] = w / denom
        else:
            out[f.id] = -e.length / denom * cur[f.id] ** 2
    return out


@dataclass(frozen=True)
class SubdivisionCheck:
    """Curvature and Foster coefficient of an edge against the sums over its halves."""

    curvature_lhs: float
    curvature_rhs: float
    foster_lhs: float
    foster_rhs: float

    def __iter__(self):
        yield self.curvature_lhs
        yield self.curvature_rhs

    def max_violation(self) -> float:
        return max(abs(self.curvature_lhs - self.curvature_rhs),
                   abs(self.foster_lhs - self.foster_rhs))


def verify_subdivision_additivity(g: WeightedGraph, edge_id, split: float = 0.5) -> SubdivisionCheck:
    """Compare ``K_e`` on ``g`` with ``K_e1 + K_e2`` after subdividing ``e``.

    Unpacks as ``(lhs, rhs)`` for the curvature; the Foster pair is on the
    returned object.
    """
    before = curvature_report(g)
    h = subdivide(g, edge_id, split)
    after = curvature_report(h)
    halves = [eid for eid in h.edge_ids if eid not in set(g.edge_ids)]
    return SubdivisionCheck(
        before[edge_id],
        sum(after[eid] for eid in halves),
        before.foster_of(edge_id),
        sum(after.foster_of(eid) for eid in halves),
    )
