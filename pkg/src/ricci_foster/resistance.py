"""
Effective resistance on a weighted multigraph.

Each edge is a resistor whose resistance equals its length. Resistances and
unit currents come from one Cholesky factorisation of the grounded weighted
Laplacian (conductance ``1/l`` per non-loop edge, vertex 0 grounded), or
from a cancellation-free elimination when lengths span many orders. A
second, independent route enumerates spanning trees and serves as an oracle
on small graphs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import lapack

from .errors import InstanceTooLarge, NumericalFailure, SameVertex
from .graph import Structure, WeightedGraph

__all__ = [
    "ResistanceProfile",
    "CurrentVector",
    "resistance_profile",
    "resistance_by_trees",
    "tree_polynomial",
    "unit_current",
    "resistance_gradient",
    "edge_ratios",
    "grounded_inverse",
    "SOLVER_RESIDUAL",
    "TREE_ENUMERATION_CAP",
]

SOLVER_RESIDUAL = 1e-12
TREE_ENUMERATION_CAP = 16
# Length spread above which the cancellation-free elimination replaces Cholesky.
ACCURATE_SPREAD = 1e4


def _conductances(structure: Structure, lengths: np.ndarray) -> np.ndarray:
    """Total conductance between each vertex pair; the diagonal is meaningless."""
    inc = structure.incidence
    return -(inc.T @ (inc / lengths[:, None]))


def _ill_conditioned(structure: Structure, lengths: np.ndarray) -> bool:
    # Lists beat numpy reductions on a handful of edges; NaN lands on the slow path.
    proper = lengths.take(structure.proper).tolist()
    return bool(proper) and not max(proper) <= ACCURATE_SPREAD * min(proper)


def _eliminate_without_cancellation(cond: np.ndarray, ground: int) -> np.ndarray:
    """Inverse of the Laplacian grounded at ``ground``, accurate entrywise.

    Works on conductances rather than matrix entries: eliminating a vertex
    adds ``c_ik c_kj / d_k`` to the conductance between its neighbours and
    passes part of its conductance to ground along, and each pivot ``d_k``
    is re-summed from what remains. Every operation, including forming
    ``L^-T D^-1 L^-1``, combines nonnegative numbers only, so no digits are
    lost however widely the conductances vary. Rows and columns follow the
    vertex order with ``ground`` left out.
    """
    n = len(cond)
    keep = np.delete(np.arange(n), ground)
    w = cond[np.ix_(keep, keep)]
    to_ground = cond[keep, ground].copy()
    m = n - 1
    pivot = np.empty(m)
    mult = np.zeros((m, m))
    for k in range(m):
        rest = slice(k + 1, m)
        pivot[k] = w[k, rest].sum() + to_ground[k]
        mult[rest, k] = w[rest, k] / pivot[k]
        to_ground[rest] += mult[rest, k] * to_ground[k]
        w[rest, rest] += np.outer(mult[rest, k], w[k, rest])
    if not pivot.min() > 0.0:
        raise NumericalFailure("grounded Laplacian has a nonpositive pivot")
    inv_l = np.eye(m)
    for j in range(1, m):
        inv_l[j] += mult[j, :j] @ inv_l[:j]
    return (inv_l.T / pivot) @ inv_l


def _omega_by_grounding(structure: Structure, lengths: np.ndarray) -> np.ndarray:
    """All-pairs resistance read off diagonals, one grounding per vertex.

    ``omega(x, y)`` is the ``y`` diagonal entry of the inverse grounded at
    ``x``, which avoids the cancellation in ``G_xx + G_yy - 2 G_xy`` that
    ruins the resistance across very short edges.
    """
    n = structure.n_vertices
    cond = _conductances(structure, lengths)
    omega = np.zeros((n, n))
    for x in range(n - 1):
        diag = _eliminate_without_cancellation(cond, x).diagonal()
        omega[x, x + 1:] = diag[x:]
    return omega + omega.T


def grounded_inverse(structure: Structure, lengths: np.ndarray) -> np.ndarray:
    """Inverse of the Laplacian with vertex 0 grounded, padded back to V x V.

    With ``G`` the returned matrix, ``omega(x, y) = G[x,x] + G[y,y] - 2 G[x,y]``
    and ``G @ (1_x - 1_y)`` are node potentials for a unit current x -> y.

    Raises
    ------
    NumericalFailure
        If the factorisation fails or its normwise relative residual exceeds
        ``SOLVER_RESIDUAL``.
    """
    n = structure.n_vertices
    green = np.zeros((n, n))
    if n == 1:
        return green
    inv, _ = _grounded(structure, np.asarray(lengths, dtype=float))
    green[1:, 1:] = inv
    return green


def _grounded(structure: Structure, lengths: np.ndarray):
    """Grounded inverse without padding, and whether lengths were ill-conditioned."""
    n = structure.n_vertices
    inc = structure.incidence[:, 1:]
    reduced = inc.T @ (inc / lengths[:, None])
    ill = _ill_conditioned(structure, lengths)
    if ill:
        inv = _eliminate_without_cancellation(_conductances(structure, lengths), 0)
    else:
        # LAPACK Cholesky factor and inverse directly; the scipy wrappers cost
        # more than the factorisation itself at these sizes.
        chol, info = lapack.dpotrf(reduced, lower=1)
        if info == 0:
            inv, info = lapack.dpotri(chol, lower=1)
        if info != 0:
            raise NumericalFailure(f"grounded Laplacian is not positive definite (LAPACK info {info})")
        # dpotri fills the lower triangle and leaves the cleaned upper one zero.
        inv = inv + inv.T
        inv.flat[::n] *= 0.5
    # Normwise relative residual ||A X - I|| / (m ||A|| ||X||) in the max-entry
    # norm, for which ||A X|| <= m ||A|| ||X|| holds with m = V - 1. A grounded
    # Laplacian is diagonally dominant and its inverse peaks on the diagonal,
    # so both max-norms sit there.
    resid = reduced @ inv
    resid.flat[::n] -= 1.0
    scale = (n - 1) * max(reduced.diagonal().tolist()) * max(inv.diagonal().tolist())
    resid = np.abs(resid).max() / scale
    if not (resid <= SOLVER_RESIDUAL and scale < math.inf):
        raise NumericalFailure(f"Laplacian solve residual {resid:.3g} exceeds {SOLVER_RESIDUAL:g}")
    return inv, ill


def _omega_from_green(green: np.ndarray) -> np.ndarray:
    d = green.diagonal()
    return d[:, None] + d[None, :] - 2.0 * green


def _ratios_from_omega(structure: Structure, omega_e: np.ndarray, lengths) -> np.ndarray:
    ratios = np.minimum(np.maximum(omega_e / lengths, 0.0), 1.0)
    # Pinned combinatorially: avoids drift where the parallel rule is indeterminate.
    ratios[structure.bridge] = 1.0
    ratios[structure.loop] = 0.0
    return ratios


def _conditioned_lengths(structure: Structure, lengths: np.ndarray) -> np.ndarray:
    """Lengths rescaled to mean one within each biconnected block.

    The ratio of an edge depends only on the lengths in its own block and is
    invariant under rescaling that block. A block shrinking towards collapse
    would otherwise put huge conductances into the Laplacian and cost many
    digits in the ratios of every other block.
    """
    if len(structure.block_size) <= 1:
        return lengths
    means = np.bincount(structure.block, lengths) / structure.block_size
    return lengths / means[structure.block]


def edge_ratios(structure: Structure, lengths) -> np.ndarray:
    """``omega_e / l_e`` for every edge, bridges pinned to 1 and loops to 0."""
    lengths = _conditioned_lengths(structure, np.asarray(lengths, dtype=float))
    t, h = structure.tail, structure.head
    if structure.n_vertices == 1:
        omega_e = np.zeros(len(lengths))
    else:
        inv, ill = _grounded(structure, lengths)
        if ill:
            omega_e = _omega_by_grounding(structure, lengths)[t, h]
        else:
            green = np.zeros((structure.n_vertices,) * 2)
            green[1:, 1:] = inv
            d = green.diagonal()
            omega_e = d[t] + d[h] - 2.0 * green[t, h]
    return _ratios_from_omega(structure, omega_e, lengths)


@dataclass(frozen=True)
class CurrentVector:
    """Edge currents for one unit of current sent from ``source`` to ``sink``.

    ``currents[k]`` is signed along the stored orientation ``u -> v`` of
    edge ``edge_ids[k]``.
    """

    source: object
    sink: object
    edge_ids: tuple
    currents: np.ndarray
    graph: WeightedGraph

    def __getitem__(self, edge_id):
        return float(self.currents[self.graph.edge_index(edge_id)])

    def kirchhoff_residual(self) -> float:
        """Largest violation of current conservation over all vertices."""
        s = self.graph.structure
        net = np.zeros(s.n_vertices)
        np.add.at(net, s.tail, self.currents)
        np.add.at(net, s.head, -self.currents)
        net[s.index[self.source]] -= 1.0
        net[s.index[self.sink]] += 1.0
        return float(np.max(np.abs(net)))


class ResistanceProfile:
    """All-pairs effective resistances of one graph, from a single factorisation.

    Safe for concurrent reads; nothing is mutated after construction except
    lazily cached derived arrays.
    """

    def __init__(self, graph: WeightedGraph, green: np.ndarray | None = None):
        self.graph = graph
        s = graph.structure
        self._lengths = graph.lengths
        self.green = grounded_inverse(s, self._lengths) if green is None else green
        if _ill_conditioned(s, self._lengths):
            self.omega_matrix = _omega_by_grounding(s, self._lengths)
        else:
            self.omega_matrix = _omega_from_green(self.green)
        if len(s.block_size) > 1:
            self.ratios = edge_ratios(s, self._lengths)
        else:
            self.ratios = _ratios_from_omega(s, self.omega_matrix[s.tail, s.head], self._lengths)

    def omega(self, x, y) -> float:
        i, j = self.graph.vertex_index(x), self.graph.vertex_index(y)
        return float(self.omega_matrix[i, j])

    def ratio(self, edge_id) -> float:
        return float(self.ratios[self.graph.edge_index(edge_id)])

    def edge_omega(self, edge_id) -> float:
        """Effective resistance between the endpoints of an edge."""
        e = self.graph.edge(edge_id)
        return self.omega(e.u, e.v)

    def potentials(self, x, y) -> np.ndarray:
        i, j = self.graph.vertex_index(x), self.graph.vertex_index(y)
        return self.green[:, i] - self.green[:, j]

    def current(self, x, y) -> CurrentVector:
        if x == y:
            raise SameVertex(f"source and sink are both {x!r}")
        phi = self.potentials(x, y)
        s = self.graph.structure
        i = (phi[s.tail] - phi[s.head]) / self._lengths
        i[s.loop] = 0.0
        return CurrentVector(x, y, self.graph.edge_ids, i, self.graph)

    @cached_property
    def transfer_matrix(self) -> np.ndarray:
        """``T[f, e]``: current through edge f when a unit current crosses edge e.

        Orientation follows each edge's stored ``u -> v``. Squared entries are
        ``d omega_e / d l_f``. Columns for loops are zero.
        """
        inc = self.graph.structure.incidence
        return (inc @ self.green @ inc.T) / self._lengths[:, None]

    @cached_property
    def edge_gradients(self) -> np.ndarray:
        """``J[e, f] = d omega_e / d l_f`` for all edge pairs."""
        return self.transfer_matrix.T ** 2


def resistance_profile(g: WeightedGraph) -> ResistanceProfile:
    return ResistanceProfile(g)


def unit_current(g: WeightedGraph, x, y) -> CurrentVector:
    g.vertex_index(x)
    g.vertex_index(y)
    if x == y:
        raise SameVertex(f"source and sink are both {x!r}")
    return ResistanceProfile(g).current(x, y)


def resistance_gradient(g: WeightedGraph, x, y) -> dict:
    """``d omega_xy / d l_e`` for every edge, as the squared unit current."""
    cur = unit_current(g, x, y)
    return {eid: float(c * c) for eid, c in zip(cur.edge_ids, cur.currents)}


# -- spanning-tree route ------------------------------------------------------

def _tree_sum(n: int, edges: list) -> float:
    """Sum over spanning trees of the product of lengths of edges outside the tree.

    ``edges`` holds ``(a, b, length)`` with integer endpoints in ``range(n)``;
    loops (``a == b``) never enter a tree and multiply every term.
    """
    loop_factor = math.prod(l for a, b, l in edges if a == b)
    proper = [(a, b, l) for a, b, l in edges if a != b]
    if n == 1:
        return loop_factor * math.prod(l for _, _, l in proper)
    total = 0.0
    idx = range(len(proper))
    for tree in itertools.combinations(idx, n - 1):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        ok = True
        for k in tree:
            ra, rb = find(proper[k][0]), find(proper[k][1])
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            chosen = set(tree)
            total += math.prod(proper[k][2] for k in idx if k not in chosen)
    return loop_factor * total


def tree_polynomial(g: WeightedGraph) -> float:
    """Weighted spanning-tree sum over complements, loops included."""
    s = g.structure
    edges = [(int(a), int(b), e.length) for a, b, e in zip(s.tail, s.head, g.edges)]
    return _tree_sum(s.n_vertices, edges)


def resistance_by_trees(g: WeightedGraph, x, y, cap: int = TREE_ENUMERATION_CAP) -> float:
    """Effective resistance as a ratio of spanning-tree sums, by brute force.

    Loops of ``g`` multiply numerator and denominator alike, so they are
    dropped before enumerating. Edges joining ``x`` and ``y`` become loops
    of the identified graph and stay in its sum.

    Raises
    ------
    InstanceTooLarge
        If ``g`` has more than ``cap`` non-loop edges.
    """
    s = g.structure
    i, j = g.vertex_index(x), g.vertex_index(y)
    proper = [(int(a), int(b), e.length)
              for a, b, e in zip(s.tail, s.head, g.edges) if a != b]
    if len(proper) > cap:
        raise InstanceTooLarge(
            f"{len(proper)} non-loop edges exceeds the enumeration cap of {cap}")
    if i == j:
        return 0.0
    n = s.n_vertices
    denom = _tree_sum(n, proper)
    # Identify j with i, then compact labels to range(n - 1).
    relabel = {}
    for v in range(n):
        w = i if v == j else v
        relabel.setdefault(w, len(relabel))
    merged = [(relabel[i if a == j else a], relabel[i if b == j else b], l) for a, b, l in proper]
    return _tree_sum(n - 1, merged) / denom
