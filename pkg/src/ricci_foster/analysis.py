"""
Invariant checks, finite-difference oracles and Einstein networks.

:func:`verify_all` runs every static identity of the curvature and the
resistance theory against one graph and reports the largest violation of
each; :func:`monitor_trace` does the same for properties that hold along a
flow. Failures are data, not exceptions.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .curvature import curvature_partials, curvature_report, curvature_vector, verify_subdivision_additivity
from .errors import NoConvergence, StepTooLarge
from .flow import FlowTrace, resistance_rates
from .graph import WeightedGraph, remove_edge
from .resistance import (
    TREE_ENUMERATION_CAP,
    ResistanceProfile,
    resistance_by_trees,
    resistance_gradient,
)

__all__ = [
    "CheckResult",
    "VerificationReport",
    "EinsteinCertificate",
    "verify_all",
    "monitor_trace",
    "finite_difference",
    "einstein_check",
    "einstein_solve",
    "curvature_jacobian",
]

FD_STEP = 1e-6
FD_TOLERANCE = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    property: str
    max_violation: float
    tolerance: float
    passed: bool


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, prop, violation, tolerance):
        violation = float(violation)
        ok = bool(violation <= tolerance) and not math.isnan(violation)
        self.checks.append(CheckResult(name, prop, violation, float(tolerance), ok))

    def __getitem__(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def finite_difference(fn: Callable[[WeightedGraph], float], g: WeightedGraph, edge_id,
                      h: float = FD_STEP) -> float:
    """Central difference of ``fn`` in the length of one edge, others fixed."""
    k = g.edge_index(edge_id)
    lengths = g.lengths
    if lengths[k] <= h:
        raise StepTooLarge(f"step {h:g} is not smaller than length {lengths[k]:g} of edge {edge_id!r}")
    up, down = lengths.copy(), lengths.copy()
    up[k] += h
    down[k] -= h
    return (fn(g.with_lengths(up)) - fn(g.with_lengths(down))) / (2.0 * h)


def _relative(a, b):
    return abs(a - b) / max(1.0, abs(b))


def verify_all(g: WeightedGraph, tol: float = 1e-9, profile: ResistanceProfile | None = None,
               seed: int = 0, tree_cap: int = TREE_ENUMERATION_CAP) -> VerificationReport:
    """Check every static identity on ``g``.

    Exact identities use ``tol``; finite-difference comparisons use
    ``max(tol, 1e-6)`` relative. ``profile`` replaces the resistance data
    feeding the sum checks (used to plant a corrupted profile in tests).
    ``seed`` drives the random choices of vertex pairs and split ratios.
    """
    rng = np.random.default_rng(seed)
    report = VerificationReport()
    s = g.structure
    fresh = ResistanceProfile(g)
    profile = profile or fresh
    n_v, n_e = g.n_vertices, g.n_edges
    fd_tol = max(tol, FD_TOLERANCE)

    curv = curvature_report(g, profile)
    ratios = profile.ratios
    report.add("curvature_sum", "edge curvatures sum to 1",
               abs(curv.total - 1.0) if n_e else 0.0, tol)
    report.add("foster_resistance_sum", "sum of omega_e/l_e over non-loop edges is |V|-1",
               abs(float(np.sum(ratios[~s.loop])) - (n_v - 1)), tol)
    report.add("foster_coefficient_sum", "Foster coefficients sum to |E|-|V|+1",
               abs(float(np.sum(curv.foster)) - (n_e - n_v + 1)), tol)

    curv = curvature_report(g, fresh)
    k = curv.curvature
    report.add("curvature_bounds", "|K_e| <= 1",
               float(np.max(np.abs(k)) - 1.0) if n_e else 0.0, tol)

    viol = 0.0
    for idx in range(n_e):
        r = fresh.ratios[idx]
        if s.loop[idx]:
            viol = max(viol, abs(r))
        elif s.bridge[idx]:
            viol = max(viol, abs(r - 1.0))
        else:
            raw = fresh.omega_matrix[s.tail[idx], s.head[idx]] / g.edges[idx].length
            viol = max(viol, -raw, raw - 1.0, 0.0 if raw < 1.0 else 1.0)
    report.add("ratio_range", "0 < omega_e/l_e < 1 off bridges; exactly 1 on bridges, 0 on loops",
               viol, tol)

    om = fresh.omega_matrix
    off = ~np.eye(n_v, dtype=bool)
    viol = max(float(np.max(np.abs(om - om.T))), float(np.max(np.abs(np.diag(om)))))
    if n_v > 1 and np.min(om[off]) <= 0:
        viol = max(viol, 1.0)
    report.add("omega_metric", "omega symmetric, zero on the diagonal, positive off it", viol, tol)

    viol = 0.0
    arc_sum = dict.fromkeys(g.edge_ids, 0.0)
    for arc in curv.arcs:
        arc_sum[arc.edge_id] += arc.curvature
    for e, ke in zip(g.edges, k):
        viol = max(viol, abs(arc_sum[e.id] - ke))
    half = dict.fromkeys(g.vertices, 0.0)
    for e, r in zip(g.edges, fresh.ratios):
        half[e.u] += 0.5 * r
        half[e.v] += 0.5 * r
    for v in g.vertices:
        viol = max(viol, abs(curv.scalar[v] - (1.0 - half[v])))
    if n_e:
        viol = max(viol, abs(sum(curv.scalar.values()) - 1.0))
    report.add("arc_decomposition", "K_e is the sum of its two arcs; p_u sums outgoing arcs; sum p_u = 1",
               viol, tol)

    viol = 0.0
    for lam in (0.1, 3.0, 100.0):
        viol = max(viol, float(np.max(np.abs(curvature_vector(s, g.lengths * lam) - k), initial=0.0)))
    report.add("rescaling_invariance", "curvature unchanged under uniform rescaling", viol, tol)

    viol = 0.0
    scale = max(1.0, float(np.max(om)))
    for lam in (0.5, 2.0, 10.0):
        scaled = ResistanceProfile(g.scaled(lam)).omega_matrix
        viol = max(viol, float(np.max(np.abs(scaled - lam * om))) / (lam * scale))
    report.add("resistance_homogeneity", "omega(c*l) = c*omega(l)", viol, tol)

    grads = fresh.edge_gradients
    lengths = g.lengths
    omega_e = om[s.tail, s.head]
    viol = float(np.max(np.abs(grads @ lengths - omega_e), initial=0.0))
    report.add("euler_identity", "sum_f l_f d omega_e/d l_f = omega_e", viol, tol)

    report.add("rayleigh_monotonicity", "d omega/d l >= 0",
               max(0.0, -float(np.min(grads, initial=0.0))), 0.0)

    viol = 0.0
    for idx, e in enumerate(g.edges):
        if s.loop[idx] or s.bridge[idx]:
            continue
        w = ResistanceProfile(remove_edge(g, e.id)).omega(e.u, e.v)
        viol = max(viol, abs(omega_e[idx] - e.length * w / (e.length + w)))
    report.add("parallel_rule", "omega_e = l_e w/(l_e + w) with w the resistance of G minus e", viol, tol)

    pairs = list(itertools.combinations(g.vertices, 2))
    picked = [pairs[i] for i in rng.choice(len(pairs), size=min(3, len(pairs)), replace=False)] if pairs else []
    viol_fd, viol_kcl = 0.0, 0.0
    for x, y in picked:
        cur = fresh.current(x, y)
        viol_kcl = max(viol_kcl, cur.kirchhoff_residual())
        grad = resistance_gradient(g, x, y)
        for e in g.edges:
            fd = finite_difference(lambda gg: ResistanceProfile(gg).omega(x, y), g, e.id,
                                   h=min(FD_STEP, 0.5 * e.length))
            viol_fd = max(viol_fd, _relative(grad[e.id], fd))
    report.add("kirchhoff_current_law", "unit current is conserved at every inner vertex", viol_kcl, tol)
    report.add("gradient_vs_finite_difference", "d omega_xy/d l_e equals squared unit current",
               viol_fd, fd_tol)

    viol_fd, viol_sign = 0.0, 0.0
    for idx, e in enumerate(g.edges):
        partials = curvature_partials(g, e.id)
        for f in g.edges:
            p = partials[f.id]
            viol_sign = max(viol_sign, -p if f.id == e.id else p)
            fd = finite_difference(
                lambda gg: float(curvature_vector(gg.structure, gg.lengths)[idx]), g, f.id,
                h=min(FD_STEP, 0.5 * f.length))
            viol_fd = max(viol_fd, _relative(p, fd))
    report.add("curvature_partial_signs", "dK_e/dl_e >= 0 and dK_e/dl_f <= 0 for f != e",
               max(viol_sign, 0.0), 0.0)
    report.add("curvature_partials_vs_finite_difference", "closed-form curvature partials match differences",
               viol_fd, fd_tol)

    n_proper = int(np.sum(~s.loop))
    if n_proper <= tree_cap:
        viol = 0.0
        for x, y in pairs:
            viol = max(viol, abs(fresh.omega(x, y) - resistance_by_trees(g, x, y, cap=tree_cap)))
        report.add("spanning_tree_oracle", "Laplacian omega equals the spanning-tree ratio", viol, tol)

    viol = 0.0
    for e in g.edges:
        if e.is_loop:
            continue
        split = float(rng.choice([0.25, 0.5, 0.9]))
        viol = max(viol, verify_subdivision_additivity(g, e.id, split).max_violation())
    report.add("subdivision_additivity", "curvature and Foster coefficient add under subdivision", viol, tol)
    return report


def monitor_trace(trace: FlowTrace, tol: float = 1e-8, rate_tol: float = 1e-10) -> VerificationReport:
    """Check the properties a flow trace must satisfy.

    Total length and length bounds are checked on every sample, with the
    total-length allowance growing by ``|E| * collapse_epsilon`` at each
    surgery. The curvature-sign, monotonicity and resistance-rate checks use
    only samples before the first surgery.
    """
    report = VerificationReport()
    eps = trace.config.collapse_epsilon
    l0 = dict(zip(trace.initial.edge_ids, trace.initial.lengths))
    total0 = trace.initial.total_length
    allowance_at = []
    n_edges = trace.initial.n_edges
    for ev in trace.events:
        allowance_at.append((ev.t, n_edges * eps))
        n_edges = ev.graph.n_edges

    viol_total, viol_bounds = 0.0, 0.0
    for smp in trace.samples:
        jumps = sum(a for _, a in allowance_at[:smp.segment])
        viol_total = max(viol_total, abs(smp.total_length - (total0 - smp.t)) - jumps)
        for eid, length in zip(smp.edge_ids, smp.lengths):
            viol_bounds = max(viol_bounds, l0[eid] - smp.t - length, length - l0[eid] - smp.t)
    report.add("total_length_rate", "total length decreases at rate one", max(viol_total, 0.0), tol)
    report.add("length_bounds", "l_e(0) - t <= l_e(t) <= l_e(0) + t", max(viol_bounds, 0.0), tol)

    first = trace.segment(0)
    graph = trace.initial
    nonneg = bool(np.min(first[0].curvatures) >= 0.0) if first and len(first[0].curvatures) else False
    ratios = [smp.min_curvature_ratio for smp in first]
    drops = [max(0.0, a - b) for a, b in zip(ratios, ratios[1:])]
    report.add("min_curvature_ratio_nondecreasing", "min K_e/l_e never decreases",
               max(drops, default=0.0), tol)
    if nonneg:
        report.add("nonnegative_curvature_preserved", "nonnegative curvature stays nonnegative",
                   max(0.0, -min(float(np.min(smp.curvatures)) for smp in first)), tol)

    viol_rate, viol_min = 0.0, 0.0
    for smp in first:
        gs = graph.with_lengths(smp.lengths)
        prof = ResistanceProfile(gs)
        rates = resistance_rates(gs, prof)
        s = gs.structure
        omega_e = prof.omega_matrix[s.tail, s.head]
        if nonneg:
            viol_rate = max(viol_rate, float(np.max(rates)))
        j = int(np.argmin(smp.curvatures / smp.lengths))
        viol_min = max(viol_min, rates[j] + omega_e[j] * smp.curvatures[j] / smp.lengths[j])
    if nonneg:
        report.add("resistance_nonincreasing", "d omega_e/dt <= 0 when curvature is nonnegative",
                   max(viol_rate, 0.0), rate_tol)
    report.add("minimizer_resistance_bound", "d omega_e/dt + omega_e K_e/l_e <= 0 at the K/l minimizer",
               max(viol_min, 0.0), tol)
    return report


@dataclass(frozen=True)
class EinsteinCertificate:
    """How far ``(G, l)`` is from ``K_e = lambda * l_e`` with ``lambda = 1/sum(l)``.

    ``is_einstein`` is False when no certificate within ``tolerance`` was
    found; that is evidence against, never proof of, non-existence.
    """

    lambda_: float
    residuals: dict
    max_residual: float
    is_einstein: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.lambda_,
            "is_einstein": self.is_einstein,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "residuals": dict(self.residuals),
        }


def einstein_check(g: WeightedGraph, tol: float = 1e-10) -> EinsteinCertificate:
    # lambda is forced: summing K_e = lambda l_e over edges gives 1 = lambda * total.
    lam = 1.0 / g.total_length
    k = curvature_vector(g.structure, g.lengths)
    r = k - lam * g.lengths
    worst = float(np.max(np.abs(r), initial=0.0))
    return EinsteinCertificate(lam, dict(zip(g.edge_ids, map(float, r))), worst, worst <= tol, tol)


def curvature_jacobian(g: WeightedGraph, profile: ResistanceProfile | None = None) -> np.ndarray:
    """``D[e, f] = dK_e / dl_f`` from one factorisation (zero rows on loops and bridges)."""
    profile = profile or ResistanceProfile(g)
    s = g.structure
    lengths = g.lengths
    omega_e = profile.omega_matrix[s.tail, s.head]
    d = -profile.edge_gradients / lengths[:, None]
    d[np.diag_indices_from(d)] += omega_e / lengths ** 2
    d[s.loop | s.bridge] = 0.0
    return d


def einstein_solve(g: WeightedGraph, max_iter: int = 500, tol: float = 1e-8, theta: float = 0.5,
                   floor: float = 1e-6, initial=None):
    """Search for lengths with ``K_e = l_e`` and ``sum(l) = 1``.

    Each iteration takes a damped Newton step on ``K(l) - l = 0`` restricted
    to ``sum(l) = 1``, clamps lengths at ``floor`` and renormalises. Where
    curvature does not depend on lengths (trees, stars) the step is exactly
    ``l <- (1 - theta) l + theta K``. No global convergence is claimed.

    Returns
    -------
    lengths : dict
        Edge id -> normalised length.
    certificate : EinsteinCertificate

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations; carries the best iterate.
    """
    s = g.structure
    lengths = g.lengths if initial is None else np.asarray(
        [initial[e] for e in g.edge_ids] if isinstance(initial, dict) else initial, dtype=float)
    lengths = lengths / lengths.sum()
    m = len(lengths)
    best = None
    for _ in range(max_iter + 1):
        cur = g.with_lengths(lengths)
        cert = einstein_check(cur, tol)
        if best is None or cert.max_residual < best[1].max_residual:
            best = (dict(zip(g.edge_ids, map(float, lengths))), cert)
        if cert.is_einstein:
            return best
        prof = ResistanceProfile(cur)
        k = curvature_vector(s, lengths)
        system = np.vstack([curvature_jacobian(cur, prof) - np.eye(m), np.ones((1, m))])
        rhs = np.concatenate([lengths - k, [0.0]])
        step, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        lengths = np.maximum(lengths + theta * step, floor)
        lengths = lengths / lengths.sum()
    raise NoConvergence(
        f"no Einstein lengths within {tol:g} after {max_iter} iterations "
        f"(best max residual {best[1].max_residual:.3g}); this is not a proof that none exist",
        lengths=best[0], certificate=best[1])
