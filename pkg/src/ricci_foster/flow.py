"""
Ricci-Foster flow ``d l_e / dt = -K_e`` with collapse detection and surgery.

The system is integrated with classical RK4 at a base step ``dt``, shortened
near a collapse to a fraction of the time any shrinking edge needs to reach
zero at its current rate. A step that would push some length to
``collapse_epsilon`` or below is rejected, and the collapse time is found by
bisecting the step size. At a collapse the flow
either stops or contracts every collapsed edge and restarts on the quotient
graph with the surviving lengths. Curvature jumps at a surgery because
degrees change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .curvature import curvature_vector
from .errors import InvalidConfig, NumericalFailure
from .graph import ContractionMap, WeightedGraph, contract
from .resistance import ResistanceProfile

__all__ = [
    "UNTIL_COLLAPSE",
    "FlowConfig",
    "FlowSample",
    "SurgeryEvent",
    "FlowTrace",
    "flow",
    "flow_with_surgery_to_point",
    "curvature_time_derivative",
    "resistance_rates",
]

UNTIL_COLLAPSE = "until-collapse"
POINT = "point"
# Fraction of min(l_e / K_e) over shrinking edges allowed per step. Without
# it a step much longer than the shortest edge lands off the trajectory.
STEP_SAFETY = 0.25


@dataclass(frozen=True)
class FlowConfig:
    """Integrator settings.

    Parameters
    ----------
    t_end : float or "until-collapse"
        Stop time. ``"until-collapse"`` runs to the first collapse, or to a
        single point when surgery is enabled.
    dt : float
        Base RK4 step.
    sample_stride : int
        Record a sample every this many accepted steps.
    collapse_epsilon : float
        Lengths at or below this count as collapsed.
    surgery_enabled : bool
        Contract collapsed edges and keep flowing instead of stopping.
    event_tolerance : float
        Time resolution of the collapse bisection.
    sample_times : tuple of float
        Extra times at which steps are shortened to land exactly and sample.
    step_floor : float
        A collapse bisection that cannot advance beyond this is a failure.
    """

    t_end: Union[float, str] = UNTIL_COLLAPSE
    dt: float = 1e-3
    sample_stride: int = 10
    collapse_epsilon: float = 1e-9
    surgery_enabled: bool = False
    event_tolerance: float = 1e-12
    sample_times: tuple = ()
    step_floor: float = 1e-15

    def __post_init__(self):
        if isinstance(self.t_end, str):
            if self.t_end != UNTIL_COLLAPSE:
                raise InvalidConfig(f"t_end must be a number or {UNTIL_COLLAPSE!r}, got {self.t_end!r}")
        elif not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise InvalidConfig(f"t_end must be finite and nonnegative, got {self.t_end!r}")
        for name in ("dt", "collapse_epsilon", "event_tolerance", "step_floor"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise InvalidConfig(f"{name} must be positive, got {val!r}")
        if not isinstance(self.sample_stride, int) or self.sample_stride < 1:
            raise InvalidConfig(f"sample_stride must be a positive integer, got {self.sample_stride!r}")
        times = tuple(sorted(float(t) for t in self.sample_times))
        if any(not math.isfinite(t) or t < 0 for t in times):
            raise InvalidConfig("sample_times must be finite and nonnegative")
        object.__setattr__(self, "sample_times", times)

    @property
    def until_collapse(self) -> bool:
        return isinstance(self.t_end, str)

    @property
    def collapse_slack(self) -> float:
        """Length margin above epsilon still treated as collapsed at an event.

        Bisection stops with the shortest edge within about one time
        tolerance of epsilon; edges collapsing simultaneously then sit within
        round-off of it and must be contracted together.
        """
        return max(4.0 * self.event_tolerance, 1e-3 * self.collapse_epsilon)


@dataclass(frozen=True)
class FlowSample:
    """State at one instant. ``segment`` counts the surgeries before it."""

    t: float
    edge_ids: tuple
    lengths: np.ndarray
    curvatures: np.ndarray
    segment: int

    @property
    def total_length(self) -> float:
        return math.fsum(self.lengths)

    @property
    def min_curvature_ratio(self) -> float:
        """``min_e K_e / l_e``."""
        return float(np.min(self.curvatures / self.lengths))

    def length(self, edge_id) -> float:
        return float(self.lengths[self.edge_ids.index(edge_id)])

    def curvature(self, edge_id) -> float:
        return float(self.curvatures[self.edge_ids.index(edge_id)])

    def as_dict(self) -> dict:
        return dict(zip(self.edge_ids, map(float, self.lengths)))


@dataclass(frozen=True)
class SurgeryEvent:
    t: float
    contracted_edges: tuple
    collapsed_lengths: dict
    contraction: ContractionMap
    graph: WeightedGraph

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "contracted_edges": list(self.contracted_edges),
            "vertex_map": {str(k): v for k, v in self.contraction.vertex_map.items()},
        }


@dataclass(frozen=True)
class FlowTrace:
    """Samples and surgeries of one flow run.

    Sample times increase strictly within a segment. At a surgery the last
    sample of one segment and the first of the next share the event time.
    ``terminal_reason`` is ``"t_end"``, ``"collapse"`` (stopped at a
    collapse, surgery off) or ``"point"`` (everything contracted).
    """

    initial: WeightedGraph
    config: FlowConfig
    samples: tuple
    events: tuple
    terminal_state: Union[WeightedGraph, str]
    terminal_time: float
    terminal_reason: str

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def sample_at(self, t: float, which: str = "last", tol: float = 1e-12) -> FlowSample:
        """The sample recorded at time ``t``; ``which`` picks pre/post at an event."""
        hits = [s for s in self.samples if abs(s.t - t) <= tol * max(1.0, abs(t))]
        if not hits:
            raise KeyError(f"no sample at t={t}")
        return hits[-1] if which == "last" else hits[0]

    def segment(self, k: int) -> list:
        return [s for s in self.samples if s.segment == k]

    def summary(self) -> dict:
        from .io import graph_to_dict

        state = self.terminal_state
        return {
            "terminal_time": self.terminal_time,
            "terminal_state": state if isinstance(state, str) else graph_to_dict(state),
        }


def _rhs(structure, y):
    if not (y.min() > 0.0 and y.max() < math.inf):
        return None
    try:
        return -curvature_vector(structure, y)
    except NumericalFailure:
        return None


def _rk4(structure, y, h, eps, k1=None) -> Optional[np.ndarray]:
    """One RK4 step, or None if a stage leaves the domain or a length ends <= eps."""
    if k1 is None:
        k1 = _rhs(structure, y)
        if k1 is None:
            return None
    k2 = _rhs(structure, y + 0.5 * h * k1)
    if k2 is None:
        return None
    k3 = _rhs(structure, y + 0.5 * h * k2)
    if k3 is None:
        return None
    k4 = _rhs(structure, y + h * k3)
    if k4 is None:
        return None
    out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if np.min(out) <= eps:
        return None
    return out


def _step_cap(y, k1) -> float:
    shrinking = k1 < 0.0
    if not np.any(shrinking):
        return math.inf
    return STEP_SAFETY * float(np.min(y[shrinking] / -k1[shrinking]))


def _localize(structure, y, h, eps, tol, k1):
    lo, hi, y_lo = 0.0, h, y
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        trial = _rk4(structure, y, mid, eps, k1)
        if trial is None:
            hi = mid
        else:
            lo, y_lo = mid, trial
    return lo, y_lo


def flow(g: WeightedGraph, cfg: FlowConfig | None = None) -> FlowTrace:
    """Integrate the flow from ``g``.

    Samples are taken at t = 0, every ``sample_stride`` accepted steps, at
    each requested sample time, on both sides of every surgery, and at the
    end.
    """
    cfg = cfg or FlowConfig()
    eps = cfg.collapse_epsilon
    graph, s = g, g.structure
    y = g.lengths
    t, segment, steps = 0.0, 0, 0
    samples, events = [], []
    targets = [x for x in cfg.sample_times if x > 0.0]
    if not cfg.until_collapse:
        targets = [x for x in targets if x < cfg.t_end]

    def record():
        if samples and samples[-1].segment == segment and samples[-1].t == t:
            return
        curv = curvature_vector(s, y)
        samples.append(FlowSample(t, graph.edge_ids, y.copy(), curv, segment))

    def finish(state, reason):
        return FlowTrace(g, cfg, tuple(samples), tuple(events), state, t, reason)

    if graph.n_edges == 0:
        return finish(POINT, POINT)
    if np.min(y) <= eps:
        raise InvalidConfig(f"initial lengths must exceed collapse_epsilon={eps:g}")
    record()

    while True:
        if not cfg.until_collapse and t >= cfg.t_end:
            record()
            return finish(graph.with_lengths(y), "t_end")
        k1 = _rhs(s, y)
        if k1 is None:
            raise NumericalFailure(f"curvature could not be evaluated at t={t!r}")
        h, landing = min(cfg.dt, _step_cap(y, k1)), None
        # Landing times within a sliver of a step are snapped onto, so that
        # accumulated round-off does not leave a vanishing final step.
        snap = 1e-9 * cfg.dt
        if not cfg.until_collapse and t + h >= cfg.t_end - snap:
            h, landing = cfg.t_end - t, cfg.t_end
        while targets and targets[0] <= t:
            targets.pop(0)
        if targets and t + h >= targets[0] - snap:
            h, landing = targets[0] - t, targets[0]

        nxt = _rk4(s, y, h, eps, k1)
        if nxt is not None:
            y = nxt
            t = landing if landing is not None else t + h
            steps += 1
            if steps % cfg.sample_stride == 0 or (targets and t == targets[0]):
                record()
            continue

        lo, y = _localize(s, y, h, eps, cfg.event_tolerance, k1)
        t += lo
        collapsed = [k for k in range(len(y)) if y[k] <= eps + cfg.collapse_slack]
        if not collapsed:
            if lo <= cfg.step_floor:
                raise NumericalFailure(
                    f"step rejected at t={t!r} without any collapsed edge; cannot make progress")
            continue
        record()
        if not cfg.surgery_enabled:
            return finish(graph.with_lengths(y), "collapse")

        ids = [graph.edges[k].id for k in collapsed]
        new_graph, cmap = contract(graph.with_lengths(y), ids)
        if new_graph.n_edges == 0:
            return finish(POINT, POINT)
        events.append(SurgeryEvent(t, tuple(ids), {i: float(y[k]) for i, k in zip(ids, collapsed)},
                                   cmap, new_graph))
        graph, s = new_graph, new_graph.structure
        y = graph.lengths
        segment += 1
        steps = 0
        record()


def flow_with_surgery_to_point(g: WeightedGraph, cfg: FlowConfig | None = None) -> FlowTrace:
    """Flow with surgery until the graph is a single point (at time ~ total length)."""
    cfg = replace(cfg or FlowConfig(), surgery_enabled=True, t_end=UNTIL_COLLAPSE)
    trace = flow(g, cfg)
    if trace.terminal_reason != POINT:
        raise NumericalFailure(f"flow stopped with reason {trace.terminal_reason!r} before collapsing")
    return trace


def resistance_rates(g: WeightedGraph, profile: ResistanceProfile | None = None) -> np.ndarray:
    """``d omega_e / dt`` for every edge under the flow, by the chain rule."""
    profile = profile or ResistanceProfile(g)
    curv = curvature_vector(g.structure, g.lengths)
    return profile.edge_gradients @ (-curv)


def curvature_time_derivative(g: WeightedGraph, edge_id) -> float:
    """``d K_e / dt = -(omega_e / l_e^2) K_e - (1 / l_e) d omega_e / dt``.

    Zero on loops and bridges, whose curvature is length-independent.
    """
    k = g.edge_index(edge_id)
    s = g.structure
    if s.loop[k] or s.bridge[k]:
        return 0.0
    profile = ResistanceProfile(g)
    curv = curvature_vector(s, g.lengths)
    e = g.edges[k]
    omega_e = profile.omega(e.u, e.v)
    d_omega = float(profile.edge_gradients[k] @ (-curv))
    return -omega_e / e.length ** 2 * curv[k] - d_omega / e.length
