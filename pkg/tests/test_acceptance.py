"""
Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s`` or
``python3 tests/test_acceptance.py``.
"""

import itertools
import sys
import time
from fractions import Fraction as Fr

import numpy as np
import pytest

from ricci_foster import gallery
from ricci_foster.analysis import einstein_check, einstein_solve, finite_difference
from ricci_foster.curvature import curvature_partials, curvature_report, curvature_vector
from ricci_foster.flow import FlowConfig, curvature_time_derivative, flow, flow_with_surgery_to_point
from ricci_foster.resistance import (
    ResistanceProfile,
    resistance_by_trees,
    resistance_gradient,
    resistance_profile,
)

from conftest import figure_graphs


def report(capsys, n, title, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title}: {detail}")
    assert ok, detail


NAMED = {
    "tree": {"AB": Fr(1, 2), "BC": Fr(-1, 6), "CD": Fr(-1, 6), "DE": Fr(0), "EF": Fr(1, 2), "CG": Fr(1, 3)},
    "barbell": {"31": Fr(1, 6), "12": Fr(1, 3), "23": Fr(1, 6), "34": Fr(-1, 3),
                "45": Fr(1, 6), "56": Fr(1, 3), "64": Fr(1, 6)},
    "house": {"12": Fr(3, 11), "24": Fr(7, 66), "43": Fr(4, 33), "31": Fr(7, 66),
              "35": Fr(13, 66), "54": Fr(13, 66)},
    "theta": {"floor": Fr(16, 33), "mid": Fr(4, 33), "roof": Fr(13, 33)},
}


@pytest.fixture(scope="module")
def traces():
    """Every flow run by this module, shared with the total-length criterion."""
    runs = {}
    runs["tree"] = flow(gallery.branched_tree(), FlowConfig(t_end=1.9, dt=1e-3, sample_times=(0.5, 1.0, 1.5)))
    runs["tree_surgery"] = flow_with_surgery_to_point(gallery.branched_tree(), FlowConfig(dt=1e-3))
    runs["barbell_loops"] = flow(gallery.minimal_barbell(), FlowConfig(dt=1e-3, sample_times=(0.5, 1.0, 1.5)))
    for k, lengths in enumerate([(1.0, 1.0, 1.0), (0.3, 1.7, 2.2, 0.9), (5.0, 0.1, 2.0, 3.0, 1.0)]):
        runs[f"cycle{k}"] = flow(gallery.cycle(lengths),
                                 FlowConfig(t_end=0.9 * sum(lengths), dt=1e-3, sample_times=(0.5, 1.0, 1.5)))
    runs["house"] = flow(gallery.house(), FlowConfig(dt=1e-2))
    for k, g in enumerate(gallery.random_positively_curved(seed=1, count=20)):
        runs[f"positive{k}"] = flow(g, FlowConfig(dt=1e-2))
    runs["barbell_surgery"] = flow_with_surgery_to_point(gallery.barbell(), FlowConfig(dt=1e-2))
    return runs


def test_criterion_01_named_graph_curvatures(capsys):
    worst, slowest = 0.0, 0.0
    graphs = figure_graphs()
    for name, expected in NAMED.items():
        t0 = time.perf_counter()
        rep = curvature_report(graphs[name])
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, max(abs(rep[e] - float(v)) for e, v in expected.items()))
    ok = worst <= 1e-9 and slowest < 0.05
    report(capsys, 1, "named graph curvatures", ok, f"max error {worst:.2e}, slowest {slowest * 1e3:.2f} ms")


def test_criterion_02_curvature_and_foster_sums(capsys, corpus):
    t0 = time.perf_counter()
    worst = 0.0
    for g in list(figure_graphs().values()) + corpus:
        prof = resistance_profile(g)
        k = curvature_report(g, prof)
        worst = max(worst, abs(k.total - 1.0),
                    abs(prof.ratios[~g.structure.loop].sum() - (g.n_vertices - 1)))
    elapsed = time.perf_counter() - t0
    assert all(g.n_vertices <= 8 for g in corpus) and len(corpus) == 200
    ok = worst <= 1e-9 and elapsed < 10.0
    report(capsys, 2, "curvature sum 1 and Foster sum |V|-1", ok,
           f"max error {worst:.2e} over {len(corpus) + 5} graphs in {elapsed:.2f} s")


def test_criterion_03_tree_oracle(capsys, corpus):
    worst, checked = 0.0, 0
    for g in corpus:
        if np.sum(~g.structure.loop) > 16:
            continue
        checked += 1
        prof = resistance_profile(g)
        for x, y in itertools.combinations(g.vertices, 2):
            worst = max(worst, abs(prof.omega(x, y) - resistance_by_trees(g, x, y)))
    ok = worst <= 1e-10 and checked > 0
    report(capsys, 3, "Laplacian vs spanning-tree resistance", ok, f"max error {worst:.2e} on {checked} graphs")


def test_criterion_04_closed_form_flows(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    tree = flow(gallery.branched_tree(), FlowConfig(t_end=1.9, dt=1e-3, sample_times=(0.5, 1.0, 1.5)))
    for t in (0.5, 1.0, 1.5):
        exact = {"AB": 1 - t / 2, "BC": 1 + t / 6, "CD": 1 + t / 6, "DE": 1.0, "EF": 1 - t / 2, "CG": 1 - t / 3}
        got = tree.sample_at(t).as_dict()
        worst = max(worst, max(abs(got[e] - v) for e, v in exact.items()))
    for lengths in [(1.0, 1.0, 1.0), (0.3, 1.7, 2.2, 0.9), (5.0, 0.1, 2.0, 3.0, 1.0)]:
        g = gallery.cycle(lengths)
        lam = 1.0 / g.total_length
        trace = flow(g, FlowConfig(t_end=0.9 * g.total_length, dt=1e-3, sample_times=(0.5, 1.0, 1.5)))
        for smp in trace.samples:
            worst = max(worst, float(np.max(np.abs(smp.lengths - g.lengths * (1 - lam * smp.t)))))
    barbell = flow(gallery.minimal_barbell(), FlowConfig(dt=1e-3, sample_times=(0.5, 1.0, 1.5)))
    for t in (0.5, 1.0, 1.5):
        smp = barbell.sample_at(t)
        worst = max(worst, abs(smp.length("loop3") - (3 - 2 * t / 3)),
                    abs(smp.length("loop4") - (3 - 2 * t / 3)), abs(smp.length("34") - (1 + t / 3)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 5.0
    report(capsys, 4, "closed-form flows (tree, cycles, barbell)", ok,
           f"max error {worst:.2e} in {elapsed:.2f} s")


def test_criterion_05_surgery_timeline(capsys, traces):
    trace = traces["tree_surgery"]
    times = [ev.t for ev in trace.events]
    time_err = max(abs(a - b) for a, b in zip(times, [2, 3, 4, 5])) if len(times) == 4 else np.inf
    at3 = trace.sample_at(times[1], "last").as_dict() if len(times) > 1 else {}
    length_err = max((abs(at3.get(e, np.inf) - v) for e, v in {"BC": 1.0, "CD": 1.5, "DE": 0.5}.items()))
    length_err = length_err if set(at3) == {"BC", "CD", "DE"} else np.inf
    end_err = abs(trace.terminal_time - 6.0)
    ok = (time_err <= 1e-5 and length_err <= 1e-6 and end_err <= 1e-6 and trace.terminal_state == "point")
    report(capsys, 5, "surgery timeline of the branched tree", ok,
           f"event times {', '.join(f'{t:.9f}' for t in times)}; lengths after the t=3 surgery "
           f"err {length_err:.2e}; point at {trace.terminal_time:.9f}")


def test_criterion_06_total_length_rate(capsys, traces):
    worst = 0.0
    for trace in traces.values():
        total0 = trace.initial.total_length
        eps = trace.config.collapse_epsilon
        allowance, n_edges = [0.0], trace.initial.n_edges
        for ev in trace.events:
            allowance.append(allowance[-1] + n_edges * eps)
            n_edges = ev.graph.n_edges
        for smp in trace.samples:
            excess = abs(smp.total_length - total0 + smp.t) - allowance[smp.segment]
            worst = max(worst, excess)
    ok = worst <= 1e-8
    report(capsys, 6, "total length decreases at rate one", ok,
           f"max excess {max(worst, 0.0):.2e} over {len(traces)} traces")


def test_criterion_07_nonnegative_curvature_preserved(capsys, traces):
    names = ["house"] + [f"positive{k}" for k in range(20)]
    min_k, worst_drop = np.inf, 0.0
    for name in names:
        first = traces[name].segment(0)
        assert np.min(first[0].curvatures) >= 0.0
        min_k = min(min_k, min(float(np.min(s.curvatures)) for s in first))
        ratios = [s.min_curvature_ratio for s in first]
        worst_drop = max([worst_drop] + [a - b for a, b in zip(ratios, ratios[1:])])
    ok = min_k >= -1e-8 and worst_drop <= 1e-8
    report(capsys, 7, "nonnegative curvature preserved", ok,
           f"min sampled K {min_k:.2e}, largest drop in min K/l {worst_drop:.2e} on {len(names)} graphs")


def test_criterion_08_derivative_identities(capsys, corpus):
    graphs = [gallery.house(), gallery.theta(), gallery.barbell()] + corpus[:10]
    grad_err = part_err = euler_err = 0.0
    for g in graphs:
        prof = resistance_profile(g)
        s = g.structure
        omega_e = prof.omega_matrix[s.tail, s.head]
        euler_err = max(euler_err, float(np.max(np.abs(prof.edge_gradients @ g.lengths - omega_e))))
        x, y = g.vertices[0], g.vertices[-1]
        if x != y:
            grad = resistance_gradient(g, x, y)
            for e in g.edges:
                fd = finite_difference(lambda gg: ResistanceProfile(gg).omega(x, y), g, e.id,
                                       h=min(1e-6, e.length / 2))
                grad_err = max(grad_err, abs(grad[e.id] - fd))
        for idx, e in enumerate(g.edges):
            closed = curvature_partials(g, e.id)
            for f in g.edges:
                fd = finite_difference(lambda gg: curvature_vector(gg.structure, gg.lengths)[idx], g, f.id,
                                       h=min(1e-6, f.length / 2))
                part_err = max(part_err, abs(closed[f.id] - fd))
    dk_err = 0.0
    h = 1e-4
    for g in [gallery.house(), gallery.theta(), gallery.complete(4).with_lengths([1, 2, 3, 1, 2, 3])]:
        trace = flow(g, FlowConfig(t_end=2 * h, dt=h / 8, sample_times=(h,)))
        k0, k2 = trace.sample_at(0.0).curvatures, trace.sample_at(2 * h).curvatures
        mid = g.with_lengths(trace.sample_at(h).lengths)
        for idx, eid in enumerate(g.edge_ids):
            dk_err = max(dk_err, abs(curvature_time_derivative(mid, eid) - (k2[idx] - k0[idx]) / (2 * h)))
    ok = grad_err <= 1e-6 and part_err <= 1e-6 and euler_err <= 1e-8 and dk_err <= 1e-5
    report(capsys, 8, "derivative identities", ok,
           f"gradient {grad_err:.2e}, partials {part_err:.2e}, Euler {euler_err:.2e}, dK/dt {dk_err:.2e}")


def test_criterion_09_rescaling_invariance(capsys, corpus):
    worst = 0.0
    for g in list(figure_graphs().values()) + corpus:
        base = curvature_report(g)
        for lam in (0.1, 3.0, 100.0):
            rep = curvature_report(g.scaled(lam))
            worst = max(worst, float(np.max(np.abs(rep.curvature - base.curvature))),
                        float(np.max(np.abs(rep.foster - base.foster))),
                        max(abs(rep.scalar[v] - base.scalar[v]) for v in g.vertices))
    ok = worst <= 1e-10
    report(capsys, 9, "rescaling invariance", ok, f"max change {worst:.2e}")


def test_criterion_10_einstein_detection(capsys):
    rng = np.random.default_rng(10)
    cycle_worst = 0.0
    all_einstein = True
    for n in range(1, 10):
        cert = einstein_check(gallery.cycle(list(rng.uniform(0.1, 10.0, n))))
        all_einstein &= cert.is_einstein
        cycle_worst = max(cycle_worst, cert.max_residual)
    k4 = gallery.complete(4)
    k4_worst = 0.0
    for seed in range(5):
        start = k4.lengths * np.exp(np.random.default_rng(seed).uniform(-0.5, 0.5, 6))
        _, cert = einstein_solve(k4, max_iter=500, tol=1e-8, initial=start)
        k4_worst = max(k4_worst, cert.max_residual)
    ok = all_einstein and cycle_worst <= 1e-10 and k4_worst < 1e-8
    report(capsys, 10, "Einstein detection", ok,
           f"cycle residual {cycle_worst:.2e}, K4 residual {k4_worst:.2e} within 500 iterations")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
