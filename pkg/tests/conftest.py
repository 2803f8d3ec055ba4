import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ricci_foster import gallery
from ricci_foster.graph import Edge, WeightedGraph
from ricci_foster.io import graph_from_dict

DATA = Path(__file__).parent / "data"

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def figure_graphs():
    return {
        "tree": gallery.branched_tree(),
        "barbell": gallery.barbell(),
        "minimal_barbell": gallery.minimal_barbell(),
        "house": gallery.house(),
        "theta": gallery.theta(),
    }


@pytest.fixture(scope="session")
def corpus():
    data = json.loads((DATA / "corpus_seed0.json").read_text())
    return [graph_from_dict(d) for d in data["graphs"]]


@st.composite
def multigraphs(draw, max_vertices=7, max_extra=6, loops=True, min_length=0.05, max_length=20.0):
    """Connected multigraph: random spanning tree plus parallel edges and loops."""
    n = draw(st.integers(1 if loops else 2, max_vertices))
    length = st.floats(min_length, max_length, allow_nan=False, allow_infinity=False)
    pairs = [(k, draw(st.integers(0, k - 1))) for k in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=max_extra))
    if not loops:
        extra = [(a, b) for a, b in extra if a != b]
    pairs += extra
    if not pairs:
        pairs = [(0, 0)]
    edges = tuple(Edge(f"e{k}", a, b, draw(length)) for k, (a, b) in enumerate(pairs))
    return WeightedGraph(tuple(range(n)), edges)


def seeded_graphs(**kwargs):
    return st.integers(0, 2**32 - 1).map(
        lambda s: gallery.random_multigraph(np.random.default_rng(s), **kwargs))
