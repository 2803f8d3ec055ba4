"""Ricci-Foster curvature and Ricci flow on weighted multigraphs."""

from .analysis import (
    EinsteinCertificate,
    VerificationReport,
    einstein_check,
    einstein_solve,
    finite_difference,
    monitor_trace,
    verify_all,
)
from .curvature import (
    CurvatureReport,
    curvature_of_edge,
    curvature_partials,
    curvature_report,
    verify_subdivision_additivity,
)
from .errors import *  # noqa: F401,F403
from .flow import (
    UNTIL_COLLAPSE,
    FlowConfig,
    FlowSample,
    FlowTrace,
    SurgeryEvent,
    curvature_time_derivative,
    flow,
    flow_with_surgery_to_point,
)
from .graph import (
    ContractionMap,
    Edge,
    WeightedGraph,
    contract,
    degree,
    is_bridge,
    remove_edge,
    subdivide,
    suppress_degree_two,
    validate,
)
from .resistance import (
    CurrentVector,
    ResistanceProfile,
    resistance_by_trees,
    resistance_gradient,
    resistance_profile,
    tree_polynomial,
    unit_current,
)

__version__ = "0.1.0"
