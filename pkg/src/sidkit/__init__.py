"""Structural intervention distance and companion metrics for causal graphs."""

from .adjustment import StarVerdict, ViolatedPart, reachable_on_non_directed_path, satisfies_star
from .bitmatrix import BitMatrix
from .cpdag import (
    SidBounds,
    identifiability_mask,
    sid_cpdag_cpdag,
    sid_cpdag_dag,
    sid_dag_cpdag,
    sid_dag_pdag_fallback,
)
from .distances import SidReport, Verdict, dne, shd, sid, sid_symmetric
from .graph import (
    DimensionError,
    Graph,
    GraphError,
    GraphKind,
    GraphValidationError,
    KindError,
    ParseError,
    chain_components,
    cpdag_of,
    d_separated,
    enumerate_extensions,
    is_chordal,
    is_consistent_extension,
    parse_graph,
    path_matrix,
    relatives,
    serialize_graph,
)

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "DimensionError",
    "Graph",
    "GraphError",
    "GraphKind",
    "GraphValidationError",
    "KindError",
    "ParseError",
    "SidBounds",
    "SidReport",
    "StarVerdict",
    "Verdict",
    "ViolatedPart",
    "chain_components",
    "cpdag_of",
    "d_separated",
    "dne",
    "enumerate_extensions",
    "identifiability_mask",
    "is_chordal",
    "is_consistent_extension",
    "parse_graph",
    "path_matrix",
    "reachable_on_non_directed_path",
    "relatives",
    "satisfies_star",
    "serialize_graph",
    "shd",
    "sid",
    "sid_cpdag_cpdag",
    "sid_cpdag_dag",
    "sid_dag_cpdag",
    "sid_dag_pdag_fallback",
    "sid_symmetric",
]
