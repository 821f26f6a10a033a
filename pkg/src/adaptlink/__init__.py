"""Adaptive mean-linkage agglomerative clustering.

Per-iteration minimax cut-offs, simultaneous multi-group merging into mean
pseudo-points, classical stepwise baselines, and deterministic trace/DOT
export. See README for the algorithm and the bundled case study.
"""
from ._kernels import get_backend, set_backend
from .adaptive import (
    ClusterState,
    Dendrogram,
    DepthRecord,
    EngineConfig,
    MergeGroup,
    Neighborhood,
    OutOfRange,
    PseudoPoint,
    StaleIndex,
    TreeNode,
    build_dendrogram,
    cluster_step,
    cutoff_distance,
    extremely_close_sets,
    format_cutoff,
    initial_state,
    merge_group,
    neighborhood,
    sub_neighborhood,
)
from .baseline import (
    ComparisonReport,
    LeafMismatch,
    LinkageMethod,
    StepwiseDendrogram,
    compare_compactness,
    stepwise_cluster,
)
from .core import (
    ClusteringError,
    Dataset,
    DimensionMismatch,
    DistanceMatrix,
    NormalizationStats,
    NormalizedDataset,
    SdMode,
    TooFewPoints,
    ZeroVariance,
    distance_matrix,
    euclidean_distance,
    identity_normalized,
    matrix_from_coords,
    normalize,
)
from .io import (
    ParseError,
    SchemaError,
    TraceDocument,
    format_table,
    load_fixture,
    parse_table,
    read_trace,
    serialize_trace,
    write_dot,
    write_trace,
    write_tree_text,
)

__version__ = "0.1.0"

__all__ = [
    "ClusteringError",
    "ClusterState",
    "ComparisonReport",
    "Dataset",
    "Dendrogram",
    "DepthRecord",
    "DimensionMismatch",
    "DistanceMatrix",
    "EngineConfig",
    "LeafMismatch",
    "LinkageMethod",
    "MergeGroup",
    "Neighborhood",
    "NormalizationStats",
    "NormalizedDataset",
    "OutOfRange",
    "ParseError",
    "PseudoPoint",
    "SchemaError",
    "SdMode",
    "StaleIndex",
    "StepwiseDendrogram",
    "TooFewPoints",
    "TraceDocument",
    "TreeNode",
    "ZeroVariance",
    "build_dendrogram",
    "cluster_step",
    "compare_compactness",
    "cutoff_distance",
    "distance_matrix",
    "euclidean_distance",
    "extremely_close_sets",
    "format_cutoff",
    "format_table",
    "get_backend",
    "identity_normalized",
    "initial_state",
    "load_fixture",
    "matrix_from_coords",
    "merge_group",
    "neighborhood",
    "normalize",
    "parse_table",
    "read_trace",
    "serialize_trace",
    "set_backend",
    "stepwise_cluster",
    "sub_neighborhood",
    "write_dot",
    "write_trace",
    "write_tree_text",
    "__version__",
]
