"""Leveled graphs of real-valued functions, their tree decompositions, and
phylogenetic distances built on top.

The model and its structural operations live in core; dag classifies vertices
and checks the two cycle-rank computations against each other; decomposition
splits a single-source graph into trees and glues them back; isomorphism
decides equivalence three different ways; phylo turns trees into cophenetic
vectors and compares networks by Hausdorff distance; enewick and serialize
read and write the supported text formats; generator produces seeded random
instances.
"""

from .core import (
    EdgeSequence,
    LevelPoset,
    ReebGraph,
    RESERVED_VERTEX_PREFIX,
    as_level,
    common_refinement,
    edge_sequence,
    format_level,
    is_valid,
    make_graph,
    minimize_critical_set,
    parse_level,
    refine_to_levels,
    same_edge_structure,
    validate,
)
from .dag import (
    DagView,
    VertexClass,
    VertexKind,
    betti_euler,
    betti_reticulation,
    build_dag_view,
    classify_all,
    classify_vertex,
    source_vertices,
)
from .decomposition import (
    CutChoice,
    Decomposition,
    Factor,
    apply_choice,
    cut_options,
    decompose,
    enumerate_choices,
    factor_count,
    glue_back,
    make_choice,
)
from .enewick import (
    PhyloNetwork,
    enewick_to_reeb,
    network_to_reeb,
    parse_enewick,
    reeb_to_network,
    write_enewick,
)
from .errors import (
    BadLevelSet,
    DimensionMismatch,
    EmptySet,
    HybridArityError,
    IncompatibleShape,
    InfeasibleSpec,
    InvalidChoice,
    LabelMismatch,
    MissingLabels,
    NewickSyntaxError,
    NotATree,
    NotRooted,
    OrderConflict,
    PositionedError,
    ReebError,
    ReticulationConflict,
    SchemaError,
    SizeLimitExceeded,
    TimeInconsistency,
    UnbalancedParens,
)
from .generator import GeneratorSpec, random_graph
from .isomorphism import (
    CanonicalForm,
    MorphismWitness,
    brute_force_iso,
    canonical_form,
    decomposition_invariant,
    labelled_iso,
    reeb_iso,
    verify_witness,
)
from .phylo import (
    CopheneticVector,
    LeafOrdering,
    cophenetic_vector,
    hausdorff_distance,
    leaf_order,
    lp_distance,
    network_distance,
    nth_root_fraction,
)
from .serialize import dump_text, from_jsonable, load_text, to_dot, to_jsonable

__version__ = "0.1.0"

__all__ = [
    "BadLevelSet",
    "CanonicalForm",
    "CopheneticVector",
    "CutChoice",
    "DagView",
    "Decomposition",
    "DimensionMismatch",
    "EdgeSequence",
    "EmptySet",
    "Factor",
    "GeneratorSpec",
    "HybridArityError",
    "IncompatibleShape",
    "InfeasibleSpec",
    "InvalidChoice",
    "LabelMismatch",
    "LeafOrdering",
    "LevelPoset",
    "MissingLabels",
    "MorphismWitness",
    "NewickSyntaxError",
    "NotATree",
    "NotRooted",
    "OrderConflict",
    "PhyloNetwork",
    "PositionedError",
    "ReebError",
    "ReebGraph",
    "RESERVED_VERTEX_PREFIX",
    "ReticulationConflict",
    "SchemaError",
    "SizeLimitExceeded",
    "TimeInconsistency",
    "UnbalancedParens",
    "VertexClass",
    "VertexKind",
    "apply_choice",
    "as_level",
    "betti_euler",
    "betti_reticulation",
    "brute_force_iso",
    "build_dag_view",
    "canonical_form",
    "classify_all",
    "classify_vertex",
    "common_refinement",
    "cophenetic_vector",
    "cut_options",
    "decompose",
    "decomposition_invariant",
    "dump_text",
    "edge_sequence",
    "enewick_to_reeb",
    "enumerate_choices",
    "factor_count",
    "format_level",
    "from_jsonable",
    "glue_back",
    "hausdorff_distance",
    "is_valid",
    "labelled_iso",
    "leaf_order",
    "load_text",
    "lp_distance",
    "make_choice",
    "make_graph",
    "minimize_critical_set",
    "network_distance",
    "network_to_reeb",
    "nth_root_fraction",
    "parse_enewick",
    "parse_level",
    "random_graph",
    "reeb_iso",
    "reeb_to_network",
    "refine_to_levels",
    "same_edge_structure",
    "source_vertices",
    "to_dot",
    "to_jsonable",
    "validate",
    "verify_witness",
    "write_enewick",
]
