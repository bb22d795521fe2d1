"""Partial orthogonality as an independence model over embedding vectors."""

__version__ = "0.1.0"

from .errors import (
    ConstructionError,
    GuardRefusal,
    InvalidInputError,
    NotFoundError,
    ParseError,
)
from .geometry import (
    Subspace,
    Tolerance,
    cosine,
    orthonormal_basis,
    principal_angles,
    project,
    projected_cosine,
    residual,
)
from .independence import (
    EmbeddingTable,
    PartialOrthogonality,
    UndirectedGraph,
    check_axioms,
    graph_separated,
    partially_orthogonal,
    set_partially_orthogonal,
)
from .markov import (
    BoundarySet,
    GmbResult,
    enumerate_markov_boundaries,
    find_generalized_mb,
    gmb_score,
    is_markov_blanket,
)
from .ipe import (
    AdjustedAdjacency,
    IpeMap,
    ReductionPlan,
    adjusted_adjacency,
    construct_ipe,
    find_perfect_epsilon,
    imap_from_precision,
    is_perfect_perturbation,
    jl_project,
    reduction_plan,
    verify_ipe,
    verify_reduced_orthogonality,
)
