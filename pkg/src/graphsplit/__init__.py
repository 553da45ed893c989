"""Graph-based frugal splitting methods with minimal lifting.

Build a problem from a graph pair, a decomposition of the subgraph
Laplacian and one resolvent per node; iterate with the expanded or the
reduced scheme; and, when every operator is a subspace normal cone,
project onto the fixed-point sets and predict the limits exactly.
"""

from .graphs import (
    AlgorithmicGraph,
    DegreeBalance,
    GraphError,
    GraphPair,
    degree_balance,
    degrees,
    incidence,
    laplacian,
    named_graph,
    new_graph,
    p_matrix,
    validate_pair,
)
from .factor import (
    AlphaVector,
    FactorError,
    OntoDecomposition,
    alpha,
    factorize,
    factor_circulant,
    factor_complete_sparse,
    factor_eigen,
    factor_tree,
)
from .operators import (
    CallbackOp,
    LinearSubspace,
    NormalConeOp,
    complement,
    full_space,
    project,
    resolvent,
    subspace_from_spanners,
    zero_space,
)
from .engine import (
    DivergenceError,
    SplittingProblem,
    StopRule,
    Trace,
    apply_T,
    apply_T_tilde,
    run_alg1,
    run_alg2,
    solve_m_plus_a,
)
from .analysis import (
    EBasis,
    LimitPrediction,
    SubspaceProblem,
    assemble_fix_basis,
    build_E,
    closed_form_E,
    intersection,
    m_proj_fix_T,
    predict_limits_alg1,
    predict_limits_alg2,
    proj_fix_T_tilde,
    subspace_problem,
    x_from_v,
)
from .presets import PRESET_NAMES, Preset, preset, ryu_norm_sq

__version__ = "0.1.0"

__all__ = [
    "AlgorithmicGraph", "DegreeBalance", "GraphError", "GraphPair",
    "degree_balance", "degrees", "incidence", "laplacian", "named_graph",
    "new_graph", "p_matrix", "validate_pair",
    "AlphaVector", "FactorError", "OntoDecomposition", "alpha", "factorize",
    "factor_circulant", "factor_complete_sparse", "factor_eigen",
    "factor_tree",
    "CallbackOp", "LinearSubspace", "NormalConeOp", "complement",
    "full_space", "project", "resolvent", "subspace_from_spanners",
    "zero_space",
    "DivergenceError", "SplittingProblem", "StopRule", "Trace", "apply_T",
    "apply_T_tilde", "run_alg1", "run_alg2", "solve_m_plus_a",
    "EBasis", "LimitPrediction", "SubspaceProblem", "assemble_fix_basis",
    "build_E", "closed_form_E", "intersection", "m_proj_fix_T",
    "predict_limits_alg1", "predict_limits_alg2", "proj_fix_T_tilde",
    "subspace_problem", "x_from_v",
    "PRESET_NAMES", "Preset", "preset", "ryu_norm_sq",
]
