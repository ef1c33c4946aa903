"""Communication analysis of multiplex networks.

Global efficiency from tropical path-length matrices, total
communicability from the matrix exponential, and Perron-sensitivity
rankings of the intra-layer edges worth strengthening.
"""

__version__ = "0.1.0"

from .core import (
    MultiplexTensor,
    SparsityPattern,
    SupraAdjacency,
    aggregate,
    build_supra,
    is_irreducible,
    load_multiplex,
    pattern_of,
    project_onto_cone,
    write_multiplex,
)
from .communicability import (
    CommunicabilityReport,
    communicability_report,
    perron_communicability,
    structured_perron_communicability,
    total_communicability,
)
from .efficiency import (
    EfficiencyMatrix,
    efficiency_certificates,
    efficiency_matrix,
    global_k_efficiency,
    harmonic_centralities,
)
from .errors import ConvergenceError, DataError, MultiplexError, NumericalError
from .ranking import (
    EdgeRecommendation,
    apply_perturbation,
    compare_measures,
    efficiency_table,
    rank_edges_efficiency,
    rank_edges_popularity,
)
from .spectral import (
    PerronTriple,
    condition_number,
    perron,
    rho_perturbation_estimate,
    structured_condition_number,
    wilkinson,
)
from .tropical import (
    PathLengthMatrix,
    extend_path_matrix,
    minplus_multiply,
    one_path_matrix,
    path_length_matrix,
)

__all__ = [
    "aggregate",
    "apply_perturbation",
    "build_supra",
    "communicability_report",
    "CommunicabilityReport",
    "compare_measures",
    "condition_number",
    "ConvergenceError",
    "DataError",
    "EdgeRecommendation",
    "efficiency_certificates",
    "efficiency_matrix",
    "efficiency_table",
    "EfficiencyMatrix",
    "extend_path_matrix",
    "global_k_efficiency",
    "harmonic_centralities",
    "is_irreducible",
    "load_multiplex",
    "minplus_multiply",
    "MultiplexError",
    "MultiplexTensor",
    "NumericalError",
    "one_path_matrix",
    "path_length_matrix",
    "PathLengthMatrix",
    "pattern_of",
    "perron",
    "perron_communicability",
    "PerronTriple",
    "project_onto_cone",
    "rank_edges_efficiency",
    "rank_edges_popularity",
    "rho_perturbation_estimate",
    "SparsityPattern",
    "structured_condition_number",
    "structured_perron_communicability",
    "SupraAdjacency",
    "total_communicability",
    "wilkinson",
    "write_multiplex",
]
