"""Interval decomposition of pointwise-free persistence modules over a PID.

Decides decomposability through the free-cokernel criterion, constructs
consistent bases by incremental extension, and applies the machinery to
integer persistent homology and field-independence of persistence diagrams.
"""

from .barcode import Barcode
from .decomp import (
    ConsistentBasis,
    NotDecomposable,
    barcode_of,
    decompose,
    rank_barcode_oracle,
    verify_consistent,
)
from .exactla import Matrix, SmithDecomposition, snf
from .homology import (
    SimplicialFiltration,
    TorsionHomology,
    field_diagram,
    field_independence_report,
    persistent_homology_module,
)
from .lattice import Submodule
from .persmod import (
    MAX,
    MIN,
    IndexSet,
    PersistenceModule,
    check_free_cokernels,
    critical_index_set,
    disguise,
)
from .ring import GF, Z

__all__ = [
    "Barcode",
    "ConsistentBasis",
    "GF",
    "IndexSet",
    "MAX",
    "MIN",
    "Matrix",
    "NotDecomposable",
    "PersistenceModule",
    "SimplicialFiltration",
    "SmithDecomposition",
    "Submodule",
    "TorsionHomology",
    "Z",
    "barcode_of",
    "check_free_cokernels",
    "critical_index_set",
    "decompose",
    "disguise",
    "field_diagram",
    "field_independence_report",
    "persistent_homology_module",
    "rank_barcode_oracle",
    "snf",
    "verify_consistent",
]

__version__ = "0.1.0"
