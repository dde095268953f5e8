"""Quadratic weighted histopolation on tetrahedral meshes.

Local reconstruction of functions from integral data: the classical linear
scheme built on face averages, plus three quadratic enrichment strategies
whose extra degrees of freedom are probabilistic moments against face,
interior or edge densities.  Includes unisolvence diagnostics, automatic
density-parameter tuning and an L1 convergence benchmark.
"""

from .densities import (
    BaryQuadratic,
    Density,
    density_moment,
    edge_density,
    edge_ortho_quadratic,
    face_density,
    face_ortho_quadratic,
    gram_schmidt_enrich,
    volume_density,
    volume_ortho_pair,
    volumetric_psi,
)
from .element import (
    ElementOperator,
    Poly2OnTet,
    QuadMomentMatrix,
    StrategyConfig,
    UnisolvenceError,
    UnisolvenceReport,
    assemble_D,
    assemble_H,
    classical_project,
    evaluate,
    lambda_basis,
    reconstruct,
    unisolvence_check,
)
from .experiment import (
    ErrorRow,
    QuadSettings,
    TuneResult,
    TuningGrid,
    compute_dofs,
    compute_dofs_mesh,
    convergence_study,
    grid_search,
    l1_error,
)
from .mesh import TetMesh, build_mesh
from .quadrature import (
    QuadRule1D,
    SimplexRule,
    gauss_jacobi,
    simplex_rule_plain,
    simplex_rule_weighted,
)
from .simplex import (
    EDGE_PAIRS,
    FACE_VERTEX_INDICES,
    REFERENCE_TET,
    EdgeFrame,
    FaceFrame,
    GeometryError,
    Tetrahedron,
    simplex_moment,
)
from .targets import TARGETS, TargetFunction, get_targets

__version__ = "0.1.0"
