"""Geodesic vectors and orthonormal geodesic bases of metric Lie algebras."""
from .catalog import (certify_no_orthonormal_geodesic_basis, classify_case, example5,
                      remark_metric, remark_quartic, remark_spanning_geodesics,
                      standard_algebras)
from .constructions import (Dim4CaseTag, MilnorForm, classify_dim4,
                            codim1_abelian_geodesic_basis, dim4_geodesic_basis,
                            find_codim1_abelian_ideal, milnor_basis_dim3,
                            nilpotent_geodesic_basis)
from .geodesic import (BasisReport, GeodesicSearchConfig, find_geodesics, geodesic_residual,
                       geodesic_span_rank, is_geodesic_via_image, verify_basis)
from .lie_core import (LieAlgebra, PreconditionError, Subspace, adjoint_matrix, bracket, center,
                       derived_algebra, is_nilpotent, is_solvable, is_unimodular,
                       jacobi_residual, quotient_by_central_line)
from .metric import (InnerProduct, OrthogonalConjugation, gram_schmidt, ip,
                     orthogonal_complement, random_inner_product, zero_diagonal_conjugation)

__version__ = "0.1.0"
