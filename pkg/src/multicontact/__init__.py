"""Multicontact structures, their multisymplectization and the associated L-infinity algebra.

Everything works on a single coordinate chart with symbolic coefficients;
identities are decided by seeded random evaluation.
"""

from .distribution import (
    AdaptedChart,
    Classification,
    CurvatureTensor,
    SectionOfN,
    annihilator_forms,
    characteristic_rank_at,
    classify,
    curvature,
    find_symmetries,
    frame_fields,
    hamiltonian_defect,
    symmetry_residual,
    theta_of,
)
from .expr import Expr, SamplingPolicy, Variable, differentiate, evaluate, parse_expr, probably_equal
from .forms import (
    Chart,
    DifferentialForm,
    VectorField,
    exterior_derivative,
    interior_product,
    lie_bracket,
    lie_derivative,
    wedge,
)
from .jet import (
    JetChart,
    JetSpec,
    closed_form_jet_bracket,
    build_jet_chart,
    jet_omega_tilde,
    prolong,
    prolong_vector_field,
    total_derivative,
)
from .linfty import (
    GradedElement,
    LinftyContext,
    element_from_symmetry,
    element_of_positive_degree,
    induced_bracket_check,
    jacobiator_residual,
    koszul_sign,
    lambda1,
    lambda_ell,
    unshuffles,
)
from .symplectization import (
    HomogeneousChart,
    build_symplectization,
    characteristic_lift_frame,
    homogeneous_decompose,
    is_homogeneous,
    kernel_rank_at,
    lift_multicontact,
    section_tilde,
)

__all__ = [
    "AdaptedChart",
    "Classification",
    "CurvatureTensor",
    "SectionOfN",
    "annihilator_forms",
    "characteristic_rank_at",
    "classify",
    "curvature",
    "find_symmetries",
    "frame_fields",
    "hamiltonian_defect",
    "symmetry_residual",
    "theta_of",
    "Expr",
    "SamplingPolicy",
    "Variable",
    "differentiate",
    "evaluate",
    "parse_expr",
    "probably_equal",
    "Chart",
    "DifferentialForm",
    "VectorField",
    "exterior_derivative",
    "interior_product",
    "lie_bracket",
    "lie_derivative",
    "wedge",
    "JetChart",
    "JetSpec",
    "closed_form_jet_bracket",
    "build_jet_chart",
    "jet_omega_tilde",
    "prolong",
    "prolong_vector_field",
    "total_derivative",
    "GradedElement",
    "LinftyContext",
    "element_from_symmetry",
    "element_of_positive_degree",
    "induced_bracket_check",
    "jacobiator_residual",
    "koszul_sign",
    "lambda1",
    "lambda_ell",
    "unshuffles",
    "HomogeneousChart",
    "build_symplectization",
    "characteristic_lift_frame",
    "homogeneous_decompose",
    "is_homogeneous",
    "kernel_rank_at",
    "lift_multicontact",
    "section_tilde",
]
