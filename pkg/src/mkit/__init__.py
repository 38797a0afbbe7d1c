"""Exact jet algebra for osculating hyperquadrics, contact functions,
affine cubic forms and Darboux directions of non-degenerate hypersurface
germs."""

from .contact import (
    ContactClass,
    ContactJet,
    b_coefficients,
    classify_contact_surface,
    contact_function,
    planar_contact_order,
)
from .cubic import (
    BlaschkeData,
    CubicTensor,
    apolarity_residual,
    blaschke_data,
    cubic_evaluate,
    cubic_tensor_appendix,
    cubic_tensor_closed,
)
from .darboux import (
    DarbouxReport,
    GridSpec,
    LocusScanResult,
    darboux_directions_surface,
    darboux_locus_scan,
    is_generalized_darboux,
)
from .errors import (
    DegeneratePointError,
    ExactBackendError,
    ImplicitSolveError,
    InternalCheckError,
    JetError,
    NullDirectionError,
    SingularMatrixError,
)
from .germs import (
    FrameChange,
    HypersurfaceGerm,
    align_direction,
    diagonalize_hessian,
    normalize,
    recenter,
)
from .jets import (
    EXACT,
    FLOAT,
    TruncatedPolynomial,
    graph_contact_order,
    implicit_graph_solve,
)
from .moutard import (
    PlanarCurveJet,
    Quadric,
    QuadricPencil,
    SectionSpec,
    moutard_beta,
    moutard_pencil,
    osculating_conic,
    pencil_constructive,
    pencils_equal,
    restrict_quadric,
    section_curve,
    section_germ,
)
from .verify import SUITES, SuiteResult, run_suite

__version__ = "0.1.0"
