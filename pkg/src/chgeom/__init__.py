"""Numerical geometry of complex hyperbolic space and its Heisenberg boundary.

Core objects: horospherical points and lifts carrying a signature-(n,1)
Hermitian form (``hermitian``), the Heisenberg group with the Cygan metric
and matrix embeddings into U(n,1) (``heisenberg``), isometry classification
(``isometry``), discrete-group experiments such as Dirichlet face counts and
cusp audits (``groups``), and cross-ratio distortion analysis (``crmetrics``).
A FastAPI service (``chgeom.service``) exposes the operations; the ``chgeom``
command line is a thin client over it.
"""

__version__ = "0.1.0"

from .config import DEFAULT_KAPPA, DEFAULTS, ToleranceSet
from .hermitian import (
    INFINITY,
    GeometryError,
    HPoint,
    Infinity,
    Location,
    NumericError,
    Point,
    bergman_distance,
    form_matrix,
    geodesic_point,
    hermitian_form,
    is_J_unitary,
    lift,
    point_location,
    unlift,
)
from .heisenberg import (
    HeisElement,
    HeisIsometry,
    SubgroupDescriptor,
    apply_heis_isometry,
    cygan_dist,
    cygan_norm,
    embed,
    h_inv,
    h_inversion,
    h_mul,
    inversion_matrix,
    heis_dist_to_subgroup,
)
from .isometry import (
    Isometry,
    IsometryType,
    apply_isometry,
    boundary_action,
    canonical_form,
    classify,
    dilation_matrix,
    fixed_points,
    has_nontrivial_rotation,
)
from .groups import (
    ElementTable,
    GroupSpec,
    SideReport,
    UnsupportedGroupClass,
    cocompactness_check,
    cusp_contains,
    dirichlet_sides,
    enumerate_elements,
    limit_set_sample,
    membership_margin,
    minimal_invariant_subgroup,
    orbit,
    precise_invariance_audit,
    rotation_residual_on_V,
    two_sided_center_search,
)
from .crmetrics import (
    CRAudit,
    DegenerateQuad,
    Quad,
    cross_ratio,
    eta_alpha,
    mu_chain,
    mu_density,
    quasi_cr_audit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
