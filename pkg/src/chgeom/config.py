"""Global numeric defaults.

Every tolerance used anywhere in the package lives here so that reports can
echo the exact values a run was performed with.  ``KAPPA`` scales the Bergman
metric: 4.0 pins the sectional curvature into [-1, -1/4], 2.0 gives the
[-4, -1] normalization used by part of the literature.
"""

from dataclasses import dataclass, field, asdict


DEFAULT_KAPPA = 4.0

# Boundary/interior location of a projective point, relative to |z|^2.
TOL_LOCATION = 1e-9

# J-unitarity membership check.
TOL_J_UNITARY = 1e-8

# Isometry classification.  CLASSIFY_TOL bounds |lambda| - 1 for the
# loxodromic test; defective (parabolic) matrices scatter their unit-modulus
# eigenvalues by roughly eps**(1/3) ~ 5e-6 in double precision, so the
# effective radius is widened adaptively in classify().
CLASSIFY_TOL = 1e-6
JORDAN_RANK_TOL = 1e-8

# Dirichlet face detection.
DELTA_EQ = 1e-7
DELTA_STRICT = 1e-9
BISECTION_TOL = 1e-10
T_MAX = 20.0
MARCH_STEP = 0.02

# Word enumeration.
DEDUP_GRID = 1e-8
TABLE_CAP = 1_000_000
NEAR_COLLISION_WARN = 1e-6

# Limit-set sampling.
BOUNDARY_RATIO = 1e-2
EPS_MERGE = 1e-3


@dataclass(frozen=True)
class ToleranceSet:
    """Snapshot of every tunable constant, embedded into reports."""

    kappa: float = DEFAULT_KAPPA
    tol_location: float = TOL_LOCATION
    tol_j_unitary: float = TOL_J_UNITARY
    classify_tol: float = CLASSIFY_TOL
    jordan_rank_tol: float = JORDAN_RANK_TOL
    delta_eq: float = DELTA_EQ
    delta_strict: float = DELTA_STRICT
    bisection_tol: float = BISECTION_TOL
    t_max: float = T_MAX
    march_step: float = MARCH_STEP
    dedup_grid: float = DEDUP_GRID
    table_cap: int = TABLE_CAP
    boundary_ratio: float = BOUNDARY_RATIO
    eps_merge: float = EPS_MERGE

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULTS = ToleranceSet()
