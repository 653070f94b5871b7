"""Request/response models for the compute service.

Points travel as flat float lists [xi_re_1, xi_im_1, ..., v, u] (the u field
may be omitted for boundary points); the point at infinity is the string
"inf".  Group specs use the same JSON dialect as the group files, with
complex entries as [re, im] pairs.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from .. import config

PointPayload = list[float] | Literal["inf"]


class GeneratorModel(BaseModel):
    type: Literal["heis", "matrix"]
    A: list[list[list[float]]] | None = None
    xi: list[list[float]] | None = None
    v: float | None = None
    entries: list[list[list[float]]] | None = None


class GroupModel(BaseModel):
    n: int
    generators: list[GeneratorModel]
    labels: list[str] = Field(default_factory=list)


class ClassifyRequest(BaseModel):
    group: GroupModel
    tol: float = config.CLASSIFY_TOL


class ClassifyEntry(BaseModel):
    label: str
    type: str
    has_rotation: bool


class ClassifyResponse(BaseModel):
    results: list[ClassifyEntry]


class OrbitRequest(BaseModel):
    group: GroupModel
    center: PointPayload
    L: int = 3


class OrbitResponse(BaseModel):
    words: list[str]
    points: list[PointPayload]


class LimitSetRequest(BaseModel):
    group: GroupModel
    center: PointPayload
    L: int = 8
    boundary_ratio: float = config.BOUNDARY_RATIO
    eps_merge: float = config.EPS_MERGE


class LimitSetResponse(BaseModel):
    points: list[PointPayload]


class DirichletRequest(BaseModel):
    group: GroupModel
    center: PointPayload
    L: int = 4
    rays: int = 4000
    seed: int = 0
    t_max: float = config.T_MAX
    kappa: float = config.DEFAULT_KAPPA
    threads: int = 1
    check_stability: bool = True


class FaceModel(BaseModel):
    label: str
    word: list[int]
    witness: PointPayload
    margin: float
    rays_hit: int


class DirichletResponse(BaseModel):
    face_count: int
    faces: list[FaceModel]
    rays_total: int
    rays_hit: int
    rays_escaped: int
    rays_ambiguous: int
    stable: bool
    seed: int
    kappa: float
    tolerances: dict
    table_size: int
    center: PointPayload


class CenterSearchRequest(BaseModel):
    group: GroupModel
    box: list[list[float]]
    L: int = 4
    rays: int = 2000
    seed: int = 0
    grid_points: int = 3
    simplex_iters: int = 40
    kappa: float = config.DEFAULT_KAPPA
    threads: int = 1


class CenterSearchResponse(BaseModel):
    center: PointPayload
    report: DirichletResponse


class SubgroupModel(BaseModel):
    n: int
    basis: list[list[list[float]]]  # vectors of [re, im] pairs
    include_center: bool
    conjugator: list[float] | None = None  # [xi_re_1, xi_im_1, ..., v]
    exponent: int = 1


class InvariantSubgroupRequest(BaseModel):
    group: GroupModel
    check_cocompactness: bool = True
    L: int = 6
    delta: float = 0.8
    box_radius: float = 1.0


class InvariantSubgroupResponse(BaseModel):
    subgroup: SubgroupModel
    cocompact: bool | None = None
    max_gap: float | None = None
    rotation_residual: float


class CuspAuditRequest(BaseModel):
    group: GroupModel
    p: PointPayload
    r: float = 1.0
    L: int = 4
    samples: int = 10000
    subgroup: SubgroupModel | None = None  # default: the center of H_n
    seed: int = 0


class ViolationModel(BaseModel):
    label: str
    sample_index: int
    kind: str


class CuspAuditResponse(BaseModel):
    violation_count: int
    violations: list[ViolationModel]
    stabilizer_words: list[str]
    tested_words: list[str]
    samples: int
    radius: float
    seed: int
    tolerances: dict


class CRAuditRequest(BaseModel):
    points: list[list[float]]  # [xi_re_1, xi_im_1, ..., v]
    images: list[list[float]]
    quads: int = 100000
    alphas: list[float] = Field(
        default_factory=lambda: [1.0 + 0.25 * k for k in range(13)]
    )
    seed: int = 0


class WorstQuadModel(BaseModel):
    indices: list[int]
    cr_source: float
    cr_image: float
    ratio: float


class CRAuditResponse(BaseModel):
    alphas: list[float]
    m_hat: list[float]
    worst: list[WorstQuadModel]
    degenerate: int
    unbounded: bool
    quads: int
    seed: int


class MuDensityRequest(BaseModel):
    points: list[list[float]]
    mu: float


class MuDensityResponse(BaseModel):
    dense: bool
    failing_pairs: list[list[int]]
