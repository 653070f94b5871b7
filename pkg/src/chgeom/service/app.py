"""FastAPI compute service exposing the geometry operations.

All endpoints are stateless POSTs; every stochastic operation takes an
explicit seed, so responses are pure functions of the request body.  Domain
errors surface as HTTP 422 with a ``kind`` field separating validation
problems from numeric infeasibility (the command-line client maps these to
exit codes 2 and 3).
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import config
from ..hermitian import INFINITY, GeometryError, HPoint, Infinity, NumericError, Point
from ..heisenberg import HeisElement, SubgroupDescriptor
from ..isometry import classify, has_nontrivial_rotation
from ..groups import (
    GroupSpec,
    cocompactness_check,
    dirichlet_sides,
    enumerate_elements,
    limit_set_sample,
    minimal_invariant_subgroup,
    orbit,
    precise_invariance_audit,
    rotation_residual_on_V,
    two_sided_center_search,
)
from ..crmetrics import quasi_cr_audit, mu_density
from ..io import group_from_dict
from . import models

app = FastAPI(title="chgeom", version="0.1.0")


@app.exception_handler(GeometryError)
async def geometry_error_handler(request: Request, exc: GeometryError):
    kind = "numeric" if isinstance(exc, NumericError) else "validation"
    return JSONResponse(status_code=422, content={"detail": str(exc), "kind": kind})


def _point_in(payload, m: int) -> Point:
    if payload == "inf":
        return INFINITY
    vals = [float(x) for x in payload]
    if len(vals) == 2 * m + 2:
        u = vals[-1]
    elif len(vals) == 2 * m + 1:
        u = 0.0
    else:
        raise GeometryError(
            f"point payload needs {2 * m + 1} or {2 * m + 2} floats, got {len(vals)}"
        )
    xi = tuple(complex(vals[2 * j], vals[2 * j + 1]) for j in range(m))
    return HPoint(xi, vals[2 * m], u)


def _point_out(p: Point):
    if isinstance(p, Infinity):
        return "inf"
    out = []
    for z in p.xi:
        out.extend([z.real, z.imag])
    out.extend([p.v, p.u])
    return out


def _group_in(model: models.GroupModel) -> GroupSpec:
    return group_from_dict(model.model_dump(exclude_none=True), where="group payload")


def _subgroup_in(model: models.SubgroupModel | None, n: int) -> SubgroupDescriptor:
    if model is None:
        return SubgroupDescriptor.center(n)
    basis = tuple(
        tuple(complex(re, im) for re, im in vec) for vec in model.basis
    )
    conj = None
    if model.conjugator is not None:
        vals = model.conjugator
        m = (len(vals) - 1) // 2
        xi = tuple(complex(vals[2 * j], vals[2 * j + 1]) for j in range(m))
        conj = HeisElement(xi, vals[-1])
    return SubgroupDescriptor(
        model.n, basis, include_center=model.include_center,
        conjugator=conj, exponent=model.exponent,
    )


def _subgroup_out(desc: SubgroupDescriptor) -> models.SubgroupModel:
    conj = None
    if desc.conjugator is not None:
        conj = []
        for z in desc.conjugator.xi:
            conj.extend([z.real, z.imag])
        conj.append(desc.conjugator.v)
    return models.SubgroupModel(
        n=desc.n,
        basis=[[[z.real, z.imag] for z in vec] for vec in desc.basis],
        include_center=desc.include_center,
        conjugator=conj,
        exponent=desc.exponent,
    )


@app.post("/classify", response_model=models.ClassifyResponse)
def classify_endpoint(req: models.ClassifyRequest):
    spec = _group_in(req.group)
    results = []
    for label, g in zip(spec.labels, spec.matrices()):
        t = classify(g, tol=req.tol)
        results.append(
            models.ClassifyEntry(
                label=label,
                type=t.value,
                has_rotation=has_nontrivial_rotation(g, tol=req.tol),
            )
        )
    return models.ClassifyResponse(results=results)


@app.post("/orbit", response_model=models.OrbitResponse)
def orbit_endpoint(req: models.OrbitRequest):
    spec = _group_in(req.group)
    y = _point_in(req.center, spec.n - 1)
    table = enumerate_elements(spec, req.L)
    pts = orbit(table, y)
    return models.OrbitResponse(
        words=[table.word_label(e.word) for e in table.entries],
        points=[_point_out(p) for p in pts],
    )


@app.post("/limitset", response_model=models.LimitSetResponse)
def limitset_endpoint(req: models.LimitSetRequest):
    spec = _group_in(req.group)
    y = _point_in(req.center, spec.n - 1)
    pts = limit_set_sample(
        spec, req.L, y, boundary_ratio=req.boundary_ratio, eps_merge=req.eps_merge
    )
    return models.LimitSetResponse(points=[_point_out(p) for p in pts])


def _report_out(report) -> models.DirichletResponse:
    return models.DirichletResponse(
        face_count=report.face_count,
        faces=[
            models.FaceModel(
                label=f.label,
                word=list(f.word),
                witness=_point_out(f.witness),
                margin=f.margin,
                rays_hit=f.rays_hit,
            )
            for f in report.faces
        ],
        rays_total=report.rays_total,
        rays_hit=report.rays_hit,
        rays_escaped=report.rays_escaped,
        rays_ambiguous=report.rays_ambiguous,
        stable=report.stable,
        seed=report.seed,
        kappa=report.kappa,
        tolerances=report.tolerances,
        table_size=report.table_size,
        center=_point_out(report.center),
    )


@app.post("/dirichlet-sides", response_model=models.DirichletResponse)
def dirichlet_endpoint(req: models.DirichletRequest):
    spec = _group_in(req.group)
    y = _point_in(req.center, spec.n - 1)
    report = dirichlet_sides(
        spec, y, req.L, req.rays, req.seed,
        t_max=req.t_max, kappa=req.kappa, threads=req.threads,
        check_stability=req.check_stability,
    )
    return _report_out(report)


@app.post("/center-search", response_model=models.CenterSearchResponse)
def center_search_endpoint(req: models.CenterSearchRequest):
    spec = _group_in(req.group)
    box = [tuple(pair) for pair in req.box]
    y, report = two_sided_center_search(
        spec, box, req.L, req.rays, req.seed,
        grid_points=req.grid_points, simplex_iters=req.simplex_iters,
        kappa=req.kappa, threads=req.threads,
    )
    return models.CenterSearchResponse(center=_point_out(y), report=_report_out(report))


@app.post("/invariant-subgroup", response_model=models.InvariantSubgroupResponse)
def invariant_subgroup_endpoint(req: models.InvariantSubgroupRequest):
    spec = _group_in(req.group)
    desc = minimal_invariant_subgroup(spec)
    cocompact = max_gap = None
    if req.check_cocompactness:
        cocompact, max_gap = cocompactness_check(
            spec, desc, L=req.L, delta=req.delta, box_radius=req.box_radius
        )
    return models.InvariantSubgroupResponse(
        subgroup=_subgroup_out(desc),
        cocompact=cocompact,
        max_gap=max_gap,
        rotation_residual=rotation_residual_on_V(spec, desc),
    )


@app.post("/cusp-audit", response_model=models.CuspAuditResponse)
def cusp_audit_endpoint(req: models.CuspAuditRequest):
    spec = _group_in(req.group)
    p = _point_in(req.p, spec.n - 1)
    V = _subgroup_in(req.subgroup, spec.n)
    report = precise_invariance_audit(
        spec, p, req.r, req.L, req.samples, V, req.seed
    )
    return models.CuspAuditResponse(
        violation_count=report.violation_count,
        violations=[
            models.ViolationModel(
                label=v.label, sample_index=v.sample_index, kind=v.kind
            )
            for v in report.violations
        ],
        stabilizer_words=list(report.stabilizer_words),
        tested_words=list(report.tested_words),
        samples=report.samples,
        radius=report.radius,
        seed=report.seed,
        tolerances=report.tolerances,
    )


def _boundary_points(rows: list[list[float]]) -> list[HPoint]:
    pts = []
    for row in rows:
        m = (len(row) - 1) // 2
        if 2 * m + 1 != len(row):
            raise GeometryError("boundary point rows are [re, im, ..., v]")
        xi = tuple(complex(row[2 * j], row[2 * j + 1]) for j in range(m))
        pts.append(HPoint(xi, row[-1], 0.0))
    return pts


@app.post("/cr-audit", response_model=models.CRAuditResponse)
def cr_audit_endpoint(req: models.CRAuditRequest):
    src = _boundary_points(req.points)
    img = _boundary_points(req.images)
    if len(src) != len(img):
        raise GeometryError("points and images must pair up")
    audit = quasi_cr_audit(
        list(zip(src, img)), quads=req.quads, alphas=tuple(req.alphas), seed=req.seed
    )
    return models.CRAuditResponse(
        alphas=list(audit.alphas),
        m_hat=list(audit.m_hat),
        worst=[
            models.WorstQuadModel(
                indices=list(w.indices),
                cr_source=w.cr_source,
                cr_image=w.cr_image,
                ratio=w.ratio,
            )
            for w in audit.worst
        ],
        degenerate=audit.degenerate,
        unbounded=audit.unbounded,
        quads=audit.quads,
        seed=audit.seed,
    )


@app.post("/mu-density", response_model=models.MuDensityResponse)
def mu_density_endpoint(req: models.MuDensityRequest):
    pts = _boundary_points(req.points)
    dense, failing = mu_density(pts, req.mu)
    return models.MuDensityResponse(
        dense=dense, failing_pairs=[list(pair) for pair in failing]
    )


@app.get("/healthz")
def healthz():
    return {"status": "ok", "kappa": config.DEFAULT_KAPPA}
