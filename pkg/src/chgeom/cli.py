"""Command-line client for the geometry service.

Each subcommand builds a request, sends it to the compute service (an
in-process instance by default, or a remote one via --server), and renders
the response as a CSV report plus a JSON run manifest.  Exit codes: 0 on
success, 2 on validation errors, 3 on numeric failures such as a
non-J-unitary input matrix.
"""

from __future__ import annotations

import json
import sys
import time

import click
import httpx

from . import config, io
from .hermitian import GeometryError, NumericError

EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


class ClientError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _post(server: str | None, path: str, payload: dict) -> dict:
    if server:
        resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    else:
        import asyncio
        from .service.app import app

        async def call():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://chgeom"
            ) as client:
                return await client.post(path, json=payload, timeout=600.0)

        resp = asyncio.run(call())
    if resp.status_code == 200:
        return resp.json()
    try:
        data = resp.json()
    except ValueError:
        raise ClientError(f"service error {resp.status_code}", EXIT_NUMERIC)
    detail = data.get("detail", f"service error {resp.status_code}")
    if isinstance(detail, list):  # pydantic validation errors
        detail = "; ".join(
            f"{'.'.join(str(x) for x in e.get('loc', []))}: {e.get('msg')}"
            for e in detail
        )
    kind = data.get("kind", "validation")
    raise ClientError(str(detail), EXIT_NUMERIC if kind == "numeric" else EXIT_VALIDATION)


def _run(ctx_params: dict, subcommand: str, build):
    """Shared driver: run `build`, map domain errors onto exit codes."""
    started = time.monotonic()
    try:
        build(started)
    except ClientError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    except NumericError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except (GeometryError, OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _write_report(
    out: str | None,
    subcommand: str,
    header: list[str],
    rows: list[list],
    summary: dict,
    inputs: dict,
    seed: int | None,
    kappa: float,
    started: float,
):
    text = io.csv_text(header, rows, summary)
    if out:
        with open(out, "w") as f:
            f.write(text)
        manifest = io.make_manifest(
            subcommand, inputs, seed, kappa=kappa, started=started
        )
        with open(out + ".manifest.json", "w") as f:
            json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def _group_payload(path: str) -> tuple[dict, int]:
    spec = io.load_group(path)
    return io.group_to_dict(spec), spec.n


def _point_payload(text: str, m: int) -> list[float]:
    return io.point_row(io.parse_point(text, m))


@click.group()
@click.option("--server", default=None, help="Remote service URL; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Experiments and audits for discrete groups of complex hyperbolic isometries."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--group", "group_path", required=True, type=click.Path(exists=True))
@click.option("--tol", default=config.CLASSIFY_TOL, show_default=True,
              help="Eigenvalue tolerance for the trichotomy.")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def classify(ctx, group_path, tol, out):
    """Classify each generator: Identity, Elliptic, Parabolic, or Loxodromic."""

    def build(started):
        payload, _ = _group_payload(group_path)
        data = _post(ctx.obj["server"], "/classify", {"group": payload, "tol": tol})
        for entry in data["results"]:
            suffix = " (with rotation part)" if entry["has_rotation"] and entry["type"] == "Parabolic" else ""
            click.echo(f"{entry['type']}{suffix}" if len(data["results"]) == 1
                       else f"{entry['label']}: {entry['type']}{suffix}")
        rows = [[e["label"], e["type"], e["has_rotation"]] for e in data["results"]]
        _write_report(out, "classify", ["label", "type", "has_rotation"], rows,
                      {"tol": tol}, {"group": group_path}, None,
                      config.DEFAULT_KAPPA, started)

    _run(ctx.params, "classify", build)


@main.command()
@click.option("--group", "group_path", required=True, type=click.Path(exists=True))
@click.option("--center", required=True, help="Interior point, e.g. 0,0,1 for xi=0, v=0, u=1.")
@click.option("--l", "-L", "L", default=3, show_default=True, help="Word radius.")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def orbit(ctx, group_path, center, L, out):
    """List the orbit of an interior point over words of length <= L."""

    def build(started):
        payload, n = _group_payload(group_path)
        data = _post(ctx.obj["server"], "/orbit", {
            "group": payload, "center": _point_payload(center, n - 1), "L": L,
        })
        rows = [[w] + list(map(float, p))
                for w, p in zip(data["words"], data["points"])]
        header = ["word"] + io.point_header(n - 1)
        _write_report(out, "orbit", header, rows, {"L": L},
                      {"group": group_path, "center": center}, None,
                      config.DEFAULT_KAPPA, started)
        click.echo(f"orbit points: {len(rows)}")

    _run(ctx.params, "orbit", build)


@main.command()
@click.option("--group", "group_path", required=True, type=click.Path(exists=True))
@click.option("--center", required=True, help="Interior base point.")
@click.option("--l", "-L", "L", default=8, show_default=True)
@click.option("--boundary-ratio", default=config.BOUNDARY_RATIO, show_default=True)
@click.option("--eps-merge", default=config.EPS_MERGE, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def limitset(ctx, group_path, center, L, boundary_ratio, eps_merge, out):
    """Sample limit-set points from orbit lifts escaping to the boundary."""

    def build(started):
        payload, n = _group_payload(group_path)
        data = _post(ctx.obj["server"], "/limitset", {
            "group": payload, "center": _point_payload(center, n - 1), "L": L,
            "boundary_ratio": boundary_ratio, "eps_merge": eps_merge,
        })
        rows = []
        for p in data["points"]:
            if p == "inf":
                rows.append([True] + [0.0] * (2 * (n - 1) + 2))
            else:
                rows.append([False] + list(map(float, p)))
        header = ["is_infinity"] + io.point_header(n - 1)
        _write_report(out, "limitset", header, rows,
                      {"L": L, "boundary_ratio": boundary_ratio,
                       "eps_merge": eps_merge},
                      {"group": group_path, "center": center}, None,
                      config.DEFAULT_KAPPA, started)
        click.echo(f"limit points: {len(rows)}")

    _run(ctx.params, "limitset", build)


def _emit_side_report(report: dict, out, subcommand, inputs, started, n, extra=None):
    header = ["label", "margin", "rays_hit"] + ["witness_" + c for c in io.point_header(n - 1)]
    rows = [
        [f["label"], float(f["margin"]), f["rays_hit"]] + list(map(float, f["witness"]))
        for f in report["faces"]
    ]
    summary = {
        "face_count": report["face_count"],
        "rays_total": report["rays_total"],
        "rays_hit": report["rays_hit"],
        "rays_escaped": report["rays_escaped"],
        "rays_ambiguous": report["rays_ambiguous"],
        "stable": report["stable"],
        "seed": report["seed"],
        "kappa": float(report["kappa"]),
        "table_size": report["table_size"],
    }
    summary.update({k: float(v) for k, v in report["tolerances"].items()})
    if extra:
        summary.update(extra)
    _write_report(out, subcommand, header, rows, summary, inputs,
                  report["seed"], float(report["kappa"]), started)
    click.echo(f"face count: {report['face_count']} (stable: {report['stable']})")


@main.command("dirichlet-sides")
@click.option("--group", "group_path", required=True, type=click.Path(exists=True))
@click.option("--center", required=True, help="Interior Dirichlet center.")
@click.option("--l", "-L", "L", default=4, show_default=True)
@click.option("--rays", default=4000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--t-max", default=config.T_MAX, show_default=True)
@click.option("--kappa", default=config.DEFAULT_KAPPA, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def dirichlet_sides_cmd(ctx, group_path, center, L, rays, seed, t_max, kappa, threads, out):
    """Count Dirichlet-polyhedron faces by seeded radial ray sampling."""

    def build(started):
        payload, n = _group_payload(group_path)
        data = _post(ctx.obj["server"], "/dirichlet-sides", {
            "group": payload, "center": _point_payload(center, n - 1),
            "L": L, "rays": rays, "seed": seed, "t_max": t_max,
            "kappa": kappa, "threads": threads,
        })
        _emit_side_report(data, out, "dirichlet-sides",
                          {"group": group_path, "center": center, "L": L,
                           "rays": rays}, started, n)

    _run(ctx.params, "dirichlet-sides", build)


@main.command("center-search")
@click.option("--group", "group_path", required=True, type=click.Path(exists=True))
@click.option("--box", required=True,
              help="Coordinate ranges lo:hi per chart axis, comma separated.")
@click.option("--l", "-L", "L", default=4, show_default=True)
@click.option("--rays", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--kappa", default=config.DEFAULT_KAPPA, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def center_search_cmd(ctx, group_path, box, L, rays, seed, kappa, threads, out):
    """Search a box for a center whose Dirichlet domain has two sides."""

    def build(started):
        payload, n = _group_payload(group_path)
        try:
            ranges = [[float(a) for a in part.split(":")] for part in box.split(",")]
        except ValueError as exc:
            raise GeometryError(f"box {box!r}: ranges are lo:hi") from exc
        data = _post(ctx.obj["server"], "/center-search", {
            "group": payload, "box": ranges, "L": L, "rays": rays,
            "seed": seed, "kappa": kappa, "threads": threads,
        })
        center_txt = ",".join(io.FLOAT_FMT % x for x in data["center"])
        click.echo(f"center: {center_txt}")
        _emit_side_report(data["report"], out, "center-search",
                          {"group": group_path, "box": box, "L": L,
                           "rays": rays}, started, n,
                          extra={"center": center_txt})

    _run(ctx.params, "center-search", build)


@main.command("invariant-subgroup")
@click.option("--group", "group_path", required=True, type=click.Path(exists=True))
@click.option("--l", "-L", "L", default=6, show_default=True,
              help="Word radius for the cocompactness check.")
@click.option("--delta", default=0.8, show_default=True)
@click.option("--box-radius", default=1.0, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def invariant_subgroup_cmd(ctx, group_path, L, delta, box_radius, out):
    """Minimal Heisenberg subgroup on which the group acts cocompactly."""

    def build(started):
        payload, n = _group_payload(group_path)
        data = _post(ctx.obj["server"], "/invariant-subgroup", {
            "group": payload, "L": L, "delta": delta, "box_radius": box_radius,
        })
        sub = data["subgroup"]
        rows = []
        for k, vec in enumerate(sub["basis"]):
            row: list = [k]
            for re, im in vec:
                row.extend([float(re), float(im)])
            rows.append(row)
        header = ["basis_index"] + [
            f"w_{c}_{j}" for j in range(1, n) for c in ("re", "im")
        ]
        conj = sub["conjugator"]
        summary = {
            "include_center": sub["include_center"],
            "exponent": sub["exponent"],
            "conjugator": ",".join(io.FLOAT_FMT % x for x in conj) if conj else "",
            "cocompact": data["cocompact"],
            "max_gap": float(data["max_gap"]),
            "rotation_residual": float(data["rotation_residual"]),
            "delta": delta,
        }
        _write_report(out, "invariant-subgroup", header, rows, summary,
                      {"group": group_path, "L": L}, None,
                      config.DEFAULT_KAPPA, started)
        click.echo(
            f"W rank: {len(rows)}, center: {sub['include_center']}, "
            f"cocompact: {data['cocompact']} (max gap {data['max_gap']:.3g})"
        )

    _run(ctx.params, "invariant-subgroup", build)


@main.command("cusp-audit")
@click.option("--group", "group_path", required=True, type=click.Path(exists=True))
@click.option("--cusp-point", default="inf", show_default=True,
              help="Boundary point or 'inf'.")
@click.option("--radius", "-r", default=1.0, show_default=True)
@click.option("--l", "-L", "L", default=4, show_default=True)
@click.option("--samples", default=10000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def cusp_audit_cmd(ctx, group_path, cusp_point, radius, L, samples, seed, out):
    """Audit precise invariance of a standard cusp neighborhood."""

    def build(started):
        payload, n = _group_payload(group_path)
        p = "inf" if cusp_point == "inf" else _point_payload(cusp_point, n - 1)
        data = _post(ctx.obj["server"], "/cusp-audit", {
            "group": payload, "p": p, "r": radius, "L": L,
            "samples": samples, "seed": seed,
        })
        rows = [[v["label"], v["sample_index"], v["kind"]] for v in data["violations"]]
        summary = {
            "violation_count": data["violation_count"],
            "samples": data["samples"],
            "radius": float(data["radius"]),
            "seed": data["seed"],
            "stabilizer_words": ";".join(data["stabilizer_words"]),
            "tested_words": ";".join(data["tested_words"]),
        }
        _write_report(out, "cusp-audit", ["label", "sample_index", "kind"], rows,
                      summary, {"group": group_path, "cusp_point": cusp_point},
                      seed, config.DEFAULT_KAPPA, started)
        click.echo(f"violations: {data['violation_count']} / {samples} samples")

    _run(ctx.params, "cusp-audit", build)


@main.command("cr-audit")
@click.option("--points", "points_path", required=True, type=click.Path(exists=True),
              help="CSV with xi_re_1.., xi_im_1.., v and image columns fxi_*, fv.")
@click.option("--quads", default=100000, show_default=True)
@click.option("--alphas", default="1:4:0.25", show_default=True,
              help="Alpha grid start:stop:step.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def cr_audit_cmd(ctx, points_path, quads, alphas, seed, out):
    """Fit the cross-ratio distortion constant of a sampled map."""

    def build(started):
        pts, images = io.load_points(points_path)
        if images is None:
            raise GeometryError(f"{points_path}: needs image columns fxi_*, fv")
        try:
            start, stop, step = (float(x) for x in alphas.split(":"))
        except ValueError as exc:
            raise GeometryError(f"alphas {alphas!r}: use start:stop:step") from exc
        grid = []
        a = start
        while a <= stop + 1e-12:
            grid.append(round(a, 12))
            a += step
        data = _post(ctx.obj["server"], "/cr-audit", {
            "points": [_boundary_flat(p) for p in pts],
            "images": [_boundary_flat(p) for p in images],
            "quads": quads, "alphas": grid, "seed": seed,
        })
        rows = [
            [float(a), float(m)] for a, m in zip(data["alphas"], data["m_hat"])
        ]
        summary = {
            "degenerate": data["degenerate"],
            "unbounded": data["unbounded"],
            "quads": data["quads"],
            "seed": data["seed"],
            "worst_quads": ";".join(
                "-".join(str(i) for i in w["indices"]) for w in data["worst"]
            ),
        }
        _write_report(out, "cr-audit", ["alpha", "m_hat"], rows, summary,
                      {"points": points_path, "quads": quads}, seed,
                      config.DEFAULT_KAPPA, started)
        click.echo(f"M_hat(1) = {io.FLOAT_FMT % data['m_hat'][0]}")

    _run(ctx.params, "cr-audit", build)


@main.command("mu-density")
@click.option("--points", "points_path", required=True, type=click.Path(exists=True))
@click.option("--mu", required=True, type=float, help="Chain threshold, > 1.")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def mu_density_cmd(ctx, points_path, mu, out):
    """Check whether every point pair is joined by a finite mu-chain."""

    def build(started):
        pts, _ = io.load_points(points_path)
        data = _post(ctx.obj["server"], "/mu-density", {
            "points": [_boundary_flat(p) for p in pts], "mu": mu,
        })
        click.echo(f"dense: {'true' if data['dense'] else 'false'}")
        rows = [[i, j] for i, j in data["failing_pairs"]]
        _write_report(out, "mu-density", ["fail_a", "fail_b"], rows,
                      {"dense": data["dense"], "mu": mu},
                      {"points": points_path}, None,
                      config.DEFAULT_KAPPA, started)

    _run(ctx.params, "mu-density", build)


def _boundary_flat(p) -> list[float]:
    out = []
    for z in p.xi:
        out.extend([z.real, z.imag])
    out.append(p.v)
    return out


if __name__ == "__main__":
    main()
