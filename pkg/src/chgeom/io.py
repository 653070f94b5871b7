"""File formats: group-spec JSON, point-cloud CSV, report CSV, run manifests.

Group files are JSON with complex numbers encoded as [re, im] pairs:

    {"n": 2,
     "generators": [{"type": "heis", "A": [[[1,0]]], "xi": [[0,0]], "v": 1.0},
                    {"type": "matrix", "entries": [[[...], ...], ...]}],
     "labels": ["t", "g"]}

Point clouds are CSV with columns xi_re_1.., xi_im_1.., v (u fixed at 0),
plus optional image columns (fxi_re_1.., fxi_im_1.., fv) for audited maps.
All CSV floats are written with 17 significant digits so equal runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io as _io
import json
import time
from dataclasses import dataclass

import numpy as np

from . import config
from .hermitian import GeometryError, HPoint, NumericError
from .heisenberg import HeisElement, HeisIsometry
from .isometry import Isometry
from .groups import GroupSpec

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return FLOAT_FMT % float(x)


def _complex_in(value) -> complex:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise GeometryError(f"complex values are [re, im] pairs, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _complex_out(z: complex) -> list[float]:
    return [z.real, z.imag]


def load_group(path: str) -> GroupSpec:
    """Parse a group-spec JSON file; errors name the offending field."""
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise GeometryError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return group_from_dict(data, where=path)


def group_from_dict(data: dict, where: str = "group spec") -> GroupSpec:
    try:
        n = int(data["n"])
        raw_gens = data["generators"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"{where}: needs integer 'n' and 'generators'") from exc
    gens = []
    for k, g in enumerate(raw_gens):
        kind = g.get("type")
        try:
            if kind == "heis":
                A = np.asarray([[_complex_in(z) for z in row] for row in g["A"]])
                xi = tuple(_complex_in(z) for z in g["xi"])
                gens.append(HeisIsometry(A, HeisElement(xi, float(g["v"]))))
            elif kind == "matrix":
                M = np.asarray(
                    [[_complex_in(z) for z in row] for row in g["entries"]]
                )
                gens.append(Isometry(M))
            else:
                raise GeometryError(f"unknown generator type {kind!r}")
        except NumericError as exc:
            raise NumericError(f"{where}: generator {k}: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise GeometryError(f"{where}: generator {k}: {exc}") from exc
    labels = tuple(data.get("labels", ()))
    return GroupSpec(n, tuple(gens), labels)


def group_to_dict(spec: GroupSpec) -> dict:
    gens = []
    for g in spec.generators:
        if isinstance(g, HeisIsometry):
            gens.append(
                {
                    "type": "heis",
                    "A": [[_complex_out(z) for z in row] for row in np.asarray(g.A)],
                    "xi": [_complex_out(z) for z in g.tau.xi],
                    "v": g.tau.v,
                }
            )
        else:
            gens.append(
                {
                    "type": "matrix",
                    "entries": [
                        [_complex_out(z) for z in row] for row in g.matrix
                    ],
                }
            )
    return {"n": spec.n, "generators": gens, "labels": list(spec.labels)}


def parse_point(text: str, m: int) -> HPoint:
    """Parse a comma-separated point with m = n - 1 horizontal coordinates.

    Accepts 'xi_re_1,xi_im_1,...,v,u' (2m + 2 fields) or the short real form
    'xi_1,...,v,u' (m + 2 fields); so '0,0,1' in dimension n = 2 is the
    interior point xi = 0, v = 0, u = 1.
    """
    try:
        parts = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise GeometryError(f"point {text!r}: non-numeric field") from exc
    if len(parts) == 2 * m + 2:
        coords = parts[: 2 * m]
        xi = tuple(complex(coords[2 * j], coords[2 * j + 1]) for j in range(m))
    elif len(parts) == m + 2:
        xi = tuple(complex(c) for c in parts[:m])
    else:
        raise GeometryError(
            f"point {text!r}: expected {m + 2} or {2 * m + 2} fields"
        )
    return HPoint(xi, parts[-2], parts[-1])


def load_points(path: str) -> tuple[list[HPoint], list[HPoint] | None]:
    """Read a point-cloud CSV; returns (points, images or None)."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise GeometryError(f"{path}: empty CSV")
        fields = [name.strip() for name in reader.fieldnames]
        m = sum(1 for name in fields if name.startswith("xi_re_"))
        if m == 0 or "v" not in fields:
            raise GeometryError(f"{path}: needs columns xi_re_1.., xi_im_1.., v")
        has_image = "fv" in fields
        points, images = [], []
        for lineno, row in enumerate(reader, start=2):
            row = {k.strip(): val for k, val in row.items()}
            try:
                xi = tuple(
                    complex(float(row[f"xi_re_{j}"]), float(row[f"xi_im_{j}"]))
                    for j in range(1, m + 1)
                )
                points.append(HPoint(xi, float(row["v"]), 0.0))
                if has_image:
                    fxi = tuple(
                        complex(float(row[f"fxi_re_{j}"]), float(row[f"fxi_im_{j}"]))
                        for j in range(1, m + 1)
                    )
                    images.append(HPoint(fxi, float(row["fv"]), 0.0))
            except (KeyError, TypeError, ValueError) as exc:
                raise GeometryError(f"{path}: line {lineno}: {exc}") from exc
    return points, (images if has_image else None)


@dataclass(frozen=True)
class RunManifest:
    """Provenance block accompanying every output file."""

    subcommand: str
    inputs: dict
    seed: int | None
    kappa: float
    tolerances: dict
    version: str
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "inputs": self.inputs,
            "seed": self.seed,
            "kappa": self.kappa,
            "tolerances": self.tolerances,
            "version": self.version,
            "wall_time_s": self.wall_time_s,
        }


def make_manifest(
    subcommand: str,
    inputs: dict,
    seed: int | None,
    kappa: float = config.DEFAULT_KAPPA,
    tolerances: dict | None = None,
    started: float | None = None,
) -> RunManifest:
    from . import __version__

    wall = 0.0 if started is None else time.monotonic() - started
    return RunManifest(
        subcommand=subcommand,
        inputs=inputs,
        seed=seed,
        kappa=kappa,
        tolerances=tolerances if tolerances is not None else config.DEFAULTS.as_dict(),
        version=__version__,
        wall_time_s=wall,
    )


def csv_text(header: list[str], rows: list[list], summary: dict) -> str:
    """Render a report CSV: data table, then a '# key,value' summary block.

    Floats are rendered with 17 significant digits; the summary block is
    sorted by key so that identical runs produce byte-identical text.
    """
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [_fmt(x) if isinstance(x, float) else str(x) for x in row]
        )
    for key in sorted(summary):
        val = summary[key]
        writer.writerow([f"# {key}", _fmt(val) if isinstance(val, float) else str(val)])
    return buf.getvalue()


def point_row(p: HPoint) -> list[float]:
    out: list[float] = []
    for z in p.xi:
        out.extend([z.real, z.imag])
    out.extend([p.v, p.u])
    return out


def point_header(m: int) -> list[str]:
    names = []
    for j in range(1, m + 1):
        names.extend([f"xi_re_{j}", f"xi_im_{j}"])
    names.extend(["v", "u"])
    return names
