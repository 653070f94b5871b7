"""Group JSON, point parsing, point-cloud CSV, deterministic report text."""

import json

import numpy as np
import pytest

from chgeom import GeometryError, HPoint, HeisIsometry, NumericError
from chgeom.io import (
    csv_text,
    group_from_dict,
    group_to_dict,
    load_group,
    load_points,
    make_manifest,
    parse_point,
    point_header,
    point_row,
)

from conftest import heis_lattice


class TestGroupJSON:
    def test_roundtrip(self, tmp_path):
        spec = heis_lattice()
        path = tmp_path / "g.json"
        path.write_text(json.dumps(group_to_dict(spec)))
        back = load_group(str(path))
        assert back.n == spec.n
        assert back.labels == spec.labels
        for g, h in zip(back.generators, spec.generators):
            assert isinstance(g, HeisIsometry)
            assert np.allclose(g.A, h.A)
            assert g.tau.close_to(h.tau)

    def test_matrix_generator_roundtrip(self):
        data = {
            "n": 2,
            "generators": [
                {
                    "type": "matrix",
                    "entries": [
                        [[1, 0], [0, 0], [0, 0]],
                        [[0, 0], [np.cosh(1.0), 0], [np.sinh(1.0), 0]],
                        [[0, 0], [np.sinh(1.0), 0], [np.cosh(1.0), 0]],
                    ],
                }
            ],
            "labels": ["d"],
        }
        spec = group_from_dict(data)
        again = group_from_dict(group_to_dict(spec))
        assert np.allclose(
            spec.generators[0].matrix, again.generators[0].matrix
        )

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(GeometryError, match="invalid JSON"):
            load_group(str(path))

    def test_missing_fields(self):
        with pytest.raises(GeometryError, match="'n' and 'generators'"):
            group_from_dict({"generators": []})
        with pytest.raises(GeometryError, match="generator 0"):
            group_from_dict({"n": 2, "generators": [{"type": "heis"}]})
        with pytest.raises(GeometryError, match="unknown generator type"):
            group_from_dict({"n": 2, "generators": [{"type": "weird"}]})

    def test_complex_encoding_enforced(self):
        data = {
            "n": 2,
            "generators": [{"type": "heis", "A": [[1.0]], "xi": [[0, 0]], "v": 0.0}],
        }
        with pytest.raises(GeometryError, match=r"\[re, im\]"):
            group_from_dict(data)

    def test_non_J_unitary_matrix_is_numeric_error(self):
        data = {
            "n": 2,
            "generators": [
                {
                    "type": "matrix",
                    "entries": [
                        [[2, 0], [0, 0], [0, 0]],
                        [[0, 0], [1, 0], [0, 0]],
                        [[0, 0], [0, 0], [1, 0]],
                    ],
                }
            ],
        }
        with pytest.raises(NumericError):
            group_from_dict(data)


class TestPointParsing:
    def test_short_real_form(self):
        p = parse_point("0,0,1", m=1)
        assert p.close_to(HPoint((0.0,), 0.0, 1.0))

    def test_full_complex_form(self):
        p = parse_point("1,-2,0.5,0.25", m=1)
        assert p.close_to(HPoint((1 - 2j,), 0.5, 0.25))

    def test_errors(self):
        with pytest.raises(GeometryError, match="non-numeric"):
            parse_point("a,b,c", m=1)
        with pytest.raises(GeometryError, match="expected"):
            parse_point("1,2", m=1)


class TestPointCSV:
    def test_load_points_with_images(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text(
            "xi_re_1,xi_im_1,v,fxi_re_1,fxi_im_1,fv\n"
            "1.0,0.0,0.5,2.0,0.0,1.0\n"
            "0.0,1.0,-0.5,0.0,2.0,-1.0\n"
        )
        pts, imgs = load_points(str(path))
        assert len(pts) == 2 and imgs is not None
        assert pts[0].close_to(HPoint((1.0,), 0.5, 0.0))
        assert imgs[1].close_to(HPoint((2j,), -1.0, 0.0))

    def test_load_points_without_images(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("xi_re_1,xi_im_1,v\n1.0,2.0,3.0\n")
        pts, imgs = load_points(str(path))
        assert imgs is None
        assert pts[0].close_to(HPoint((1 + 2j,), 3.0, 0.0))

    def test_bad_header_and_rows(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("x,y\n1,2\n")
        with pytest.raises(GeometryError, match="needs columns"):
            load_points(str(path))
        path.write_text("xi_re_1,xi_im_1,v\n1.0,oops,3.0\n")
        with pytest.raises(GeometryError, match="line 2"):
            load_points(str(path))


class TestReportText:
    def test_csv_text_layout_and_determinism(self):
        header = ["a", "b"]
        rows = [[1.0 / 3.0, "x"], [2.0, "y"]]
        summary = {"zeta": 1.5, "alpha": "ok"}
        text = csv_text(header, rows, summary)
        lines = text.strip().split("\n")
        assert lines[0] == "a,b"
        assert lines[1].startswith("0.3333333333333333")  # 17 significant digits
        # summary block sorted by key
        assert lines[3] == "# alpha,ok"
        assert lines[4] == "# zeta,1.5"
        assert text == csv_text(header, rows, summary)

    def test_point_row_and_header(self):
        p = HPoint((1 + 2j, 3.0), -0.5, 0.25)
        assert point_header(2) == [
            "xi_re_1", "xi_im_1", "xi_re_2", "xi_im_2", "v", "u",
        ]
        assert point_row(p) == [1.0, 2.0, 3.0, 0.0, -0.5, 0.25]

    def test_manifest_fields(self):
        m = make_manifest("classify", {"file": "g.json"}, seed=3)
        d = m.to_dict()
        assert d["subcommand"] == "classify"
        assert d["seed"] == 3
        assert "version" in d and "tolerances" in d
