"""Heisenberg group law, Cygan metric, inversion, matrix embeddings.

Oracle values: the product (1,0)(i,0) = (1+i,-2) follows from the twist
2 Im<<1, i>> = -2; the translation matrix for (xi, v) = (1, 1) was evaluated
entry by entry; subgroup distances come from the closed form
sqrt(|xi - proj xi|^2 + u) when the center is included.
"""

import numpy as np
import pytest

from chgeom import (
    INFINITY,
    GeometryError,
    HPoint,
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
    heis_dist_to_subgroup,
    inversion_matrix,
    is_J_unitary,
    lift,
    unlift,
)
from chgeom.heisenberg import embed_rotation, embed_translation, pairing

from conftest import random_boundary_point


class TestGroupLaw:
    def test_product_oracle(self):
        # (1, 0)(i, 0) = (1 + i, -2): twist 2 Im(1 * conj(i)) = -2
        c = h_mul(HeisElement((1.0,), 0.0), HeisElement((1j,), 0.0))
        assert c.close_to(HeisElement((1 + 1j,), -2.0))

    def test_inverse_and_identity(self, rng):
        for _ in range(20):
            a = HeisElement(tuple(rng.standard_normal(2) + 1j * rng.standard_normal(2)),
                            float(rng.standard_normal()))
            assert h_mul(a, h_inv(a)).close_to(HeisElement.identity(3), tol=1e-12)
            assert h_mul(h_inv(a), a).close_to(HeisElement.identity(3), tol=1e-12)

    def test_associativity(self, rng):
        for _ in range(20):
            a, b, c = (
                HeisElement(tuple(rng.standard_normal(1) + 1j * rng.standard_normal(1)),
                            float(rng.standard_normal()))
                for _ in range(3)
            )
            lhs = h_mul(h_mul(a, b), c)
            rhs = h_mul(a, h_mul(b, c))
            assert lhs.close_to(rhs, tol=1e-12)

    def test_center_is_central(self, rng):
        z = HeisElement((0.0,), 2.5)
        a = HeisElement((1 - 1j,), 0.3)
        assert h_mul(z, a).close_to(h_mul(a, z), tol=1e-12)

    def test_semidirect_product(self, rng):
        A = np.array([[np.exp(0.3j)]])
        B = np.array([[np.exp(-1.1j)]])
        g = HeisIsometry(A, HeisElement((1.0 + 0.5j,), 0.7))
        h = HeisIsometry(B, HeisElement((-0.2j,), -1.1))
        p = random_boundary_point(rng)
        lhs = apply_heis_isometry(g.compose(h), p)
        rhs = apply_heis_isometry(g, apply_heis_isometry(h, p))
        assert lhs.close_to(rhs, tol=1e-10)
        inv = g.compose(g.inverse())
        assert inv.tau.close_to(HeisElement.identity(2), tol=1e-12)

    def test_rotation_must_be_unitary(self):
        with pytest.raises(GeometryError):
            HeisIsometry(np.array([[2.0]]), HeisElement((0.0,), 0.0))


class TestCygan:
    def test_norm_oracle(self):
        # ||(3+4i, 0, 0)||_c = sqrt(|3+4i|^2) = 5
        assert cygan_norm(HPoint((3 + 4j,), 0.0, 0.0)) == pytest.approx(5.0)
        # pure vertical: |(0, v)|_c = sqrt(|v|)
        assert cygan_norm(HPoint((0.0,), 4.0, 0.0)) == pytest.approx(2.0)

    def test_metric_axioms(self, rng):
        pts = [random_boundary_point(rng) for _ in range(60)]
        for _ in range(300):
            p, q, r = (pts[rng.integers(len(pts))] for _ in range(3))
            dpq = cygan_dist(p, q)
            assert dpq == pytest.approx(cygan_dist(q, p), abs=1e-12)
            assert dpq <= cygan_dist(p, r) + cygan_dist(r, q) + 1e-9

    def test_left_invariance(self, rng):
        for _ in range(50):
            p = random_boundary_point(rng)
            q = random_boundary_point(rng)
            g = HeisIsometry.translation(
                HeisElement(tuple(rng.standard_normal(1) + 1j * rng.standard_normal(1)),
                            float(rng.standard_normal()))
            )
            assert cygan_dist(
                apply_heis_isometry(g, p), apply_heis_isometry(g, q)
            ) == pytest.approx(cygan_dist(p, q), abs=1e-12)

    def test_rotation_invariance(self, rng):
        g = HeisIsometry.rotation(np.array([[np.exp(0.9j)]]))
        for _ in range(50):
            p = random_boundary_point(rng)
            q = random_boundary_point(rng)
            assert cygan_dist(
                apply_heis_isometry(g, p), apply_heis_isometry(g, q)
            ) == pytest.approx(cygan_dist(p, q), abs=1e-12)

    def test_extended_metric_on_heights(self):
        p = HPoint((0.0,), 0.0, 1.0)
        q = HPoint((0.0,), 0.0, 4.0)
        # |u_p - u_q|^(1/2)
        assert cygan_dist(p, q) == pytest.approx(np.sqrt(3.0))

    def test_infinity_rejected(self):
        with pytest.raises(GeometryError):
            cygan_dist(INFINITY, HPoint((0.0,), 0.0, 0.0))


class TestInversion:
    def test_involution_and_norm_reciprocity(self, rng):
        for _ in range(200):
            p = random_boundary_point(rng)
            if cygan_norm(p) < 1e-3:
                continue
            q = h_inversion(p)
            assert h_inversion(q).close_to(p, tol=1e-9 * (1 + cygan_norm(p) ** 4))
            assert cygan_norm(q) * cygan_norm(p) == pytest.approx(1.0, abs=1e-10)

    def test_swaps_origin_and_infinity(self):
        assert h_inversion(HPoint((0.0,), 0.0, 0.0)) is INFINITY
        assert h_inversion(INFINITY, n=2).close_to(HPoint((0.0,), 0.0, 0.0))
        with pytest.raises(GeometryError):
            h_inversion(INFINITY)

    def test_matrix_realizes_formula(self, rng):
        M = inversion_matrix(2)
        assert is_J_unitary(M)
        assert np.allclose(M @ M, np.eye(3))
        for _ in range(50):
            p = random_boundary_point(rng)
            image = unlift(M @ lift(p))
            expected = h_inversion(p, n=2)
            if expected is INFINITY:
                assert image is INFINITY
            else:
                assert image.close_to(expected, tol=1e-9)

    def test_interior_rejected(self):
        with pytest.raises(GeometryError):
            h_inversion(HPoint((0.0,), 0.0, 1.0))


class TestEmbedding:
    def test_translation_matrix_oracle(self):
        # (xi, v) = (1, 1): delta = |xi|^2 - iv = 1 - i
        M = embed_translation(HeisElement((1.0,), 1.0))
        delta = 1.0 - 1.0j
        expected = np.array(
            [
                [1.0, 1.0, 1.0],
                [-1.0, 1.0 - delta / 2, -delta / 2],
                [1.0, delta / 2, 1.0 + delta / 2],
            ]
        )
        assert np.allclose(M, expected)

    def test_homomorphism(self, rng):
        for _ in range(25):
            A = np.array([[np.exp(1j * rng.standard_normal())]])
            B = np.array([[np.exp(1j * rng.standard_normal())]])
            g = HeisIsometry(A, HeisElement(
                tuple(rng.standard_normal(1) + 1j * rng.standard_normal(1)),
                float(rng.standard_normal())))
            h = HeisIsometry(B, HeisElement(
                tuple(rng.standard_normal(1) + 1j * rng.standard_normal(1)),
                float(rng.standard_normal())))
            assert np.allclose(embed(g.compose(h)), embed(g) @ embed(h), atol=1e-12)

    def test_embeds_are_J_unitary(self, rng):
        g = HeisIsometry(np.array([[1j]]), HeisElement((2.0 - 1.0j,), 3.0))
        assert is_J_unitary(embed(g))
        assert is_J_unitary(embed_rotation(np.array([[np.exp(0.4j)]])))

    def test_boundary_action_matches(self, rng):
        g = HeisIsometry(np.array([[np.exp(0.8j)]]), HeisElement((1.0 + 1.0j,), -0.5))
        M = embed(g)
        for _ in range(30):
            p = random_boundary_point(rng)
            assert unlift(M @ lift(p)).close_to(
                apply_heis_isometry(g, p), tol=1e-9
            )

    def test_fixes_infinity_and_height(self):
        g = HeisIsometry.translation(HeisElement((1.0,), 2.0))
        assert apply_heis_isometry(g, INFINITY) is INFINITY
        moved = apply_heis_isometry(g, HPoint((0.0,), 0.0, 0.7))
        assert moved.u == pytest.approx(0.7)


class TestSubgroupDistance:
    def test_center_distance_closed_form(self):
        V = SubgroupDescriptor.center(2)
        # dist((xi, v, u), center) = sqrt(|xi|^2 + u), any v
        assert heis_dist_to_subgroup(HPoint((3 + 4j,), 7.0, 0.0), V) == pytest.approx(5.0)
        assert heis_dist_to_subgroup(HPoint((0.0,), -2.0, 9.0), V) == pytest.approx(3.0)

    def test_horizontal_line_with_center(self):
        V = SubgroupDescriptor(2, ((1.0,),), include_center=True)
        assert heis_dist_to_subgroup(HPoint((2 + 1j,), 5.0, 0.0), V) == pytest.approx(1.0)

    def test_horizontal_line_without_center(self):
        V = SubgroupDescriptor(2, ((1.0,),), include_center=False)
        # nearest point of W x {0} to (i, 0, 0) is the origin
        assert heis_dist_to_subgroup(HPoint((1j,), 0.0, 0.0), V) == pytest.approx(
            1.0, abs=1e-6
        )

    def test_no_center_minimization_beats_projection(self):
        V = SubgroupDescriptor(2, ((1.0,),), include_center=False)
        p = HPoint((3.0 + 1.0j,), 2.0, 0.0)
        d = heis_dist_to_subgroup(p, V)
        # candidate points on W x {0} give an upper bound; check a grid
        best = min(
            cygan_dist(p, HPoint((complex(t),), 0.0, 0.0)) for t in np.linspace(-6, 6, 2001)
        )
        assert d <= best + 1e-6
        assert d >= best - 1e-3

    def test_trivial_subgroup(self):
        V = SubgroupDescriptor(2, (), include_center=False)
        p = HPoint((3 + 4j,), 0.0, 0.0)
        assert heis_dist_to_subgroup(p, V) == pytest.approx(cygan_norm(p))

    def test_isotropy_enforced(self):
        with pytest.raises(GeometryError):
            SubgroupDescriptor(3, ((1.0, 0.0), (1j, 0.0)), include_center=False)
        # same W is fine when the center is included
        SubgroupDescriptor(3, ((1.0, 0.0), (1j, 0.0)), include_center=True)

    def test_membership_means_zero_distance(self):
        V = SubgroupDescriptor(2, ((1.0,),), include_center=True)
        assert heis_dist_to_subgroup(HPoint((2.5,), 1.0, 0.0), V) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_pairing_dimension_mismatch(self):
        with pytest.raises(GeometryError):
            pairing(np.array([1.0]), np.array([1.0, 2.0]))
