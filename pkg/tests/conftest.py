import numpy as np
import pytest

from chgeom import HPoint, HeisElement, HeisIsometry, GroupSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_boundary_point(gen, m=1, scale=2.0):
    xi = tuple(scale * (gen.standard_normal(m) + 1j * gen.standard_normal(m)))
    return HPoint(xi, float(scale * gen.standard_normal()), 0.0)


def random_interior_point(gen, m=1, scale=1.0):
    xi = tuple(scale * (gen.standard_normal(m) + 1j * gen.standard_normal(m)))
    return HPoint(
        xi, float(scale * gen.standard_normal()), float(abs(gen.standard_normal()) + 0.1)
    )


def vertical_cyclic(n=2):
    return GroupSpec(
        n, (HeisIsometry.translation(HeisElement((0.0,) * (n - 1), 1.0)),), ("t",)
    )


def heis_lattice(n=2):
    a = HeisIsometry.translation(HeisElement((1.0,) + (0.0,) * (n - 2), 0.0))
    b = HeisIsometry.translation(HeisElement((0.0,) * (n - 1), 1.0))
    return GroupSpec(n, (a, b), ("a", "b"))
