"""Elements of PU(n,1): canonical matrix form, trichotomy, fixed points.

An isometry is stored as a J-unitary (n+1)x(n+1) matrix normalized within
its projective class: the magnitude is fixed by |det M| = 1 and the global
phase by making a stable choice of largest-modulus entry real positive.
Classification follows the eigenvalue trichotomy: an eigenvalue off the unit
circle means loxodromic; a unimodular spectrum is elliptic when the matrix
is semisimple and parabolic when a Jordan block is present.

Numerical caveat: defective unit-modulus eigenvalues scatter by about
eps**(1/3) under floating-point eigendecomposition, so the unit-circle test
and the eigenvalue clustering use an adaptive radius that never falls below
that scale.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import config
from .hermitian import (
    GeometryError,
    Infinity,
    NumericError,
    Location,
    Point,
    form_matrix,
    is_J_unitary,
    lift,
    point_location,
    unlift,
)


class IsometryType(enum.Enum):
    IDENTITY = "Identity"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    LOXODROMIC = "Loxodromic"


def canonical_form(M: np.ndarray) -> np.ndarray:
    """Scale-normalize a matrix within its projective class.

    |det| is rescaled to 1 and the phase is fixed by the first (row-major)
    entry whose modulus is within 1e-6 of the maximum; that entry becomes
    real positive.  Distinct words evaluating to the same group element agree
    to roundoff, so the selection is stable for deduplication.
    """
    M = np.asarray(M, dtype=complex)
    k = M.shape[0]
    det = np.linalg.det(M)
    if abs(det) == 0.0:
        raise GeometryError("singular matrix cannot represent an isometry")
    M = M / abs(det) ** (1.0 / k)
    mags = np.abs(M)
    peak = float(mags.max())
    idx = np.argmax(mags.ravel() >= peak * (1.0 - 1e-6))
    pivot = M.ravel()[idx]
    return M * (abs(pivot) / pivot)


@dataclass(frozen=True, eq=False)
class Isometry:
    """A J-unitary matrix in canonical form acting on lift vectors."""

    matrix: np.ndarray

    def __post_init__(self):
        M = canonical_form(self.matrix)
        if not is_J_unitary(M, config.TOL_J_UNITARY):
            raise NumericError("matrix is not J-unitary up to scalar")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    @classmethod
    def identity(cls, n: int) -> "Isometry":
        return cls(np.eye(n + 1, dtype=complex))

    def compose(self, other: "Isometry") -> "Isometry":
        return Isometry(self.matrix @ other.matrix)

    def inverse(self) -> "Isometry":
        J = form_matrix(self.n)
        return Isometry(J @ self.matrix.conj().T @ J)

    def dedup_key(self, grid: float = config.DEDUP_GRID) -> tuple:
        """Grid-rounded canonical entries; equal keys identify group elements."""
        q = np.round(self.matrix / grid)
        return tuple(map(tuple, q.real.astype(np.int64))) + tuple(
            map(tuple, q.imag.astype(np.int64))
        )


def dilation_matrix(n: int, t: float) -> np.ndarray:
    """Loxodromic fixing the origin and INFINITY; hyperbolic block angle t.

    Acts on the boundary as the Heisenberg dilation (xi, v) |-> (l xi, l^2 v)
    with l = exp(-t).
    """
    M = np.eye(n + 1, dtype=complex)
    M[n - 1 :, n - 1 :] = [[np.cosh(t), np.sinh(t)], [np.sinh(t), np.cosh(t)]]
    return M


def _adaptive_radius(tol: float, M: np.ndarray) -> float:
    scale = float(np.max(np.abs(M)))
    eps_cluster = 10.0 * (np.finfo(float).eps * max(scale, 1.0)) ** (1.0 / M.shape[0])
    return max(tol, eps_cluster)


def _cluster(values: np.ndarray, radius: float) -> list[np.ndarray]:
    """Group complex values into clusters of mutual distance <= radius."""
    order = np.lexsort((values.imag, values.real))
    groups: list[list[int]] = []
    for i in order:
        for g in groups:
            if abs(values[g[0]] - values[i]) <= radius:
                g.append(int(i))
                break
        else:
            groups.append([int(i)])
    return [np.asarray(g) for g in groups]


def classify(
    g: Isometry,
    tol: float = config.CLASSIFY_TOL,
    jordan_tol: float = config.JORDAN_RANK_TOL,
) -> IsometryType:
    """Elliptic / parabolic / loxodromic / identity trichotomy."""
    M = g.matrix
    k = M.shape[0]
    lam = np.trace(M) / k
    if abs(lam) > 0 and float(np.max(np.abs(M - lam * np.eye(k)))) <= tol * max(
        1.0, float(np.max(np.abs(M)))
    ):
        return IsometryType.IDENTITY
    eigvals = np.linalg.eigvals(M)
    radius = _adaptive_radius(tol, M)
    if np.any(np.abs(eigvals) > 1.0 + radius):
        return IsometryType.LOXODROMIC
    # Unimodular spectrum: semisimple <=> every cluster's eigenspace has the
    # full cluster multiplicity.
    scale = float(np.max(np.abs(M)))
    for idx in _cluster(eigvals, 10.0 * radius):
        center = eigvals[idx].mean()
        sv = np.linalg.svd(M - center * np.eye(k), compute_uv=False)
        rank = int(np.sum(sv > scale * jordan_tol))
        if k - rank < len(idx):
            return IsometryType.PARABOLIC
    return IsometryType.ELLIPTIC


def has_nontrivial_rotation(
    g: Isometry,
    tol: float = config.CLASSIFY_TOL,
) -> bool:
    """Ellipto-parabolic flag: a parabolic with eigenvalues off 1.

    A pure Heisenberg translation conjugate has spectrum {l, l, l} for one
    unimodular l; a screw (ellipto-)parabolic carries extra rotation
    eigenvalues.  Reported as a sub-flag, the element stays Parabolic.
    """
    eigvals = np.linalg.eigvals(g.matrix)
    radius = 10.0 * _adaptive_radius(tol, g.matrix)
    return len(_cluster(eigvals, radius)) > 1


def fixed_points(
    g: Isometry,
    tol: float = config.CLASSIFY_TOL,
    jordan_tol: float = config.JORDAN_RANK_TOL,
) -> list[tuple[np.ndarray, Location]]:
    """Fixed points in the closed model, as (lift vector, location) pairs.

    Eigenvectors are grouped by eigenvalue cluster; inside each eigenspace
    the restricted Hermitian form is diagonalized and only non-exterior
    directions are reported.  Parabolic elements yield exactly one boundary
    point, loxodromic exactly two, elliptic at least one interior point.
    """
    if classify(g, tol, jordan_tol) is IsometryType.IDENTITY:
        raise GeometryError("the identity fixes everything")
    M = g.matrix
    k = M.shape[0]
    J = form_matrix(k - 1)
    scale = float(np.max(np.abs(M)))
    eigvals = np.linalg.eigvals(M)
    radius = 10.0 * _adaptive_radius(tol, M)
    out: list[tuple[np.ndarray, Location]] = []
    for idx in _cluster(eigvals, radius):
        center = eigvals[idx].mean()
        _, sv, vh = np.linalg.svd(M - center * np.eye(k))
        null_dim = int(np.sum(sv <= scale * 1e-7))
        if null_dim == 0:
            continue
        basis = vh[k - null_dim :].conj().T  # columns span the eigenspace
        F = basis.conj().T @ J @ basis
        F = (F + F.conj().T) / 2.0
        w, vecs = np.linalg.eigh(F)
        for val, col in zip(w, vecs.T):
            z = basis @ col
            z_norm2 = float(np.sum(np.abs(z) ** 2))
            if val < -config.TOL_LOCATION * z_norm2:
                out.append((z, Location.INTERIOR))
            elif val <= config.TOL_LOCATION * max(z_norm2, 1.0) * 10.0:
                out.append((z, Location.BOUNDARY))
            # positive directions are exterior; not fixed points of the model
    return out


def boundary_action(g: Isometry, p: Point) -> Point:
    """Action on the sphere at infinity: unlift(M . lift(p))."""
    if not isinstance(p, Infinity) and p.u > 0.0:
        raise GeometryError("boundary_action needs a boundary point or INFINITY")
    z = g.matrix @ lift(p, n=g.n)
    result = unlift(z)
    return result


def apply_isometry(g: Isometry, p: Point) -> Point:
    """Action on any point of the closed model via lifts."""
    return unlift(g.matrix @ lift(p, n=g.n))
