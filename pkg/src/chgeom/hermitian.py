"""Signature-(n,1) Hermitian form, horospherical lifts, Bergman metric.

Points of the closed Siegel model are ``HPoint`` values (xi, v, u) with
xi in C^(n-1), v real, u >= 0, plus the distinct atom ``INFINITY``.  A point
lifts to a complex (n+1)-vector carrying the form

    <z, w> = sum_{i<=n} z_i conj(w_i) - z_{n+1} conj(w_{n+1}),

i.e. J = diag(1, ..., 1, -1).  The lift of (xi, v, u) is
(2 xi, 1 - w, 1 + w) with w = |xi|^2 + u - i v, which satisfies
<lift(p), lift(p)> = -4u and makes the standard Heisenberg translation
matrices act by left translation on boundary lifts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import config


class GeometryError(ValueError):
    """Invalid geometric input (dimension mismatch, wrong point class)."""


class NumericError(GeometryError):
    """Numerically infeasible input (non-J-unitary matrix, blown-up table)."""


class Infinity:
    """The distinguished boundary point at infinity (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = Infinity()


@dataclass(frozen=True)
class HPoint:
    """Finite point of the closed Siegel model in horospherical coordinates."""

    xi: tuple[complex, ...]
    v: float
    u: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(complex(x) for x in self.xi))
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "u", float(self.u))
        if self.u < 0:
            raise GeometryError(f"horospherical height must be >= 0, got {self.u}")

    @property
    def n(self) -> int:
        """Ambient complex dimension."""
        return len(self.xi) + 1

    @property
    def xi_array(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=complex)

    def is_boundary(self, tol: float = 0.0) -> bool:
        return self.u <= tol

    def close_to(self, other: "HPoint", tol: float = 1e-9) -> bool:
        if not isinstance(other, HPoint) or len(self.xi) != len(other.xi):
            return False
        return (
            float(np.max(np.abs(self.xi_array - other.xi_array), initial=0.0)) <= tol
            and abs(self.v - other.v) <= tol
            and abs(self.u - other.u) <= tol
        )


Point = HPoint | Infinity


class Location(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


def form_matrix(n: int) -> np.ndarray:
    """The Hermitian form J = diag(1, ..., 1, -1) of signature (n, 1)."""
    J = np.eye(n + 1)
    J[n, n] = -1.0
    return J


def hermitian_form(z: np.ndarray, w: np.ndarray) -> complex:
    """<z, w> = sum_{i<=n} z_i conj(w_i) - z_{n+1} conj(w_{n+1})."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.shape != w.shape or z.ndim != 1:
        raise GeometryError(f"dimension mismatch: {z.shape} vs {w.shape}")
    return complex(np.sum(z[:-1] * np.conj(w[:-1])) - z[-1] * np.conj(w[-1]))


def form_value(z: np.ndarray) -> float:
    """<z, z>, guaranteed real; the imaginary part is discarded."""
    return hermitian_form(z, z).real


def lift(p: Point, n: int | None = None) -> np.ndarray:
    """Lift a horospherical point to a projective vector in C^(n+1).

    Finite (xi, v, u) maps to (2 xi, 1 - w, 1 + w), w = |xi|^2 + u - i v;
    INFINITY maps to the null vector (0, ..., 0, 1, -1).  For INFINITY the
    ambient dimension ``n`` must be supplied.
    """
    if isinstance(p, Infinity):
        if n is None:
            raise GeometryError("lift of INFINITY needs the ambient dimension n")
        z = np.zeros(n + 1, dtype=complex)
        z[n - 1] = 1.0
        z[n] = -1.0
        return z
    xi = p.xi_array
    w = float(np.sum(np.abs(xi) ** 2)) + p.u - 1j * p.v
    return np.concatenate([2.0 * xi, [1.0 - w, 1.0 + w]])


def unlift(z: np.ndarray, tol: float = config.TOL_LOCATION) -> Point:
    """Invert ``lift`` up to a complex scalar.

    Accepts interior and boundary vectors; rejects exterior ones.  Vectors
    proportional to (0, ..., 0, 1, -1) return INFINITY.
    """
    z = np.asarray(z, dtype=complex)
    norm2 = float(np.sum(np.abs(z) ** 2))
    if norm2 == 0.0:
        raise GeometryError("cannot unlift the zero vector")
    val = form_value(z)
    if val > tol * norm2:
        raise GeometryError(f"exterior vector: <z,z>/|z|^2 = {val / norm2:.3e}")
    denom = z[-2] + z[-1]
    if abs(denom) <= tol * np.sqrt(norm2):
        return INFINITY
    z = z * (2.0 / denom)
    xi = z[:-2] / 2.0
    w = (z[-1] - z[-2]) / 2.0
    u = w.real - float(np.sum(np.abs(xi) ** 2))
    v = -w.imag
    if abs(u) <= tol:
        u = 0.0
    return HPoint(tuple(xi), v, u)


def point_location(z: np.ndarray, tol: float = config.TOL_LOCATION) -> Location:
    """Classify a projective vector by the sign of <z,z>/|z|^2."""
    z = np.asarray(z, dtype=complex)
    norm2 = float(np.sum(np.abs(z) ** 2))
    if norm2 == 0.0:
        raise GeometryError("zero vector has no location")
    ratio = form_value(z) / norm2
    if ratio < -tol:
        return Location.INTERIOR
    if ratio > tol:
        return Location.EXTERIOR
    return Location.BOUNDARY


def _require_interior(p: Point, name: str) -> HPoint:
    if isinstance(p, Infinity) or p.u <= 0.0:
        raise GeometryError(f"{name} must be an interior point (u > 0)")
    return p


def bergman_distance(p: Point, q: Point, kappa: float = config.DEFAULT_KAPPA) -> float:
    """Bergman distance between interior points.

    d = kappa * arccosh(sqrt(<P,Q><Q,P> / (<P,P><Q,Q>))).  With kappa = 4 the
    sectional curvature lies in [-1, -1/4] and vertical-axis pairs satisfy
    d((0,0,1), (0,0,u)) = 2 |ln u|.
    """
    p = _require_interior(p, "p")
    q = _require_interior(q, "q")
    P, Q = lift(p), lift(q)
    return lifted_distance(P, Q, kappa)


def lifted_distance(P: np.ndarray, Q: np.ndarray, kappa: float = config.DEFAULT_KAPPA) -> float:
    """Bergman distance from interior lift vectors (forms must be negative)."""
    pp = form_value(P)
    qq = form_value(Q)
    if pp >= 0 or qq >= 0:
        raise GeometryError("lifted_distance needs interior vectors")
    pq = hermitian_form(P, Q)
    ratio = (pq * np.conj(pq)).real / (pp * qq)
    return kappa * float(np.arccosh(np.sqrt(max(ratio, 1.0))))


def geodesic_frame(
    p: Point, q: Point, kappa: float = config.DEFAULT_KAPPA
) -> tuple[np.ndarray, np.ndarray, float]:
    """Orthonormal lift frame (P_hat, X_hat) of the geodesic from p toward q.

    <P_hat, P_hat> = -1, <X_hat, X_hat> = 1, <X_hat, P_hat> = 0, with the
    phase of X_hat chosen so that cosh(s/kappa) P_hat + sinh(s/kappa) X_hat
    moves toward q as the arclength s grows.  Also returns d(p, q).
    """
    p = _require_interior(p, "p")
    q = _require_interior(q, "q")
    P, Q = lift(p), lift(q)
    P_hat = P / np.sqrt(-form_value(P))
    c = hermitian_form(Q, P_hat)
    if abs(c) == 0.0:
        raise GeometryError("degenerate pair in geodesic_frame")
    Q = Q * (-np.conj(c) / abs(c))  # now <Q, P_hat> = -|c| < 0
    X = Q + hermitian_form(Q, P_hat) * P_hat
    xx = form_value(X)
    if xx <= 0:
        raise GeometryError("p and q do not span a geodesic (coincident points?)")
    X_hat = X / np.sqrt(xx)
    return P_hat, X_hat, lifted_distance(P, Q, kappa)


def geodesic_point(
    p: Point, q: Point, s: float, kappa: float = config.DEFAULT_KAPPA
) -> Point:
    """Point at Bergman arclength ``s`` from p along the geodesic toward q."""
    if s < 0:
        raise GeometryError("arclength must be >= 0")
    P_hat, X_hat, _ = geodesic_frame(p, q, kappa)
    t = s / kappa
    return unlift(np.cosh(t) * P_hat + np.sinh(t) * X_hat)


def is_J_unitary(M: np.ndarray, tol: float = config.TOL_J_UNITARY) -> bool:
    """True iff M preserves J up to scalar: ||M* J M - J||_max <= tol after
    rescaling M so that |det M| = 1."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise GeometryError("is_J_unitary expects a square matrix")
    k = M.shape[0]
    det = np.linalg.det(M)
    if abs(det) == 0.0:
        return False
    M = M / abs(det) ** (1.0 / k)
    J = form_matrix(k - 1)
    # Relative tolerance: the residual of an exactly J-unitary matrix grows
    # like ||M||^2 * eps under floating-point products.
    scale = max(1.0, float(np.max(np.abs(M))) ** 2)
    return float(np.max(np.abs(M.conj().T @ J @ M - J))) <= tol * scale
