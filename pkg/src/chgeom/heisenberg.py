"""The Heisenberg group H_n = C^(n-1) x R and its Cygan geometry.

Group law (twisted by the standard symplectic form):

    (xi_a, v_a) (xi_b, v_b) = (xi_a + xi_b, v_a + v_b + 2 Im <<xi_a, xi_b>>),

with the pairing <<a, b>> = sum_j a_j conj(b_j).  H_n acts on the Siegel
model by left translations, U(n-1) by rotations, and the semidirect product
H(n) = H_n x| U(n-1) embeds into U(n,1) by explicit matrices.  The module
also houses the Cygan metric (extended to horospherical height u), the
Heisenberg inversion swapping the origin and infinity, and distances to
invariant subgroups used by cusp-neighborhood audits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import config
from .hermitian import INFINITY, GeometryError, HPoint, Infinity, Point


def pairing(a: np.ndarray, b: np.ndarray) -> complex:
    """<<a, b>> = sum_j a_j conj(b_j)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise GeometryError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.sum(a * np.conj(b)))


@dataclass(frozen=True)
class HeisElement:
    """Element (xi, v) of H_n."""

    xi: tuple[complex, ...]
    v: float

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(complex(x) for x in self.xi))
        object.__setattr__(self, "v", float(self.v))

    @property
    def xi_array(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=complex)

    @classmethod
    def identity(cls, n: int) -> "HeisElement":
        return cls((0.0,) * (n - 1), 0.0)

    def close_to(self, other: "HeisElement", tol: float = 1e-9) -> bool:
        return (
            len(self.xi) == len(other.xi)
            and float(np.max(np.abs(self.xi_array - other.xi_array), initial=0.0)) <= tol
            and abs(self.v - other.v) <= tol
        )


def h_mul(a: HeisElement, b: HeisElement) -> HeisElement:
    """Heisenberg product."""
    if len(a.xi) != len(b.xi):
        raise GeometryError("dimension mismatch in h_mul")
    twist = 2.0 * pairing(a.xi_array, b.xi_array).imag
    return HeisElement(tuple(a.xi_array + b.xi_array), a.v + b.v + twist)


def h_inv(a: HeisElement) -> HeisElement:
    """(xi, v)^{-1} = (-xi, -v)."""
    return HeisElement(tuple(-a.xi_array), -a.v)


@dataclass(frozen=True, eq=False)
class HeisIsometry:
    """Element (A, tau) of H(n) = H_n x| U(n-1): rotate by A, then translate."""

    A: np.ndarray
    tau: HeisElement

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        m = len(self.tau.xi)
        if A.shape != (m, m):
            raise GeometryError(f"rotation block must be {m}x{m}, got {A.shape}")
        if float(np.max(np.abs(A.conj().T @ A - np.eye(m)), initial=0.0)) > 1e-10:
            raise GeometryError("rotation part is not unitary")

    @property
    def n(self) -> int:
        return len(self.tau.xi) + 1

    @classmethod
    def translation(cls, tau: HeisElement) -> "HeisIsometry":
        return cls(np.eye(len(tau.xi)), tau)

    @classmethod
    def rotation(cls, A: np.ndarray) -> "HeisIsometry":
        A = np.asarray(A, dtype=complex)
        return cls(A, HeisElement.identity(A.shape[0] + 1))

    def compose(self, other: "HeisIsometry") -> "HeisIsometry":
        """Semidirect product: (A, t)(B, s) = (AB, t . (A s))."""
        rotated = HeisElement(tuple(self.A @ other.tau.xi_array), other.tau.v)
        return HeisIsometry(self.A @ other.A, h_mul(self.tau, rotated))

    def inverse(self) -> "HeisIsometry":
        Ainv = self.A.conj().T
        return HeisIsometry(
            Ainv, HeisElement(tuple(Ainv @ h_inv(self.tau).xi_array), -self.tau.v)
        )


# ---------------------------------------------------------------------------
# Cygan metric
# ---------------------------------------------------------------------------


def cygan_norm(p: HPoint) -> float:
    """||(xi, v, u)||_c = | |xi|^2 + u - i v |^(1/2)."""
    if isinstance(p, Infinity):
        raise GeometryError("cygan_norm is undefined at INFINITY")
    w = float(np.sum(np.abs(p.xi_array) ** 2)) + p.u - 1j * p.v
    return float(np.sqrt(abs(w)))


def cygan_dist_coords(xi1, v1, u1, xi2, v2, u2) -> np.ndarray:
    """Vectorized extended Cygan distance on coordinate arrays.

    ``xi1``/``xi2`` carry the complex horizontal coordinate on the last axis;
    the remaining axes broadcast.  On the boundary (u = 0) this is the
    left-invariant metric ||q^{-1} p||_c.
    """
    xi1 = np.asarray(xi1, dtype=complex)
    xi2 = np.asarray(xi2, dtype=complex)
    diff2 = np.sum(np.abs(xi1 - xi2) ** 2, axis=-1)
    twist = 2.0 * np.imag(np.sum(xi2 * np.conj(xi1), axis=-1))
    real_part = diff2 + np.abs(np.asarray(u1) - np.asarray(u2))
    imag_part = np.asarray(v1) - np.asarray(v2) - twist
    return (real_part**2 + imag_part**2) ** 0.25


def cygan_dist(p: HPoint, q: HPoint) -> float:
    """Extended Cygan distance between finite points of the closed model."""
    for x in (p, q):
        if isinstance(x, Infinity):
            raise GeometryError("cygan_dist is undefined at INFINITY")
    if len(p.xi) != len(q.xi):
        raise GeometryError("dimension mismatch in cygan_dist")
    return float(cygan_dist_coords(p.xi_array, p.v, p.u, q.xi_array, q.v, q.u))


def apply_heis_isometry(g: HeisIsometry, p: Point) -> Point:
    """Rotate by g.A, then left-translate by g.tau; fixes INFINITY and u."""
    if isinstance(p, Infinity):
        return INFINITY
    rotated = g.A @ p.xi_array
    moved = h_mul(g.tau, HeisElement(tuple(rotated), p.v))
    return HPoint(moved.xi, moved.v, p.u)


def h_inversion(p: Point, n: int | None = None) -> Point:
    """Heisenberg inversion in the unit Cygan sphere about the origin.

    I(xi, v) = (xi / (|xi|^2 - iv), -v / (v^2 + |xi|^4)); swaps the origin
    and INFINITY.  Defined on the boundary only (u = 0); inverting INFINITY
    needs the ambient dimension ``n``.
    """
    if isinstance(p, Infinity):
        if n is None:
            raise GeometryError("h_inversion(INFINITY) needs the ambient dimension n")
        return HPoint((0.0,) * (n - 1), 0.0, 0.0)
    if p.u > 0.0:
        raise GeometryError("h_inversion is defined on the boundary u = 0 only")
    w = complex(np.sum(np.abs(p.xi_array) ** 2), -p.v)
    if abs(w) == 0.0:
        return INFINITY
    xi_new = p.xi_array / w
    v_new = -p.v / abs(w) ** 2
    return HPoint(tuple(xi_new), v_new, 0.0)


# ---------------------------------------------------------------------------
# Matrix embeddings into U(n,1)
# ---------------------------------------------------------------------------


def embed_rotation(A: np.ndarray) -> np.ndarray:
    """A in U(n-1) |-> blockdiag(A, 1, 1)."""
    A = np.asarray(A, dtype=complex)
    m = A.shape[0]
    M = np.eye(m + 2, dtype=complex)
    M[:m, :m] = A
    return M


def embed_translation(tau: HeisElement) -> np.ndarray:
    """The displayed (n+1)x(n+1) translation matrix for (xi, v)."""
    xi = tau.xi_array
    m = xi.shape[0]
    delta = complex(np.sum(np.abs(xi) ** 2), -tau.v)  # |xi|^2 - iv
    M = np.zeros((m + 2, m + 2), dtype=complex)
    M[:m, :m] = np.eye(m)
    M[:m, m] = xi
    M[:m, m + 1] = xi
    M[m, :m] = -np.conj(xi)
    M[m, m] = 1.0 - delta / 2.0
    M[m, m + 1] = -delta / 2.0
    M[m + 1, :m] = np.conj(xi)
    M[m + 1, m] = delta / 2.0
    M[m + 1, m + 1] = 1.0 + delta / 2.0
    return M


def embed(g: HeisIsometry) -> np.ndarray:
    """Embed (A, tau) as translation-after-rotation; a group homomorphism."""
    return embed_translation(g.tau) @ embed_rotation(g.A)


def inversion_matrix(n: int) -> np.ndarray:
    """The Heisenberg inversion as a J-unitary matrix.

    blockdiag(I_{n-1}, [[-1, 0], [0, 1]]) swaps the lifts of the origin and
    INFINITY and induces the boundary formula of ``h_inversion``.
    """
    M = np.eye(n + 1, dtype=complex)
    M[n - 1, n - 1] = -1.0
    return M


# ---------------------------------------------------------------------------
# Invariant subgroups and distances to them
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubgroupDescriptor:
    """Connected subgroup V = exp(W) (x center) of H_n.

    ``basis`` spans a real-linear horizontal subspace W of C^(n-1); when the
    center is excluded, W must be isotropic for the symplectic twist
    (Im <<w, w'>> = 0) so that W x {0} is closed under the group law.
    """

    n: int
    basis: tuple[tuple[complex, ...], ...]
    include_center: bool
    conjugator: HeisElement | None = None
    exponent: int = 1

    def __post_init__(self):
        vecs = tuple(tuple(complex(x) for x in b) for b in self.basis)
        object.__setattr__(self, "basis", vecs)
        for b in vecs:
            if len(b) != self.n - 1:
                raise GeometryError("basis vector has wrong dimension")
        if not self.include_center:
            arr = [np.asarray(b, dtype=complex) for b in vecs]
            for i, bi in enumerate(arr):
                for bj in arr[i:]:
                    if abs(pairing(bi, bj).imag) > 1e-10:
                        raise GeometryError(
                            "W is not isotropic; V = W without the center "
                            "is not a subgroup"
                        )

    @classmethod
    def center(cls, n: int) -> "SubgroupDescriptor":
        return cls(n, (), include_center=True)

    @classmethod
    def full(cls, n: int) -> "SubgroupDescriptor":
        basis = []
        for j in range(n - 1):
            e = [0.0] * (n - 1)
            e[j] = 1.0
            basis.append(tuple(e))
            e = [0.0] * (n - 1)
            e[j] = 1j
            basis.append(tuple(e))
        return cls(n, tuple(basis), include_center=True)

    def real_basis(self) -> np.ndarray:
        """Orthonormal real basis of W as rows in R^(2(n-1))."""
        if not self.basis:
            return np.zeros((0, 2 * (self.n - 1)))
        rows = []
        for b in self.basis:
            arr = np.asarray(b, dtype=complex)
            rows.append(np.concatenate([arr.real, arr.imag]))
        B = np.asarray(rows)
        # Orthonormalize; discard numerically dependent directions.
        q, r = np.linalg.qr(B.T)
        keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, float(np.max(np.abs(B))))
        return q.T[keep]


def _to_real(xi: np.ndarray) -> np.ndarray:
    return np.concatenate([xi.real, xi.imag])


def _to_complex(x: np.ndarray) -> np.ndarray:
    m = x.shape[0] // 2
    return x[:m] + 1j * x[m:]


def heis_dist_to_subgroup(p: HPoint, V: SubgroupDescriptor) -> float:
    """inf over q in V (u_q = 0) of the extended Cygan distance to p.

    With the center included the infimum is attained in closed form: project
    xi onto W and absorb the vertical difference exactly.  Without the
    center the one remaining coupling is minimized numerically (smooth,
    low-dimensional; deterministic start at the projection).
    """
    if isinstance(p, Infinity):
        raise GeometryError("heis_dist_to_subgroup needs a finite point")
    if len(p.xi) != V.n - 1:
        raise GeometryError("dimension mismatch between point and descriptor")
    B = V.real_basis()  # rows orthonormal
    xi = p.xi_array
    x_real = _to_real(xi)
    proj = B.T @ (B @ x_real) if B.size else np.zeros_like(x_real)
    if V.include_center:
        resid2 = float(np.sum((x_real - proj) ** 2))
        return float(np.sqrt(np.sqrt((resid2 + p.u) ** 2)))

    def objective(coeffs: np.ndarray) -> float:
        w = _to_complex(B.T @ coeffs) if B.size else np.zeros_like(xi)
        d2 = float(np.sum(np.abs(xi - w) ** 2)) + p.u
        c = p.v - 2.0 * pairing(w, xi).imag
        return d2 * d2 + c * c

    if B.shape[0] == 0:
        # V = {identity}: distance straight to the origin.
        return cygan_norm(p)
    x0 = B @ x_real
    best = objective(x0)
    for start in (x0, np.zeros_like(x0)):
        res = optimize.minimize(objective, start, method="BFGS", options={"gtol": 1e-14})
        best = min(best, float(res.fun))
    return float(best**0.25)
