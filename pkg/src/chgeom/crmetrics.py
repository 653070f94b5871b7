"""Cygan cross-ratio, distortion audits, mu-chains on finite boundary sets.

The cross-ratio of a quadruple q = (x1, x2, x3, x4) of distinct boundary
points is

    CR(q) = rho(x1, x2) rho(x3, x4) / (rho(x1, x3) rho(x2, x4)),

rho the Cygan metric, extended to the one-point compactification by
cancelling the two factors containing the point at infinity.  A map f of a
finite boundary set has bounded cross-ratio distortion when
CR(f(q)) <= eta_alpha(CR(q)) scaled by a constant M; ``quasi_cr_audit``
fits the smallest such M over sampled quadruples per alpha.

mu-chains here are a finite surrogate of the asymptotic notion: the chain
condition CR(a, x_i, x_{i+1}, b) <= mu applies to consecutive interior
points only, and the chain attaches to the endpoints through the interior
point nearest to each (the anchor rule).  An empty interior admits a chain
by convention.  Both conventions are echoed in reports.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .hermitian import GeometryError, HPoint, Infinity, Point
from .heisenberg import cygan_dist, cygan_dist_coords, cygan_norm


class DegenerateQuad(GeometryError):
    """Coincident points make a cross-ratio denominator vanish."""


def _same_point(p: Point, q: Point) -> bool:
    if isinstance(p, Infinity) or isinstance(q, Infinity):
        return isinstance(p, Infinity) and isinstance(q, Infinity)
    return p.close_to(q, 0.0)


@dataclass(frozen=True)
class Quad:
    """Four pairwise distinct boundary points (or the point at infinity)."""

    x1: Point
    x2: Point
    x3: Point
    x4: Point

    def __post_init__(self):
        pts = self.points
        for p in pts:
            if isinstance(p, HPoint) and p.u > 0.0:
                raise GeometryError("quad points must lie on the boundary")
        for i in range(4):
            for j in range(i + 1, 4):
                if _same_point(pts[i], pts[j]):
                    raise DegenerateQuad(f"points {i + 1} and {j + 1} coincide")

    @property
    def points(self) -> tuple[Point, Point, Point, Point]:
        return (self.x1, self.x2, self.x3, self.x4)


# Factor layout of CR: numerator pairs and denominator pairs; every index
# appears exactly once above and once below, so an infinite point cancels.
_NUM_PAIRS = ((0, 1), (2, 3))
_DEN_PAIRS = ((0, 2), (1, 3))


def cross_ratio(q: Quad) -> float:
    """CR(q) >= 0, with the continuity extension at infinity."""
    pts = q.points
    inf_idx = {i for i, p in enumerate(pts) if isinstance(p, Infinity)}

    def product(pairs) -> float:
        val = 1.0
        for i, j in pairs:
            if i in inf_idx or j in inf_idx:
                continue  # cancels against the matching factor
            val *= cygan_dist(pts[i], pts[j])
        return val

    den = product(_DEN_PAIRS)
    if den == 0.0:
        raise DegenerateQuad("zero denominator in cross_ratio")
    return product(_NUM_PAIRS) / den


def eta_alpha(t: float, alpha: float) -> float:
    """Distortion gauge: t^alpha for t >= 1, t^(1/alpha) below."""
    if alpha < 1.0:
        raise GeometryError("alpha must be >= 1")
    if t < 0.0:
        raise GeometryError("eta_alpha needs t >= 0")
    return t**alpha if t >= 1.0 else t ** (1.0 / alpha)


# ---------------------------------------------------------------------------
# Quasi-cross-ratio distortion audit
# ---------------------------------------------------------------------------


DEFAULT_ALPHAS = tuple(np.arange(1.0, 4.0 + 1e-9, 0.25))


@dataclass(frozen=True)
class WorstQuad:
    indices: tuple[int, int, int, int]
    cr_source: float
    cr_image: float
    ratio: float  # CR(f q) / eta_1(CR q)


@dataclass(frozen=True)
class CRAudit:
    alphas: tuple[float, ...]
    m_hat: tuple[float, ...]  # per alpha: max CR(f q) / eta_alpha(CR q)
    worst: tuple[WorstQuad, ...]
    degenerate: int
    unbounded: bool  # CR(q) = 0 with CR(f q) > 0 observed
    quads: int
    seed: int

    def m_at(self, alpha: float) -> float:
        for a, m in zip(self.alphas, self.m_hat):
            if abs(a - alpha) < 1e-12:
                return m
        raise GeometryError(f"alpha {alpha} not in the audit grid")


def _coords(points: list[HPoint]) -> tuple[np.ndarray, np.ndarray]:
    xi = np.stack([p.xi_array for p in points])
    v = np.asarray([p.v for p in points])
    return xi, v


def quasi_cr_audit(
    pairs: list[tuple[HPoint, HPoint]],
    quads: int = 100_000,
    alphas: tuple[float, ...] = DEFAULT_ALPHAS,
    seed: int = 0,
) -> CRAudit:
    """Fit the distortion constant of f over random quadruples.

    ``pairs`` lists (x, f(x)) for finite boundary points.  For each alpha in
    the grid, M_hat(alpha) = max over sampled non-degenerate quads of
    CR(f q) / eta_alpha(CR q); the 10 worst quads at alpha = 1 are kept with
    their sample indices.
    """
    if len(pairs) < 4:
        raise GeometryError("quasi_cr_audit needs at least 4 pairs")
    for x, fx in pairs:
        if isinstance(x, Infinity) or isinstance(fx, Infinity):
            raise GeometryError("audit points must be finite")
        if x.u > 0 or fx.u > 0:
            raise GeometryError("audit points must lie on the boundary")
    src = [x for x, _ in pairs]
    img = [fx for _, fx in pairs]
    xi_s, v_s = _coords(src)
    xi_i, v_i = _coords(img)
    zeros = np.zeros(len(pairs))

    gen = np.random.Generator(np.random.Philox(key=seed))
    idx = _distinct_quads(gen, len(pairs), quads)

    def pair_dist(xi, v, i, j):
        return cygan_dist_coords(xi[i], v[i], zeros[i], xi[j], v[j], zeros[j])

    def cr_array(xi, v) -> tuple[np.ndarray, np.ndarray]:
        num = pair_dist(xi, v, idx[:, 0], idx[:, 1]) * pair_dist(
            xi, v, idx[:, 2], idx[:, 3]
        )
        den = pair_dist(xi, v, idx[:, 0], idx[:, 2]) * pair_dist(
            xi, v, idx[:, 1], idx[:, 3]
        )
        return num, den

    num_s, den_s = cr_array(xi_s, v_s)
    num_i, den_i = cr_array(xi_i, v_i)
    good = (den_s > 0.0) & (den_i > 0.0)
    degenerate = int(quads - good.sum())
    cr_s = num_s[good] / den_s[good]
    cr_i = num_i[good] / den_i[good]
    kept = idx[good]

    unbounded = bool(np.any((cr_s == 0.0) & (cr_i > 0.0)))
    usable = cr_s > 0.0
    cr_s, cr_i, kept = cr_s[usable], cr_i[usable], kept[usable]

    m_hat = []
    for alpha in alphas:
        eta = np.where(cr_s >= 1.0, cr_s**alpha, cr_s ** (1.0 / alpha))
        m_hat.append(float(np.max(cr_i / eta)) if cr_s.size else 0.0)

    ratios = cr_i / cr_s
    order = np.argsort(-ratios, kind="stable")[:10]
    worst = tuple(
        WorstQuad(
            indices=tuple(int(t) for t in kept[k]),
            cr_source=float(cr_s[k]),
            cr_image=float(cr_i[k]),
            ratio=float(ratios[k]),
        )
        for k in order
    )
    return CRAudit(
        alphas=tuple(float(a) for a in alphas),
        m_hat=tuple(m_hat),
        worst=worst,
        degenerate=degenerate,
        unbounded=unbounded,
        quads=quads,
        seed=seed,
    )


def _distinct_quads(gen: np.random.Generator, n_pts: int, quads: int) -> np.ndarray:
    """Uniform 4-tuples of distinct indices, vectorized."""
    if n_pts < 4:
        raise GeometryError("need at least 4 points")
    idx = np.empty((quads, 4), dtype=np.int64)
    idx[:, 0] = gen.integers(0, n_pts, size=quads)
    for col in range(1, 4):
        draw = gen.integers(0, n_pts - col, size=quads)
        taken = np.sort(idx[:, :col], axis=1)
        for prev in range(col):
            draw = draw + (draw >= taken[:, prev])
        idx[:, col] = draw
    return idx


# ---------------------------------------------------------------------------
# mu-chains
# ---------------------------------------------------------------------------


def _anchor_dist(x: HPoint, endpoint: Point) -> float:
    """Distance used by the anchor rule; reciprocal norm toward infinity."""
    if isinstance(endpoint, Infinity):
        return 1.0 / max(cygan_norm(x), 1e-300)
    return cygan_dist(x, endpoint)


def mu_chain(
    points: list[Point],
    a: Point,
    b: Point,
    mu: float,
) -> tuple[Point, ...] | None:
    """Finite mu-chain from a to b through interior points of the set.

    Interior candidates are the points of the set distinct from a and b;
    the directed link (x, y) is allowed iff CR(a, x, y, b) <= mu.  The chain
    must start at the interior point nearest to a and end at the one nearest
    to b (anchor rule); with no interior candidates the chain (a, b) exists
    by convention.  Returns the chain including endpoints, or None.
    """
    if mu <= 1.0:
        raise GeometryError("mu must be > 1")
    if _same_point(a, b):
        raise GeometryError("chain endpoints must be distinct")
    interior = [p for p in points if not (_same_point(p, a) or _same_point(p, b))]
    if not interior:
        return (a, b)
    for p in interior:
        if isinstance(p, Infinity):
            raise GeometryError("interior chain points must be finite")
    start = min(range(len(interior)), key=lambda i: _anchor_dist(interior[i], a))
    goal = min(range(len(interior)), key=lambda i: _anchor_dist(interior[i], b))
    if start == goal:
        return (a, interior[start], b)

    def linked(i: int, j: int) -> bool:
        return cross_ratio(Quad(a, interior[i], interior[j], b)) <= mu

    prev: dict[int, int] = {start: start}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        if i == goal:
            break
        for j in range(len(interior)):
            if j not in prev and j != i and linked(i, j):
                prev[j] = i
                queue.append(j)
    if goal not in prev:
        return None
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return (a, *[interior[i] for i in path], b)


def mu_density(
    points: list[Point],
    mu: float,
) -> tuple[bool, list[tuple[int, int]]]:
    """True iff every ordered pair of the set is joined by a mu-chain.

    Returns the verdict and the list of failing (index a, index b) pairs.
    """
    if len(points) < 2:
        raise GeometryError("mu_density needs at least 2 points")
    failing: list[tuple[int, int]] = []
    for i, a in enumerate(points):
        for j, b in enumerate(points):
            if i == j:
                continue
            if mu_chain(points, a, b, mu) is None:
                failing.append((i, j))
    return not failing, failing
