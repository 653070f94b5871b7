"""Discrete-group machinery: words, orbits, Dirichlet faces, cusp audits.

Face counting works by radial ray marching.  The Dirichlet domain D_y is
star-shaped about its center y, so every face is visible along some geodesic
ray from y; rays are marched until the membership margin

    m(x) = min_{g != 1} [ d(x, g y) - d(x, y) ]

changes sign, the crossing is bisected, and the unique nearest orbit point
at the crossing names the face.  Counts are certified lower bounds; a
stability flag records whether doubling the ray budget changes the result.

All sampling is driven by counter-based Philox streams keyed on the caller's
seed, and per-ray work is independent of how rays are chunked over threads,
so reports are bitwise reproducible at any parallelism level.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import config
from .hermitian import (
    INFINITY,
    GeometryError,
    NumericError,
    HPoint,
    Infinity,
    Point,
    form_value,
    hermitian_form,
    lift,
    unlift,
)
from .heisenberg import (
    HeisElement,
    HeisIsometry,
    SubgroupDescriptor,
    cygan_dist,
    cygan_dist_coords,
    embed,
    embed_translation,
    heis_dist_to_subgroup,
    inversion_matrix,
    pairing,
)
from .isometry import Isometry, IsometryType, classify


class UnsupportedGroupClass(GeometryError):
    """Group falls outside the classes an operation supports."""


class TableCapExceeded(NumericError):
    """Word enumeration exceeded the configured element cap."""


Generator = HeisIsometry | Isometry


@dataclass(frozen=True)
class GroupSpec:
    """Finitely generated subgroup of PU(n,1) given by generators."""

    n: int
    generators: tuple[Generator, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise GeometryError("a group spec needs at least one generator")
        object.__setattr__(self, "generators", gens)
        labels = tuple(self.labels) or tuple(f"g{i}" for i in range(len(gens)))
        if len(labels) != len(gens):
            raise GeometryError("labels must match generators")
        object.__setattr__(self, "labels", labels)
        for g in gens:
            if g.n != self.n:
                raise GeometryError("generator dimension mismatch")

    def matrices(self) -> list[Isometry]:
        out = []
        for g in self.generators:
            out.append(g if isinstance(g, Isometry) else Isometry(embed(g)))
        return out

    def heis_generators(self) -> list[HeisIsometry]:
        if not all(isinstance(g, HeisIsometry) for g in self.generators):
            raise UnsupportedGroupClass(
                "operation requires generators inside H(n) = H_n x| U(n-1)"
            )
        return list(self.generators)


@dataclass(frozen=True, eq=False)
class TableEntry:
    element: Isometry
    word: tuple[int, ...]  # letters: j < k is generator j, j >= k its inverse

    @property
    def length(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class ElementTable:
    """Deduplicated products of at most L generators/inverses.

    Entry order is deterministic: by word length, then lexicographically by
    letter sequence.  The identity is the first entry (empty word).
    """

    spec: GroupSpec
    radius: int
    entries: tuple[TableEntry, ...]
    near_collisions: int = 0

    def word_label(self, word: tuple[int, ...]) -> str:
        k = len(self.spec.generators)
        if not word:
            return "1"
        parts = []
        for letter in word:
            name = self.spec.labels[letter % k]
            parts.append(name if letter < k else name + "^-1")
        return "*".join(parts)

    def non_identity(self) -> list[TableEntry]:
        return [e for e in self.entries if e.word]


def enumerate_elements(
    spec: GroupSpec,
    L: int,
    cap: int = config.TABLE_CAP,
    dedup_grid: float = config.DEDUP_GRID,
) -> ElementTable:
    """Breadth-first word enumeration with canonical-form deduplication."""
    if L < 1:
        raise GeometryError("word radius must be >= 1")
    gens = spec.matrices()
    alphabet = gens + [g.inverse() for g in gens]
    identity = Isometry.identity(spec.n)
    seen: dict[tuple, TableEntry] = {}
    buckets: dict[tuple, list[Isometry]] = {}
    near = 0

    def admit(element: Isometry, word: tuple[int, ...]) -> bool:
        nonlocal near
        key = element.dedup_key(dedup_grid)
        if key in seen:
            return False
        # Roundoff can push a re-derived element across a fine grid line, so
        # confirm against earlier occupants of the coarse cell by distance.
        coarse = element.dedup_key(config.NEAR_COLLISION_WARN)
        for other in buckets.get(coarse, []):
            scale = max(1.0, float(np.max(np.abs(other.matrix))))
            if float(np.max(np.abs(element.matrix - other.matrix))) <= 1e-9 * scale:
                return False
            near += 1
        buckets.setdefault(coarse, []).append(element)
        seen[key] = TableEntry(element, word)
        return True

    admit(identity, ())
    frontier = [TableEntry(identity, ())]
    for _ in range(L):
        new_frontier = []
        for entry in frontier:
            for letter, gen in enumerate(alphabet):
                element = entry.element.compose(gen)
                word = entry.word + (letter,)
                if admit(element, word):
                    new_frontier.append(TableEntry(element, word))
                    if len(seen) > cap:
                        raise TableCapExceeded(f"element table exceeds cap {cap}")
        frontier = new_frontier
        if not frontier:
            break
    if near:
        warnings.warn(
            f"{near} near-collisions within {config.NEAR_COLLISION_WARN} in "
            "canonical form; the spec may be indiscrete or badly conditioned",
            stacklevel=2,
        )
    entries = sorted(seen.values(), key=lambda e: (e.length, e.word))
    return ElementTable(spec, L, tuple(entries), near)


# ---------------------------------------------------------------------------
# Orbits and limit sets
# ---------------------------------------------------------------------------


def orbit_lifts(table: ElementTable, y: Point) -> np.ndarray:
    """Stack of g . lift(y) over the table, in table order."""
    Y = lift(y, n=table.spec.n)
    mats = np.stack([e.element.matrix for e in table.entries])
    return mats @ Y


def orbit(table: ElementTable, y: HPoint) -> list[HPoint]:
    """Orbit {g y} of an interior point, in table order."""
    if isinstance(y, Infinity) or y.u <= 0:
        raise GeometryError("orbit needs an interior base point")
    return [unlift(z) for z in orbit_lifts(table, y)]


def limit_set_sample(
    spec: GroupSpec,
    L: int,
    y: HPoint,
    boundary_ratio: float = config.BOUNDARY_RATIO,
    eps_merge: float = config.EPS_MERGE,
    cap: int = config.TABLE_CAP,
) -> list[Point]:
    """Boundary projections of orbit points escaping toward the sphere.

    An orbit lift z is near the boundary when |<z,z>| / |z|^2 is small; its
    projection reads the horospherical coordinates with u forced to 0, or
    INFINITY when z is proportionally close to the null direction of the
    point at infinity.  Clusters within ``eps_merge`` in the Cygan metric
    are merged, keeping the first representative in table order.
    """
    table = enumerate_elements(spec, L, cap=cap)
    Z = orbit_lifts(table, y)
    vals = np.abs(
        np.sum(np.abs(Z[:, :-1]) ** 2, axis=1) - np.abs(Z[:, -1]) ** 2
    )
    norms = np.sum(np.abs(Z) ** 2, axis=1)
    candidates = np.nonzero(vals <= boundary_ratio * norms)[0]
    found: list[Point] = []
    # Lifts proportionally close to the null direction of the point at
    # infinity project there; the threshold folds finite points with Cygan
    # norm beyond ~boundary_ratio**-0.5 into the same cluster, which is the
    # intended coarse-graining at desk scale.
    inf_cut = np.sqrt(boundary_ratio)
    for i in candidates:
        z = Z[i]
        if abs(z[-2] + z[-1]) <= inf_cut * np.sqrt(norms[i]):
            p: Point = INFINITY
        else:
            zs = z * (2.0 / (z[-2] + z[-1]))
            w = (zs[-1] - zs[-2]) / 2.0
            p = HPoint(tuple(zs[:-2] / 2.0), -w.imag, 0.0)
        for existing in found:
            if isinstance(existing, Infinity) or isinstance(p, Infinity):
                if type(existing) is type(p):
                    break
            elif cygan_dist(existing, p) < eps_merge:
                break
        else:
            found.append(p)
    return found


# ---------------------------------------------------------------------------
# Dirichlet polyhedra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaceRecord:
    word: tuple[int, ...]
    label: str
    witness: HPoint
    margin: float  # separation d(x, h y) - d(x, y) of the runner-up element
    rays_hit: int


@dataclass(frozen=True)
class SideReport:
    center: HPoint
    radius: int
    faces: tuple[FaceRecord, ...]
    rays_total: int
    rays_hit: int
    rays_escaped: int
    rays_ambiguous: int
    stable: bool
    seed: int
    kappa: float
    tolerances: dict
    table_size: int

    @property
    def face_count(self) -> int:
        return len(self.faces)


class _OrbitGeometry:
    """Precomputed normalized lifts for fast margin evaluation."""

    def __init__(self, table: ElementTable, y: HPoint, kappa: float):
        self.kappa = kappa
        self.entries = table.non_identity()
        self.table = table
        Y = lift(y)
        self.y_hat = Y / np.sqrt(-form_value(Y))
        mats = np.stack([e.element.matrix for e in self.entries])
        Q = mats @ Y
        qq = -np.real(
            np.sum(np.abs(Q[:, :-1]) ** 2, axis=1) - np.abs(Q[:, -1]) ** 2
        )
        if np.any(qq <= 0):
            raise GeometryError("orbit left the interior; center invalid")
        Q = Q / np.sqrt(qq)[:, None]
        self.targets = Q  # normalized orbit lifts, entry order
        # inner(x, q) = x . conj(J q); pre-conjugate for a plain matmul
        C = np.conj(Q)
        C[:, -1] = -C[:, -1]
        self.C = C.T  # (n+1, N)
        self.min_center_dist = float(
            np.min(kappa * np.arccosh(np.maximum(np.abs(self.y_hat @ self.C), 1.0)))
        )

    def distances(self, X: np.ndarray) -> np.ndarray:
        """d(x_i, g_j y) for unit-normalized interior lifts X (m, n+1)."""
        inner = np.abs(X @ self.C)
        return self.kappa * np.arccosh(np.maximum(inner, 1.0))

    def margins(self, X: np.ndarray, d_center: np.ndarray) -> np.ndarray:
        return np.min(self.distances(X), axis=1) - d_center


def membership_margin(
    x: HPoint,
    y: HPoint,
    table: ElementTable,
    kappa: float = config.DEFAULT_KAPPA,
) -> tuple[float, tuple[int, ...]]:
    """min over non-identity g of d(x, g y) - d(x, y), with the arg-min word.

    Nonnegative exactly when x lies in the Dirichlet domain D_y of the table.
    """
    geom = _OrbitGeometry(table, y, kappa)
    if geom.min_center_dist <= config.DELTA_STRICT:
        raise GeometryError("some table element fixes the center y")
    X = lift(x)
    X = X / np.sqrt(-form_value(X))
    d_center = kappa * np.arccosh(max(abs(hermitian_form(X, geom.y_hat)), 1.0))
    dists = geom.distances(X[None, :])[0]
    j = int(np.argmin(dists))
    return float(dists[j] - d_center), geom.entries[j].word


def _frames_toward(P_hat: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Spacelike unit directions at P_hat pointing toward target lifts Q."""
    Jc = np.ones(P_hat.shape[0])
    Jc[-1] = -1.0
    c = Q @ (Jc * np.conj(P_hat))  # <Q_i, P_hat>
    phase = -np.conj(c) / np.abs(c)
    Q = Q * phase[:, None]
    inner = Q @ (Jc * np.conj(P_hat))
    X = Q + inner[:, None] * P_hat[None, :]
    xx = np.real(np.sum(np.abs(X[:, :-1]) ** 2, axis=1) - np.abs(X[:, -1]) ** 2)
    return X / np.sqrt(xx)[:, None]


def _ray_frames(
    y: HPoint, directions: np.ndarray, kappa: float
) -> tuple[np.ndarray, np.ndarray]:
    """Unit frames (P_hat, X_hat_i) for geodesic rays out of y.

    ``directions`` are unit vectors in the real coordinate chart
    (Re xi, Im xi, v, u); each is turned into a nearby target point and
    Gram-Schmidt against the center gives the ray's spacelike direction.
    """
    m = len(y.xi)
    r0 = min(0.01, y.u / 2.0)
    base = np.concatenate([y.xi_array.real, y.xi_array.imag, [y.v, y.u]])
    coords = base[None, :] + r0 * directions
    xi = coords[:, :m] + 1j * coords[:, m : 2 * m]
    v = coords[:, 2 * m]
    u = coords[:, 2 * m + 1]  # r0 <= u/2 keeps the target interior
    w = np.sum(np.abs(xi) ** 2, axis=1) + u - 1j * v
    Q = np.concatenate([2.0 * xi, (1.0 - w)[:, None], (1.0 + w)[:, None]], axis=1)
    P = lift(y)
    P_hat = P / np.sqrt(-form_value(P))
    return P_hat, _frames_toward(P_hat, Q)


def _march_chunk(
    geom: _OrbitGeometry,
    P_hat: np.ndarray,
    X_hat: np.ndarray,
    t_max: float,
    step: float,
    bisect_tol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """March rays until the margin turns negative; bisect each first crossing.

    Returns (hit mask, crossing arclength) per ray; non-hits escaped.
    """
    kappa = geom.kappa
    m = X_hat.shape[0]

    def gamma(t: np.ndarray, rows: np.ndarray) -> np.ndarray:
        s = t / kappa
        return np.cosh(s)[:, None] * P_hat[None, :] + np.sinh(s)[:, None] * X_hat[rows]

    active = np.arange(m)
    t_lo = np.zeros(m)
    hit = np.zeros(m, dtype=bool)
    t_hi = np.full(m, np.nan)
    t = step
    while t <= t_max + 1e-12 and active.size:
        margins = geom.margins(gamma(np.full(active.size, t), active), np.full(active.size, t))
        crossed = margins < 0.0
        rows = active[crossed]
        hit[rows] = True
        t_hi[rows] = t
        t_lo[active[~crossed]] = t
        active = active[~crossed]
        t += step
    rows = np.nonzero(hit)[0]
    lo = t_lo[rows].copy()
    hi = t_hi[rows].copy()
    while np.any(hi - lo > bisect_tol):
        mid = (lo + hi) / 2.0
        margins = geom.margins(gamma(mid, rows), mid)
        neg = margins < 0.0
        hi = np.where(neg, mid, hi)
        lo = np.where(neg, lo, mid)
    t_cross = np.full(m, np.nan)
    t_cross[rows] = (lo + hi) / 2.0
    return hit, t_cross


def _ray_directions(seed: int, rays: int, dim: int) -> np.ndarray:
    """Deterministic unit directions; a prefix of a longer run is identical."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    raw = gen.standard_normal((rays, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def _detect_faces(
    geom: _OrbitGeometry,
    y: HPoint,
    rays: int,
    seed: int,
    t_max: float,
    step: float,
    bisect_tol: float,
    delta_eq: float,
    threads: int,
) -> tuple[dict[int, dict], int, int, int]:
    kappa = geom.kappa
    directions = _ray_directions(seed, rays, 2 * len(y.xi) + 2)
    P_hat, X_hat = _ray_frames(y, directions, kappa)
    # Deterministic rays aimed at each orbit point come first: the ray toward
    # g y crosses the boundary on or before the bisector of g, so actual
    # faces are heavily oversampled and counts stabilize at modest budgets.
    X_aimed = _frames_toward(P_hat, geom.targets)
    X_hat = np.concatenate([X_aimed, X_hat], axis=0)
    total = X_hat.shape[0]

    chunks = np.array_split(np.arange(total), max(1, threads))
    chunks = [c for c in chunks if c.size]

    def work(rows: np.ndarray):
        return _march_chunk(geom, P_hat, X_hat[rows], t_max, step, bisect_tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]
    hit = np.concatenate([r[0] for r in results])
    t_cross = np.concatenate([r[1] for r in results])

    faces: dict[int, dict] = {}
    ambiguous = 0
    rows = np.nonzero(hit)[0]
    if rows.size:
        s = t_cross[rows] / kappa
        X = np.cosh(s)[:, None] * P_hat[None, :] + np.sinh(s)[:, None] * X_hat[rows]
        dists = geom.distances(X)
        diffs = dists - t_cross[rows][:, None]
        for r_idx, row in enumerate(rows):
            close = np.nonzero(diffs[r_idx] < delta_eq)[0]
            if close.size != 1:
                ambiguous += 1
                continue
            j = int(close[0])
            others = np.delete(diffs[r_idx], j)
            margin = float(np.min(others)) if others.size else np.inf
            rec = faces.get(j)
            if rec is None:
                faces[j] = {
                    "witness_t": float(t_cross[row]),
                    "witness": unlift(X[r_idx]),
                    "margin": margin,
                    "rays_hit": 1,
                }
            else:
                rec["rays_hit"] += 1
                if margin > rec["margin"]:
                    rec["margin"] = margin
                    rec["witness"] = unlift(X[r_idx])
                    rec["witness_t"] = float(t_cross[row])
    return faces, int(hit.sum()), int(total - hit.sum()), ambiguous


def _bisector_margin(
    geom: _OrbitGeometry,
    X_dir: np.ndarray,
    j: int,
    t_max: float,
) -> tuple[float, np.ndarray, float] | None:
    """Cross bisector j along one ray; margin of the other orbit points there.

    Returns (t_j, crossing lift, min_{h != j} d(x, h y) - t_j), or None when
    the ray never reaches the bisector before t_max.
    """
    kappa = geom.kappa
    P_hat = geom.y_hat

    def point(t: float) -> np.ndarray:
        s = t / kappa
        return np.cosh(s) * P_hat + np.sinh(s) * X_dir

    ts = np.arange(0.25, t_max + 0.25, 0.25)
    s = ts / kappa
    X = np.cosh(s)[:, None] * P_hat[None, :] + np.sinh(s)[:, None] * X_dir[None, :]
    vals = geom.distances(X)[:, j] - ts
    neg = np.nonzero(vals < 0.0)[0]
    if neg.size == 0:
        return None
    k = int(neg[0])
    lo = 0.0 if k == 0 else float(ts[k - 1])
    hi = float(ts[k])
    while hi - lo > 1e-10:
        mid = (lo + hi) / 2.0
        if float(geom.distances(point(mid)[None, :])[0, j]) - mid < 0.0:
            hi = mid
        else:
            lo = mid
    t_j = (lo + hi) / 2.0
    x = point(t_j)
    d = geom.distances(x[None, :])[0]
    others = np.delete(d, j)
    margin = float(np.min(others) - t_j) if others.size else np.inf
    return t_j, x, margin


def _verify_candidate(
    geom: _OrbitGeometry,
    y: HPoint,
    j: int,
    t_max: float,
    delta_eq: float,
    simplex_iters: int = 120,
) -> dict | None:
    """Deterministic witness search for the face of orbit point j.

    Maximizes, over ray directions out of y, the runner-up margin at the
    ray's crossing of bisector j; a positive optimum exhibits a boundary
    point whose unique nearest orbit point is j, i.e. a face witness.
    """
    kappa = geom.kappa
    P_hat = geom.y_hat
    X0 = _frames_toward(P_hat, geom.targets[j][None, :])[0]
    # Chart direction of the geodesic toward g_j y: read it off a point a
    # small arclength down the ray.
    m = len(y.xi)
    near = unlift(np.cosh(0.01 / kappa) * P_hat + np.sinh(0.01 / kappa) * X0)
    base = np.concatenate([y.xi_array.real, y.xi_array.imag, [y.v, y.u]])
    there = np.concatenate(
        [near.xi_array.real, near.xi_array.imag, [near.v, near.u]]
    )
    start = there - base
    start = start / np.linalg.norm(start)

    def objective(raw: np.ndarray) -> float:
        nrm = float(np.linalg.norm(raw))
        if nrm < 1e-12:
            return 1e6
        _, X_dir = _ray_frames(y, (raw / nrm)[None, :], kappa)
        res = _bisector_margin(geom, X_dir[0], j, t_max)
        if res is None:
            return 1e6
        return -res[2]

    res = optimize.minimize(
        objective, start, method="Nelder-Mead",
        options={"maxiter": simplex_iters, "xatol": 1e-5, "fatol": 1e-9},
    )
    best = _bisector_margin(
        geom, _ray_frames(y, (res.x / np.linalg.norm(res.x))[None, :], kappa)[1][0],
        j, t_max,
    )
    if best is None or best[2] <= delta_eq:
        return None
    t_j, x, margin = best
    return {
        "witness_t": float(t_j),
        "witness": unlift(x),
        "margin": margin,
        "rays_hit": 0,
    }


def dirichlet_sides(
    spec: GroupSpec,
    y: HPoint,
    L: int,
    rays: int,
    seed: int,
    t_max: float = config.T_MAX,
    kappa: float = config.DEFAULT_KAPPA,
    step: float = config.MARCH_STEP,
    delta_eq: float = config.DELTA_EQ,
    bisect_tol: float = config.BISECTION_TOL,
    threads: int = 1,
    check_stability: bool = True,
    table: ElementTable | None = None,
) -> SideReport:
    """Count Dirichlet-polyhedron faces of D_y by radial ray sampling."""
    if rays < 1:
        raise GeometryError("rays must be >= 1")
    if isinstance(y, Infinity) or y.u <= 0:
        raise GeometryError("Dirichlet center must be interior")
    if table is None:
        table = enumerate_elements(spec, L)
    geom = _OrbitGeometry(table, y, kappa)
    if geom.min_center_dist <= config.DELTA_STRICT:
        raise GeometryError("some table element fixes the center y")

    faces, n_hit, n_escaped, n_ambiguous = _detect_faces(
        geom, y, rays, seed, t_max, step, bisect_tol, delta_eq, threads
    )
    # Seed-independent completion: thin faces missed by the random rays are
    # recovered by a direction search per undetected table element.
    for j in range(len(geom.entries)):
        if j in faces:
            continue
        rec = _verify_candidate(geom, y, j, t_max, delta_eq)
        if rec is not None:
            faces[j] = rec
    stable = True
    if check_stability:
        faces2, _, _, _ = _detect_faces(
            geom, y, 2 * rays, seed, t_max, step, bisect_tol, delta_eq, threads
        )
        stable = set(faces2.keys()) <= set(faces.keys())

    if not faces and n_escaped == 0:
        warnings.warn("no faces and no escaped rays: t_max is likely too small",
                      stacklevel=2)

    records = []
    for j in sorted(faces.keys()):
        entry = geom.entries[j]
        rec = faces[j]
        records.append(
            FaceRecord(
                word=entry.word,
                label=table.word_label(entry.word),
                witness=rec["witness"],
                margin=rec["margin"],
                rays_hit=rec["rays_hit"],
            )
        )
    tolerances = {
        "delta_eq": delta_eq,
        "delta_strict": config.DELTA_STRICT,
        "bisection_tol": bisect_tol,
        "t_max": t_max,
        "march_step": step,
        "dedup_grid": config.DEDUP_GRID,
    }
    return SideReport(
        center=y,
        radius=table.radius,
        faces=tuple(records),
        rays_total=n_hit + n_escaped,
        rays_hit=n_hit,
        rays_escaped=n_escaped,
        rays_ambiguous=n_ambiguous,
        stable=stable,
        seed=seed,
        kappa=kappa,
        tolerances=tolerances,
        table_size=len(table.entries),
    )


def two_sided_center_search(
    spec: GroupSpec,
    box: list[tuple[float, float]],
    L: int,
    rays: int,
    seed: int,
    grid_points: int = 3,
    simplex_iters: int = 40,
    kappa: float = config.DEFAULT_KAPPA,
    threads: int = 1,
) -> tuple[HPoint, SideReport]:
    """Search a coordinate box for a center whose Dirichlet domain has 2 sides.

    The group must be cyclic with a parabolic generator.  A coarse grid scan
    runs first; if no stable two-sided center appears, a Nelder-Mead descent
    on (face count, worst margin) refines the best grid point.  Failure to
    find a two-sided center is not a refutation, only a sampling outcome.
    """
    if len(spec.generators) != 1:
        raise UnsupportedGroupClass("center search expects a cyclic group")
    g = spec.matrices()[0]
    if classify(g) is not IsometryType.PARABOLIC:
        raise UnsupportedGroupClass("center search expects a parabolic generator")
    m = spec.n - 1
    if len(box) != 2 * m + 2:
        raise GeometryError(f"box needs {2 * m + 2} coordinate ranges")
    table = enumerate_elements(spec, L)

    def center_from(coords: np.ndarray) -> HPoint | None:
        xi = coords[:m] + 1j * coords[m : 2 * m]
        u = coords[2 * m + 1]
        if u <= 1e-6:
            return None
        return HPoint(tuple(xi), coords[2 * m], u)

    def evaluate(y: HPoint) -> SideReport | None:
        try:
            return dirichlet_sides(
                spec, y, L, rays, seed, kappa=kappa, threads=threads,
                check_stability=True, table=table,
            )
        except GeometryError:
            return None

    axes = [np.linspace(lo, hi, grid_points) for lo, hi in box]
    mesh = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    best: tuple[float, HPoint, SideReport] | None = None
    for coords in mesh:
        y = center_from(coords)
        if y is None:
            continue
        report = evaluate(y)
        if report is None:
            continue
        if report.face_count == 2 and report.stable:
            return y, report
        worst = min((f.margin for f in report.faces), default=0.0)
        score = report.face_count * 100.0 - min(worst, 1.0)
        if best is None or score < best[0]:
            best = (score, y, report)
    if best is None:
        raise GeometryError("no valid center inside the box")

    start = np.concatenate(
        [best[1].xi_array.real, best[1].xi_array.imag, [best[1].v, best[1].u]]
    )
    cache: dict[tuple, float] = {}

    def objective(coords: np.ndarray) -> float:
        key = tuple(np.round(coords, 9))
        if key in cache:
            return cache[key]
        y = center_from(coords)
        report = evaluate(y) if y is not None else None
        if report is None:
            val = 1e6
        else:
            worst = min((f.margin for f in report.faces), default=0.0)
            val = report.face_count * 100.0 - min(worst, 1.0)
        cache[key] = val
        return val

    res = optimize.minimize(
        objective, start, method="Nelder-Mead",
        options={"maxiter": simplex_iters, "xatol": 1e-3, "fatol": 1e-3},
    )
    y = center_from(res.x)
    report = evaluate(y) if y is not None else None
    if report is not None and report.face_count == 2 and report.stable:
        return y, report
    return best[1], best[2]

# ---------------------------------------------------------------------------
# Minimal invariant subgroups (supported classes)
# ---------------------------------------------------------------------------


def _rotation_is_identity(A: np.ndarray, tol: float = 1e-10) -> bool:
    return float(np.max(np.abs(A - np.eye(A.shape[0])), initial=0.0)) <= tol


def _finite_order(A: np.ndarray, max_order: int = 256, tol: float = 1e-9) -> int | None:
    P = np.eye(A.shape[0], dtype=complex)
    for k in range(1, max_order + 1):
        P = P @ A
        if float(np.max(np.abs(P - np.eye(A.shape[0])), initial=0.0)) <= tol:
            return k
    return None


def _real_span(vectors: list[np.ndarray], n: int) -> tuple[tuple[complex, ...], ...]:
    vecs = [v for v in vectors if float(np.max(np.abs(v), initial=0.0)) > 1e-12]
    if not vecs:
        return ()
    rows = [np.concatenate([v.real, v.imag]) for v in vecs]
    B = np.asarray(rows)
    q, r = np.linalg.qr(B.T)
    keep = np.abs(np.diag(r)) > 1e-10 * float(np.max(np.abs(B)))
    basis = []
    for col in q.T[keep]:
        m = n - 1
        basis.append(tuple(col[:m] + 1j * col[m:]))
    return tuple(basis)


def minimal_invariant_subgroup(spec: GroupSpec) -> SubgroupDescriptor:
    """Minimal connected subgroup V of H_n on which the group acts cocompactly.

    Supported classes: (a) all generators are pure Heisenberg translations;
    (b) a cyclic group whose generator has a finite-order rotation part.  In
    case (b) a conjugator b moves the generator's off-axis horizontal part
    onto the rotation's fixed subspace, and the translation subgroup is read
    off the k-th power (k the rotation order).
    """
    gens = spec.heis_generators()
    n = spec.n
    if all(_rotation_is_identity(g.A) for g in gens):
        xis = [g.tau.xi_array for g in gens]
        basis = _real_span(xis, n)
        include_center = any(abs(g.tau.v) > 1e-12 for g in gens) or any(
            abs(pairing(a, b).imag) > 1e-12 for i, a in enumerate(xis) for b in xis[i:]
        )
        return SubgroupDescriptor(
            n, basis, include_center=include_center,
            conjugator=HeisElement.identity(n), exponent=1,
        )
    if len(gens) != 1:
        raise UnsupportedGroupClass(
            "only pure-translation groups or cyclic rotational generators "
            "are supported"
        )
    g = gens[0]
    order = _finite_order(g.A)
    if order is None:
        raise UnsupportedGroupClass("rotation part has no small finite order")
    # Fixed subspace of A and the off-axis component of the translation.
    A = g.A
    m = n - 1
    U, sv, Vh = np.linalg.svd(A - np.eye(m))
    fix_basis = Vh[sv <= 1e-10].conj().T  # columns span Fix(A)
    xi = g.tau.xi_array
    xi_fix = fix_basis @ (fix_basis.conj().T @ xi) if fix_basis.size else np.zeros(m, dtype=complex)
    xi_perp = xi - xi_fix
    zeta, *_ = np.linalg.lstsq(A - np.eye(m), -xi_perp, rcond=None)
    b = HeisElement(tuple(zeta), 0.0)
    conj = HeisIsometry.translation(b)
    moved = conj.inverse().compose(HeisIsometry(A, g.tau)).compose(conj)
    resid = moved.tau.xi_array - fix_basis @ (fix_basis.conj().T @ moved.tau.xi_array) if fix_basis.size else moved.tau.xi_array
    if float(np.max(np.abs(resid), initial=0.0)) > 1e-8:
        raise GeometryError("conjugation failed to align the generator with Fix(A)")
    power = moved
    for _ in range(order - 1):
        power = power.compose(moved)
    if not _rotation_is_identity(power.A, 1e-8):
        raise GeometryError("generator power is not a pure translation")
    tau_star = power.tau
    basis = _real_span([tau_star.xi_array], n)
    include_center = abs(tau_star.v) > 1e-12 or not basis
    return SubgroupDescriptor(
        n, basis, include_center=include_center, conjugator=b, exponent=order,
    )


def _conjugated_heis_words(
    spec: GroupSpec, desc: SubgroupDescriptor, L: int, cap: int = 200_000
) -> list[HeisIsometry]:
    """All products of <= L conjugated generators/inverses, H(n) arithmetic."""
    b = desc.conjugator or HeisElement.identity(spec.n)
    conj = HeisIsometry.translation(b)
    gens = [
        conj.inverse().compose(g).compose(conj) for g in spec.heis_generators()
    ]
    alphabet = gens + [g.inverse() for g in gens]
    out = [HeisIsometry.rotation(np.eye(spec.n - 1))]
    frontier = list(out)
    seen = {(0,) * (2 * (spec.n - 1) + 1)}

    def key(h: HeisIsometry):
        vals = np.concatenate([h.tau.xi_array.real, h.tau.xi_array.imag, [h.tau.v]])
        return tuple(np.round(vals / 1e-9).astype(np.int64))

    for _ in range(L):
        new = []
        for h in frontier:
            for a in alphabet:
                w = h.compose(a)
                k = key(w)
                if k not in seen:
                    seen.add(k)
                    out.append(w)
                    new.append(w)
                    if len(out) > cap:
                        raise TableCapExceeded("Heisenberg word cap exceeded")
        frontier = new
    return out


def cocompactness_check(
    spec: GroupSpec,
    desc: SubgroupDescriptor,
    L: int = 6,
    delta: float = 0.8,
    box_radius: float = 1.0,
    grid: int = 9,
) -> tuple[bool, float]:
    """Lattice-covering check: the orbit of the identity inside V is
    delta-dense in a coordinate box of V.  Returns (ok, max gap found)."""
    B = desc.real_basis()
    dim = B.shape[0] + (1 if desc.include_center else 0)
    if dim == 0:
        return True, 0.0
    words = _conjugated_heis_words(spec, desc, L)
    pts = []
    for w in words:
        xi = w.tau.xi_array
        x_real = np.concatenate([xi.real, xi.imag])
        proj = B.T @ (B @ x_real) if B.size else np.zeros_like(x_real)
        if float(np.max(np.abs(x_real - proj), initial=0.0)) > 1e-8:
            continue  # element leaves V horizontally
        if not desc.include_center and abs(w.tau.v) > 1e-8:
            continue
        coords = list(B @ x_real) if B.size else []
        if desc.include_center:
            coords.append(w.tau.v)
        pts.append(coords)
    if not pts:
        return False, np.inf
    pts_arr = np.asarray(pts)
    axes = [np.linspace(-box_radius, box_radius, grid)] * dim
    mesh = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    d2 = np.sum((mesh[:, None, :] - pts_arr[None, :, :]) ** 2, axis=2)
    gaps = np.sqrt(np.min(d2, axis=1))
    max_gap = float(np.max(gaps))
    return max_gap <= delta, max_gap


def rotation_residual_on_V(spec: GroupSpec, desc: SubgroupDescriptor) -> float:
    """max over generators g and basis w of ||(A_g - I) w||: zero exactly when
    the group acts on V by translations (2-step nilpotent / Abelian case)."""
    worst = 0.0
    for g in spec.heis_generators():
        for b in desc.basis:
            w = np.asarray(b, dtype=complex)
            worst = max(worst, float(np.linalg.norm(g.A @ w - w)))
    return worst


# ---------------------------------------------------------------------------
# Cusp neighborhoods
# ---------------------------------------------------------------------------


def _inversion_about(p: HPoint) -> np.ndarray:
    """Matrix of the inversion in the unit Cygan sphere centered at p."""
    n = p.n
    T = embed_translation(HeisElement(p.xi, p.v))
    return T @ inversion_matrix(n) @ np.linalg.inv(T)


def _dist_to_V(x: Point, V: SubgroupDescriptor) -> float:
    if isinstance(x, Infinity):
        return np.inf
    return heis_dist_to_subgroup(x, V)


def cusp_contains(
    p: Point,
    r: float,
    x: Point,
    V: SubgroupDescriptor,
) -> bool:
    """Membership of x in the standard cusp neighborhood U_{p,r}.

    For p = INFINITY the condition is dist_c(x, V) >= 1/r in the extended
    Cygan metric.  For finite boundary p, x is first moved by the inversion
    in the unit Cygan sphere at p (which sends p to INFINITY).  By
    convention x = INFINITY is inside for every r.
    """
    if r <= 0:
        raise GeometryError("cusp radius must be positive")
    if isinstance(p, HPoint) and p.u > 0:
        raise GeometryError("cusp point must lie on the boundary")
    if isinstance(x, Infinity):
        return True
    if isinstance(p, Infinity):
        return _dist_to_V(x, V) >= 1.0 / r
    if x.close_to(p, 0.0):
        raise GeometryError("x = p is excluded from the cusp neighborhood")
    moved = unlift(_inversion_about(p) @ lift(x))
    return _dist_to_V(moved, V) >= 1.0 / r


def on_cusp_surface(
    p: Point,
    r: float,
    x: Point,
    V: SubgroupDescriptor,
    delta_eq: float = config.DELTA_EQ,
) -> bool:
    """Membership of x in the cusp boundary surface dist_c(., V) = 1/r."""
    if isinstance(x, Infinity):
        return False
    if isinstance(p, Infinity):
        moved = x
    else:
        moved = unlift(_inversion_about(p) @ lift(x))
    if isinstance(moved, Infinity):
        return False
    return abs(_dist_to_V(moved, V) - 1.0 / r) <= delta_eq


@dataclass(frozen=True)
class AuditViolation:
    word: tuple[int, ...]
    label: str
    sample_index: int
    kind: str  # "stabilizer-escape" or "outsider-return"


@dataclass(frozen=True)
class PreciseInvarianceReport:
    p_is_infinity: bool
    radius: float
    samples: int
    stabilizer_words: tuple[str, ...]
    tested_words: tuple[str, ...]
    violations: tuple[AuditViolation, ...]
    seed: int
    tolerances: dict

    @property
    def violation_count(self) -> int:
        return len(self.violations)


def _sample_cusp_points(
    V: SubgroupDescriptor, r: float, samples: int, seed: int, n: int
) -> np.ndarray:
    """Lift vectors of random points of U_{infinity, r} (rejection sampling)."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    out = []
    scale = 2.0 / r
    attempts = 0
    while len(out) < samples:
        attempts += 1
        if attempts > 200 * samples + 1000:
            raise GeometryError("cusp sampling failed; is the region empty?")
        xi = scale * (gen.standard_normal(n - 1) + 1j * gen.standard_normal(n - 1))
        v = scale * gen.standard_normal()
        u = abs(scale * gen.standard_normal())
        x = HPoint(tuple(xi), v, u)
        if heis_dist_to_subgroup(x, V) >= 1.0 / r:
            out.append(lift(x))
    return np.stack(out)


def precise_invariance_audit(
    spec: GroupSpec,
    p: Point,
    r: float,
    L: int,
    samples: int,
    V: SubgroupDescriptor,
    seed: int,
    fix_tol: float = 1e-8,
) -> PreciseInvarianceReport:
    """Numerical audit of precise invariance of U_{p,r} under the stabilizer.

    The word table splits into words fixing p and the rest; every sampled
    point of U_{p,r} must stay inside under the former and leave under the
    latter.  Violations are reported with witnesses rather than raised.
    """
    table = enumerate_elements(spec, L)
    n = spec.n
    # Work on the INFINITY side: conjugate words when p is finite.
    if isinstance(p, Infinity):
        conj = np.eye(n + 1, dtype=complex)
    else:
        if p.u > 0:
            raise GeometryError("cusp point must lie on the boundary")
        conj = _inversion_about(p)
    conj_inv = np.linalg.inv(conj)

    stabilizer, outsiders = [], []
    p_lift = lift(p, n=n)
    for entry in table.non_identity():
        image = entry.element.matrix @ p_lift
        # g fixes p iff image is projectively parallel to lift(p).
        cross = np.abs(
            image[:, None] * p_lift[None, :] - p_lift[:, None] * image[None, :]
        ).max()
        scale = np.linalg.norm(image) * np.linalg.norm(p_lift)
        (stabilizer if cross <= fix_tol * scale else outsiders).append(entry)

    X = _sample_cusp_points(V, r, samples, seed, n)  # on the INFINITY side
    violations: list[AuditViolation] = []

    def contained(z: np.ndarray) -> bool:
        moved = unlift(z, tol=1e-7)
        if isinstance(moved, Infinity):
            return True
        return heis_dist_to_subgroup(moved, V) >= 1.0 / r

    for group, inside_expected in ((stabilizer, True), (outsiders, False)):
        kind = "stabilizer-escape" if inside_expected else "outsider-return"
        for entry in group:
            M = conj @ entry.element.matrix @ conj_inv
            images = (M @ X.T).T
            for i in range(samples):
                if contained(images[i]) != inside_expected:
                    violations.append(
                        AuditViolation(
                            word=entry.word,
                            label=table.word_label(entry.word),
                            sample_index=i,
                            kind=kind,
                        )
                    )
    return PreciseInvarianceReport(
        p_is_infinity=isinstance(p, Infinity),
        radius=r,
        samples=samples,
        stabilizer_words=tuple(table.word_label(e.word) for e in stabilizer),
        tested_words=tuple(table.word_label(e.word) for e in outsiders),
        violations=tuple(violations),
        seed=seed,
        tolerances={"fix_tol": fix_tol, "delta_eq": config.DELTA_EQ},
    )
