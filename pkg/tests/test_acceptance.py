"""Acceptance gate: eleven end-to-end checks at their stated tolerances.

Each test prints exactly one PASS/FAIL line (run with ``pytest -s`` or read
the captured output).  The checks are desk-scale verifications of the
library's mathematical guarantees: embedding soundness, inversion and metric
identities, the classification trichotomy, two-sided and infinitely-sided
Dirichlet domains, minimal invariant subgroups, cusp invariance, cross-ratio
invariance, mu-chain oracle equivalence, and byte-level determinism.
"""

import hashlib
import json
import time

import numpy as np
import pytest
from click.testing import CliRunner

from chgeom import (
    HPoint,
    HeisElement,
    HeisIsometry,
    INFINITY,
    Isometry,
    IsometryType,
    SubgroupDescriptor,
    apply_heis_isometry,
    bergman_distance,
    classify,
    cocompactness_check,
    cygan_norm,
    dilation_matrix,
    dirichlet_sides,
    embed,
    h_inversion,
    is_J_unitary,
    minimal_invariant_subgroup,
    mu_chain,
    mu_density,
    precise_invariance_audit,
    quasi_cr_audit,
    rotation_residual_on_V,
    two_sided_center_search,
)
from chgeom.cli import main as cli_main
from chgeom.crmetrics import Quad, _anchor_dist, _distinct_quads, cross_ratio
from chgeom.groups import GroupSpec
from chgeom.heisenberg import cygan_dist_coords
from chgeom.io import group_to_dict

from conftest import heis_lattice, vertical_cyclic


def report(number: int, title: str, ok: bool, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    extra = f" ({detail})" if detail else ""
    print(f"[{tag}] criterion {number}: {title}{extra}")
    assert ok, f"criterion {number}: {title}{extra}"


def random_heis_isometry(gen, n):
    m = n - 1
    # unitary rotation part via QR of a random complex matrix
    Z = gen.standard_normal((m, m)) + 1j * gen.standard_normal((m, m))
    Q, R = np.linalg.qr(Z)
    A = Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]
    tau = HeisElement(
        tuple(gen.standard_normal(m) + 1j * gen.standard_normal(m)),
        float(gen.standard_normal()),
    )
    return HeisIsometry(A, tau)


def test_criterion_1_embedding_soundness():
    gen = np.random.default_rng(101)
    started = time.monotonic()
    worst_unitary = 0.0
    worst_hom = 0.0
    for k in range(10_000):
        n = 2 if k % 2 == 0 else 3
        g = random_heis_isometry(gen, n)
        h = random_heis_isometry(gen, n)
        Mg, Mh = embed(g), embed(h)
        J = np.ones(n + 1)
        J[-1] = -1.0
        resid = Mg.conj().T @ (J[:, None] * Mg) - np.diag(J)
        worst_unitary = max(worst_unitary, float(np.max(np.abs(resid))))
        hom = np.max(np.abs(embed(g.compose(h)) - Mg @ Mh))
        worst_hom = max(worst_hom, float(hom))
    elapsed = time.monotonic() - started
    ok = worst_unitary < 1e-10 and worst_hom < 1e-10 and elapsed < 60.0
    report(1, "embedding soundness over 10^4 (A, tau) pairs", ok,
           f"J-unitary {worst_unitary:.2e}, homomorphism {worst_hom:.2e}, "
           f"{elapsed:.1f}s")


def test_criterion_2_inversion_identities():
    gen = np.random.default_rng(202)
    worst_inv = 0.0
    worst_norm = 0.0
    count = 0
    while count < 10_000:
        xi = gen.standard_normal() + 1j * gen.standard_normal()
        p = HPoint((xi,), float(gen.standard_normal()), 0.0)
        if not 0.3 <= cygan_norm(p) <= 3.0:
            continue
        count += 1
        q = h_inversion(p)
        back = h_inversion(q)
        worst_inv = max(
            worst_inv,
            abs(back.xi[0] - p.xi[0]),
            abs(back.v - p.v),
        )
        worst_norm = max(worst_norm, abs(cygan_norm(q) * cygan_norm(p) - 1.0))
    ok = worst_inv < 1e-10 and worst_norm < 1e-10
    report(2, "inversion involution and norm reciprocity on 10^4 points", ok,
           f"involution {worst_inv:.2e}, norm product {worst_norm:.2e}")


def test_criterion_3_metric_axioms():
    gen = np.random.default_rng(303)
    N = 100_000
    xi = gen.standard_normal((3, N, 1)) + 1j * gen.standard_normal((3, N, 1))
    v = gen.standard_normal((3, N))
    zeros = np.zeros(N)

    def d(i, j):
        return cygan_dist_coords(xi[i], v[i], zeros, xi[j], v[j], zeros)

    slack = float(np.max(d(0, 2) - (d(0, 1) + d(1, 2))))
    triangle_ok = slack <= 1e-9

    # left translation by (xi0, v0) and a unitary rotation, vectorized
    xi0 = 0.7 - 0.4j
    v0 = 1.3
    twist = lambda a: 2.0 * np.imag(np.sum(xi0 * np.conj(a), axis=-1))
    xi_t = [xi0 + xi[i] for i in range(2)]
    v_t = [v0 + v[i] + twist(xi[i]) for i in range(2)]
    d_orig = d(0, 1)
    d_trans = cygan_dist_coords(xi_t[0], v_t[0], zeros, xi_t[1], v_t[1], zeros)
    rot = np.exp(0.9j)
    d_rot = cygan_dist_coords(rot * xi[0], v[0], zeros, rot * xi[1], v[1], zeros)
    inv_err = float(
        max(np.max(np.abs(d_trans - d_orig)), np.max(np.abs(d_rot - d_orig)))
    )
    invariance_ok = inv_err < 1e-12

    base = HPoint((0.0,), 0.0, 1.0)
    bergman_err = max(
        abs(bergman_distance(base, HPoint((0.0,), 0.0, u)) - 2.0 * abs(np.log(u)))
        for u in (np.exp(-2.0), np.exp(-1.0), np.e, np.e**2)
    )
    bergman_ok = bergman_err < 1e-9
    ok = triangle_ok and invariance_ok and bergman_ok
    report(3, "Cygan triangle/invariance and Bergman vertical closed form", ok,
           f"triangle slack {slack:.2e}, invariance {inv_err:.2e}, "
           f"vertical {bergman_err:.2e}")


def test_criterion_4_classification_suite():
    gen = np.random.default_rng(404)

    def rand_conj():
        theta = float(gen.standard_normal())
        g = random_heis_isometry(gen, 2)
        return embed(g) @ dilation_matrix(2, theta)

    reps = [
        (embed(HeisIsometry.translation(HeisElement((1.0,), 0.0))),
         IsometryType.PARABOLIC),
        (embed(HeisIsometry.translation(HeisElement((0.0,), 1.0))),
         IsometryType.PARABOLIC),
        (embed(HeisIsometry(np.array([[np.exp(0.6j)]]), HeisElement((0.0,), 1.0))),
         IsometryType.PARABOLIC),
        (dilation_matrix(2, 0.5), IsometryType.LOXODROMIC),
        (dilation_matrix(2, -1.1) @ np.diag([np.exp(1.2j), 1.0, 1.0]),
         IsometryType.LOXODROMIC),
        (np.diag([np.exp(2j * np.pi / 5), 1.0, 1.0]), IsometryType.ELLIPTIC),
        (embed(HeisIsometry.rotation(np.array([[np.exp(2j * np.pi / 7)]]))),
         IsometryType.ELLIPTIC),
    ]
    total = correct = 0
    for M, expected in reps:
        mats = [M] + [
            (C := rand_conj()) @ M @ np.linalg.inv(C) for _ in range(5)
        ]
        for mat in mats:
            total += 1
            if classify(Isometry(mat)) is expected:
                correct += 1
    ok = total >= 30 and correct == total
    report(4, "classification trichotomy on constructed isometries", ok,
           f"{correct}/{total} correct")


def test_criterion_5_two_sided_domains():
    spec = vertical_cyclic()
    centers = [
        HPoint((0.0,), 0.0, 1.0),
        HPoint((0.3,), 0.2, 1.5),
        HPoint((-0.2 + 0.1j,), -0.4, 0.7),
    ]
    counts = []
    all_ok = True
    for y in centers:
        for seed in (1, 2, 3, 4, 5):
            rep = dirichlet_sides(spec, y, L=4, rays=4000, seed=seed)
            counts.append(rep.face_count)
            all_ok = all_ok and rep.face_count == 2 and rep.stable
    # screw parabolic: vertical translation with a rotation part
    screw = GroupSpec(
        2,
        (HeisIsometry(np.array([[np.exp(0.9j)]]), HeisElement((0.0,), 1.0)),),
        ("s",),
    )
    box = [(-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2), (0.5, 2.0)]
    _, search = two_sided_center_search(screw, box, L=4, rays=2000, seed=3)
    search_ok = search.face_count == 2 and search.stable
    ok = all_ok and search_ok
    report(5, "vertical cyclic group has two sides; screw-parabolic search", ok,
           f"counts {sorted(set(counts))}, search count {search.face_count}")


def test_criterion_6_infinitely_many_sides():
    spec = heis_lattice()
    y = HPoint((0.0,), 0.0, 1.0)
    counts = {}
    stable6 = False
    for L in (2, 4, 6):
        rep = dirichlet_sides(spec, y, L=L, rays=8000, seed=17)
        counts[L] = rep.face_count
        if L == 6:
            stable6 = rep.stable
    increasing = counts[2] < counts[4] < counts[6]
    ok = increasing and counts[6] > 4 and stable6
    report(6, "lattice face counts grow without bound", ok,
           f"counts {counts}, stable at L=6: {stable6}")


def test_criterion_7_minimal_invariant_subgroups():
    checks = []

    lattice = heis_lattice()
    d1 = minimal_invariant_subgroup(lattice)
    B1 = d1.real_basis()
    checks.append(
        d1.include_center
        and B1.shape == (1, 2)
        and np.allclose(np.abs(B1), [[1.0, 0.0]])
        and d1.conjugator.close_to(HeisElement.identity(2))
    )
    checks.append(cocompactness_check(lattice, d1)[0])
    checks.append(rotation_residual_on_V(lattice, d1) <= 1e-10)

    horiz = GroupSpec(
        2, (HeisIsometry.translation(HeisElement((1.0,), 0.0)),), ("a",)
    )
    d2 = minimal_invariant_subgroup(horiz)
    B2 = d2.real_basis()
    checks.append(
        not d2.include_center
        and B2.shape == (1, 2)
        and np.allclose(np.abs(B2), [[1.0, 0.0]])
    )
    checks.append(cocompactness_check(horiz, d2)[0])
    checks.append(rotation_residual_on_V(horiz, d2) <= 1e-10)

    vert = vertical_cyclic()
    d3 = minimal_invariant_subgroup(vert)
    checks.append(d3.include_center and d3.real_basis().size == 0)
    checks.append(cocompactness_check(vert, d3)[0])
    checks.append(rotation_residual_on_V(vert, d3) <= 1e-10)

    ok = all(checks)
    report(7, "minimal invariant subgroups match the worked examples", ok,
           f"{sum(checks)}/{len(checks)} sub-checks")


def test_criterion_8_cusp_audit():
    rep = precise_invariance_audit(
        vertical_cyclic(), INFINITY, 1.0, L=4, samples=10_000,
        V=SubgroupDescriptor.center(2), seed=808,
    )
    ok = rep.violation_count == 0
    report(8, "cusp neighborhood precisely invariant (10^4 samples)", ok,
           f"{rep.violation_count} violations")


def test_criterion_9_cross_ratio_invariance():
    gen = np.random.default_rng(909)
    n_pts = 400
    xi = gen.standard_normal((n_pts, 1)) + 1j * gen.standard_normal((n_pts, 1))
    v = gen.standard_normal(n_pts)
    zeros = np.zeros(n_pts)
    idx = _distinct_quads(gen, n_pts, 100_000)

    def cr_of(xi_a, v_a):
        def d(i, j):
            return cygan_dist_coords(
                xi_a[idx[:, i]], v_a[idx[:, i]], zeros[idx[:, i]],
                xi_a[idx[:, j]], v_a[idx[:, j]], zeros[idx[:, j]],
            )
        return d(0, 1) * d(2, 3) / (d(0, 2) * d(1, 3))

    base = cr_of(xi, v)
    # Heisenberg isometry image (rotation + left translation)
    g = HeisIsometry(np.array([[np.exp(1.1j)]]), HeisElement((0.8 - 0.3j,), -2.0))
    images = [apply_heis_isometry(g, HPoint(tuple(xi[k]), float(v[k]), 0.0))
              for k in range(n_pts)]
    xi_g = np.stack([np.asarray(p.xi) for p in images])
    v_g = np.asarray([p.v for p in images])
    err_heis = float(np.max(np.abs(cr_of(xi_g, v_g) / base - 1.0)))
    # dilation image
    lam = 0.45
    err_dil = float(np.max(np.abs(cr_of(lam * xi, lam * lam * v) / base - 1.0)))

    pts = [HPoint(tuple(xi[k]), float(v[k]), 0.0) for k in range(40)]
    audit = quasi_cr_audit(
        [(p, apply_heis_isometry(g, p)) for p in pts], quads=20_000, seed=9
    )
    m1 = audit.m_at(1.0)
    ok = err_heis < 1e-9 and err_dil < 1e-9 and m1 <= 1.0 + 1e-9
    report(9, "cross-ratio invariance and unit distortion constant", ok,
           f"H(n) {err_heis:.2e}, dilation {err_dil:.2e}, M_hat(1) {m1:.12f}")


def brute_force_chain(points, a, b, mu):
    from chgeom.crmetrics import _same_point

    interior = [p for p in points if not (_same_point(p, a) or _same_point(p, b))]
    if not interior:
        return True
    start = min(range(len(interior)), key=lambda i: _anchor_dist(interior[i], a))
    goal = min(range(len(interior)), key=lambda i: _anchor_dist(interior[i], b))
    if start == goal:
        return True

    def linked(i, j):
        return cross_ratio(Quad(a, interior[i], interior[j], b)) <= mu

    def dfs(i, visited):
        if i == goal:
            return True
        return any(
            dfs(j, visited | {j})
            for j in range(len(interior))
            if j not in visited and j != i and linked(i, j)
        )

    return dfs(start, {start})


def test_criterion_10_mu_chain_oracle_equivalence():
    gen = np.random.default_rng(1010)

    def pt():
        return HPoint(
            (gen.standard_normal() + 1j * gen.standard_normal(),),
            float(gen.standard_normal()), 0.0,
        )

    mismatches = 0
    for _ in range(200):
        k = int(gen.integers(2, 9))
        pts = [pt() for _ in range(k)]
        a, b = pt(), pt()
        mu = float(gen.uniform(1.01, 3.5))
        if (mu_chain(pts, a, b, mu) is not None) != brute_force_chain(pts, a, b, mu):
            mismatches += 1
        dense, failing = mu_density(pts, mu)
        expected_fail = [
            (i, j)
            for i in range(k)
            for j in range(k)
            if i != j and mu_chain(pts, pts[i], pts[j], mu) is None
        ]
        if failing != expected_fail or dense != (not expected_fail):
            mismatches += 1
    ok = mismatches == 0
    report(10, "mu-chain/mu-density match brute force on 200 instances", ok,
           f"{mismatches} mismatches")


def test_criterion_11_byte_identical_csv(tmp_path):
    runner = CliRunner()
    vertical = tmp_path / "vertical.json"
    vertical.write_text(json.dumps(group_to_dict(vertical_cyclic())))
    lattice = tmp_path / "lattice.json"
    lattice.write_text(json.dumps(group_to_dict(heis_lattice())))
    configs = [
        ("vertical", str(vertical), "0,0,1", "4", "4000"),
        ("lattice", str(lattice), "0,0,1", "6", "8000"),
    ]
    ok = True
    digests = {}
    for name, path, center, L, rays in configs:
        per_thread = set()
        for threads in ("1", "4", "8"):
            out = str(tmp_path / f"{name}_{threads}.csv")
            result = runner.invoke(cli_main, [
                "dirichlet-sides", "--group", path, "--center", center,
                "-L", L, "--rays", rays, "--seed", "23",
                "--threads", threads, "--out", out,
            ])
            ok = ok and result.exit_code == 0
            per_thread.add(hashlib.md5(open(out, "rb").read()).hexdigest())
        digests[name] = per_thread
        ok = ok and len(per_thread) == 1
    report(11, "byte-identical CSVs at 1/4/8 threads", ok,
           ", ".join(f"{k}: {next(iter(v))[:8]}" for k, v in digests.items()))
