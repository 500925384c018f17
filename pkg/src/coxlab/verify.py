"""Named verification suites behind the `coxlab verify` command.

Each suite function returns {"suite", "checks": [{name, passed, slack}...],
"passes"}; slack is the measured margin to the asserted bound (negative
means failure).  Suites are deterministic given the seed.
"""

from __future__ import annotations

import math

import numpy as np

from . import lorentz, refgroup, surgery, thinpart, triangulation
from .polygon import (
    ideal_regular_polygon,
    regular_coxeter_polygon,
    triangle_polygon,
    validate_coxeter,
)

LOG3 = math.log(3.0)


def theorem_corpus():
    """The standing polygon corpus for thin-part verification."""
    out = []
    for n in (7, 12, 20, 50, 100, 200):
        out.append((f"regular_{n}_3", regular_coxeter_polygon(n, 3)))
    for n in (3, 10, 19, 24, 50, 200):
        out.append((f"ideal_{n}", ideal_regular_polygon(n)))
    for pqr in ((2, 3, 7), (2, 4, 5), (3, 3, 4)):
        out.append(("triangle_%d_%d_%d" % pqr, triangle_polygon(*pqr)))
    return out


def compact_corpus_inradius_gt1():
    return [
        (pid, P)
        for pid, P in theorem_corpus()
        if not any(P.ideal) and P.inradius() > 1.0
    ]


def _check(name, passed, slack):
    return {"name": name, "passed": bool(passed), "slack": float(slack)}


def _suite(name, checks):
    return {"suite": name, "checks": checks, "passes": all(c["passed"] for c in checks)}


def random_triangle_sides(n, seed, angle_lo=0.05, angle_hi=math.pi / 2):
    """Seeded random triangles as (angles, sides) arrays, angle sum < pi."""
    rng = np.random.default_rng(seed)
    angles = np.empty((0, 3))
    while len(angles) < n:
        cand = rng.uniform(angle_lo, angle_hi, size=(2 * n, 3))
        cand = cand[cand.sum(axis=1) < math.pi - 1e-6]
        angles = np.vstack([angles, cand])[: max(n, len(angles) + len(cand))]
    angles = angles[:n]
    ca, cb, cg = np.cos(angles[:, 0]), np.cos(angles[:, 1]), np.cos(angles[:, 2])
    sa, sb, sg = np.sin(angles[:, 0]), np.sin(angles[:, 1]), np.sin(angles[:, 2])
    sides = np.stack(
        [
            np.arccosh((cb * cg + ca) / (sb * sg)),
            np.arccosh((cg * ca + cb) / (sg * sa)),
            np.arccosh((ca * cb + cg) / (sa * sb)),
        ],
        axis=1,
    )
    return angles, sides


def verify_kernel(seed=0) -> dict:
    checks = []
    angles, sides = random_triangle_sides(10**4, seed)
    heron = np.array([lorentz.heron_area(*s) for s in sides])
    gb = math.pi - angles.sum(axis=1)
    dev = float(np.max(np.abs(heron - gb)))
    checks.append(_check("heron_vs_gauss_bonnet_1e4", dev < 1e-9, 1e-9 - dev))

    back = np.array(
        [
            [
                lorentz.angle_from_sides(s[1], s[2], s[0]),
                lorentz.angle_from_sides(s[2], s[0], s[1]),
                lorentz.angle_from_sides(s[0], s[1], s[2]),
            ]
            for s in sides[:2000]
        ]
    )
    rt = float(np.max(np.abs(back - angles[:2000])))
    checks.append(_check("angle_side_roundtrip", rt < 1e-10, 1e-10 - rt))

    rng = np.random.default_rng(seed + 1)
    raw = rng.normal(size=(10**4, 3, 2))
    pts = np.empty((10**4, 3, 3))
    pts[:, :, 1:] = raw
    pts[:, :, 0] = np.sqrt(1.0 + (raw**2).sum(axis=2))
    d01 = np.arccosh(np.maximum(1.0, -lorentz.mink(pts[:, 0], pts[:, 1])))
    d12 = np.arccosh(np.maximum(1.0, -lorentz.mink(pts[:, 1], pts[:, 2])))
    d02 = np.arccosh(np.maximum(1.0, -lorentz.mink(pts[:, 0], pts[:, 2])))
    tri_slack = float(np.min(d01 + d12 - d02))
    checks.append(_check("triangle_inequality_1e4", tri_slack > -1e-12, tri_slack + 1e-12))

    g = lorentz.Geodesic(lorentz.lvec(0.3, 1.1, 0.2))
    R = lorentz.reflection_matrix(g)
    inv = float(np.max(np.abs(R @ R - np.eye(3))))
    iso = float(np.max(np.abs(R.T @ lorentz.J @ R - lorentz.J)))
    checks.append(_check("reflection_involution", inv < 1e-12, 1e-12 - inv))
    checks.append(_check("reflection_isometry", iso < 1e-10, 1e-10 - iso))

    grid = np.linspace(0.0, 1.0, 100)
    fd_dev = max(
        abs(lorentz.equidistant_jacobian(t) - _jacobian_fd(t)) for t in grid
    )
    checks.append(_check("equidistant_jacobian_fd", fd_dev < 1e-6, 1e-6 - fd_dev))
    m = min(lorentz.equidistant_jacobian(t) for t in grid)
    md = abs(m - 1.0 / math.cosh(1.0))
    checks.append(_check("jacobian_min", md < 1e-9, 1e-9 - md))
    return _suite("kernel", checks)


def _jacobian_fd(t, y=0.25, h=1e-5):
    def E(tt, yy):
        s = yy / math.cosh(1.0)
        u = 1.0 - tt
        return np.array(
            [
                math.cosh(s) * math.cosh(u),
                math.sinh(s) * math.cosh(u),
                math.sinh(u),
            ]
        )

    Et = (E(t + h, y) - E(t - h, y)) / (2 * h)
    Ey = (E(t, y + h) - E(t, y - h)) / (2 * h)
    g11 = float(lorentz.mink(Et, Et))
    g12 = float(lorentz.mink(Et, Ey))
    g22 = float(lorentz.mink(Ey, Ey))
    return math.sqrt(max(0.0, g11 * g22 - g12 * g12))


def verify_thm1(seed=0, samples=10**5, threads=1) -> dict:
    """Thin ratio at R=2 meets the proved lower bound on the whole corpus."""
    bound = thinpart.thin_fraction_lower_bound()
    checks = []
    cfg = thinpart.SamplerConfig(seed=seed)
    for pid, P in theorem_corpus():
        est = thinpart.thin_ratio(P, 2.0, samples, cfg, threads=threads)
        slack = est.ratio - (bound - 3.0 * est.stderr)
        checks.append(_check(f"thin_bound_{pid}", slack >= 0.0, slack))
    return _suite("thm1", checks)


def verify_tree(n_max=4096) -> dict:
    checks = []
    worst_r, worst_m, worst_eq4 = math.inf, math.inf, math.inf
    for n in range(3, n_max + 1):
        _, tree = triangulation.balanced_triangulate(n)
        fl = math.floor(math.log2(n))
        r = triangulation.radius_from_root(tree)
        m = triangulation.min_leaf_depth(tree)
        worst_r = min(worst_r, fl + 1 - r)
        worst_m = min(worst_m, m - (fl - 1))
        if n <= 512 or n % 97 == 0 or n >= n_max - 2:
            dist = _leaf_distances(tree)
            for S in range(0, r + 1):
                within = sum(1 for d in dist if d <= S)
                bound = (n - 2) - 2.0 ** (math.log2(n) + 1 - S)
                worst_eq4 = min(worst_eq4, within - bound)
    checks.append(_check("radius_le_floor_log2_plus_1", worst_r >= 0, worst_r))
    checks.append(_check("min_leaf_depth_ge_floor_log2_minus_1", worst_m >= 0, worst_m))
    checks.append(_check("near_leaf_count_bound", worst_eq4 >= 0, worst_eq4))
    return _suite("tree", checks)


def _leaf_distances(tree):
    dist = [math.inf] * len(tree.children)
    frontier = list(tree.leaves())
    for t in frontier:
        dist[t] = 0
    for u in frontier:
        for v in tree.adjacency[u]:
            if dist[v] > dist[u] + 1:
                dist[v] = dist[u] + 1
                frontier.append(v)
    return dist


def verify_lemma6(seed=0) -> dict:
    checks = []
    for pid, P, L in (
        ("triangle_2_3_7", triangle_polygon(2, 3, 7), 8),
        ("pentagon_right_angled", regular_coxeter_polygon(5, 2), 6),
    ):
        b = refgroup.ball(P, L=L)
        o = P.incenter()
        rep = refgroup.check_gens_minlength(P, o=o, ball_obj=b)
        checks.append(
            _check(f"word_displacement_monotone_{pid}", rep["passes"], rep["min_slack"])
        )
        ok = 0
        for el in b.elements:
            R = refgroup.displacement(el, o) if el.index else 0.0
            refgroup.bounded_factorization(el, o, R + 1e-9, b)
            ok += 1
        checks.append(_check(f"bounded_factorization_{pid}", ok == len(b), 0.0))
    return _suite("lemma6", checks)


def verify_surgery(seed=0, samples=2 * 10**4) -> dict:
    checks = []
    consts = surgery.SurgeryConstants()
    corpus = surgery.short_edge_corpus(consts, seed=seed)
    floor = (1.0 - consts.alpha) * consts.eta
    min_edge_slack = math.inf
    book_slack = math.inf
    for pid, P in corpus:
        out, rep = surgery.remove_small_edges(P, consts)
        min_edge_slack = min(min_edge_slack, rep.min_edge_after - floor)
        residual = abs(
            rep.area_before - rep.area_after - sum(rep.removed_triangle_areas)
        )
        book_slack = min(book_slack, 1e-9 - residual)
        cr = validate_coxeter(out)
        if cr["passes"] and rep.removed_vertices:
            checks.append(_check(f"output_noncoxeter_{pid}", False, -1.0))
    checks.append(_check("min_edge_after", min_edge_slack >= 0, min_edge_slack))
    checks.append(_check("area_bookkeeping", book_slack >= 0, book_slack))
    P0 = corpus[0][1]
    out0, _ = surgery.remove_small_edges(P0, consts)
    cmp0 = surgery.surgery_thin_comparison(
        P0, out0, 2.0, samples, thinpart.SamplerConfig(seed=seed), consts
    )
    checks.append(
        _check(
            "thin_inflation",
            cmp0["passes"],
            cmp0["inflation_bound"] - cmp0["ratio_after"],
        )
    )
    checks.append(
        _check(
            "thin_containment",
            cmp0["containment_ok"],
            cmp0["containment_allowance"] - cmp0["containment_excess"],
        )
    )
    rep1 = surgery.min_area_triangle_report(1.0, grid=60, refine_rounds=2)
    checks.append(_check("min_area_boundary_clear", rep1["boundary_clear"], 0.0))
    return _suite("surgery", checks)


SUITES = {
    "kernel": verify_kernel,
    "thm1": verify_thm1,
    "tree": verify_tree,
    "lemma6": verify_lemma6,
    "surgery": verify_surgery,
}


def run_suite(name, seed=0, samples=None, threads=1) -> list:
    """Run one suite (or 'all'); returns a list of suite reports."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise lorentz.DomainError(f"unknown suite {name!r}")
    out = []
    for nm in names:
        fn = SUITES[nm]
        kwargs = {}
        if nm in ("thm1",):
            kwargs = {"seed": seed, "samples": samples or 10**5, "threads": threads}
        elif nm in ("kernel", "lemma6"):
            kwargs = {"seed": seed}
        elif nm == "surgery":
            kwargs = {"seed": seed, "samples": samples or 2 * 10**4}
        out.append(fn(**kwargs))
    return out
