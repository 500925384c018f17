"""Short-edge removal surgery on Coxeter polygons and the minimum-area oracle.

Removing the far endpoint of every edge shorter than alpha*eta produces a
polygon with no edge below (1-alpha)*eta (triangle inequality against the
long neighbor edge), while each removed triangle is a sliver of area at most
a constant multiple of alpha.  The area of the triangle spanned by three
consecutive vertices with all sides >= eta and angles <= pi/2 is bounded
below by the grid-search constant from min_area_triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lorentz import (
    DomainError,
    gauss_bonnet_area,
    mink,
    tangent_toward,
    triangle_angles,
)
from .polygon import CoxeterPolygon, GeneralPolygon, right_angled_hexagon
from .thinpart import (
    SamplerConfig,
    boundary_profile,
    sample_uniform,
    thin_ratio,
)


@dataclass(frozen=True)
class SurgeryConstants:
    """Short-edge threshold eta and removal fraction alpha (0 < alpha < 1/2);
    edges of length <= eta_prime = alpha * eta are removed."""

    eta: float = 0.1
    alpha: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5):
            raise DomainError("alpha must lie in (0, 1/2)")
        if self.eta <= 0.0:
            raise DomainError("eta must be positive")

    @property
    def eta_prime(self) -> float:
        return self.alpha * self.eta


@dataclass
class SurgeryReport:
    removed_vertices: list = field(default_factory=list)
    removed_triangle_areas: list = field(default_factory=list)
    min_edge_after: float = math.inf
    area_before: float = 0.0
    area_after: float = 0.0
    area_ratio: float = 1.0
    thin_before: float | None = None
    thin_after: float | None = None
    thin_R: float | None = None


def _vertex_angle(P, i):
    t1 = tangent_toward(P.vertices[i], P.vertices[(i - 1) % P.n])
    t2 = tangent_toward(P.vertices[i], P.vertices[(i + 1) % P.n])
    return math.acos(min(1.0, max(-1.0, float(mink(t1, t2)))))


def _triangle_area(P, i, j, k):
    """Area of the triangle spanned by three polygon vertices."""
    vs = [P.vertices[i], P.vertices[j], P.vertices[k]]
    angs = []
    for t in range(3):
        ta = tangent_toward(vs[t], vs[(t + 1) % 3])
        tb = tangent_toward(vs[t], vs[(t + 2) % 3])
        angs.append(math.acos(min(1.0, max(-1.0, float(mink(ta, tb))))))
    return gauss_bonnet_area(angs)


def remove_small_edges(P: CoxeterPolygon, c: SurgeryConstants):
    """Drop the far endpoint of every edge of length <= alpha*eta.

    Requires a compact Coxeter polygon with no two adjacent edges both
    <= eta.  Returns the surgered polygon (generally no longer Coxeter) and
    a report with removed-triangle areas and the output minimum edge length.
    """
    if any(P.ideal):
        raise DomainError("surgery requires a compact polygon")
    lengths = P.edge_lengths()
    n = P.n
    for i in range(n):
        if lengths[i] <= c.eta and lengths[(i + 1) % n] <= c.eta:
            raise DomainError(
                f"adjacent short edges {i} and {(i + 1) % n}"
                f" (lengths {lengths[i]:.4g}, {lengths[(i + 1) % n]:.4g})"
            )
    short = [i for i in range(n) if lengths[i] <= c.eta_prime]
    report = SurgeryReport(area_before=P.area())
    if not short:
        out = GeneralPolygon([v.copy() for v in P.vertices], ideal=list(P.ideal))
        report.area_after = report.area_before
        report.min_edge_after = min(lengths)
        return out, report
    drop = set()
    for i in short:
        drop.add((i + 1) % n)
        report.removed_vertices.append((i + 1) % n)
        report.removed_triangle_areas.append(
            _triangle_area(P, i, (i + 1) % n, (i + 2) % n)
        )
    keep = [k for k in range(n) if k not in drop]
    if len(keep) < 3:
        raise DomainError("surgery would leave fewer than 3 vertices")
    out = GeneralPolygon([P.vertices[k].copy() for k in keep],
                         ideal=[P.ideal[k] for k in keep])
    report.area_after = out.area()
    report.area_ratio = report.area_after / report.area_before
    report.min_edge_after = min(out.edge_lengths())
    floor = (1.0 - c.alpha) * c.eta
    if report.min_edge_after < floor - 1e-12:
        raise DomainError(
            f"output edge {report.min_edge_after:.4g} below (1-alpha)*eta = {floor:.4g}"
        )
    return out, report


def surgery_thin_comparison(P, P2, R, n, cfg: SamplerConfig,
                            consts: SurgeryConstants | None = None) -> dict:
    """Thin ratios of a polygon and its surgered output at threshold R.

    Passes iff ratio(P2) <= 2 ratio(P) + 3 stderr.  Also verifies pointwise
    that thin sample points of P2 sit within alpha*eta of the thin set of P,
    i.e. d(y, boundary of P) <= R/2 + alpha*eta.
    """
    consts = consts or SurgeryConstants()
    est1 = thin_ratio(P, R, n, cfg)
    est2 = thin_ratio(P2, R, n, cfg)
    sigma = math.sqrt(est2.stderr**2 + 4.0 * est1.stderr**2)
    passes = est2.ratio <= 2.0 * est1.ratio + 3.0 * sigma
    d2 = boundary_profile(P2, n, cfg)
    X2 = sample_uniform(P2, n, cfg)
    thin_pts = X2[d2 <= R / 2.0]
    if len(thin_pts):
        d_in_P = P.boundary_distances(thin_pts)
        containment_excess = float(np.max(d_in_P - R / 2.0))
    else:
        containment_excess = -math.inf
    contained = containment_excess <= consts.eta_prime + 1e-9
    return {
        "R": R,
        "ratio_before": est1.ratio,
        "ratio_after": est2.ratio,
        "stderr": sigma,
        "inflation_bound": 2.0 * est1.ratio + 3.0 * sigma,
        "passes": bool(passes),
        "containment_excess": containment_excess,
        "containment_allowance": consts.eta_prime,
        "containment_ok": bool(contained),
        "n_samples": n,
        "seed": cfg.seed,
    }


def angle_estimate_check(P: CoxeterPolygon, i, consts: SurgeryConstants) -> dict:
    """Trigonometric estimates for the triangle removed at a short edge i.

    With the short edge (v_i, v_{i+1}), gamma the angle of the removed
    triangle at v_i, a = d(v_i, v_{i+2}) and cside = d(v_{i+1}, v_{i+2}):
    checks the sine-law identity sinh(a) = sinh(cside)/sin(gamma) (right
    angle at v_{i+1}) and the bounds sin(gamma) >= sinh(a - eta)/sinh(a),
    gamma >= pi/2 - u' * alpha for the supplied constant u'.
    """
    n = P.n
    lengths = P.edge_lengths()
    if lengths[i] > consts.eta_prime:
        raise DomainError(f"edge {i} has length {lengths[i]:.4g} > alpha*eta")
    vi, vj, vk = P.vertices[i], P.vertices[(i + 1) % n], P.vertices[(i + 2) % n]
    a = math.acosh(max(1.0, -float(mink(vi, vk))))
    cside = math.acosh(max(1.0, -float(mink(vj, vk))))
    t1 = tangent_toward(vi, vj)
    t2 = tangent_toward(vi, vk)
    gamma = math.acos(min(1.0, max(-1.0, float(mink(t1, t2)))))
    right = _vertex_angle(P, (i + 1) % n)
    sine_law_residual = abs(math.sinh(a) - math.sinh(cside) / math.sin(gamma))
    lower = math.sinh(a - consts.eta) / math.sinh(a) if a > consts.eta else 0.0
    return {
        "edge": i,
        "gamma": gamma,
        "angle_at_far_end": right,
        "sine_law_residual": sine_law_residual,
        "sine_bound": lower,
        "sine_ok": math.sin(gamma) >= lower - 1e-12,
    }


def gamma_bound_check(report_gamma, u_prime, alpha) -> bool:
    return report_gamma >= math.pi / 2.0 - u_prime * alpha - 1e-12


# -- minimum-area oracle ----------------------------------------------------


def _areas_grid(a, b, c):
    """Vectorized triangle areas; NaN where constraints fail."""
    ok = (a + b > c) & (b + c > a) & (a + c > b)
    area = np.full(a.shape, np.nan)
    if not ok.any():
        return area
    aa, bb, cc = a[ok], b[ok], c[ok]
    cosh_a, cosh_b, cosh_c = np.cosh(aa), np.cosh(bb), np.cosh(cc)
    sinh_a, sinh_b, sinh_c = np.sinh(aa), np.sinh(bb), np.sinh(cc)
    cosA = (cosh_b * cosh_c - cosh_a) / (sinh_b * sinh_c)
    cosB = (cosh_c * cosh_a - cosh_b) / (sinh_c * sinh_a)
    cosC = (cosh_a * cosh_b - cosh_c) / (sinh_a * sinh_b)
    angles_ok = (cosA >= -1e-12) & (cosB >= -1e-12) & (cosC >= -1e-12)
    A = np.arccos(np.clip(cosA, -1.0, 1.0))
    B = np.arccos(np.clip(cosB, -1.0, 1.0))
    C = np.arccos(np.clip(cosC, -1.0, 1.0))
    vals = np.where(angles_ok, np.pi - A - B - C, np.nan)
    area[ok] = vals
    return area


def min_area_triangle(l0, grid=200, refine_rounds=5, box=2.0) -> float:
    return min_area_triangle_report(l0, grid, refine_rounds, box)["area"]


def min_area_triangle_report(l0, grid=200, refine_rounds=5, box=2.0) -> dict:
    """Minimum area over triangles with sides in [l0, l0+box] and angles
    <= pi/2, by grid search plus window refinement.

    The search box upper boundary is checked to be non-optimal (areas on the
    boundary exceed the interior minimum), so enlarging the box cannot lower
    the result.
    """
    if l0 <= 0:
        raise DomainError("l0 must be positive")
    lo = np.full(3, float(l0))
    hi = np.full(3, float(l0 + box))
    best_val, best_pt = math.inf, None
    for _ in range(refine_rounds + 1):
        axes = [np.linspace(lo[k], hi[k], grid) for k in range(3)]
        bv, bp = math.inf, None
        for ia in range(0, grid, 40):
            a = axes[0][ia : ia + 40][:, None, None]
            b = axes[1][None, :, None]
            c = axes[2][None, None, :]
            A, B, C = np.broadcast_arrays(a, b, c)
            vals = _areas_grid(A.ravel(), B.ravel(), C.ravel())
            if np.all(np.isnan(vals)):
                continue
            k = int(np.nanargmin(vals))
            if vals[k] < bv:
                bv = float(vals[k])
                bp = (float(A.ravel()[k]), float(B.ravel()[k]), float(C.ravel()[k]))
        if bp is None:
            raise DomainError("no feasible triangle in the search box")
        if bv < best_val:
            best_val, best_pt = bv, bp
        span = (hi - lo) / grid * 6.0
        lo = np.maximum(l0, np.array(best_pt) - span)
        hi = np.minimum(l0 + box, np.array(best_pt) + span)
    sides = best_pt
    angles = triangle_angles(*sides)
    active_sides = [k for k in range(3) if sides[k] < l0 * (1 + 1e-4)]
    active_angles = [k for k in range(3) if angles[k] > math.pi / 2 - 1e-4]
    edge = float(l0 + box)
    probe = np.linspace(l0, l0 + box, 64)
    pa, pb = np.meshgrid(probe, probe)
    wall = _areas_grid(np.full(pa.size, edge), pa.ravel(), pb.ravel())
    boundary_clear = bool(np.isnan(wall).all() or np.nanmin(wall) > best_val)
    return {
        "l0": float(l0),
        "area": best_val,
        "sides": list(sides),
        "angles": list(angles),
        "active_side_constraints": active_sides,
        "active_angle_constraints": active_angles,
        "boundary_clear": boundary_clear,
    }


# -- corpus -----------------------------------------------------------------


def short_edge_corpus(consts: SurgeryConstants, seed=0, n_random=6) -> list:
    """Right-angled hexagons with exactly one edge below alpha*eta.

    Deterministic extreme instances (short edge at alpha*eta/2 and at
    0.99 alpha*eta) are always included so the calibrated sliver-area
    constant is stable across seeds; seeded random instances add spread.
    """
    out = []
    ep = consts.eta_prime
    fixed = [
        ("hex_short_half_L1", ep / 2, 1.0, 1.0),
        ("hex_short_half_L2", ep / 2, 2.0, 1.5),
        ("hex_short_worst", 0.99 * ep, 2.0, 2.0),
        ("hex_short_mixed", 0.7 * ep, 1.2, 2.0),
    ]
    for pid, s1, s3, s5 in fixed:
        out.append((pid, _checked_hexagon(s1, s3, s5, consts)))
    rng = np.random.default_rng(seed)
    made = 0
    while made < n_random:
        s1 = float(rng.uniform(0.3, 0.9)) * ep
        s3 = float(rng.uniform(0.8, 2.0))
        s5 = float(rng.uniform(0.8, 2.0))
        try:
            P = _checked_hexagon(s1, s3, s5, consts)
        except DomainError:
            continue
        out.append((f"hex_rand_{made}", P))
        made += 1
    return out


def _checked_hexagon(s1, s3, s5, consts):
    P = right_angled_hexagon(s1, s3, s5)
    lengths = P.edge_lengths()
    short = [k for k in range(6) if lengths[k] <= consts.eta]
    if short != [0]:
        raise DomainError(f"hexagon has unexpected short edges {short}")
    return P


def calibrate_removed_area_constant(corpus, consts: SurgeryConstants) -> float:
    """Empirical u' = max over the corpus of removed-triangle area / alpha."""
    u = 0.0
    for _, P in corpus:
        _, rep = remove_small_edges(P, consts)
        for area in rep.removed_triangle_areas:
            u = max(u, area / consts.alpha)
    return u
