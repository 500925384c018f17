"""Monte Carlo measurement of polygon thin parts and collars.

Uniform area sampling works in hyperbolic polar coordinates per triangle of
a fan triangulation.  Each triangle contributes one angular wedge anchored
at a finite vertex (or three wedges anchored at its incenter when all three
vertices are ideal).  With psi the angle measured from the perpendicular to
the far side (at distance h from the anchor), the wedge between psi1 < psi2
has exact area

    F(psi1, psi2) = beta(psi1) - beta(psi2) - (psi2 - psi1),
    beta(psi)     = arccos(cosh(h) sin(psi)),

and the radial reach of the ray at angle psi satisfies
cosh r_max = cosh(h) cos(psi) / sqrt(1 - cosh(h)^2 sin(psi)^2).  The angular
CDF is inverted by bisection to resolution finer than 1/K of the arc, and
the radius by the exact inverse of (cosh r - 1)/(cosh r_max - 1), so the
sampler is unbiased to solver precision.

Sampling is deterministic for a fixed seed: the stream is split into fixed
65536-point chunks, chunk j drawing from a counter-based Philox generator
keyed (seed, j), so results do not depend on worker count.  Estimates for
several thresholds R share one sample stream, which makes monotonicity in R
exact sample-wise.

The convention relating group displacement to boundary distance is
d(x, g x) <= R  <=>  d(x, boundary) <= R/2 (a reflection in the wall at
distance t moves x by exactly 2t).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lorentz import DomainError, J, geodesic_through, mink, tangent_toward
from .refgroup import ball as group_ball

CHUNK = 1 << 16


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler knobs: angular inverse-CDF resolution K, radial truncation for
    wedges reaching an ideal vertex, and the stream seed."""

    K: int = 4096
    truncation_radius: float = 40.0
    seed: int = 0

    def __post_init__(self):
        if self.K < 16:
            raise DomainError("angular resolution K must be >= 16")


@dataclass
class ThinRatioEstimate:
    ratio: float
    stderr: float
    n_samples: int
    R: float
    seed: int


def binomial_stderr(p, n) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def thin_fraction_lower_bound() -> float:
    """Proved lower bound 1/(1 + cosh 1) on area(thin-at-2)/area for Coxeter
    polygons, from the collar volume estimate with Jacobian floor 1/cosh(1)
    and the isoperimetric inequality."""
    return 1.0 / (1.0 + math.cosh(1.0))


# -- sampler geometry -------------------------------------------------------


class _Wedges:
    """Stacked per-arc sampling tables for one polygon."""

    def __init__(self, P, cfg: SamplerConfig):
        anchors, tperp, tpar, hs, psi_a, psi_b = [], [], [], [], [], []
        for tri in _fan_triangles(P):
            for A, d1, d2, e in _triangle_arcs(P, tri):
                h = math.asinh(float(mink(A, e)))
                foot = A - float(mink(A, e)) * e
                foot /= math.sqrt(-float(mink(foot, foot)))
                tp = tangent_toward(A, foot)
                tq = J @ np.cross(A, tp)
                tq /= math.sqrt(float(mink(tq, tq)))
                p1 = math.atan2(float(mink(d1, tq)), float(mink(d1, tp)))
                p2 = math.atan2(float(mink(d2, tq)), float(mink(d2, tp)))
                if p1 > p2:
                    p1, p2 = p2, p1
                anchors.append(A)
                tperp.append(tp)
                tpar.append(tq)
                hs.append(h)
                psi_a.append(p1)
                psi_b.append(p2)
        self.anchor = np.array(anchors)
        self.tperp = np.array(tperp)
        self.tpar = np.array(tpar)
        self.h = np.array(hs)
        self.psi_a = np.array(psi_a)
        self.psi_b = np.array(psi_b)
        self.cosh_h = np.cosh(self.h)
        self.beta_a = _beta(self.psi_a, self.cosh_h)
        self.area = self.beta_a - _beta(self.psi_b, self.cosh_h) - (
            self.psi_b - self.psi_a
        )
        if np.any(self.area <= 0):
            raise DomainError("degenerate sampling wedge")
        self.cum = np.cumsum(self.area)
        self.total = float(self.cum[-1])
        self.bisections = int(math.ceil(math.log2(cfg.K))) + 28
        self.trunc_cosh = math.cosh(cfg.truncation_radius)

    def sample_chunk(self, rng, m):
        u = rng.random((3, m))
        idx = np.searchsorted(self.cum, u[0] * self.total, side="right")
        idx = np.minimum(idx, len(self.area) - 1)
        ch = self.cosh_h[idx]
        pa = self.psi_a[idx]
        ba = self.beta_a[idx]
        target = u[1] * self.area[idx]
        lo = pa.copy()
        hi = self.psi_b[idx].copy()
        for _ in range(self.bisections):
            mid = 0.5 * (lo + hi)
            F = ba - _beta(mid, ch) - (mid - pa)
            take = F < target
            lo = np.where(take, mid, lo)
            hi = np.where(take, hi, mid)
        psi = 0.5 * (lo + hi)
        s2 = np.clip(1.0 - (ch * np.sin(psi)) ** 2, 1e-300, None)
        cosh_rmax = np.minimum(ch * np.cos(psi) / np.sqrt(s2), self.trunc_cosh)
        r = np.arccosh(1.0 + u[2] * (cosh_rmax - 1.0))
        dirs = (
            np.cos(psi)[:, None] * self.tperp[idx]
            + np.sin(psi)[:, None] * self.tpar[idx]
        )
        X = np.cosh(r)[:, None] * self.anchor[idx] + np.sinh(r)[:, None] * dirs
        qq = -(X * X) @ np.array([-1.0, 1.0, 1.0])
        X /= np.sqrt(qq)[:, None]
        return X


def _beta(psi, cosh_h):
    return np.arccos(np.clip(cosh_h * np.sin(psi), -1.0, 1.0))


def _fan_triangles(P):
    return [(0, i, i + 1) for i in range(1, P.n - 1)]


def _triangle_arcs(P, tri):
    """(anchor, dir1, dir2, inward far pole) wedges covering one fan triangle."""
    idx = list(tri)
    verts = [np.asarray(P.vertices[i], dtype=float) for i in idx]
    ideal = [P.ideal[i] for i in idx]
    finite = [k for k in range(3) if not ideal[k]]
    if finite:
        k = finite[0]
        A = verts[k]
        u, w = verts[(k + 1) % 3], verts[(k + 2) % 3]
        e = geodesic_through(u, w).e
        if float(mink(A, e)) < 0:
            e = -e
        return [(A, tangent_toward(A, u), tangent_toward(A, w), e)]
    interior = verts[0] + verts[1] + verts[2]
    interior /= math.sqrt(-float(mink(interior, interior)))
    poles = []
    for k in range(3):
        e = geodesic_through(verts[k], verts[(k + 1) % 3]).e
        if float(mink(interior, e)) < 0:
            e = -e
        poles.append(e)
    A = _equidistant_point(poles)
    arcs = []
    for k in range(3):
        d1 = tangent_toward(A, verts[k])
        d2 = tangent_toward(A, verts[(k + 1) % 3])
        arcs.append((A, d1, d2, poles[k]))
    return arcs


def _equidistant_point(poles):
    """Interior point equidistant from three inward-oriented geodesics."""
    M = np.array([J @ e for e in poles])
    x = np.linalg.solve(M, np.ones(3))
    qq = float(mink(x, x))
    if qq >= 0:
        raise DomainError("no interior equidistant point")
    x /= math.sqrt(-qq)
    return x if x[0] > 0 else -x


def _wedges(P, cfg):
    cache = getattr(P, "_wedge_tables", None)
    if cache is None:
        cache = {}
        P._wedge_tables = cache
    key = (cfg.K, cfg.truncation_radius)
    got = cache.get(key)
    if got is None:
        got = _Wedges(P, cfg)
        cache[key] = got
    return got


def _chunk_rng(seed, j):
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1),
                                                counter=[0, 0, int(j), 0]))


def sample_uniform(P, n, cfg: SamplerConfig, threads=1) -> np.ndarray:
    """n points i.i.d. uniform w.r.t. hyperbolic area in P, as (n, 3) rows."""
    if n < 1:
        raise DomainError("need n >= 1")
    w = _wedges(P, cfg)
    jobs = [(j, min(CHUNK, n - j * CHUNK)) for j in range((n + CHUNK - 1) // CHUNK)]

    def run(job):
        j, m = job
        return w.sample_chunk(_chunk_rng(cfg.seed, j), m)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    return np.concatenate(parts, axis=0)


def boundary_profile(P, n, cfg: SamplerConfig, threads=1) -> np.ndarray:
    """Boundary distances of n uniform samples (one shared-seed stream)."""
    w = _wedges(P, cfg)
    jobs = [(j, min(CHUNK, n - j * CHUNK)) for j in range((n + CHUNK - 1) // CHUNK)]

    def run(job):
        j, m = job
        X = w.sample_chunk(_chunk_rng(cfg.seed, j), m)
        return P.boundary_distances(X)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    return np.concatenate(parts)


# -- measurements -----------------------------------------------------------


def thin_ratio(P, R, n, cfg: SamplerConfig, threads=1) -> ThinRatioEstimate:
    """Monte Carlo estimate of area({d(x, boundary) <= R/2}) / area(P)."""
    return thin_ratio_multi(P, [R], n, cfg, threads=threads)[0]


def thin_ratio_multi(P, R_values, n, cfg: SamplerConfig, threads=1) -> list:
    """Coupled estimates for several R on one sample stream (monotone in R)."""
    for R in R_values:
        if R < 0:
            raise DomainError("R must be >= 0")
    d = boundary_profile(P, n, cfg, threads=threads)
    out = []
    for R in R_values:
        hits = int(np.count_nonzero(d <= R / 2.0)) if R > 0 else 0
        p = hits / n
        out.append(ThinRatioEstimate(p, binomial_stderr(p, n), n, float(R), cfg.seed))
    return out


def collar_inequality_check(P, n, cfg: SamplerConfig, threads=1) -> dict:
    """Check area({d >= 1}) <= cosh(1) * area({d <= 1}) by Monte Carlo.

    Vacuous pass when the polygon has inradius <= 1 (the inner body is
    empty).  The tolerance is three standard errors of the tested linear
    combination.
    """
    if any(P.ideal):
        raise DomainError("collar check needs a compact polygon")
    d = boundary_profile(P, n, cfg, threads=threads)
    u = float(np.count_nonzero(d <= 1.0)) / n
    inner = 1.0 - u
    c1 = math.cosh(1.0)
    sigma = (1.0 + c1) * binomial_stderr(u, n)
    vacuous = P.inradius() <= 1.0
    passes = inner <= c1 * u + 3.0 * sigma
    return {
        "collar_fraction": u,
        "inner_fraction": inner,
        "bound": c1 * u + 3.0 * sigma,
        "stderr": sigma,
        "n_samples": n,
        "seed": cfg.seed,
        "vacuous": vacuous,
        "passes": bool(passes or (vacuous and inner == 0.0)),
    }


def group_thin_cross_check(P, R, n, cfg: SamplerConfig, ball_obj=None,
                           band=1e-6, threads=1) -> dict:
    """Compare the displacement and boundary-distance thin indicators.

    For each sampled x it compares [exists g != 1 in the ball with
    d(x, g x) <= R] against [d(x, boundary) <= R/2], excluding samples in a
    tolerance band around the threshold.  The ball must cover every element
    displacing some point of P by at most R; a sufficient guard is that the
    last BFS layer displaces the incenter by more than R + 2 rho, rho the
    incenter-vertex spread.
    """
    if any(P.ideal):
        raise DomainError("cross-check needs a compact polygon")
    o = P.incenter()
    rho = max(math.acosh(max(1.0, -float(mink(o, v)))) for v in P.vertices)
    guard = R + 2.0 * rho
    if ball_obj is None:
        ball_obj = group_ball(P, o=o, displacement=guard * 1.05)
    outer = ball_obj.meta.get("last_layer_min_displacement", 0.0)
    guard_ok = outer > guard
    if not guard_ok:
        warnings.warn(
            f"group ball may be too small: outer layer displacement {outer:.3f}"
            f" <= guard {guard:.3f}"
        )
    w = _wedges(P, cfg)
    mats = np.array([el.matrix for el in ball_obj.elements[1:]])
    matsT = mats.transpose(0, 2, 1)
    cosR = math.cosh(R)
    jobs = [(j, min(CHUNK, n - j * CHUNK)) for j in range((n + CHUNK - 1) // CHUNK)]
    disagree = 0
    excluded = 0
    compared = 0

    def run(job):
        j, m = job
        X = w.sample_chunk(_chunk_rng(cfg.seed, j), m)
        d = P.boundary_distances(X)
        XJ = X @ J
        moved = np.zeros(m, dtype=bool)
        for lo in range(0, len(matsT), 64):
            job_m = matsT[lo : lo + 64]
            Y = np.einsum("mk,gkl->mgl", X, job_m)
            coshd = -np.einsum("mk,mgk->mg", XJ, Y)
            moved |= (coshd <= cosR).any(axis=1)
        keep = np.abs(d - R / 2.0) >= band
        thin = d <= R / 2.0
        return (
            int(np.count_nonzero(moved[keep] != thin[keep])),
            int(np.count_nonzero(~keep)),
            int(np.count_nonzero(keep)),
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    for dg, ex_, cp in results:
        disagree += dg
        excluded += ex_
        compared += cp
    rate = disagree / compared if compared else 0.0
    return {
        "R": R,
        "n_samples": n,
        "seed": cfg.seed,
        "compared": compared,
        "excluded_band": excluded,
        "disagreements": disagree,
        "rate": rate,
        "ball_size": len(ball_obj.elements),
        "guard": guard,
        "outer_layer_displacement": outer,
        "guard_ok": bool(guard_ok),
    }


def thick_fraction_decay(family, R_values, n, cfg: SamplerConfig, threads=1) -> list:
    """Thick fractions 1 - thin_ratio for each polygon and each R (coupled)."""
    rows = []
    for pid, P in family:
        ests = thin_ratio_multi(P, R_values, n, cfg, threads=threads)
        for est in ests:
            rows.append(
                {
                    "polygon_id": pid,
                    "n_vertices": P.n,
                    "R": est.R,
                    "thick_fraction": 1.0 - est.ratio,
                    "stderr": est.stderr,
                    "n_samples": est.n_samples,
                    "seed": est.seed,
                }
            )
    return rows
