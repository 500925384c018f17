"""Finite-volume polygons in the hyperbolic plane.

A polygon is a cyclic, counterclockwise (in the Klein projection) list of
vertices, each either on the hyperboloid (finite) or on the light cone
(ideal).  Coxeter polygons additionally carry the integer angle orders m_i
with interior angle pi/m_i at finite vertices and 0 at ideal ones.

Edge poles are oriented inward: x is weakly inside edge i iff
q(x, pole_i) >= -tol.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .lorentz import (
    J,
    TOL,
    DegenerateInput,
    DomainError,
    GeometryError,
    HPoint,
    IdealPoint,
    distance,
    exp_map,
    geodesic_through,
    mink,
    tangent_toward,
)


class OutsidePointError(GeometryError):
    pass


def _is_null(v):
    return abs(float(mink(v, v))) < 1e-9


class GeneralPolygon:
    """Convex hyperbolic polygon with unconstrained interior angles."""

    def __init__(self, vertices, ideal=None, check_convex=True):
        vs = []
        ideal_flags = []
        for k, v in enumerate(vertices):
            if isinstance(v, HPoint):
                vs.append(v.v.copy())
                ideal_flags.append(False)
            elif isinstance(v, IdealPoint):
                vs.append(v.v.copy())
                ideal_flags.append(True)
            else:
                v = np.asarray(v, dtype=float)
                flag = ideal[k] if ideal is not None else _is_null(v)
                vs.append(IdealPoint(v).v if flag else HPoint(v).v)
                ideal_flags.append(flag)
        if len(vs) < 3:
            raise DomainError("polygon needs at least 3 vertices")
        self.vertices = vs
        self.ideal = ideal_flags
        self.n = len(vs)
        if self.signed_klein_area() <= 0:
            raise DomainError("vertices must be in counterclockwise order")
        self._poles = None
        self._edge_cache = None
        self._incenter = None
        if check_convex and not self.is_convex():
            raise DomainError("polygon is not convex")

    # -- basic geometry -------------------------------------------------

    def signed_klein_area(self) -> float:
        k = np.array([v[1:] / v[0] for v in self.vertices])
        x, y = k[:, 0], k[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def edge_poles(self) -> np.ndarray:
        """Inward-oriented unit poles of the edge geodesics, one per edge."""
        if self._poles is None:
            poles = []
            for i in range(self.n):
                a, b = self.vertices[i], self.vertices[(i + 1) % self.n]
                poles.append(geodesic_through(a, b).e)
            self._poles = np.array(poles)
        return self._poles

    def is_convex(self, tol=None) -> bool:
        tol = TOL.constructed if tol is None else tol
        V = np.array(self.vertices)
        side = V @ (J @ self.edge_poles().T)
        return bool(np.min(side) >= -tol)

    def contains(self, x, tol=None) -> bool:
        """True iff x is weakly inside every edge geodesic."""
        tol = TOL.constructed if tol is None else tol
        xv = x.v if isinstance(x, HPoint) else np.asarray(x, dtype=float)
        side = self.edge_poles() @ (J @ xv)
        return bool(np.min(side) >= -tol)

    def interior_angles(self) -> list:
        """Measured interior angles; exactly 0 at ideal vertices."""
        angs = []
        for i in range(self.n):
            if self.ideal[i]:
                angs.append(0.0)
                continue
            v = self.vertices[i]
            t1 = tangent_toward(v, self.vertices[(i - 1) % self.n])
            t2 = tangent_toward(v, self.vertices[(i + 1) % self.n])
            angs.append(math.acos(min(1.0, max(-1.0, float(mink(t1, t2))))))
        return angs

    def area(self) -> float:
        return (self.n - 2) * math.pi - sum(self.interior_angles())

    def edge_lengths(self) -> list:
        """Hyperbolic side lengths in cyclic order; inf next to an ideal vertex."""
        out = []
        for i in range(self.n):
            j = (i + 1) % self.n
            if self.ideal[i] or self.ideal[j]:
                out.append(math.inf)
            else:
                out.append(distance(self.vertices[i], self.vertices[j]))
        return out

    def perimeter(self) -> float:
        return sum(self.edge_lengths())

    # -- distances to the boundary --------------------------------------

    def _edge_frames(self):
        """Per-edge arrays for vectorized segment distances."""
        if self._edge_cache is not None:
            return self._edge_cache
        n = self.n
        poles = self.edge_poles()
        ta = np.zeros((n, 3))
        tb = np.zeros((n, 3))
        va = np.zeros((n, 3))
        vb = np.zeros((n, 3))
        a_fin = np.zeros(n, dtype=bool)
        b_fin = np.zeros(n, dtype=bool)
        for i in range(n):
            j = (i + 1) % n
            a, b = self.vertices[i], self.vertices[j]
            va[i], vb[i] = a, b
            if not self.ideal[i]:
                a_fin[i] = True
                ta[i] = tangent_toward(a, b)
            if not self.ideal[j]:
                b_fin[i] = True
                tb[i] = tangent_toward(b, a)
        cache = {
            "PJ": poles @ J,
            "TAJ": ta @ J,
            "TBJ": tb @ J,
            "VAJ": va @ J,
            "VBJ": vb @ J,
            "a_fin": a_fin,
            "b_fin": b_fin,
        }
        self._edge_cache = cache
        return cache

    def boundary_distances(self, X, block=64) -> np.ndarray:
        """Distance from each row of X (m, 3) to the polygon boundary."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        fr = self._edge_frames()
        best = np.full(X.shape[0], np.inf)
        for lo in range(0, self.n, block):
            hi = min(lo + block, self.n)
            qe = X @ fr["PJ"][lo:hi].T
            d = np.arcsinh(np.abs(qe))
            a_fin = fr["a_fin"][lo:hi]
            b_fin = fr["b_fin"][lo:hi]
            if a_fin.any():
                beyond_a = (X @ fr["TAJ"][lo:hi].T < 0.0) & a_fin
                if beyond_a.any():
                    da = np.arccosh(np.maximum(1.0, -(X @ fr["VAJ"][lo:hi].T)))
                    d = np.where(beyond_a, da, d)
            if b_fin.any():
                beyond_b = (X @ fr["TBJ"][lo:hi].T < 0.0) & b_fin
                if a_fin.any():
                    beyond_b &= ~((X @ fr["TAJ"][lo:hi].T < 0.0) & a_fin)
                if beyond_b.any():
                    db = np.arccosh(np.maximum(1.0, -(X @ fr["VBJ"][lo:hi].T)))
                    d = np.where(beyond_b, db, d)
            best = np.minimum(best, d.min(axis=1))
        return best

    def dist_to_boundary(self, x) -> float:
        """Distance from an interior point to the boundary."""
        xv = x.v if isinstance(x, HPoint) else np.asarray(x, dtype=float)
        if not self.contains(xv):
            raise OutsidePointError("point lies outside the polygon")
        return float(self.boundary_distances(xv[None, :])[0])

    def incenter(self, rounds=14, grid=48) -> np.ndarray:
        """Interior point maximizing the distance to the boundary.

        Coarse Klein-coordinate grid search followed by window refinement;
        deterministic.
        """
        if self._incenter is not None:
            return self._incenter
        k = np.array([v[1:] / v[0] for v in self.vertices])
        lo = k.min(axis=0)
        hi = k.max(axis=0)
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        best = None
        for _ in range(rounds):
            xs = np.linspace(center[0] - half[0], center[0] + half[0], grid)
            ys = np.linspace(center[1] - half[1], center[1] + half[1], grid)
            gx, gy = np.meshgrid(xs, ys)
            pts = np.column_stack([gx.ravel(), gy.ravel()])
            r2 = (pts**2).sum(axis=1)
            pts = pts[r2 < 1.0 - 1e-12]
            r2 = (pts**2).sum(axis=1)
            X = np.column_stack([np.ones(len(pts)), pts]) / np.sqrt(1.0 - r2)[:, None]
            side = X @ (J @ self.edge_poles().T)
            inside = side.min(axis=1) > 0
            if not inside.any():
                half *= 0.5
                continue
            X = X[inside]
            pts = pts[inside]
            d = self.boundary_distances(X)
            i = int(np.argmax(d))
            if best is None or d[i] > best[0]:
                best = (float(d[i]), X[i])
                center = pts[i]
            half *= 0.35
        self._incenter = best[1]
        return self._incenter

    def inradius(self) -> float:
        return float(self.boundary_distances(self.incenter()[None, :])[0])

    # -- serialization ---------------------------------------------------

    def to_schema(self) -> dict:
        return {
            "vertices": [[float(c) for c in v] for v in self.vertices],
            "ideal": list(self.ideal),
            "orders": self._orders_schema(),
        }

    def _orders_schema(self):
        return [None] * self.n

    def save_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_schema(), f, indent=1)
            f.write("\n")


class CoxeterPolygon(GeneralPolygon):
    """Polygon whose interior angles are pi/m_i (0, order "inf", at ideal vertices)."""

    def __init__(self, vertices, orders, ideal=None, check_convex=True):
        super().__init__(vertices, ideal=ideal, check_convex=check_convex)
        if len(orders) != self.n:
            raise DomainError("need one angle order per vertex")
        norm = []
        for k, m in enumerate(orders):
            if self.ideal[k]:
                norm.append(math.inf)
            else:
                m = int(m)
                if m < 2:
                    raise DomainError(f"angle order {m} < 2")
                norm.append(m)
        self.orders = norm

    def _orders_schema(self):
        return ["inf" if math.isinf(m) else int(m) for m in self.orders]

    def target_angles(self) -> list:
        return [0.0 if math.isinf(m) else math.pi / m for m in self.orders]


def validate_coxeter(P, tol=None) -> dict:
    """Report how close each measured angle is to some pi/m, m >= 2.

    Passes iff every deviation is below tol (default 1e-9) and the polygon is
    convex.  Works for GeneralPolygon too (reporting the nearest order).
    """
    tol = TOL.constructed if tol is None else tol
    rows = []
    ok = True
    for i, ang in enumerate(P.interior_angles()):
        if P.ideal[i]:
            rows.append({"vertex": i, "angle": 0.0, "order": "inf", "deviation": 0.0})
            continue
        m = max(2, round(math.pi / ang)) if ang > 0 else 2
        cand = sorted({max(2, m - 1), m, m + 1}, key=lambda k: abs(ang - math.pi / k))
        m = cand[0]
        dev = abs(ang - math.pi / m)
        rows.append({"vertex": i, "angle": ang, "order": m, "deviation": dev})
        if dev > tol:
            ok = False
    convex = P.is_convex()
    return {"angles": rows, "convex": convex, "passes": ok and convex}


# -- constructors --------------------------------------------------------


def triangle_polygon(p, q, r) -> CoxeterPolygon:
    """Hyperbolic triangle with angles pi/p, pi/q, pi/r in canonical placement
    (first vertex at the origin, first edge along the x-axis)."""
    for m in (p, q, r):
        if int(m) < 2:
            raise DomainError("angle orders must be >= 2")
    if 1.0 / p + 1.0 / q + 1.0 / r >= 1.0:
        raise DomainError(f"({p},{q},{r}) is not hyperbolic: 1/p+1/q+1/r >= 1")
    A, B, C = math.pi / p, math.pi / q, math.pi / r
    from .lorentz import side_from_angles

    c = side_from_angles(A, B, C)  # side AB, opposite C
    b = side_from_angles(C, A, B)  # side AC, opposite B
    vA = np.array([1.0, 0.0, 0.0])
    vB = np.array([math.cosh(c), math.sinh(c), 0.0])
    dirC = np.array([0.0, math.cos(A), math.sin(A)])
    vC = exp_map(vA, b * dirC)
    return CoxeterPolygon([vA, vB, vC], [p, q, r])


def regular_coxeter_polygon(n, m) -> CoxeterPolygon:
    """Regular n-gon with all interior angles pi/m, centered at the origin.

    Circumradius rho satisfies cosh(rho) = cot(pi/n) cot(pi/(2m)); the side
    s satisfies cosh(s/2) = cos(pi/n)/sin(pi/(2m)).
    """
    n, m = int(n), int(m)
    if n < 3 or m < 2:
        raise DomainError("need n >= 3 and m >= 2")
    if (n - 2) * math.pi <= n * math.pi / m:
        raise DomainError(f"regular ({n},{m}) polygon is not hyperbolic")
    rho = math.acosh(1.0 / (math.tan(math.pi / n) * math.tan(math.pi / (2 * m))))
    ts = 2 * math.pi * np.arange(n) / n
    verts = [
        np.array([math.cosh(rho), math.sinh(rho) * math.cos(t), math.sinh(rho) * math.sin(t)])
        for t in ts
    ]
    return CoxeterPolygon(verts, [m] * n)


def ideal_regular_polygon(n) -> CoxeterPolygon:
    """Regular ideal n-gon: all vertices on the circle at infinity."""
    n = int(n)
    if n < 3:
        raise DomainError("need n >= 3")
    ts = 2 * math.pi * np.arange(n) / n
    verts = [np.array([1.0, math.cos(t), math.sin(t)]) for t in ts]
    return CoxeterPolygon(verts, [math.inf] * n, ideal=[True] * n)


def right_angled_hexagon(s1, s3, s5) -> CoxeterPolygon:
    """Right-angled hexagon with alternating sides (s1, s3, s5) prescribed.

    The even sides follow from the right-angled hexagon cosine rule
    cosh(s_opposite) = sinh(a) sinh(b) cosh(between) - cosh(a) cosh(b).
    Vertices are built from short exponential-map chains off the first side
    to keep float error below the Coxeter validation tolerance; very
    elongated hexagons (diameter >> 7) lose that guarantee.
    """
    if min(s1, s3, s5) <= 0:
        raise DomainError("sides must be positive")
    c2 = (math.cosh(s5) + math.cosh(s1) * math.cosh(s3)) / (math.sinh(s1) * math.sinh(s3))
    c4 = (math.cosh(s1) + math.cosh(s3) * math.cosh(s5)) / (math.sinh(s3) * math.sinh(s5))
    c6 = (math.cosh(s3) + math.cosh(s5) * math.cosh(s1)) / (math.sinh(s5) * math.sinh(s1))
    s2, s4, s6 = math.acosh(c2), math.acosh(c4), math.acosh(c6)
    up = np.array([0.0, 0.0, 1.0])
    v1 = np.array([1.0, 0.0, 0.0])
    v2 = np.array([math.cosh(s1), math.sinh(s1), 0.0])
    v3 = math.cosh(s2) * v2 + math.sinh(s2) * up
    d23 = math.sinh(s2) * v2 + math.cosh(s2) * up
    n3 = J @ np.cross(v3, d23)
    n3 /= math.sqrt(float(mink(n3, n3)))
    v6 = math.cosh(s6) * v1 + math.sinh(s6) * up
    d16 = math.sinh(s6) * v1 + math.cosh(s6) * up
    n6 = J @ np.cross(v6, d16)
    n6 /= math.sqrt(float(mink(n6, n6)))
    best = None
    for sgn3 in (1.0, -1.0):
        v4 = math.cosh(s3) * v3 + sgn3 * math.sinh(s3) * n3
        for sgn6 in (1.0, -1.0):
            v5 = math.cosh(s5) * v6 + sgn6 * math.sinh(s5) * n6
            err = abs(distance(v4, v5) - s4)
            if best is None or err < best[0]:
                best = (err, v4, v5)
    err, v4, v5 = best
    if err > 1e-6:
        raise DomainError(f"hexagon construction failed to close (residual {err:.2e})")
    return CoxeterPolygon([v1, v2, v3, v4, v5, v6], [2] * 6)


# -- JSON schema ----------------------------------------------------------


def load_polygon(path_or_dict):
    """Load a polygon from the JSON schema
    {"vertices": [[x0,x1,x2],...], "ideal": [...], "orders": [...]}.

    Returns a CoxeterPolygon when integer/"inf" orders are present, otherwise
    a GeneralPolygon.  Input is validated, not repaired.
    """
    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict) as f:
            data = json.load(f)
    try:
        verts = [np.asarray(v, dtype=float) for v in data["vertices"]]
        ideal = [bool(b) for b in data["ideal"]]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"bad polygon schema: {exc}") from exc
    orders = data.get("orders")
    if orders is None or all(o is None for o in orders):
        return GeneralPolygon(verts, ideal=ideal)
    parsed = []
    for o in orders:
        if o in ("inf", None) or (isinstance(o, float) and math.isinf(o)):
            parsed.append(math.inf)
        else:
            parsed.append(int(o))
    return CoxeterPolygon(verts, parsed, ideal=ideal)
