"""Hyperbolic plane geometry in the hyperboloid model.

Points live on the upper sheet {q(v,v) = -1, v0 > 0} of the unit hyperboloid
in Minkowski 3-space with bilinear form

    q(u, v) = -u0*v0 + u1*v1 + u2*v2.

Complete geodesics are represented by their unit spacelike poles
(q(e,e) = 1); the geodesic is the intersection of the hyperboloid with the
plane q(x, e) = 0.  Reflections are linear maps, so isometry identities can
be tested exactly.

Everything here is a pure function of immutable inputs; batched variants
accept (..., 3) arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

J = np.diag([-1.0, 1.0, 1.0])
_J_SIGNS = np.array([-1.0, 1.0, 1.0])


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances.

    algebraic   -- exact linear-algebra identities (involutions, norms)
    constructed -- identities that go through a construction (angles, areas)
    finite_diff -- agreement with finite-difference oracles
    """

    algebraic: float = 1e-12
    constructed: float = 1e-9
    finite_diff: float = 1e-6
    isometry_drift: float = 1e-10


TOL = Tolerances()


class GeometryError(ValueError):
    pass


class DomainError(GeometryError):
    """Input outside the mathematical domain of an operation."""


class DegenerateInput(GeometryError):
    """Degenerate configuration (coincident/proportional inputs)."""


def lvec(x0, x1, x2) -> np.ndarray:
    return np.array([float(x0), float(x1), float(x2)])


def mink(u, v):
    """Minkowski product -u0*v0 + u1*v1 + u2*v2 (broadcasts over leading axes)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (u * v * _J_SIGNS).sum(axis=-1)


def _coords(x):
    """Coordinate array of an HPoint/IdealPoint/Geodesic or a raw 3-vector."""
    v = getattr(x, "v", None)
    if v is None:
        v = getattr(x, "e", x)
    return np.asarray(v, dtype=float)


def normalize_point(v) -> np.ndarray:
    """Scale a timelike vector onto the upper hyperboloid sheet."""
    v = np.asarray(v, dtype=float)
    qq = mink(v, v)
    if np.any(qq >= 0):
        raise DomainError("vector is not timelike")
    v = v / np.sqrt(-qq)[..., None] if v.ndim > 1 else v / math.sqrt(-qq)
    return np.where(v[..., :1] > 0, v, -v) if v.ndim > 1 else (v if v[0] > 0 else -v)


class HPoint:
    """A point of the hyperbolic plane: q(v,v) = -1, v0 > 0.

    The membership gate scales with the squared coordinate size: evaluating
    q(v,v) in floating point has a cancellation floor of order |v|^2 eps, so
    far points can only be certified in relative terms.
    """

    __slots__ = ("v",)

    def __init__(self, v, renormalize=True):
        v = _coords(v).copy()
        qq = float(mink(v, v))
        gate = TOL.isometry_drift * (1.0 + v[0] * v[0] * 1e-2)
        if renormalize and abs(qq + 1.0) > TOL.algebraic:
            if qq >= 0:
                raise DomainError(f"not timelike: q(v,v) = {qq}")
            v /= math.sqrt(-qq)
            qq = float(mink(v, v))
        if abs(qq + 1.0) > gate or v[0] <= 0:
            raise DomainError(f"not a hyperboloid point: q={qq}, x0={v[0]}")
        self.v = v

    def __repr__(self):
        return f"HPoint({self.v[0]:.6g}, {self.v[1]:.6g}, {self.v[2]:.6g})"


class IdealPoint:
    """A boundary-at-infinity point: null vector, normalized so x0 = 1."""

    __slots__ = ("v",)

    def __init__(self, v):
        v = _coords(v).copy()
        if v[0] <= 0:
            v = -v
        if v[0] <= 0:
            raise DomainError("null vector on the wrong cone")
        v = v / v[0]
        if abs(float(mink(v, v))) > 1e-9:
            raise DomainError(f"not a null direction: q = {float(mink(v, v))}")
        self.v = v

    def __repr__(self):
        return f"IdealPoint({self.v[1]:.6g}, {self.v[2]:.6g})"


class Geodesic:
    """A complete geodesic, stored as its unit spacelike pole."""

    __slots__ = ("e", "orientation")

    def __init__(self, e, orientation=1):
        e = _coords(e).copy()
        qq = float(mink(e, e))
        if qq <= 0:
            raise DomainError("pole must be spacelike")
        self.e = e / math.sqrt(qq)
        self.orientation = 1 if orientation >= 0 else -1

    def __repr__(self):
        return f"Geodesic(pole={self.e})"


class Isometry:
    """A Lorentz matrix preserving the upper sheet (m^T J m = J)."""

    __slots__ = ("m",)

    def __init__(self, m, check=True):
        m = np.asarray(m, dtype=float).copy()
        if check:
            gate = TOL.isometry_drift * (1.0 + m[0, 0] * m[0, 0] * 1e-2)
            drift = np.max(np.abs(m.T @ J @ m - J))
            if drift > gate:
                m = lorentz_gram_schmidt(m)
                drift = np.max(np.abs(m.T @ J @ m - J))
            if drift > gate:
                raise DomainError(f"not a Lorentz matrix (drift {drift:.3e})")
            if m[0, 0] <= 0:
                raise DomainError("does not preserve the upper sheet")
        self.m = m

    def __matmul__(self, other):
        if isinstance(other, Isometry):
            return Isometry(self.m @ other.m)
        return self.m @ np.asarray(other, dtype=float)

    def __repr__(self):
        return f"Isometry({self.m.tolist()})"


def lorentz_gram_schmidt(m) -> np.ndarray:
    """Re-orthonormalize a near-Lorentz matrix column by column."""
    m = np.asarray(m, dtype=float).copy()
    c0 = m[:, 0]
    c0 = c0 / math.sqrt(-mink(c0, c0))
    c1 = m[:, 1] + mink(m[:, 1], c0) * c0
    c1 = c1 / math.sqrt(mink(c1, c1))
    c2 = m[:, 2] + mink(m[:, 2], c0) * c0 - mink(m[:, 2], c1) * c1
    c2 = c2 / math.sqrt(mink(c2, c2))
    return np.column_stack([c0, c1, c2])


def distance(p, q) -> float:
    """Hyperbolic distance arcosh(-q(p, q)) between two points."""
    c = -mink(_coords(p), _coords(q))
    if np.ndim(c) == 0:
        c = float(c)
        if c < 1.0 - 1e-9:
            raise DomainError(f"invalid point pair: -q(p,q) = {c} < 1")
        return math.acosh(max(c, 1.0))
    bad = c < 1.0 - 1e-9
    if np.any(bad):
        raise DomainError("invalid point pair in batch")
    return np.arccosh(np.maximum(c, 1.0))


def reflection_matrix(g) -> np.ndarray:
    """Matrix of the reflection x |-> x - 2 q(x,e) e in the geodesic with pole e."""
    e = _coords(g)
    return np.eye(3) - 2.0 * np.outer(e, J @ e)


def reflect(g, x):
    """Reflect a vector in a geodesic; involution fixing the geodesic pointwise."""
    e = _coords(g)
    x = _coords(x)
    return x - 2.0 * mink(x, e)[..., None] * e if x.ndim > 1 else x - 2.0 * float(mink(x, e)) * e


def geodesic_through(p, q) -> Geodesic:
    """The complete geodesic through two (finite or ideal) points.

    The pole is J (p x q) normalized; with p, q in counterclockwise order the
    interior of a convex region to the left has positive q(x, pole).
    """
    u, v = _coords(p), _coords(q)
    w = J @ np.cross(u, v)
    qq = float(mink(w, w))
    if qq <= 1e-24:
        raise DegenerateInput("points are proportional; geodesic undefined")
    return Geodesic(w / math.sqrt(qq))


def dist_point_geodesic(x, g) -> float:
    """Distance arsinh(|q(x, e)|) from a point to a complete geodesic."""
    return float(np.arcsinh(abs(float(mink(_coords(x), _coords(g))))))


def foot_on_geodesic(x, g) -> np.ndarray:
    """Perpendicular foot of x on the geodesic with pole e."""
    xv = _coords(x)
    e = _coords(g)
    y = xv - float(mink(xv, e)) * e
    return y / math.sqrt(-float(mink(y, y)))


def tangent_toward(a, b) -> np.ndarray:
    """Unit tangent at the finite point a pointing toward b (finite or ideal)."""
    av, bv = _coords(a), _coords(b)
    t = bv + float(mink(av, bv)) * av
    qq = float(mink(t, t))
    if qq <= 1e-28:
        raise DegenerateInput("coincident points; tangent undefined")
    return t / math.sqrt(qq)


def exp_map(x, v) -> np.ndarray:
    """Geodesic exponential: cosh(|v|) x + sinh(|v|) v/|v| for tangent v at x."""
    xv = _coords(x)
    v = np.asarray(v, dtype=float)
    if abs(float(mink(xv, v))) > 1e-9 * max(1.0, float(np.abs(v).max())):
        raise DomainError("v is not tangent at x (q(x,v) != 0)")
    n = float(mink(v, v))
    if n <= 0.0:
        if abs(n) < 1e-28:
            return xv.copy()
        raise DomainError("tangent vector must be spacelike")
    n = math.sqrt(n)
    return math.cosh(n) * xv + math.sinh(n) * (v / n)


def dist_point_segment(x, a, b) -> float:
    """Distance from x to the geodesic segment [a, b].

    Equals the distance to the full geodesic when the perpendicular foot lies
    between a and b, otherwise the distance to the nearer finite endpoint.  An
    ideal endpoint never clamps (the foot is always on its finite side).
    """
    av, bv = _coords(a), _coords(b)
    if np.allclose(av, bv, atol=1e-15):
        raise DegenerateInput("segment endpoints coincide")
    xv = _coords(x)
    g = geodesic_through(av, bv)
    a_ideal = abs(float(mink(av, av))) < 1e-9
    b_ideal = abs(float(mink(bv, bv))) < 1e-9
    if not a_ideal and float(mink(xv, tangent_toward(av, bv))) < 0.0:
        return distance(xv, av)
    if not b_ideal and float(mink(xv, tangent_toward(bv, av))) < 0.0:
        return distance(xv, bv)
    return dist_point_geodesic(xv, g)


def side_from_angles(alpha, beta, gamma) -> float:
    """Side opposite gamma in the triangle with angles (alpha, beta, gamma).

    Dual cosine rule: cosh c = (cos(alpha) cos(beta) + cos(gamma)) /
    (sin(alpha) sin(beta)); requires alpha + beta + gamma < pi.
    """
    if min(alpha, beta, gamma) <= 0:
        raise DomainError("angles must be positive")
    if alpha + beta + gamma >= math.pi:
        raise DomainError(f"angle sum {alpha+beta+gamma} >= pi; not hyperbolic")
    c = (math.cos(alpha) * math.cos(beta) + math.cos(gamma)) / (
        math.sin(alpha) * math.sin(beta)
    )
    return math.acosh(max(c, 1.0))


def angle_from_sides(a, b, c) -> float:
    """Angle opposite side c from the cosine rule,
    cos C = (cosh a cosh b - cosh c) / (sinh a sinh b)."""
    x = (math.cosh(a) * math.cosh(b) - math.cosh(c)) / (math.sinh(a) * math.sinh(b))
    return math.acos(min(1.0, max(-1.0, x)))


def triangle_angles(a, b, c):
    """Angles (A, B, C) opposite the sides (a, b, c)."""
    return (
        angle_from_sides(b, c, a),
        angle_from_sides(c, a, b),
        angle_from_sides(a, b, c),
    )


def _check_triangle_sides(a, b, c):
    if min(a, b, c) <= 0:
        raise DomainError("side lengths must be positive")
    s = sorted((a, b, c))
    if s[2] > s[0] + s[1]:
        raise DomainError(f"triangle inequality violated: {s[2]} > {s[0]} + {s[1]}")


def heron_area(a, b, c) -> float:
    """Area of the hyperbolic triangle with side lengths a, b, c.

    Uses the half-angle Heron identity

        sin(Area/2) = sqrt(sinh s sinh(s-a) sinh(s-b) sinh(s-c))
                      / (2 cosh(a/2) cosh(b/2) cosh(c/2)),   s = (a+b+c)/2,

    whose principal arcsin branch is valid for every hyperbolic triangle
    (Area < pi).  Near the degenerate huge-triangle end the arcsin argument
    approaches 1 and conditioning blows up, so we fall back to angles plus
    the angle-defect formula there.
    """
    _check_triangle_sides(a, b, c)
    s = 0.5 * (a + b + c)
    prod = math.sinh(s) * math.sinh(s - a) * math.sinh(s - b) * math.sinh(s - c)
    if prod <= 0.0:
        return 0.0
    rhs = math.sqrt(prod) / (
        2.0 * math.cosh(0.5 * a) * math.cosh(0.5 * b) * math.cosh(0.5 * c)
    )
    if rhs < 0.999999:
        return 2.0 * math.asin(rhs)
    return gauss_bonnet_area(triangle_angles(a, b, c))


def gauss_bonnet_area(angles) -> float:
    """Angle-defect area (n-2) pi - sum(angles) of an n-gon; must be positive."""
    angles = list(angles)
    n = len(angles)
    if n < 3:
        raise DomainError("need at least three angles")
    for t in angles:
        if t < 0 or t >= math.pi:
            raise DomainError(f"angle {t} outside [0, pi)")
    area = (n - 2) * math.pi - sum(angles)
    if area <= 0:
        raise DomainError(f"nonpositive angle defect {area}")
    return area


def equidistant_jacobian(t) -> float:
    """Jacobian cosh(1-t)/cosh(1) of the inward unit-normal flow from the
    distance-1 equidistant curve of a geodesic, at flow time t in [0, 1]."""
    if t < 0.0 or t > 1.0:
        raise DomainError("flow parameter must lie in [0, 1]")
    return math.cosh(1.0 - t) / math.cosh(1.0)
