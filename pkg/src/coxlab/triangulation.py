"""Balanced polygon triangulations, their rooted dual trees, and escape paths.

The triangulation halves boundary arcs recursively: the arc spanned by
vertices i..j gets the triangle (i, mid, j) and recurses into both halves.
The dual tree (one node per triangle, edges across shared diagonals, rooted
at the last triangle built) then has radius at most floor(log2 n) + 1 and
minimum leaf depth at least floor(log2 n) - 1; for 2^k-gons both equal k-1.

Escape paths walk from a point to the polygon boundary through sides whose
dual edges point away from the root, dropping perpendicular feet.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .lorentz import (
    DomainError,
    J,
    geodesic_through,
    mink,
    tangent_toward,
)


@dataclass
class Triangulation:
    n: int
    triangles: list  # (i, j, k) vertex index triples, creation order
    diagonals: list  # (i, j) chords that are not polygon edges


@dataclass
class DualTree:
    n: int
    root: int
    parent: list  # parent triangle index or None
    children: list  # list of child lists
    adjacency: list  # neighbor lists (tree edges)
    depth: list  # root distance per triangle

    def leaves(self):
        """Triangles with no children; for a one-triangle tree, the root."""
        if len(self.children) == 1:
            return [self.root]
        return [t for t, ch in enumerate(self.children) if not ch]


def triangulate_indices(n):
    """Index triples of the balanced triangulation of an n-gon (root last)."""
    if n < 3:
        raise DomainError("need n >= 3")
    tris = []
    stack = [(0, n - 1, False)]
    while stack:
        i, j, emit = stack.pop()
        if emit:
            tris.append((i, (i + j) // 2, j))
            continue
        if j - i == 1:
            continue
        k = (i + j) // 2
        stack.append((i, j, True))
        stack.append((k, j, False))
        stack.append((i, k, False))
    return tris


def _build_dual(n, tris):
    owner = {}
    for t, (i, k, j) in enumerate(tris):
        for a, b in ((i, k), (k, j), (i, j)):
            owner.setdefault((a, b), []).append(t)
    adjacency = [[] for _ in tris]
    diagonals = []
    for (a, b), ts in owner.items():
        if b - a == 1 or (a == 0 and b == n - 1):
            continue
        diagonals.append((a, b))
        if len(ts) == 2:
            adjacency[ts[0]].append(ts[1])
            adjacency[ts[1]].append(ts[0])
    root = len(tris) - 1
    parent = [None] * len(tris)
    depth = [-1] * len(tris)
    depth[root] = 0
    order = [root]
    for u in order:
        for v in adjacency[u]:
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                parent[v] = u
                order.append(v)
    children = [[] for _ in tris]
    for v, p in enumerate(parent):
        if p is not None:
            children[p].append(v)
    return diagonals, DualTree(n, root, parent, children, adjacency, depth)


def balanced_triangulate(P_or_n):
    """Balanced triangulation of a polygon (or of an abstract n-gon).

    Returns (Triangulation, DualTree); the root of the dual tree is the last
    triangle created.
    """
    n = P_or_n if isinstance(P_or_n, int) else P_or_n.n
    tris = triangulate_indices(n)
    diagonals, tree = _build_dual(n, tris)
    return Triangulation(n, tris, diagonals), tree


def radius_from_root(tree: DualTree) -> int:
    """Maximum root distance over leaves."""
    return max(tree.depth[t] for t in tree.leaves())


def min_leaf_depth(tree: DualTree) -> int:
    """Minimum root distance over leaves."""
    return min(tree.depth[t] for t in tree.leaves())


def depth_to_leaf(tree: DualTree) -> list:
    """Per-triangle height of its own subtree (max descent length to a leaf)."""
    h = [0] * len(tree.children)
    for t in sorted(range(len(tree.children)), key=lambda u: -tree.depth[u]):
        if tree.children[t]:
            h[t] = 1 + max(h[c] for c in tree.children[t])
    return h


def leaves_within(tree: DualTree, S: int):
    """Triangles at tree distance <= S from some leaf."""
    if S < 0:
        raise DomainError("S must be >= 0")
    dist = [math.inf] * len(tree.children)
    frontier = list(tree.leaves())
    for t in frontier:
        dist[t] = 0
    for u in frontier:
        for v in tree.adjacency[u]:
            if dist[v] > dist[u] + 1:
                dist[v] = dist[u] + 1
                frontier.append(v)
    return {t for t, d in enumerate(dist) if d <= S}


@dataclass
class EscapePath:
    points: list = field(default_factory=list)  # x, feet..., boundary point
    lengths: list = field(default_factory=list)
    triangles: list = field(default_factory=list)

    @property
    def total_length(self):
        return float(sum(self.lengths))

    @property
    def steps(self):
        return len(self.lengths)


class EscapeContext:
    """Precomputed side geometry of a triangulated polygon.

    Per triangle: the three sides as (a, b, child-or-None) plus arrays of the
    side poles and of the clamp tangents at finite side endpoints.
    """

    def __init__(self, P, tri: Triangulation, tree: DualTree):
        self.P = P
        self.tri = tri
        self.tree = tree
        self.heights = depth_to_leaf(tree)
        side_lists = []
        poles = np.zeros((len(tri.triangles), 3, 3))
        chord_owner = {}
        for t, (i, k, j) in enumerate(tri.triangles):
            for a, b in ((i, k), (k, j), (i, j)):
                chord_owner.setdefault((a, b), []).append(t)
        for t, (i, k, j) in enumerate(tri.triangles):
            ref = np.asarray(P.vertices[i]) + np.asarray(P.vertices[k]) + np.asarray(
                P.vertices[j]
            )
            ref = ref / math.sqrt(-float(mink(ref, ref)))
            sides = []
            for s, (a, b) in enumerate(((i, k), (k, j), (i, j))):
                e = geodesic_through(P.vertices[a], P.vertices[b]).e
                if float(mink(ref, e)) < 0:
                    e = -e  # orient inward for this triangle
                poles[t, s] = e
                if (b - a) % tri.n == 1 or (a - b) % tri.n == 1:
                    child = None  # polygon boundary edge
                else:
                    other = [u for u in chord_owner[(a, b)] if u != t][0]
                    child = other if other in tree.children[t] else -1
                sides.append((a, b, child))
            side_lists.append(sides)
        self.sides = side_lists
        self.poles = poles
        self._tangents = {}

    def clamp_tangents(self, a, b):
        key = (a, b)
        if key not in self._tangents:
            P = self.P
            ta = None if P.ideal[a] else tangent_toward(P.vertices[a], P.vertices[b])
            tb = None if P.ideal[b] else tangent_toward(P.vertices[b], P.vertices[a])
            self._tangents[key] = (ta, tb)
        return self._tangents[key]

    def segment_distance_and_foot(self, x, a, b, pole):
        ta, tb = self.clamp_tangents(a, b)
        P = self.P
        if ta is not None and float(mink(x, ta)) < 0:
            v = P.vertices[a]
            return math.acosh(max(1.0, -float(mink(x, v)))), np.asarray(v, float)
        if tb is not None and float(mink(x, tb)) < 0:
            v = P.vertices[b]
            return math.acosh(max(1.0, -float(mink(x, v)))), np.asarray(v, float)
        qe = float(mink(x, pole))
        foot = x - qe * pole
        foot = foot / math.sqrt(-float(mink(foot, foot)))
        return math.asinh(abs(qe)), foot


def locate_many(ctx: EscapeContext, X) -> np.ndarray:
    """Triangle index containing each row of X (argmax of min side value)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    vals = np.einsum("mk,tsk->mts", X @ J, ctx.poles)
    return np.argmax(vals.min(axis=2), axis=1)


def escape_path(x, P, tri=None, tree=None, t0=None, ctx=None) -> EscapePath:
    """Perpendicular-foot path from x to the polygon boundary.

    From the current triangle, consider the sides that are polygon edges or
    whose dual edge points away from the root (children); move to the
    perpendicular foot on the closest such side (ties broken toward the
    boundary side, then the smaller index), and stop once a polygon edge is
    hit.
    """
    if ctx is None:
        if tri is None or tree is None:
            tri, tree = balanced_triangulate(P)
        ctx = EscapeContext(P, tri, tree)
    xv = np.asarray(getattr(x, "v", x), dtype=float).copy()
    t = int(locate_many(ctx, xv[None, :])[0]) if t0 is None else t0
    path = EscapePath(points=[xv.copy()])
    while True:
        path.triangles.append(t)
        best = None
        for s, (a, b, child) in enumerate(ctx.sides[t]):
            if child == -1:
                continue  # side toward the root
            d, foot = ctx.segment_distance_and_foot(xv, a, b, ctx.poles[t, s])
            rank = (0, min(a, b)) if child is None else (1, child)
            if best is None or (d, rank) < (best[0], best[1]):
                best = (d, rank, foot, child)
        d, _, foot, child = best
        path.points.append(foot)
        path.lengths.append(d)
        xv = foot
        if child is None:
            return path
        t = child


# -- exports ---------------------------------------------------------------


def tree_to_dot(tri: Triangulation, tree: DualTree) -> str:
    lines = ["graph dualtree {", "  node [shape=circle];"]
    for t, (i, k, j) in enumerate(tri.triangles):
        style = " style=filled fillcolor=lightblue" if t == tree.root else ""
        lines.append(f'  t{t} [label="({i},{k},{j})"{style}];')
    for u in range(len(tri.triangles)):
        for v in tree.adjacency[u]:
            if u < v:
                lines.append(f"  t{u} -- t{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def triangulation_to_json(tri: Triangulation, tree: DualTree) -> dict:
    return {
        "n": tri.n,
        "triangles": [list(t) for t in tri.triangles],
        "diagonals": [list(d) for d in tri.diagonals],
        "root": tree.root,
        "parent": [(-1 if p is None else p) for p in tree.parent],
        "radius": radius_from_root(tree),
        "min_leaf_depth": min_leaf_depth(tree),
    }


def tree_stats_rows(n_values):
    """(n, radius, min_leaf_depth) rows for a family of n-gons."""
    rows = []
    for n in n_values:
        _, tree = balanced_triangulate(int(n))
        rows.append(
            {
                "n": int(n),
                "radius": radius_from_root(tree),
                "min_leaf_depth": min_leaf_depth(tree),
            }
        )
    return rows


def save_json(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")
