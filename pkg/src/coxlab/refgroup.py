"""Reflection groups of Coxeter polygons: generators, word balls, supports.

Group elements are stored as Lorentz matrices together with one shortest
word in the side reflections; breadth-first search realizes word length
layer by layer, and a parent DAG keeps every predecessor at length-1 so all
shortest expressions can be enumerated.

Deduplication is numeric: matrices within 1e-8 (max entry difference) are
merged.  Matrices are hashed on a rounded grid with boundary probing, and
every ball build records the minimum pairwise distance between kept
elements as a collision audit.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .lorentz import (
    DomainError,
    GeometryError,
    J,
    geodesic_through,
    lorentz_gram_schmidt,
    mink,
    reflection_matrix,
)

MERGE_TOL = 1e-8
_GRID = 1e-6
_PROBE = 1e-10


class SizeLimitError(GeometryError):
    pass


class NotInBallError(GeometryError):
    pass


class CounterexampleError(GeometryError):
    """A numerically checked inequality failed; signals a bug, not bad input."""


def side_reflections(P) -> list:
    """Reflection matrices in the polygon's edge geodesics, in cyclic order."""
    mats = []
    for i in range(P.n):
        g = geodesic_through(P.vertices[i], P.vertices[(i + 1) % P.n])
        mats.append(reflection_matrix(g))
    return mats


@dataclass
class GroupElement:
    index: int
    matrix: np.ndarray
    word: tuple
    length: int


@dataclass
class GroupBall:
    """Elements of word length <= L, with the minimal-word parent DAG."""

    generators: list
    elements: list
    parents: list  # per element: [(parent_index, generator)] at length-1
    length: int
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.elements)

    def sphere(self, length):
        return [e for e in self.elements if e.length == length]

    def matrices(self) -> np.ndarray:
        return np.array([e.matrix for e in self.elements])


def _keys_for(m):
    """Grid keys for a matrix, probing entries that sit near a cell boundary."""
    flat = np.asarray(m, dtype=float).ravel() / _GRID
    lo = np.round(flat - _PROBE / _GRID).astype(np.int64)
    hi = np.round(flat + _PROBE / _GRID).astype(np.int64)
    wobble = np.nonzero(lo != hi)[0]
    base = np.round(flat).astype(np.int64)
    if len(wobble) == 0:
        return [tuple(base)]
    if len(wobble) > 6:
        wobble = wobble[:6]
    keys = []
    for bits in itertools.product(*[(lo[i], hi[i]) for i in wobble]):
        k = base.copy()
        k[wobble] = bits
        keys.append(tuple(k))
    return keys


class _Dedup:
    def __init__(self):
        self.table = {}

    def find(self, m, elements):
        for key in _keys_for(m):
            for idx in self.table.get(key, ()):
                if np.max(np.abs(elements[idx].matrix - m)) < MERGE_TOL:
                    return idx
        return None

    def insert(self, m, idx):
        for key in _keys_for(m):
            self.table.setdefault(key, []).append(idx)


def ball(P, L=None, o=None, displacement=None, cap=10**6, audit=True) -> GroupBall:
    """Breadth-first ball of the reflection group of P.

    Either bounded by word length L, or grown until a whole layer displaces
    the basepoint o by more than `displacement` (used as a coverage guard
    for displacement-bounded element sets).
    """
    if L is None and displacement is None:
        raise DomainError("need a word-length bound L or a displacement bound")
    if L is not None and L > 14:
        raise DomainError("word-length bound capped at 14 (ball explosion guard)")
    gens = side_reflections(P)
    ov = None
    if displacement is not None:
        ov = np.asarray(o if o is not None else P.incenter(), dtype=float)
    dedup = _Dedup()
    elements = [GroupElement(0, np.eye(3), (), 0)]
    parents = [[]]
    dedup.insert(np.eye(3), 0)
    frontier = [0]
    layer = 0
    drift_renorms = 0
    while frontier:
        if L is not None and layer >= L:
            break
        if displacement is not None and layer >= 40:
            warnings.warn("displacement-bounded ball hit the layer cap")
            break
        nxt = []
        layer += 1
        for idx in frontier:
            base = elements[idx].matrix
            for s, gmat in enumerate(gens):
                m = base @ gmat
                if np.max(np.abs(m.T @ J @ m - J)) > 1e-10:
                    m = lorentz_gram_schmidt(m)
                    drift_renorms += 1
                found = dedup.find(m, elements)
                if found is not None:
                    el = elements[found]
                    if el.length == layer and (idx, s) not in parents[found]:
                        parents[found].append((idx, s))
                    continue
                if len(elements) >= cap:
                    raise SizeLimitError(f"group ball exceeded cap {cap}")
                new = GroupElement(len(elements), m, elements[idx].word + (s,), layer)
                elements.append(new)
                parents.append([(idx, s)])
                dedup.insert(m, new.index)
                nxt.append(new.index)
        frontier = nxt
        if displacement is not None and frontier:
            disp = _layer_min_displacement(elements, frontier, ov)
            if disp > displacement:
                break
    meta = {"layers": layer, "drift_renorms": drift_renorms}
    if ov is not None:
        meta["basepoint"] = ov
        if frontier:
            meta["last_layer_min_displacement"] = _layer_min_displacement(
                elements, frontier, ov
            )
    if audit and len(elements) > 1:
        meta["min_pairwise_distance"] = _min_pairwise_distance(elements)
    return GroupBall(gens, elements, parents, layer, meta)


def _layer_min_displacement(elements, indices, o):
    return min(
        math.acosh(max(1.0, -float(mink(o, elements[i].matrix @ o)))) for i in indices
    )


def _min_pairwise_distance(elements, chunk=64):
    mats = np.array([e.matrix.ravel() for e in elements])
    best = np.inf
    for lo in range(0, len(mats) - 1, chunk):
        block = mats[lo : lo + chunk]
        diff = np.abs(block[:, None, :] - mats[None, lo:, :]).max(axis=2)
        k = block.shape[0]
        for r in range(k):
            row = diff[r, r + 1 :]
            if row.size:
                best = min(best, float(row.min()))
    return best


def displacement(g, x) -> float:
    """d(x, g x) for a group element (matrix or GroupElement)."""
    m = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    xv = np.asarray(getattr(x, "v", x), dtype=float)
    return math.acosh(max(1.0, -float(mink(xv, m @ xv))))


def displacements_at(ball_obj: GroupBall, X) -> np.ndarray:
    """Matrix of d(x_i, g_j x_i) over sample points and ball elements."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty((X.shape[0], len(ball_obj.elements)))
    XJ = X @ J
    for j, el in enumerate(ball_obj.elements):
        coshd = -np.einsum("mk,mk->m", XJ, X @ el.matrix.T)
        out[:, j] = np.arccosh(np.maximum(1.0, coshd))
    return out


def minimal_support(g, ball_obj: GroupBall) -> set:
    """Generators occurring in some shortest word for g (via the parent DAG)."""
    idx = g.index if isinstance(g, GroupElement) else int(g)
    if idx < 0 or idx >= len(ball_obj.elements):
        raise NotInBallError(f"element {idx} not in ball")
    memo = {}

    def letters(i):
        if i == 0:
            return frozenset()
        if i in memo:
            return memo[i]
        acc = set()
        for p, s in ball_obj.parents[i]:
            acc.add(s)
            acc |= letters(p)
        memo[i] = frozenset(acc)
        return memo[i]

    return set(letters(idx))


def one_minimal_word(g, ball_obj: GroupBall) -> tuple:
    """Lexicographically smallest shortest word for g from the parent DAG."""
    idx = g.index if isinstance(g, GroupElement) else int(g)
    word = []
    while idx != 0:
        p, s = min(ball_obj.parents[idx], key=lambda ps: (ps[1], ps[0]))
        word.append(s)
        idx = p
    return tuple(reversed(word))


def all_supports(ball_obj: GroupBall) -> list:
    """Shortest-word letter supports for every ball element, bottom-up.

    Parents always carry smaller indices (BFS layers), so one index-order
    pass suffices.
    """
    sup = [frozenset()] * len(ball_obj.elements)
    for i in range(1, len(ball_obj.elements)):
        acc = set()
        for p, s in ball_obj.parents[i]:
            acc.add(s)
            acc |= sup[p]
        sup[i] = frozenset(acc)
    return sup


def check_gens_minlength(P, o=None, L=6, ball_obj=None) -> dict:
    """Verify d(o, w o) >= d(o, s o) - 1e-9 for every ball element w and every
    generator s in the support of w's shortest words."""
    if ball_obj is None:
        ball_obj = ball(P, L=L)
    ov = np.asarray(o if o is not None else P.incenter(), dtype=float)
    gen_disp = [displacement(m, ov) for m in ball_obj.generators]
    supports = all_supports(ball_obj)
    violations = []
    slack = math.inf
    for el in ball_obj.elements[1:]:
        dw = displacement(el, ov)
        for s in supports[el.index]:
            gap = dw - gen_disp[s]
            slack = min(slack, gap)
            if gap < -1e-9:
                violations.append(
                    {"word": el.word, "generator": s, "d_w": dw, "d_s": gen_disp[s]}
                )
    return {
        "checked": len(ball_obj.elements) - 1,
        "violations": violations,
        "min_slack": slack,
        "passes": not violations,
    }


def bounded_factorization(g, o, R, ball_obj: GroupBall) -> tuple:
    """A shortest word for g whose every letter s satisfies d(o, s o) <= R.

    Exists whenever d(o, g o) <= R because every letter of a shortest word
    displaces o by at most d(o, g o); a failure is a counterexample signal.
    """
    ov = np.asarray(getattr(o, "v", o), dtype=float)
    word = one_minimal_word(g, ball_obj)
    for s in word:
        ds = displacement(ball_obj.generators[s], ov)
        if ds > R + 1e-9:
            raise CounterexampleError(
                f"letter {s} displaces basepoint by {ds} > {R}"
            )
    return word


def local_small_displacement(P, x, r, ball_obj: GroupBall) -> list:
    """Non-identity ball elements moving x by at most r."""
    xv = np.asarray(getattr(x, "v", x), dtype=float)
    guard = ball_obj.meta.get("last_layer_min_displacement")
    if guard is not None and guard <= r + 2 * _basepoint_spread(P, ball_obj, xv):
        warnings.warn(
            f"ball may be too small: outer-layer displacement {guard:.3f} vs r={r}"
        )
    out = []
    for el in ball_obj.elements[1:]:
        if displacement(el, xv) <= r:
            out.append(el)
    return out


def _basepoint_spread(P, ball_obj, xv):
    o = ball_obj.meta.get("basepoint")
    if o is None:
        return 0.0
    return math.acosh(max(1.0, -float(mink(np.asarray(o), xv))))


def orbit_packing_check(P, o=None, R=2.0, ball_obj=None, slack=2.0) -> dict:
    """Upper-bound sanity check: the number of elements with d(o, g o) <= R is
    at most (1+slack) * area(disk(R + diam)) / area(P), diam measured from o
    to the polygon's vertices (compact polygons only)."""
    if any(P.ideal):
        raise DomainError("packing check needs a compact polygon")
    if ball_obj is None:
        ball_obj = ball(P, L=8)
    ov = np.asarray(o if o is not None else P.incenter(), dtype=float)
    count = sum(1 for el in ball_obj.elements if displacement(el, ov) <= R)
    diam = max(float(np.arccosh(max(1.0, -mink(ov, v)))) for v in P.vertices)
    disk_area = 2 * math.pi * (math.cosh(R + 2 * diam) - 1.0)
    bound = (1.0 + slack) * disk_area / P.area()
    return {"count": count, "bound": bound, "passes": count <= bound}


# -- exports ---------------------------------------------------------------


def ball_to_json(ball_obj: GroupBall) -> dict:
    return {
        "length": ball_obj.length,
        "size": len(ball_obj.elements),
        "meta": {k: v for k, v in ball_obj.meta.items()},
        "elements": [
            {"word": list(e.word), "matrix": [[float(x) for x in row] for row in e.matrix]}
            for e in ball_obj.elements
        ],
    }


def ball_growth_rows(P, L_max, audit=True):
    """(L, ball size, min pairwise matrix distance) rows for L = 0..L_max."""
    b = ball(P, L=L_max, audit=audit)
    rows = []
    for L in range(L_max + 1):
        size = sum(1 for e in b.elements if e.length <= L)
        rows.append(
            {
                "L": L,
                "ball_size": size,
                "min_pairwise_distance": b.meta.get("min_pairwise_distance", math.nan),
            }
        )
    return rows
