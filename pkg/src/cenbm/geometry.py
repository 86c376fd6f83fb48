"""Planar convex geometry on counterclockwise polygons.

Points are plain ``numpy`` arrays of shape ``(2,)``; polygons and affine maps
are small immutable wrappers around arrays. Every tolerance taken by the
functions in this module is absolute; callers working in relative terms
multiply by :attr:`ConvexPolygon.diameter` first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateInputError

__all__ = [
    "AffineMap",
    "ConvexPolygon",
    "Segment",
    "apply",
    "area",
    "boundary_distance",
    "centroid",
    "chord_at",
    "clip_halfplane",
    "compose",
    "contains_point",
    "contains_polygon",
    "invert",
    "radial_distance",
    "random_convex_polygon",
    "rotation",
    "scale_about",
    "translation",
]


def as_point(pt) -> np.ndarray:
    p = np.asarray(pt, dtype=float).reshape(2)
    if not np.all(np.isfinite(p)):
        raise DegenerateInputError(f"non-finite point {p!r}")
    return p


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


class ConvexPolygon:
    """A strictly convex polygon stored counterclockwise.

    The constructor accepts either orientation, drops repeated vertices and
    collinear middle vertices, and raises :class:`DegenerateInputError` if what
    remains is not a convex polygon with at least three vertices.
    """

    __slots__ = ("_v", "__dict__")

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise DegenerateInputError("vertices must be an (n, 2) array")
        if not np.all(np.isfinite(v)):
            raise DegenerateInputError("non-finite vertex coordinates")
        if len(v) >= 2 and np.allclose(v[0], v[-1], rtol=0, atol=0):
            v = v[:-1]
        if len(v) < 3:
            raise DegenerateInputError("a polygon needs at least 3 vertices")
        v = _clean_ring(v)
        self._v = v
        self._v.setflags(write=False)

    @classmethod
    def _trusted(cls, v: np.ndarray) -> "ConvexPolygon":
        obj = cls.__new__(cls)
        obj._v = np.ascontiguousarray(v, dtype=float)
        obj._v.setflags(write=False)
        return obj

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    def __len__(self) -> int:
        return len(self._v)

    def __repr__(self) -> str:
        return f"ConvexPolygon({self._v.tolist()!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ConvexPolygon) and np.array_equal(self._v, other._v)

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def diameter(self) -> float:
        d = self._v[:, None, :] - self._v[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    @cached_property
    def edges(self) -> np.ndarray:
        return np.roll(self._v, -1, axis=0) - self._v

    @cached_property
    def normals(self) -> np.ndarray:
        """Unit outward normals, one per edge ``v[i] -> v[i+1]``."""
        e = self.edges
        n = np.column_stack([e[:, 1], -e[:, 0]])
        return n / np.linalg.norm(n, axis=1)[:, None]

    @cached_property
    def offsets(self) -> np.ndarray:
        """Support values ``<normal_i, v_i>`` so that the body is ``N x <= h``."""
        return np.einsum("ij,ij->i", self.normals, self._v)

    def to_json(self) -> dict:
        return {"vertices": self._v.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "ConvexPolygon":
        return cls(data["vertices"])


def _clean_ring(v: np.ndarray) -> np.ndarray:
    diam = float(np.sqrt(((v[:, None, :] - v[None, :, :]) ** 2).sum(-1)).max())
    if diam == 0.0:
        raise DegenerateInputError("all vertices coincide")
    signed = 0.5 * float(_cross(v, np.roll(v, -1, axis=0)).sum())
    if signed < 0:
        v = v[::-1]
    eps_d = 1e-12 * diam
    eps_c = 1e-12 * diam * diam

    pts = list(v)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        keep = []
        n = len(pts)
        for i in range(n):
            prev = keep[-1] if keep else pts[i - 1]
            if np.hypot(*(pts[i] - prev)) <= eps_d:
                changed = True
                continue
            keep.append(pts[i])
        if len(keep) >= 2 and np.hypot(*(keep[0] - keep[-1])) <= eps_d:
            keep.pop()
            changed = True
        pts = keep
        n = len(pts)
        if n < 3:
            break
        arr = np.array(pts)
        cr = _cross(arr - np.roll(arr, 1, axis=0), np.roll(arr, -1, axis=0) - arr)
        if np.any(cr < -eps_c):
            raise DegenerateInputError("polygon is not convex")
        flat = np.flatnonzero(np.abs(cr) <= eps_c)
        if len(flat):
            pts = [p for i, p in enumerate(pts) if i != flat[0]]
            changed = True
    if len(pts) < 3:
        raise DegenerateInputError("polygon collapses to fewer than 3 vertices")
    arr = np.array(pts)
    e = np.roll(arr, -1, axis=0) - arr
    turning = np.arctan2(_cross(e, np.roll(e, -1, axis=0)), (e * np.roll(e, -1, axis=0)).sum(-1)).sum()
    if abs(turning - 2 * np.pi) > 1e-6:
        raise DegenerateInputError("vertex loop winds more than once")
    if area_of(arr) < 1e-18 * diam * diam:
        raise DegenerateInputError("polygon has zero area")
    return arr


def area_of(v: np.ndarray) -> float:
    return 0.5 * float(_cross(v, np.roll(v, -1, axis=0)).sum())


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.b - self.a)))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.a + self.b)


class AffineMap:
    """``x -> M @ x + t`` with an invertible 2x2 linear part."""

    __slots__ = ("matrix", "offset")

    def __init__(self, matrix, offset=(0.0, 0.0)):
        m = np.array(matrix, dtype=float).reshape(2, 2)
        t = np.array(offset, dtype=float).reshape(2)
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(t))):
            raise DegenerateInputError("non-finite affine map")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise DegenerateInputError("singular affine map")
        m.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", t)

    def __setattr__(self, name, value):
        raise AttributeError("AffineMap is immutable")

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(np.eye(2))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def __call__(self, pts) -> np.ndarray:
        p = np.asarray(pts, dtype=float)
        return p @ self.matrix.T + self.offset

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        return compose(self, other)

    def __repr__(self) -> str:
        return f"AffineMap({self.matrix.tolist()}, {self.offset.tolist()})"

    def to_list(self) -> list:
        """``[m11, m12, m21, m22, tx, ty]``."""
        return [*self.matrix.ravel().tolist(), *self.offset.tolist()]

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "AffineMap":
        if len(values) != 6:
            raise DegenerateInputError("an affine map is serialized as 6 numbers")
        return cls(np.reshape(values[:4], (2, 2)), values[4:])

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist(), "offset": self.offset.tolist()}

    @classmethod
    def from_json(cls, data) -> "AffineMap":
        if isinstance(data, dict):
            return cls(data["matrix"], data["offset"])
        return cls.from_list(data)


def compose(a: AffineMap, b: AffineMap) -> AffineMap:
    """The map ``x -> a(b(x))``."""
    return AffineMap(a.matrix @ b.matrix, a.matrix @ b.offset + a.offset)


def invert(a: AffineMap) -> AffineMap:
    inv = np.linalg.inv(a.matrix)
    return AffineMap(inv, -inv @ a.offset)


def translation(vec) -> AffineMap:
    return AffineMap(np.eye(2), as_point(vec))


def rotation(angle: float) -> AffineMap:
    c, s = math.cos(angle), math.sin(angle)
    return AffineMap([[c, -s], [s, c]])


def scale_about(center, lam: float) -> AffineMap:
    """Homothety with ratio ``lam`` fixing ``center``."""
    if not lam > 0:
        raise DegenerateInputError("homothety ratio must be positive")
    c = as_point(center)
    return AffineMap(lam * np.eye(2), (1.0 - lam) * c)


def apply(amap: AffineMap, poly: ConvexPolygon) -> ConvexPolygon:
    v = amap(poly.vertices)
    if amap.det < 0:
        v = v[::-1]
    return ConvexPolygon._trusted(v)


def area(poly: ConvexPolygon) -> float:
    return area_of(poly.vertices)


def centroid(poly: ConvexPolygon) -> np.ndarray:
    v = poly.vertices
    # shift to the first vertex to keep the moments well conditioned
    base = v[0]
    w = v - base
    nxt = np.roll(w, -1, axis=0)
    cr = _cross(w, nxt)
    a = 0.5 * cr.sum()
    if a < 1e-18 * poly.diameter**2:
        raise DegenerateInputError("centroid of a degenerate polygon")
    c = ((w + nxt) * cr[:, None]).sum(axis=0) / (6.0 * a)
    return c + base


def signed_distances(poly: ConvexPolygon, pts) -> np.ndarray:
    """Max over edges of the signed distance to the edge line (negative inside)."""
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    return (p @ poly.normals.T - poly.offsets).max(axis=1)


def contains_point(poly: ConvexPolygon, pt, tol: float = 0.0) -> bool:
    return bool(signed_distances(poly, pt)[0] <= tol)


def contains_polygon(outer: ConvexPolygon, inner, tol: float = 0.0) -> bool:
    v = inner.vertices if isinstance(inner, ConvexPolygon) else np.asarray(inner, float)
    return bool(signed_distances(outer, v).max() <= tol)


def boundary_distance(poly: ConvexPolygon, pts) -> np.ndarray:
    """Euclidean distance from each point to the polygon boundary."""
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    a = poly.vertices
    e = poly.edges
    rel = p[:, None, :] - a[None, :, :]
    t = np.clip((rel * e).sum(-1) / (e * e).sum(-1), 0.0, 1.0)
    d = rel - t[..., None] * e
    return np.sqrt((d**2).sum(-1)).min(axis=1)


def chord_at(poly: ConvexPolygon, theta: float, t: float) -> Optional[Segment]:
    """Intersection of ``poly`` with the line ``<x, n(theta)> = t``.

    The line is oriented along ``u = (cos theta, sin theta)`` and
    ``n = (-sin theta, cos theta)``; ``None`` when the line misses the polygon.
    """
    u = np.array([math.cos(theta), math.sin(theta)])
    n = np.array([-math.sin(theta), math.cos(theta)])
    tv = poly.vertices @ n
    if t < tv.min() or t > tv.max():
        return None
    nu = poly.normals @ u
    rhs = poly.offsets - t * (poly.normals @ n)
    scale = 1e-14
    up = nu > scale
    lo = nu < -scale
    if np.any(rhs[~(up | lo)] < -1e-12 * poly.diameter):
        return None
    s_hi = (rhs[up] / nu[up]).min()
    s_lo = (rhs[lo] / nu[lo]).max()
    if s_lo > s_hi:
        if s_lo - s_hi > 1e-12 * poly.diameter:
            return None
        s_lo = s_hi = 0.5 * (s_lo + s_hi)
    return Segment(t * n + s_lo * u, t * n + s_hi * u)


def radial_distance(poly: ConvexPolygon, origin, angle: float) -> float:
    """Distance from an interior ``origin`` to the boundary along ``angle``."""
    o = as_point(origin)
    slack = poly.offsets - poly.normals @ o
    if slack.min() <= 1e-12 * poly.diameter:
        raise DegenerateInputError("radial_distance needs a strictly interior origin")
    d = np.array([math.cos(angle), math.sin(angle)])
    nd = poly.normals @ d
    pos = nd > 0
    return float((slack[pos] / nd[pos]).min())


def clip_halfplane(pts: np.ndarray, normal, offset: float) -> np.ndarray:
    """Part of a convex polygon (vertex array) inside ``<normal, x> <= offset``."""
    pts = np.asarray(pts, dtype=float)
    if len(pts) == 0:
        return pts
    nrm = np.asarray(normal, dtype=float)
    s = pts @ nrm - offset
    out = []
    n = len(pts)
    for i in range(n):
        j = (i + 1) % n
        if s[i] <= 0:
            out.append(pts[i])
        if (s[i] < 0 < s[j]) or (s[j] < 0 < s[i]):
            lam = s[i] / (s[i] - s[j])
            out.append(pts[i] + lam * (pts[j] - pts[i]))
    return np.array(out).reshape(-1, 2)


def random_convex_polygon(n: int, seed: int, rng: Optional[np.random.Generator] = None) -> ConvexPolygon:
    """Convex hull of ``n`` points drawn uniformly from the unit disk."""
    if n < 3:
        raise DegenerateInputError("need n >= 3")
    gen = rng if rng is not None else np.random.default_rng(seed)
    while True:
        r = np.sqrt(gen.random(n))
        phi = gen.random(n) * 2 * np.pi
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
        try:
            hull = ConvexHull(pts)
            return ConvexPolygon(pts[hull.vertices])
        except Exception:  # collinear draw; qhull or the validator rejects it
            continue


def polygon_from_points(points: Iterable) -> ConvexPolygon:
    """Convex hull of an arbitrary point cloud."""
    pts = np.asarray(list(points), dtype=float)
    hull = ConvexHull(pts)
    return ConvexPolygon(pts[hull.vertices])


def regular_polygon(n: int, radius: float = 1.0, phase: float = 0.0, center=(0.0, 0.0)) -> ConvexPolygon:
    k = np.arange(n)
    ang = phase + 2 * np.pi * k / n
    c = as_point(center)
    return ConvexPolygon(np.column_stack([np.cos(ang), np.sin(ang)]) * radius + c)
