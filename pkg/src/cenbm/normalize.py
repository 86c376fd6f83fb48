"""Canonical position of a body relative to its inscribed hexagon.

A body is in canonical position when its inscribed affine-regular hexagon is
the regular hexagon ``c_i = (cos 60i deg, sin 60i deg)``. Its centroid then
lies in the 4/21-homothet of that hexagon, and one of the twelve symmetries
of the hexagon moves it into the fundamental triangle ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LemmaViolation
from .geometry import AffineMap, ConvexPolygon, apply, as_point, centroid, compose
from .hexagon import AffineRegularHexagon, inscribe_hexagon

SQRT3 = math.sqrt(3.0)

T_VERTICES = np.array([[0.0, 0.0], [4.0 / 21.0, 0.0], [1.0 / 7.0, SQRT3 / 21.0]])
TPLUS_VERTICES = np.array([[0.0, 0.0], [2.0 / 7.0, -2.0 * SQRT3 / 21.0], [2.0 / 7.0, 0.0]])
Q_BOUNDS = ((0.0, 4.0 / 21.0), (0.0, 2.0 / 7.0))

TAU_MATRIX = np.array([[1.5, SQRT3 / 2.0], [-SQRT3 / 2.0, 1.5]])

_T_TOL = 1e-12


def tau(pt) -> np.ndarray:
    """sqrt(3) times the rotation by -30 degrees."""
    return TAU_MATRIX @ as_point(pt)


def tau_map() -> AffineMap:
    return AffineMap(TAU_MATRIX)


def _halfplanes(tri: np.ndarray):
    e = np.roll(tri, -1, axis=0) - tri
    if e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0] < 0:
        tri = tri[::-1]
        e = np.roll(tri, -1, axis=0) - tri
    n = np.column_stack([e[:, 1], -e[:, 0]])
    n /= np.linalg.norm(n, axis=1)[:, None]
    return n, np.einsum("ij,ij->i", n, tri)


_T_N, _T_H = _halfplanes(T_VERTICES)
_TP_N, _TP_H = _halfplanes(TPLUS_VERTICES)


def in_triangle_T(pt, tol: float = _T_TOL) -> bool:
    return bool(np.all(_T_N @ np.asarray(pt, float) - _T_H <= tol))


def in_triangle_Tplus(pt, tol: float = _T_TOL) -> bool:
    return bool(np.all(_TP_N @ np.asarray(pt, float) - _TP_H <= tol))


def in_T_batch(pts: np.ndarray, tol: float = _T_TOL) -> np.ndarray:
    return np.all(pts @ _T_N.T - _T_H <= tol, axis=1)


def in_Tplus_batch(pts: np.ndarray, tol: float = _T_TOL) -> np.ndarray:
    return np.all(pts @ _TP_N.T - _TP_H <= tol, axis=1)


def symmetry_matrix(index: int) -> np.ndarray:
    """Element ``index`` of the dihedral group of the regular hexagon.

    0..5 are rotations by ``60k`` degrees, 6..11 reflections across the axis
    at angle ``30 (index - 6)`` degrees.
    """
    if not 0 <= index < 12:
        raise ValueError("symmetry index must be in 0..11")
    if index < 6:
        a = math.pi * index / 3.0
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, -s], [s, c]])
    phi = math.pi * (index - 6) / 6.0
    c, s = math.cos(2 * phi), math.sin(2 * phi)
    return np.array([[c, s], [s, -c]])


SYMMETRIES = tuple(symmetry_matrix(k) for k in range(12))


def canonical_map(hexagon: AffineRegularHexagon) -> AffineMap:
    """The affine map sending ``hexagon`` onto the canonical regular hexagon, v1 -> c1."""
    c = AffineRegularHexagon.canonical().vertices
    src = np.column_stack([hexagon.vertices[0] - hexagon.center, hexagon.vertices[1] - hexagon.center])
    dst = np.column_stack([c[0], c[1]])
    lin = dst @ np.linalg.inv(src)
    return AffineMap(lin, -lin @ hexagon.center)


def reduce_to_T(pt):
    """``(index, image)`` for the first symmetry moving ``pt`` into ``T``, else None."""
    p = as_point(pt)
    for k, g in enumerate(SYMMETRIES):
        q = g @ p
        if in_triangle_T(q):
            return k, q
    return None


@dataclass(frozen=True, eq=False)
class NormalizedBody:
    body: ConvexPolygon
    to_canonical: AffineMap
    centroid: np.ndarray
    symmetry: int
    hexagon: AffineRegularHexagon  # the inscribed hexagon found in the original body


def normalize(poly: ConvexPolygon, tol: float = 1e-9) -> NormalizedBody:
    hx = inscribe_hexagon(poly, tol)
    amap = canonical_map(hx)
    c = amap(centroid(poly))
    found = reduce_to_T(c)
    if found is None:
        raise LemmaViolation(f"centroid {c.tolist()} of the normalized body is outside every copy of T")
    k, _ = found
    full = compose(AffineMap(SYMMETRIES[k]), amap)
    body = apply(full, poly)
    # recompute from the mapped body so the stored centroid is its true centroid
    return NormalizedBody(body, full, centroid(body), k, hx)
