"""Inscribed affine-regular hexagons, the star over a hexagon, and the 4/21 centroid check.

An affine-regular hexagon whose long diagonal ``v4 v1`` is parallel to a
direction ``u`` is cut out of a convex body by three parallel chords in that
direction, at transverse offsets ``b < m < a``:

* the middle chord is the diagonal ``v4 v1``;
* the outer chords are the sides ``v3 v2`` (offset ``a``) and ``v5 v6`` (offset ``b``);
* ``m = (a + b) / 2``, both outer chords have half the length of the middle
  one, and the three chord midpoints are collinear.

For a fixed direction the first two conditions pin down ``m`` (a 1-D root
find); the collinearity defect is then a continuous function of the direction
that changes sign over a half turn, so a root exists and is found by scanning
and bracketing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConvergenceError
from .geometry import (
    ConvexPolygon,
    boundary_distance,
    centroid,
    clip_halfplane,
    contains_polygon,
    signed_distances,
)

# coefficients of (o, a, b) for v1..v6 of the hexagon o + {a, b, b-a, -a, -b, a-b}
_HEX_COEFFS = np.array(
    [[1, 1, 0], [1, 0, 1], [1, -1, 1], [1, -1, 0], [1, 0, -1], [1, 1, -1]], dtype=float
)

N_THETA = 256
TIP_MARGIN = 0.0005


@dataclass(frozen=True, eq=False)
class AffineRegularHexagon:
    center: np.ndarray
    vertices: np.ndarray  # (6, 2), counterclockwise

    @classmethod
    def from_axes(cls, center, a, b) -> "AffineRegularHexagon":
        """Hexagon ``center + {a, b, b - a, -a, -b, a - b}``."""
        o = np.asarray(center, dtype=float)
        basis = np.array([o, a, b], dtype=float)
        return cls(o, _HEX_COEFFS @ basis)

    @classmethod
    def canonical(cls) -> "AffineRegularHexagon":
        """The regular hexagon with vertices ``(cos 60i deg, sin 60i deg)``, i = 1..6."""
        i = np.arange(1, 7)
        v = np.column_stack([np.cos(np.pi * i / 3), np.sin(np.pi * i / 3)])
        return cls(np.zeros(2), v)

    @classmethod
    def fit(cls, vertices) -> "AffineRegularHexagon":
        """Least-squares nearest affine-regular hexagon to six ordered points."""
        v = np.asarray(vertices, dtype=float)
        sol, *_ = np.linalg.lstsq(_HEX_COEFFS, v, rcond=None)
        return cls.from_axes(*sol)

    def transformed(self, amap) -> "AffineRegularHexagon":
        v = amap(self.vertices)
        if amap.det < 0:
            # keep counterclockwise order and v1 first
            v = v[[0, 5, 4, 3, 2, 1]]
        return AffineRegularHexagon(amap(self.center), v)

    def scaled(self, lam: float) -> "AffineRegularHexagon":
        """Homothet with ratio ``lam`` about the hexagon's own center."""
        o = self.center
        return AffineRegularHexagon(o, o + lam * (self.vertices - o))

    def polygon(self) -> ConvexPolygon:
        return ConvexPolygon._trusted(self.vertices)

    @property
    def scale(self) -> float:
        return float(np.abs(self.vertices - self.center).max())

    def residuals(self) -> Tuple[float, float]:
        """Absolute defects of the central-symmetry and affine-regularity identities."""
        v, o = self.vertices, self.center
        sym = np.abs(v[:3] + v[3:] - 2 * o).max()
        reg = np.abs(np.roll(v, -1, axis=0) - v - (np.roll(v, -2, axis=0) - o)).max()
        return float(sym), float(reg)

    def to_json(self) -> dict:
        return {"center": self.center.tolist(), "vertices": self.vertices.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "AffineRegularHexagon":
        v = np.asarray(data["vertices"], dtype=float)
        if v.shape != (6, 2):
            raise ValueError("a hexagon has exactly six vertices")
        return cls(np.asarray(data["center"], dtype=float), v)


@dataclass(frozen=True, eq=False)
class Star:
    hexagon: AffineRegularHexagon
    outer: np.ndarray  # (6, 2); outer[i-1] is the apex w_i over side v_{i-1} v_i

    def triangles(self) -> Tuple[ConvexPolygon, ConvexPolygon]:
        w = self.outer
        return (ConvexPolygon._trusted(w[[0, 2, 4]]), ConvexPolygon._trusted(w[[1, 3, 5]]))

    def boundary(self) -> np.ndarray:
        """The 12-vertex loop ``v1 w2 v2 w3 ... v6 w1``."""
        v, w = self.hexagon.vertices, self.outer
        loop = np.empty((12, 2))
        loop[0::2] = v
        loop[1::2] = np.roll(w, -1, axis=0)
        return loop

    def vertices(self) -> np.ndarray:
        """All twelve star corners (hexagon vertices and outer apexes)."""
        return np.vstack([self.hexagon.vertices, self.outer])

    def contains_point(self, pt, tol: float = 0.0) -> bool:
        t1, t2 = self.triangles()
        return bool(min(signed_distances(t1, pt)[0], signed_distances(t2, pt)[0]) <= tol)

    def contains_polygon(self, poly: ConvexPolygon, tol: float = 0.0) -> bool:
        """Exact containment of a convex polygon in the (non-convex) star.

        Outside the hexagon's side line ``v_{i-1} v_i`` the star is just the apex
        triangle over that side, so each slice of ``poly`` beyond a side line
        is checked against its apex triangle.
        """
        hexpoly = self.hexagon.polygon()
        v = self.hexagon.vertices
        # points on a side line itself belong to the neighbouring apex triangles
        eps = max(tol, 1e-13 * self.hexagon.scale)
        for i in range(6):
            # edge v_{i-1} -> v_i is hexpoly edge i-1
            k = (i - 1) % 6
            nrm, off = hexpoly.normals[k], hexpoly.offsets[k]
            beyond = clip_halfplane(poly.vertices, -nrm, -(off + eps))
            if len(beyond) == 0:
                continue
            apex = ConvexPolygon._trusted(np.array([v[i - 1], self.outer[i], v[i]]))
            if signed_distances(apex, beyond).max() > tol:
                return False
        return True


def star_over(hexagon: AffineRegularHexagon) -> Star:
    v, o = hexagon.vertices, hexagon.center
    return Star(hexagon, np.roll(v, 1, axis=0) + v - o)


def star_polygon(star: Star):
    """The star's 12-vertex boundary loop and its two constituent triangles."""
    return star.boundary(), star.triangles()


# ---------------------------------------------------------------------------
# inscription search


class _Profiles:
    """Chord profiles of one polygon for a batch of directions.

    For each direction the chord endpoints are piecewise linear in the offset
    with breakpoints at the vertex offsets, so they are tabulated there once.
    """

    def __init__(self, poly: ConvexPolygon, thetas: np.ndarray):
        v = poly.vertices
        th = np.atleast_1d(np.asarray(thetas, dtype=float))
        self.u = np.column_stack([np.cos(th), np.sin(th)])
        self.n = np.column_stack([-np.sin(th), np.cos(th)])
        s = self.u @ v.T  # (K, n) along-chord coordinate
        t = self.n @ v.T  # (K, n) offsets
        order = np.argsort(t, axis=1, kind="stable")
        tk = np.take_along_axis(t, order, axis=1)

        s0, s1 = s, np.roll(s, -1, axis=1)
        t0, t1 = t, np.roll(t, -1, axis=1)
        dt = t1 - t0
        span = tk[:, -1] - tk[:, 0]
        eps = 1e-12 * span[:, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = (tk[:, :, None] - t0[:, None, :]) / dt[:, None, :]
        lam = np.where(np.abs(dt)[:, None, :] > eps, lam, np.nan)
        ok = (lam >= -1e-12) & (lam <= 1 + 1e-12)
        sv = s0[:, None, :] + np.clip(lam, 0, 1) * (s1 - s0)[:, None, :]
        # vertices sitting exactly at the breakpoint (covers edges parallel to u)
        at = np.abs(t[:, None, :] - tk[:, :, None]) <= eps
        lo = np.minimum(np.where(ok, sv, np.inf), np.where(at, s[:, None, :], np.inf)).min(-1)
        hi = np.maximum(np.where(ok, sv, -np.inf), np.where(at, s[:, None, :], -np.inf)).max(-1)
        self.tk = tk
        self.left = lo
        self.right = hi
        self.w = hi - lo
        self.tmin = tk[:, 0]
        self.tmax = tk[:, -1]

    def _interp(self, t: np.ndarray, rows: np.ndarray):
        tk = self.tk[rows]
        n = tk.shape[1]
        idx = np.clip((tk <= t[:, None]).sum(1) - 1, 0, n - 2)
        r = np.arange(len(rows))
        t0, t1 = tk[r, idx], tk[r, idx + 1]
        d = t1 - t0
        f = np.where(d > 0, (t - t0) / np.where(d > 0, d, 1.0), 0.0)
        f = np.clip(f, 0.0, 1.0)
        lft = self.left[rows]
        rgt = self.right[rows]
        left = lft[r, idx] + f * (lft[r, idx + 1] - lft[r, idx])
        right = rgt[r, idx] + f * (rgt[r, idx + 1] - rgt[r, idx])
        return left, right

    def _level_cross(self, m, level, rows, upward: bool):
        """Furthest offset from ``m`` (above or below) where the chord is still >= level."""
        tk = self.tk[rows]
        w = self.w[rows]
        r = np.arange(len(rows))
        wm = 2.0 * level
        if upward:
            cand = (tk > m[:, None]) & (w < level[:, None])
            has = cand.any(1)
            k = np.argmax(cand, axis=1)
            prev_is_bp = (k > 0) & (tk[r, np.maximum(k - 1, 0)] > m)
            pt = np.where(prev_is_bp, tk[r, np.maximum(k - 1, 0)], m)
            pw = np.where(prev_is_bp, w[r, np.maximum(k - 1, 0)], wm)
            end = self.tmax[rows]
        else:
            cand = (tk < m[:, None]) & (w < level[:, None])
            has = cand.any(1)
            n = tk.shape[1]
            k = n - 1 - np.argmax(cand[:, ::-1], axis=1)
            nxt = np.minimum(k + 1, n - 1)
            prev_is_bp = (k < n - 1) & (tk[r, nxt] < m)
            pt = np.where(prev_is_bp, tk[r, nxt], m)
            pw = np.where(prev_is_bp, w[r, nxt], wm)
            end = self.tmin[rows]
        ck, cw = tk[r, k], w[r, k]
        denom = cw - pw
        frac = np.where(denom != 0, (level - pw) / np.where(denom != 0, denom, 1.0), 0.0)
        x = pt + np.clip(frac, 0.0, 1.0) * (ck - pt)
        return np.where(has, x, end)

    def _h(self, m, rows):
        left, right = self._interp(m, rows)
        level = 0.5 * (right - left)
        a = self._level_cross(m, level, rows, upward=True)
        b = self._level_cross(m, level, rows, upward=False)
        return 0.5 * (a + b) - m, a, b, level, 0.5 * (left + right)

    def solve(self, rows=None, bisect_steps: int = 10, max_steps: int = 60):
        """Root of ``(a(m) + b(m)) / 2 - m`` per direction, then the alignment defect.

        ``h`` is piecewise linear in ``m``, so a few bisections followed by
        Illinois false-position steps land on the root exactly.
        """
        if rows is None:
            rows = np.arange(len(self.tk))
        span = self.tmax[rows] - self.tmin[rows]
        lo = self.tmin[rows] + TIP_MARGIN * span
        hi = self.tmax[rows] - TIP_MARGIN * span
        h_lo = self._h(lo, rows)[0]
        h_hi = self._h(hi, rows)[0]
        side = np.zeros(len(rows))
        for step in range(max_steps):
            if step < bisect_steps:
                m = 0.5 * (lo + hi)
            else:
                d = h_lo - h_hi
                m = np.where(d != 0, lo + h_lo * (hi - lo) / np.where(d != 0, d, 1.0), 0.5 * (lo + hi))
                m = np.clip(m, lo, hi)
            hm = self._h(m, rows)[0]
            pos = hm > 0
            lo = np.where(pos, m, lo)
            hi = np.where(pos, hi, m)
            if step >= bisect_steps:
                # Illinois: halve the stale endpoint value when the same side moves twice
                h_hi = np.where(pos & (side > 0), 0.5 * h_hi, h_hi)
                h_lo = np.where(~pos & (side < 0), 0.5 * h_lo, h_lo)
            h_lo = np.where(pos, hm, h_lo)
            h_hi = np.where(pos, h_hi, hm)
            side = np.where(pos, 1.0, -1.0)
            if np.all((np.abs(hm) <= 1e-15 * span) | (hi - lo <= 4e-16 * span)):
                break
        m = np.where(np.abs(h_lo) < np.abs(h_hi), lo, hi)
        hm, a, b, level, mx_m = self._h(m, rows)
        la, ra = self._interp(a, rows)
        lb, rb = self._interp(b, rows)
        half = 0.5 * level
        ia = np.sort(np.column_stack([la + half, ra - half]), axis=1)
        ib = np.sort(np.column_stack([lb + half, rb - half]), axis=1)
        target = 2.0 * mx_m
        s_lo = ia[:, 0] + ib[:, 0]
        s_hi = ia[:, 1] + ib[:, 1]
        g = np.where(target < s_lo, s_lo - target, np.where(target > s_hi, s_hi - target, 0.0))
        return {
            "m": m, "a": a, "b": b, "level": level, "mx": mx_m,
            "ia": ia, "ib": ib, "g": g, "h": hm,
        }


def _hexagon_from_solution(prof: _Profiles, sol: dict, row: int, k: int = 0) -> np.ndarray:
    u, n = prof.u[row], prof.n[row]
    m, a, b = sol["m"][k], sol["a"][k], sol["b"][k]
    level, mx = sol["level"][k], sol["mx"][k]
    ia, ib = sol["ia"][k], sol["ib"][k]
    target = 2.0 * mx
    xa = float(np.clip(target - 0.5 * (ib[0] + ib[1]), ia[0], ia[1]))
    xb = float(np.clip(target - xa, ib[0], ib[1]))
    half = 0.5 * level
    pts_st = np.array([
        [mx + level, m],
        [xa + half, a],
        [xa - half, a],
        [mx - level, m],
        [xb - half, b],
        [xb + half, b],
    ])
    return np.outer(pts_st[:, 0], u) + np.outer(pts_st[:, 1], n)


@dataclass(frozen=True)
class InscriptionReport:
    hexagon: AffineRegularHexagon
    theta: float
    boundary_residual: float  # max vertex distance to the boundary / diameter
    symmetry_residual: float  # / diameter
    regularity_residual: float  # / diameter
    raw_residual: float  # defect of the unfitted chord hexagon / diameter

    @property
    def max_residual(self) -> float:
        return max(self.boundary_residual, self.symmetry_residual, self.regularity_residual)

    def to_json(self) -> dict:
        return {
            **self.hexagon.to_json(),
            "theta": self.theta,
            "residuals": {
                "boundary": self.boundary_residual,
                "symmetry": self.symmetry_residual,
                "regularity": self.regularity_residual,
                "raw": self.raw_residual,
            },
        }


def _evaluate(poly: ConvexPolygon, raw: np.ndarray, theta: float) -> InscriptionReport:
    diam = poly.diameter
    hx = AffineRegularHexagon.fit(raw)
    sym, reg = hx.residuals()
    bd = float(boundary_distance(poly, hx.vertices).max())
    outside = max(0.0, float(signed_distances(poly, hx.vertices).max()))
    raw_def = float(np.abs(raw - hx.vertices).max())
    return InscriptionReport(hx, theta, max(bd, outside) / diam, sym / diam, reg / diam, raw_def / diam)


def inscribe_hexagon_report(poly: ConvexPolygon, tol: float = 1e-9) -> InscriptionReport:
    """Search for an inscribed affine-regular hexagon and report its residuals."""
    thetas = np.pi * np.arange(N_THETA) / N_THETA
    prof = _Profiles(poly, thetas)
    sol = prof.solve()
    g = sol["g"]
    diam = poly.diameter
    # g(theta + pi) = -g(theta): append the wrap-around sample
    gs = np.append(g, -g[0])
    ths = np.append(thetas, np.pi)

    def g_at(th: float) -> float:
        p = _Profiles(poly, [th])
        return float(p.solve()["g"][0])

    def report_at(th: float) -> InscriptionReport:
        p = _Profiles(poly, [th])
        s = p.solve()
        return _evaluate(poly, _hexagon_from_solution(p, s, 0), th)

    brackets = []
    for k in range(N_THETA):
        if gs[k] == 0.0:
            brackets.append((abs(gs[k]), ths[k], ths[k]))
        elif gs[k] * gs[k + 1] < 0:
            brackets.append((min(abs(gs[k]), abs(gs[k + 1])), ths[k], ths[k + 1]))
    brackets.sort(key=lambda b: b[0])

    best = None
    for _, t0, t1 in brackets:
        if t0 == t1:
            th = t0
        else:
            th = brentq(g_at, t0, t1, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        rep = report_at(th)
        if best is None or rep.max_residual < best.max_residual:
            best = rep
        if rep.max_residual <= tol:
            return rep

    # no clean sign change: refine the smallest |g| samples
    for k in np.argsort(np.abs(g))[:4]:
        t0, t1 = thetas[k] - np.pi / N_THETA, thetas[k] + np.pi / N_THETA
        res = minimize_scalar(lambda th: abs(g_at(th)), bounds=(t0, t1), method="bounded",
                              options={"xatol": 1e-14})
        rep = report_at(float(res.x))
        if best is None or rep.max_residual < best.max_residual:
            best = rep
        if rep.max_residual <= tol and abs(res.fun) <= tol * diam:
            return rep

    raise ConvergenceError("inscribed hexagon search did not converge",
                           best.max_residual if best is not None else math.inf)


def inscribe_hexagon(poly: ConvexPolygon, tol: float = 1e-9) -> AffineRegularHexagon:
    """An affine-regular hexagon with all six vertices on the boundary of ``poly``.

    ``tol`` is relative to the polygon diameter and bounds both the vertex
    distance to the boundary and the hexagon identity residuals.
    """
    return inscribe_hexagon_report(poly, tol).hexagon


def check_centroid_lemma(poly: ConvexPolygon, hexagon: AffineRegularHexagon, tol: float = 1e-9):
    """Whether the centroid of ``poly`` lies in the 4/21-homothet of ``hexagon``.

    Returns ``(holds, margin)`` where ``margin`` is the signed distance of the
    centroid to the small hexagon's boundary, negative inside.
    """
    diam = poly.diameter
    if not contains_polygon(poly, hexagon.vertices, 1e-7 * diam):
        raise ValueError("hexagon is not inscribed in the polygon")
    small = hexagon.scaled(4.0 / 21.0).polygon()
    c = centroid(poly)
    sd = float(signed_distances(small, c)[0])
    margin = sd if sd <= 0 else float(boundary_distance(small, c)[0])
    return sd <= tol * diam, margin
