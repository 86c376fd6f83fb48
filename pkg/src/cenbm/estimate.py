"""Upper bounds on the centroid and extended Banach-Mazur distances of two polygons.

With both centroids at the origin, a linear map ``L`` and the largest ``t``
with ``t L C`` inside ``D`` give the ratio

    lambda(L) = max_v |L v|_D * max_w |L^-1 w|_C

where ``|x|_P = max_j n_j . x / h_j`` is the gauge of ``P``. It does not
depend on the scale of ``L``, so the search runs over unit-determinant maps
``Rot(a) diag(s, 1/s) Rot(b)`` on a grid and then refines the best cells with
Nelder-Mead on the four matrix entries.

The extended distance drops the centroid pin. For a fixed ``L`` the two
translations enter linearly, so the inner problem splits into two small LPs.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import ConvergenceError, DegenerateInputError
from .geometry import (
    AffineMap,
    ConvexPolygon,
    apply,
    centroid,
    contains_polygon,
    polygon_from_points,
    regular_polygon,
    scale_about,
)

MODES = ("cen", "extended")
_REFLECT = np.array([[1.0, 0.0], [0.0, -1.0]])
_CHUNK = 2048


@dataclass(frozen=True)
class EstimatorConfig:
    grid: Tuple[int, int, int] = (48, 24, 48)
    sigma_range: Tuple[float, float] = (1.0 / 6.0, 6.0)
    refine_iters: int = 300
    mode: str = "cen"
    restarts: int = 8

    def __post_init__(self):
        lo, hi = self.sigma_range
        if not (hi > 1.0 and 0 < lo < 1.0):
            raise ValueError("sigma_range must straddle 1")
        if min(self.grid) < 4 or self.restarts < 1 or self.refine_iters < 0:
            raise ValueError("grid counts must be at least 4")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @classmethod
    def for_budget(cls, budget: str = "default", mode: str = "cen") -> "EstimatorConfig":
        # the extended mode solves two LPs per map, so its grids are coarser
        table = {
            ("low", "cen"): ((24, 12, 24), 100, 4),
            ("default", "cen"): ((48, 24, 48), 300, 8),
            ("high", "cen"): ((96, 48, 96), 1500, 16),
            ("low", "extended"): ((6, 4, 6), 100, 2),
            ("default", "extended"): ((12, 6, 12), 200, 4),
            ("high", "extended"): ((16, 8, 16), 400, 6),
        }
        try:
            grid, iters, restarts = table[(budget, mode)]
        except KeyError:
            raise ValueError(f"unknown budget {budget!r} or mode {mode!r}") from None
        return cls(grid=grid, refine_iters=iters, mode=mode, restarts=restarts)


@dataclass
class EstimateResult:
    lambda_hat: float
    best_map: AffineMap
    inner_scale: float
    verified: bool
    homothety_center: Optional[np.ndarray] = None
    mode: str = "cen"
    evaluations: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "best_map": self.best_map.to_json(),
            "inner_scale": self.inner_scale,
            "verified": self.verified,
            "homothety_center": None if self.homothety_center is None else self.homothety_center.tolist(),
            "mode": self.mode,
            "evaluations": self.evaluations,
        }


def _threads() -> int:
    try:
        n = int(os.environ.get("CBM_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n) if n else max(1, min(4, os.cpu_count() or 1))


def _grid_matrices(cfg: EstimatorConfig) -> np.ndarray:
    na, ns, nb = cfg.grid
    # Rot(a + pi) = -Rot(a) and the centroid pin is not symmetric under -1, so a
    # spans the full circle while b only needs half of it
    al = np.linspace(0, 2 * math.pi, na, endpoint=False)
    be = np.linspace(0, math.pi, nb, endpoint=False)
    sg = np.exp(np.linspace(math.log(cfg.sigma_range[0]), math.log(cfg.sigma_range[1]), ns))
    A, S, B = np.meshgrid(al, sg, be, indexing="ij")
    A, S, B = A.ravel(), S.ravel(), B.ravel()
    ca, sa, cb, sb = np.cos(A), np.sin(A), np.cos(B), np.sin(B)
    inv = 1.0 / S
    # Rot(a) @ diag(s, 1/s) @ Rot(b)
    m11 = ca * S * cb - sa * inv * sb
    m12 = -ca * S * sb - sa * inv * cb
    m21 = sa * S * cb + ca * inv * sb
    m22 = -sa * S * sb + ca * inv * cb
    return np.stack([np.stack([m11, m12], -1), np.stack([m21, m22], -1)], -2)


class _Gauges:
    """Vertex and scaled-normal tables of the two centred polygons."""

    def __init__(self, C: np.ndarray, D: np.ndarray):
        self.cv = C
        self.dv = D
        self.cn = self._scaled_normals(C)
        self.dn = self._scaled_normals(D)

    @staticmethod
    def _scaled_normals(v: np.ndarray) -> np.ndarray:
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]])
        h = np.einsum("ij,ij->i", n, v)
        if np.any(h <= 0):
            raise DegenerateInputError("centroid is not interior to the polygon")
        return n / h[:, None]

    def ratio(self, L: np.ndarray) -> np.ndarray:
        """lambda(L) for a stack of matrices with positive determinant."""
        det = L[:, 0, 0] * L[:, 1, 1] - L[:, 0, 1] * L[:, 1, 0]
        adj = np.empty_like(L)
        adj[:, 0, 0], adj[:, 1, 1] = L[:, 1, 1], L[:, 0, 0]
        adj[:, 0, 1], adj[:, 1, 0] = -L[:, 0, 1], -L[:, 1, 0]
        lv = np.einsum("kab,nb->kna", L, self.cv)
        a = np.einsum("kna,ma->knm", lv, self.dn).max(axis=(1, 2))
        iw = np.einsum("kab,nb->kna", adj, self.dv)
        b = np.einsum("kna,ma->knm", iw, self.cn).max(axis=(1, 2))
        out = a * b / det
        out[det <= 0] = np.inf
        return out

    def inner_scale(self, L: np.ndarray) -> float:
        return 1.0 / float(np.max((self.cv @ L.T) @ self.dn.T))


def _adj(L: np.ndarray) -> np.ndarray:
    return np.array([[L[1, 1], -L[0, 1]], [-L[1, 0], L[0, 0]]])


def _slp_refine(g: _Gauges, L: np.ndarray, iters: int = 60):
    """Trust-region sequential LP on log a(L) + log b(adj L) - log det L.

    ``a`` and ``b`` are maxima of functions linear in the entries of ``L``, so
    the linearization is exact up to the determinant term.
    """
    L = L / math.sqrt(np.linalg.det(L))
    val = float(g.ratio(L[None])[0])
    rho = 0.05
    used = 0
    for used in range(1, iters + 1):
        if rho < 1e-13:
            break
        A = (g.cv @ L.T) @ g.dn.T
        B = (g.dv @ _adj(L).T) @ g.cn.T
        a, b = A.max(), B.max()
        # gradients of dn_j . L v_i and cn_l . adj(L) w_k in the entries of L
        ga = np.einsum("ja,ib->ijab", g.dn, g.cv).reshape(-1, 4)
        gb_adj = np.einsum("la,kb->klab", g.cn, g.dv).reshape(-1, 4)
        gb = np.column_stack([gb_adj[:, 3], -gb_adj[:, 1], -gb_adj[:, 2], gb_adj[:, 0]])
        keep_a = A.ravel() >= a - 0.5 * a
        keep_b = B.ravel() >= b - 0.5 * b
        rows_a = np.column_stack([ga[keep_a], -a * np.ones(keep_a.sum()), np.zeros(keep_a.sum())])
        rows_b = np.column_stack([gb[keep_b], np.zeros(keep_b.sum()), -b * np.ones(keep_b.sum())])
        A_ub = np.vstack([rows_a, rows_b])
        b_ub = np.concatenate([a - A.ravel()[keep_a], b - B.ravel()[keep_b]])
        grad_logdet = _adj(L).T.ravel() / np.linalg.det(L)
        c = np.concatenate([-grad_logdet, [1.0, 1.0]])
        bounds = [(-rho, rho)] * 4 + [(None, None)] * 2
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status != 0:
            break
        trial = L + res.x[:4].reshape(2, 2)
        det = np.linalg.det(trial)
        new = float(g.ratio(trial[None])[0]) if det > 0 else math.inf
        if new < val:
            L, val = trial / math.sqrt(det), new
            rho = min(2 * rho, 0.2)
        else:
            rho /= 4
    return val, L, used


def _ratios_chunked(g: _Gauges, mats: np.ndarray) -> np.ndarray:
    chunks = [mats[i:i + _CHUNK] for i in range(0, len(mats), _CHUNK)]
    workers = _threads()
    if workers == 1 or len(chunks) == 1:
        return np.concatenate([g.ratio(c) for c in chunks])
    with ThreadPoolExecutor(workers) as ex:
        return np.concatenate(list(ex.map(g.ratio, chunks)))


# ---------------------------------------------------------------------------
# extended mode


def _halfplanes(v: np.ndarray):
    e = np.roll(v, -1, axis=0) - v
    n = np.column_stack([e[:, 1], -e[:, 0]])
    return n, np.einsum("ij,ij->i", n, v)


def _max_inner(K: np.ndarray, dn: np.ndarray, dh: np.ndarray):
    """Largest s with s K + x inside the polygon {y : dn y <= dh}; returns (s, x)."""
    # rows: dn_l . (s k + x) <= dh_l for every vertex k and edge l
    a_s = (K @ dn.T).T.ravel()
    a_x = np.repeat(dn, len(K), axis=0)
    A = np.column_stack([a_s, a_x])
    b = np.repeat(dh, len(K))
    res = linprog([-1.0, 0.0, 0.0], A_ub=A, b_ub=b, bounds=[(0, None), (None, None), (None, None)],
                  method="highs")
    if res.status != 0:
        raise ConvergenceError("inner LP failed: " + res.message, math.inf)
    return res.x[0], res.x[1:]


def _min_outer(D: np.ndarray, kn: np.ndarray, kh: np.ndarray):
    """Smallest S with D inside S K + y, K = {x : kn x <= kh}; returns (S, y)."""
    # rows: kn_j . d <= S kh_j + kn_j . y
    a_s = -np.tile(kh, len(D))
    a_y = -np.tile(kn, (len(D), 1))
    A = np.column_stack([a_s, a_y])
    b = -(D @ kn.T).ravel()
    res = linprog([1.0, 0.0, 0.0], A_ub=A, b_ub=b, bounds=[(0, None), (None, None), (None, None)],
                  method="highs")
    if res.status != 0:
        raise ConvergenceError("outer LP failed: " + res.message, math.inf)
    return res.x[0], res.x[1:]


class _Extended:
    def __init__(self, C: np.ndarray, D: np.ndarray):
        self.cv = C
        self.dv = D
        self.dn, self.dh = _halfplanes(D)
        self.evals = 0

    def solve(self, L: np.ndarray):
        det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
        if not det > 0 or not np.all(np.isfinite(L)):
            return math.inf, None
        L = L / math.sqrt(det)
        K = self.cv @ L.T
        kn, kh = _halfplanes(K)
        self.evals += 1
        _, x = _max_inner(K, self.dn, self.dh)
        _, y = _min_outer(self.dv, kn, kh)
        # the LP values carry solver slack; recompute both scales exactly for
        # the returned translations so the containments hold to rounding
        s = float(np.min((self.dh - self.dn @ x)[:, None] / np.maximum(self.dn @ K.T, 1e-300)))
        S = float(np.max(((self.dv - y) @ kn.T) / kh))
        if not s > 0:
            return math.inf, None
        return S / s, (L, s, x, S, y)

    def ratio(self, L: np.ndarray) -> float:
        return self.solve(L)[0]


# ---------------------------------------------------------------------------


def _isotropic(v: np.ndarray) -> np.ndarray:
    """Linear map taking the centred polygon ``v`` to unit second moment (up to scale)."""
    a, b = v, np.roll(v, -1, axis=0)
    w = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    # fan triangles (0, a, b): integral of x x^T is w/24 (2aa + 2bb + ab + ba)
    M = (np.einsum("k,ki,kj->ij", w, a, a) * 2 + np.einsum("k,ki,kj->ij", w, b, b) * 2
         + np.einsum("k,ki,kj->ij", w, a, b) + np.einsum("k,ki,kj->ij", w, b, a))
    evals, evecs = np.linalg.eigh(M / w.sum())
    if evals.min() <= 0:
        raise DegenerateInputError("polygon has a singular second moment")
    return evecs @ np.diag(evals ** -0.5) @ evecs.T


def _prepare(C: ConvexPolygon, D: ConvexPolygon):
    """Centroids, isotropic normalizers and normalized vertices of both polygons."""
    if not isinstance(C, ConvexPolygon) or not isinstance(D, ConvexPolygon):
        raise DegenerateInputError("inputs must be ConvexPolygon instances")
    cc, cd = centroid(C), centroid(D)
    cv, dv = C.vertices - cc, D.vertices - cd
    wc, wd = _isotropic(cv), _isotropic(dv)
    return cc, cd, wc, wd, cv @ wc.T, dv @ wd.T


def _oriented(v: np.ndarray) -> np.ndarray:
    e = np.roll(v, -1, axis=0) - v
    turn = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return v if turn.sum() > 0 else v[::-1].copy()


def _refine_all(objective, starts, iters: int):
    """Nelder-Mead from each start; one (value, matrix) per start."""
    out = []
    for L0, v0 in starts:
        val, L = v0, L0
        if iters:
            res = minimize(lambda x: objective(x.reshape(2, 2)), L0.ravel(), method="Nelder-Mead",
                           options={"maxiter": iters, "xatol": 1e-13, "fatol": 1e-15})
            if not np.isfinite(res.fun):
                raise ConvergenceError("refinement produced a non-finite ratio", float(res.fun))
            if res.fun < val:
                val, L = float(res.fun), res.x.reshape(2, 2)
        out.append((val, L))
    return out


def _refine(objective, starts, iters: int):
    """Best (value, matrix) over all starts."""
    return min(_refine_all(objective, starts, iters), key=lambda r: r[0])


def _distinct_starts(mats: np.ndarray, vals: np.ndarray, k: int):
    order = np.argsort(vals, kind="stable")
    picked = []
    for i in order:
        if not np.isfinite(vals[i]):
            break
        if all(np.abs(mats[i] - mats[j]).max() > 0.05 for j in picked):
            picked.append(i)
        if len(picked) == k:
            break
    return [(mats[i], float(vals[i])) for i in picked]


def estimate_cen(C: ConvexPolygon, D: ConvexPolygon, cfg: Optional[EstimatorConfig] = None) -> EstimateResult:
    cfg = cfg or EstimatorConfig()
    if cfg.mode != "cen":
        cfg = replace(cfg, mode="cen")
    cc, cd, wc, wd, cv, dv = _prepare(C, D)
    grid = _grid_matrices(cfg)
    candidates = []
    evals = 0
    for refl in (np.eye(2), _REFLECT):
        g = _Gauges(_oriented(cv @ refl.T), dv)
        vals = _ratios_chunked(g, grid)
        evals += len(grid)
        # the trust-region iteration only accepts improving steps, so a larger
        # budget extends the same trajectory and can only lower the result
        runs = [_slp_refine(g, L0, cfg.refine_iters) for L0, _ in _distinct_starts(grid, vals, cfg.restarts)]
        evals += sum(r[2] for r in runs)
        val, L, _ = min(runs, key=lambda r: r[0])
        candidates.append((val, L, refl, g))
    val, L, refl, g = min(candidates, key=lambda c: c[0])
    L = L / math.sqrt(np.linalg.det(L))
    t = g.inner_scale(L)
    lin = np.linalg.inv(wd) @ (t * L @ refl) @ wc
    amap = AffineMap(lin, cd - lin @ cc)
    lam = float(val)
    verified = _verify(C, D, amap, lam, cd)
    return EstimateResult(max(1.0, lam) if verified else lam, amap, t, verified, cd.copy(), "cen", evals)


def estimate_extended(C: ConvexPolygon, D: ConvexPolygon, cfg: Optional[EstimatorConfig] = None) -> EstimateResult:
    cfg = cfg or EstimatorConfig.for_budget("default", "extended")
    if cfg.mode != "extended":
        cfg = replace(cfg, mode="extended")
    cc, cd, wc, wd, cv, dv = _prepare(C, D)
    grid = _grid_matrices(cfg)
    # any centroid-pinned map is feasible here, so the best one seeds the search
    seed = estimate_cen(C, D, EstimatorConfig(grid=(24, 12, 24), refine_iters=100, restarts=4))
    seed_lin = wd @ seed.best_map.matrix @ np.linalg.inv(wc)
    seed_flipped = np.linalg.det(seed_lin) < 0
    candidates = []
    evals = seed.evaluations
    for flipped, refl in ((False, np.eye(2)), (True, _REFLECT)):
        ex = _Extended(_oriented(cv @ refl.T), dv)
        vals = np.array([ex.ratio(L) for L in grid])
        starts = _distinct_starts(grid, vals, cfg.restarts)
        if flipped == seed_flipped:
            L0 = seed_lin @ refl
            L0 = L0 / math.sqrt(np.linalg.det(L0))
            starts.insert(0, (L0, ex.ratio(L0)))
        val, L = _refine(ex.ratio, starts, cfg.refine_iters)
        evals += ex.evals
        candidates.append((val, L, refl, ex))
    val, L, refl, ex = min(candidates, key=lambda c: c[0])
    lam, (Ln, s, x, S, y) = ex.solve(L)
    wdi = np.linalg.inv(wd)
    lin = wdi @ (s * Ln @ refl) @ wc
    # in normalized coordinates the inner image is s Ln refl cv + x
    amap = AffineMap(lin, cd + wdi @ x - lin @ cc)
    # and dv lies in S K + y = lam (s K + x) + (y - lam x), a homothety about z
    z = (y - lam * x) / (1.0 - lam) if abs(lam - 1.0) > 1e-12 else x
    z = cd + wdi @ z
    verified = _verify(C, D, amap, lam, z)
    return EstimateResult(max(1.0, lam) if verified else lam, amap, s, verified, z, "extended", evals)


def _verify(C: ConvexPolygon, D: ConvexPolygon, amap: AffineMap, lam: float, center, tol: float = 1e-9) -> bool:
    inner = apply(amap, C)
    outer = apply(scale_about(center, lam), inner)
    return contains_polygon(D, inner, tol) and contains_polygon(outer, D, tol)


def estimate(C: ConvexPolygon, D: ConvexPolygon, cfg: Optional[EstimatorConfig] = None) -> EstimateResult:
    cfg = cfg or EstimatorConfig()
    return estimate_extended(C, D, cfg) if cfg.mode == "extended" else estimate_cen(C, D, cfg)


# ---------------------------------------------------------------------------
# fixed configurations


PENTAGON_TRIANGLE_LAMBDA = (7.0 - math.sqrt(5.0)) / 2.0


@dataclass
class PentagonTriangle:
    P: ConvexPolygon
    T: ConvexPolygon
    Tstar: ConvexPolygon
    lam: float
    verified: bool
    y: float

    def __iter__(self):
        return iter((self.P, self.T, self.Tstar, self.lam, self.verified))


def pentagon_triangle_witness(tol: float = 1e-9) -> PentagonTriangle:
    """Regular pentagon P, the inscribed triangle T with centroid at the origin, and its homothet."""
    P = regular_polygon(5)
    a, b = P.vertices[1], P.vertices[2]  # angles 72 and 144 degrees
    u = (-0.5 - a[0]) / (b[0] - a[0])
    y = float(a[1] + u * (b[1] - a[1]))
    T = polygon_from_points([(1.0, 0.0), (-0.5, y), (-0.5, -y)])
    Tstar = apply(scale_about((0.0, 0.0), PENTAGON_TRIANGLE_LAMBDA), T)
    cents = [centroid(X) for X in (P, T, Tstar)]
    ok = all(np.abs(c).max() <= 1e-12 for c in cents)
    ok = ok and contains_polygon(P, T, tol) and contains_polygon(Tstar, P, tol)
    return PentagonTriangle(P, T, Tstar, PENTAGON_TRIANGLE_LAMBDA, bool(ok), y)


def unit_square() -> ConvexPolygon:
    return polygon_from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


def unit_triangle() -> ConvexPolygon:
    return polygon_from_points([(0, 0), (1, 0), (0, 1)])
