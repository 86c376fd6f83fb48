"""Numerical certification of max g = 69/17 on Q and max f <= 69/17 on T x T+.

``g(p, r) = f(p, 0, r, 0)`` simplifies (the sqrt 3 cancels) to

    g(p, r) = (3 - 2p)(3 + r) / ((3 - 2r)(1 + p))

with partial derivatives

    dg/dp = -5 (3 + r) / ((3 - 2r)(1 + p)^2)
    dg/dr =  9 (3 - 2p) / ((1 + p)(3 - 2r)^2)

Both are checked against central differences before the interior search
trusts them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import CertificationError, DomainError
from .normalize import Q_BOUNDS, T_VERTICES, TPLUS_VERTICES, in_T_batch, in_Tplus_batch
from .witness import BOUND, f_ratio_array

P_MAX = Q_BOUNDS[0][1]
R_MAX = Q_BOUNDS[1][1]
ARGMAX_PR = (0.0, R_MAX)
ARGMAX_PQRS = (0.0, 0.0, R_MAX, 0.0)


def g_value(p, r):
    """g on scalars or arrays; raises :class:`DomainError` at the poles r = 3/2, p = -1."""
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.5) or np.any(p <= -1.0):
        raise DomainError("g is defined for r < 3/2 and p > -1")
    out = (3 - 2 * p) * (3 + r) / ((3 - 2 * r) * (1 + p))
    return float(out) if out.ndim == 0 else out


def g_exact(p: Fraction, r: Fraction) -> Fraction:
    return (3 - 2 * p) * (3 + r) / ((3 - 2 * r) * (1 + p))


def g_dp(p, r):
    return -5.0 * (3 + r) / ((3 - 2 * r) * (1 + p) ** 2)


def g_dr(p, r):
    return 9.0 * (3 - 2 * p) / ((1 + p) * (3 - 2 * r) ** 2)


CORNERS = {
    "(0,0)": (Fraction(0), Fraction(0)),
    "(4/21,0)": (Fraction(4, 21), Fraction(0)),
    "(0,2/7)": (Fraction(0), Fraction(2, 7)),
    "(4/21,2/7)": (Fraction(4, 21), Fraction(2, 7)),
}


@dataclass
class BoundReport:
    max_value: float
    argmax: Tuple[float, ...]
    corner_table: Dict[str, float] = field(default_factory=dict)
    corner_exact: Dict[str, str] = field(default_factory=dict)
    interior_critical_points: List[Tuple[float, float]] = field(default_factory=list)
    edge_extrema: List[Tuple[str, float]] = field(default_factory=list)
    monotonicity_checks: Dict[str, bool] = field(default_factory=dict)
    grid_residual: float = math.nan
    derivative_check_max_rel_error: float = math.nan
    samples: int = 0
    certified: bool = False
    failures: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["argmax"] = list(self.argmax)
        d["interior_critical_points"] = [list(x) for x in self.interior_critical_points]
        d["edge_extrema"] = [list(x) for x in self.edge_extrema]
        # checks that were not run are reported as null rather than NaN
        for k in ("grid_residual", "derivative_check_max_rel_error"):
            if not math.isfinite(d[k]):
                d[k] = None
        return d


def check_partials(n: int = 10_000, h: float = 1e-6, seed: int = 0) -> float:
    """Max relative error of the closed-form partials against central differences on Q."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(0, P_MAX, n)
    r = rng.uniform(0, R_MAX, n)
    fd_p = (g_value(p + h, r) - g_value(p - h, r)) / (2 * h)
    fd_r = (g_value(p, r + h) - g_value(p, r - h)) / (2 * h)
    err_p = np.abs(fd_p - g_dp(p, r)) / np.abs(g_dp(p, r))
    err_r = np.abs(fd_r - g_dr(p, r)) / np.abs(g_dr(p, r))
    return float(max(err_p.max(), err_r.max()))


def _interior_candidates(grid_n: int) -> List[Tuple[float, float]]:
    """Cells of a grid over Q where both partials could vanish simultaneously."""
    ps = np.linspace(0, P_MAX, grid_n + 1)
    rs = np.linspace(0, R_MAX, grid_n + 1)
    P, R = np.meshgrid(ps, rs, indexing="ij")
    hits = None
    for deriv in (g_dp, g_dr):
        vals = deriv(P, R)
        # Lipschitz pad from the largest node-to-node change on the grid
        lip = max(np.abs(np.diff(vals, axis=0)).max(), np.abs(np.diff(vals, axis=1)).max())
        corners = np.stack([vals[:-1, :-1], vals[1:, :-1], vals[:-1, 1:], vals[1:, 1:]])
        lo = corners.min(0) - lip
        hi = corners.max(0) + lip
        cell = (lo <= 0) & (hi >= 0)
        hits = cell if hits is None else hits & cell
    idx = np.argwhere(hits)
    return [(float(0.5 * (ps[i] + ps[i + 1])), float(0.5 * (rs[j] + rs[j + 1]))) for i, j in idx]


def _edge_extrema(n: int = 10_000) -> Tuple[List[Tuple[str, float]], Dict[str, bool]]:
    t = np.linspace(0, 1, n + 2)[1:-1]
    edges = {
        "p=0": (np.zeros(n), t * R_MAX, g_dr, "r"),
        "p=4/21": (np.full(n, P_MAX), t * R_MAX, g_dr, "r"),
        "r=0": (t * P_MAX, np.zeros(n), g_dp, "p"),
        "r=2/7": (t * P_MAX, np.full(n, R_MAX), g_dp, "p"),
    }
    extrema: List[Tuple[str, float]] = []
    flags: Dict[str, bool] = {}
    for name, (p, r, deriv, var) in edges.items():
        d = deriv(p, r)
        sign = np.sign(d)
        changes = np.flatnonzero(sign[1:] != sign[:-1])
        flags[f"edge {name} monotone"] = len(changes) == 0 and bool(np.all(d != 0))
        coord = r if var == "r" else p
        extrema.extend((name, float(coord[k])) for k in changes)
    return extrema, flags


def certify_g_max_on_Q(grid_n: int = 512, strict: bool = True) -> BoundReport:
    """Interior, edge and corner analysis of g over Q = [0, 4/21] x [0, 2/7]."""
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    rep = BoundReport(max_value=-math.inf, argmax=(math.nan, math.nan))
    rep.derivative_check_max_rel_error = check_partials()
    if rep.derivative_check_max_rel_error > 1e-6:
        rep.failures.append(f"closed-form partials disagree with differences: {rep.derivative_check_max_rel_error:.2e}")

    rep.interior_critical_points = _interior_candidates(grid_n)
    rep.edge_extrema, rep.monotonicity_checks = _edge_extrema()

    for label, (p, r) in CORNERS.items():
        exact = g_exact(p, r)
        val = g_value(float(p), float(r))
        rep.corner_table[label] = val
        rep.corner_exact[label] = str(exact)
        if abs(val - float(exact)) > 1e-12:
            rep.failures.append(f"corner {label} float/exact mismatch")
    best = max(rep.corner_table, key=rep.corner_table.get)

    ps = np.linspace(0, P_MAX, grid_n + 1)
    rs = np.linspace(0, R_MAX, grid_n + 1)
    P, R = np.meshgrid(ps, rs, indexing="ij")
    G = g_value(P, R)
    k = np.unravel_index(np.argmax(G), G.shape)
    grid_max = float(G[k])
    rep.grid_residual = grid_max - BOUND
    rep.samples = G.size
    rep.max_value = max(grid_max, rep.corner_table[best])
    rep.argmax = (float(P[k]), float(R[k])) if grid_max > rep.corner_table[best] else tuple(
        float(x) for x in CORNERS[best])
    rep.monotonicity_checks["interior dg/dp < 0"] = bool(np.all(g_dp(P, R) < 0))
    rep.monotonicity_checks["interior dg/dr > 0"] = bool(np.all(g_dr(P, R) > 0))

    if rep.interior_critical_points:
        rep.failures.append(f"{len(rep.interior_critical_points)} interior cells admit a critical point")
    if rep.edge_extrema:
        rep.failures.append(f"{len(rep.edge_extrema)} edge sign changes")
    if best != "(0,2/7)" or abs(rep.corner_table[best] - BOUND) > 1e-12:
        rep.failures.append(f"largest corner is {best} = {rep.corner_table[best]!r}")
    if rep.grid_residual > 1e-12:
        rep.failures.append(f"grid exceeds 69/17 by {rep.grid_residual:.3e}")
    rep.certified = not rep.failures
    if strict and not rep.certified:
        raise CertificationError("; ".join(rep.failures), rep.interior_critical_points + rep.edge_extrema)
    return rep


# ---------------------------------------------------------------------------
# four-dimensional check


def _sample_triangle_rejection(tri: np.ndarray, member, n: int, rng) -> np.ndarray:
    lo, hi = tri.min(0), tri.max(0)
    out = []
    have = 0
    while have < n:
        pts = rng.uniform(lo, hi, size=(2 * (n - have) + 16, 2))
        pts = pts[member(pts, 0.0)]
        out.append(pts)
        have += len(pts)
    return np.vstack(out)[:n]


def _triangle_lattice(tri: np.ndarray, k: int) -> np.ndarray:
    pts = []
    for i in range(k + 1):
        for j in range(k + 1 - i):
            a, b = i / k, j / k
            pts.append(tri[0] + a * (tri[1] - tri[0]) + b * (tri[2] - tri[0]))
    return np.array(pts)


def _project_triangle(x: np.ndarray, tri: np.ndarray, member) -> np.ndarray:
    if member(x[None, :], 0.0)[0]:
        return x
    best, bd = None, math.inf
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        e = b - a
        t = min(1.0, max(0.0, float((x - a) @ e / (e @ e))))
        y = a + t * e
        d = float(np.hypot(*(x - y)))
        if d < bd:
            best, bd = y, d
    return best


def _project(x: np.ndarray) -> np.ndarray:
    pq = _project_triangle(x[:2], T_VERTICES, in_T_batch)
    rs = _project_triangle(x[2:], TPLUS_VERTICES, in_Tplus_batch)
    return np.concatenate([pq, rs])


def maximize_f_on_domain(samples: int = 1_000_000, refine_iters: int = 200, seed: int = 0,
                         lattice: int = 20, top: int = 100, strict: bool = True) -> BoundReport:
    """Sampled and refined maximum of f over T x T+, with the monotonicity checks in q and s."""
    if samples < 100_000:
        raise ValueError("samples must be at least 1e5")
    rng = np.random.default_rng(seed)
    pq = _sample_triangle_rejection(T_VERTICES, in_T_batch, samples, rng)
    rs = _sample_triangle_rejection(TPLUS_VERTICES, in_Tplus_batch, samples, rng)
    lt = _triangle_lattice(T_VERTICES, lattice)
    lp = _triangle_lattice(TPLUS_VERTICES, lattice)
    strat = np.array([(a[0], a[1], b[0], b[1]) for a in lt for b in lp])
    X = np.vstack([np.column_stack([pq, rs]), strat])
    p, q, r, s = X.T
    F = f_ratio_array(p, q, r, s)

    h = 1e-7
    dq = (f_ratio_array(p, q + h, r, s) - f_ratio_array(p, q - h, r, s)) / (2 * h)
    ds = (f_ratio_array(p, q, r, s + h) - f_ratio_array(p, q, r, s - h)) / (2 * h)
    rep = BoundReport(max_value=float(F.max()), argmax=tuple(float(x) for x in X[np.argmax(F)]))
    rep.samples = len(X)
    rep.monotonicity_checks = {
        "df/dq < 0 at every sample": bool(np.all(dq < 0)),
        "df/ds > 0 at every sample": bool(np.all(ds > 0)),
    }

    def neg_f(x):
        y = _project(x)
        return -float(f_ratio_array(*y))

    seeds = X[np.argsort(F)[-top:]]
    for x0 in seeds:
        res = minimize(neg_f, x0, method="Nelder-Mead",
                       options={"maxiter": refine_iters, "xatol": 1e-14, "fatol": 1e-15})
        y = _project(res.x)
        val = float(f_ratio_array(*y))
        if val > rep.max_value:
            rep.max_value = val
            rep.argmax = tuple(float(v) for v in y)

    dist = float(np.max(np.abs(np.array(rep.argmax) - np.array(ARGMAX_PQRS))))
    rep.grid_residual = rep.max_value - BOUND
    if rep.grid_residual > 1e-9:
        over = X[F > BOUND + 1e-9]
        rep.failures.append(f"{len(over)} samples exceed 69/17")
    if dist > 1e-3:
        rep.failures.append(f"argmax {rep.argmax} is {dist:.2e} from (0, 0, 2/7, 0)")
    for k, ok in rep.monotonicity_checks.items():
        if not ok:
            rep.failures.append(f"monotonicity check failed: {k}")
    rep.certified = not rep.failures
    if strict and not rep.certified:
        raise CertificationError("; ".join(rep.failures), [rep.argmax])
    return rep
