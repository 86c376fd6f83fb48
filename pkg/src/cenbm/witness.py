"""Constructive upper bound 69/17 on the centroid Banach-Mazur distance.

Given two convex polygons ``C`` and ``D``, :func:`construct` puts both in
canonical position, moves their centroids into ``T``, transforms ``D`` by
``tau``, translates both centroids to the origin and scales ``D`` by
``(3 - 2p) / (3 - 2r)``. The resulting bodies satisfy
``C' ⊂ D'' ⊂ f(p, q, r, s) C'`` and every containment in that chain is checked
numerically before a :class:`Witness` is returned.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import DomainError, ProofViolation
from .geometry import (
    AffineMap,
    ConvexPolygon,
    apply,
    centroid,
    compose,
    contains_polygon,
    scale_about,
    signed_distances,
    translation,
)
from .hexagon import AffineRegularHexagon, Star, star_over
from .normalize import NormalizedBody, in_triangle_T, in_triangle_Tplus, normalize, tau, tau_map

SQRT3 = math.sqrt(3.0)
BOUND = 69.0 / 17.0
STRICT_TOL = 1e-9


def f_ratio(p: float, q: float, r: float, s: float) -> float:
    """sqrt3 (3-2p)(3+r) / ((3-2r)(sqrt3 + sqrt3 p + q) - (3-2p) s)."""
    den = (3 - 2 * r) * (SQRT3 + SQRT3 * p + q) - (3 - 2 * p) * s
    if not den > 0:
        raise DomainError(f"f_ratio denominator {den} is not positive")
    return SQRT3 * (3 - 2 * p) * (3 + r) / den


def f_ratio_array(p, q, r, s) -> np.ndarray:
    """Vectorized :func:`f_ratio` without the domain check."""
    p, q, r, s = (np.asarray(x, dtype=float) for x in (p, q, r, s))
    return SQRT3 * (3 - 2 * p) * (3 + r) / ((3 - 2 * r) * (SQRT3 + SQRT3 * p + q) - (3 - 2 * p) * s)


def homothety_ratio(p: float, r: float) -> float:
    return (3 - 2 * p) / (3 - 2 * r)


def outer_vertex_4(p: float, q: float, r: float, s: float) -> np.ndarray:
    """Closed form of the outer star vertex beyond side d''_3 d''_4."""
    k = (3 - 2 * p) / (3 - 2 * r)
    return np.array([-k * (3 + r), -k * s])


def point_e(p: float, q: float, r: float, s: float) -> np.ndarray:
    """Where the line of side c'_3 c'_4 meets the horizontal through the outer vertex 4."""
    k = (3 - 2 * p) / (3 - 2 * r)
    x = SQRT3 / 3 * k * s - 1 - p - SQRT3 / 3 * q
    return np.array([x, -k * s])


@dataclass(frozen=True, eq=False)
class Witness:
    """``alpha(C) ⊂ beta(D) ⊂ lam * alpha(C)``, both centroids at the origin."""

    alpha: AffineMap
    beta: AffineMap
    lam: float
    swapped: bool
    tightened: Optional[float] = None

    def to_json(self) -> dict:
        out = {
            "alpha": self.alpha.to_list(),
            "beta": self.beta.to_list(),
            "lambda": self.lam,
            "swapped": self.swapped,
        }
        if self.tightened is not None:
            out["lambda_tightened"] = self.tightened
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Witness":
        return cls(
            AffineMap.from_json(data["alpha"]),
            AffineMap.from_json(data["beta"]),
            float(data["lambda"]),
            bool(data["swapped"]),
            data.get("lambda_tightened"),
        )


@dataclass(frozen=True, eq=False)
class ConstructionTrace:
    norm_c: NormalizedBody
    norm_d: NormalizedBody
    p: float
    q: float
    r_star: float
    s_star: float
    r: float
    s: float
    c_prime: ConvexPolygon
    hex_c_prime: AffineRegularHexagon
    star_c_prime: Star
    d_prime: ConvexPolygon
    hex_d_prime: AffineRegularHexagon
    rho: float
    d_dprime: ConvexPolygon
    hex_d_dprime: AffineRegularHexagon
    star_d_dprime: Star
    e: np.ndarray
    f: float
    hex_c_dprime: AffineRegularHexagon
    swapped: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def f_c_prime(self) -> ConvexPolygon:
        return apply(scale_about((0, 0), self.f), self.c_prime)

    def to_json(self) -> dict:
        def poly(pg):
            return pg.vertices.tolist()

        return {
            "p": self.p, "q": self.q, "r_star": self.r_star, "s_star": self.s_star,
            "r": self.r, "s": self.s, "rho": self.rho, "f": self.f, "swapped": self.swapped,
            "C_prime": poly(self.c_prime),
            "D_prime": poly(self.d_prime),
            "D_dprime": poly(self.d_dprime),
            "fC_prime": poly(self.f_c_prime),
            "H_C_prime": self.hex_c_prime.to_json(),
            "H_D_prime": self.hex_d_prime.to_json(),
            "H_D_dprime": self.hex_d_dprime.to_json(),
            "H_C_dprime": self.hex_c_dprime.to_json(),
            "S_C_prime_outer": self.star_c_prime.outer.tolist(),
            "S_D_dprime_outer": self.star_d_dprime.outer.tolist(),
            "e": self.e.tolist(),
            "diagnostics": self.diagnostics,
            "points": {k: v.tolist() for k, v in trace_points(self).items()},
        }


def trace_points(trace: ConstructionTrace) -> Dict[str, np.ndarray]:
    """Labeled points of the construction from their closed forms.

    Keys: ``o``, ``d''1``, ``d''6``, ``d''4bar``, ``e``, ``cbar'1``, ``cbar'6``.
    """
    p, q, r, s = trace.p, trace.q, trace.r, trace.s
    k = homothety_ratio(p, r)
    return {
        "o": np.zeros(2),
        "d''1": np.array([k * (1.5 - r), k * (SQRT3 / 2 - s)]),
        "d''6": np.array([k * (1.5 - r), k * (-SQRT3 / 2 - s)]),
        "d''4bar": outer_vertex_4(p, q, r, s),
        "e": point_e(p, q, r, s),
        "cbar'1": np.array([1.5 - p, SQRT3 / 2 - q]),
        "cbar'6": np.array([1.5 - p, -SQRT3 / 2 - q]),
    }


def _line_intersection(p0, d0, p1, d1) -> np.ndarray:
    a = np.column_stack([d0, -d1])
    t = np.linalg.solve(a, np.asarray(p1) - np.asarray(p0))
    return np.asarray(p0) + t[0] * np.asarray(d0)


class ChainGapWarning(UserWarning):
    """An intermediate containment of the construction failed while the end result may still hold."""


def _certified_ratio(inner: ConvexPolygon, outer: ConvexPolygon) -> float:
    """Best ratio certified by shrinking ``inner`` into ``outer`` about the origin."""
    g_out = outer.normals / outer.offsets[:, None]
    g_in = inner.normals / inner.offsets[:, None]
    t = 1.0 / (inner.vertices @ g_out.T).max()
    return float((outer.vertices @ g_in.T).max() / t)


def _check(name: str, excess: float, scale: float, tol: float, failures: list):
    """``excess`` is the worst signed distance outside; warns in the slack band."""
    if excess <= STRICT_TOL * scale:
        return
    if excess <= tol * scale:
        warnings.warn(f"{name}: containment holds only to {excess / scale:.2e} (relative)")
        return
    failures.append((name, excess / scale))


def _star_excess(star: Star, poly: ConvexPolygon) -> float:
    """Smallest tolerance at which ``poly ⊂ star`` passes (bisection on a monotone check)."""
    if star.contains_polygon(poly, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while not star.contains_polygon(poly, hi):
        hi *= 2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if star.contains_polygon(poly, mid):
            hi = mid
        else:
            lo = mid
    return hi


def construct(C: ConvexPolygon, D: ConvexPolygon, tol: float = 1e-7,
              hex_tol: float = 1e-9) -> Tuple[Witness, ConstructionTrace]:
    """Run the construction on ``(C, D)``; ``tol`` is the relative verification tolerance."""
    nc = normalize(C, hex_tol)
    nd = normalize(D, hex_tol)
    # compare p with r* before tau, as in the construction
    swapped = bool(nc.centroid[0] > nd.centroid[0])
    X, Y = (D, C) if swapped else (C, D)
    if swapped:
        nc, nd = nd, nc
    p, q = (float(x) for x in nc.centroid)
    r_star, s_star = (float(x) for x in nd.centroid)
    r, s = (float(x) for x in tau(nd.centroid))

    if not (in_triangle_T((p, q)) and in_triangle_T((r_star, s_star)) and in_triangle_Tplus((r, s))):
        raise ProofViolation("normalized centroids are outside T / T+")
    if not (q >= -1e-12 and s <= 1e-12 and p <= r + 1e-12):
        raise ProofViolation(f"ordering facts q >= 0, s <= 0, p <= r fail: {(p, q, r, s)}")

    canon = AffineRegularHexagon.canonical()
    to_c_prime = compose(translation((-p, -q)), nc.to_canonical)
    d_shift = compose(translation((-r, -s)), tau_map())
    to_d_prime = compose(d_shift, nd.to_canonical)
    rho = homothety_ratio(p, r)
    if rho < 1 - 1e-12:
        raise ProofViolation(f"homothety ratio {rho} < 1")
    to_d_dprime = compose(scale_about((0, 0), rho), to_d_prime)
    lam = f_ratio(p, q, r, s)

    c_prime = apply(to_c_prime, X)
    d_prime = apply(to_d_prime, Y)
    d_dprime = apply(scale_about((0, 0), rho), d_prime)

    hex_c_prime = canon.transformed(translation((-p, -q)))
    hex_d_prime = canon.transformed(d_shift)
    hex_d_dprime = hex_d_prime.transformed(scale_about((0, 0), rho))
    hex_c_dprime = hex_c_prime.transformed(scale_about((0, 0), lam))
    star_c = star_over(hex_c_prime)
    star_d = star_over(hex_d_dprime)

    # the outer vertex 4 of S(H_D'') lies on the side c''_3 c''_4
    e_geo = _line_intersection(hex_c_prime.vertices[2], hex_c_prime.vertices[3] - hex_c_prime.vertices[2],
                               star_d.outer[3], np.array([1.0, 0.0]))

    trace = ConstructionTrace(
        nc, nd, p, q, r_star, s_star, r, s, c_prime, hex_c_prime, star_c, d_prime, hex_d_prime,
        rho, d_dprime, hex_d_dprime, star_d, e_geo, lam, hex_c_dprime, swapped,
    )

    f_c_prime = trace.f_c_prime
    sc, sf = d_dprime.diameter, f_c_prime.diameter
    # intermediate links of the chain C' ⊂ S(H_C') ⊂ H_D'' ⊂ D'' ⊂ S(H_D'') ⊂ f·H_C' ⊂ f·C'
    links = {
        "S(H_C') ⊇ C'": _star_excess(star_c, c_prime) / sc,
        "H_D'' ⊇ S(H_C')": float(signed_distances(hex_d_dprime.polygon(), star_c.vertices()).max()) / sc,
        "D'' ⊇ H_D''": float(signed_distances(d_dprime, hex_d_dprime.vertices).max()) / sc,
        "f·H_C' ⊇ S(H_D'')": float(signed_distances(hex_c_dprime.polygon(), star_d.vertices()).max()) / sf,
        "S(H_D'') ⊇ D''": _star_excess(star_d, d_dprime) / sf,
    }
    final = {
        "D'' ⊇ C'": float(signed_distances(d_dprime, c_prime.vertices).max()) / sc,
        "f·C' ⊇ D''": float(signed_distances(f_c_prime, d_dprime.vertices).max()) / sf,
    }
    trace.diagnostics.update(links=links, final=final, certified_ratio=_certified_ratio(c_prime, d_dprime))
    broken = {k: v for k, v in links.items() if v > tol}
    if broken:
        trace.diagnostics["broken_links"] = broken
        warnings.warn(ChainGapWarning(f"chain links fail to verify: {broken}"))

    failures: list = []
    for name, excess in final.items():
        _check(name, excess, 1.0, tol, failures)
    if lam > BOUND + 1e-9:
        failures.append(("lambda <= 69/17", lam - BOUND))
    if failures:
        raise ProofViolation(
            f"construction failed to verify: {failures}; the constructed maps certify only "
            f"{trace.diagnostics['certified_ratio']:.6f}",
            trace,
            failures,
            trace.diagnostics["certified_ratio"],
        )

    if swapped:
        # pipeline gives a'(D) ⊂ b'(C) ⊂ f a'(D); restate with C first
        alpha = to_d_dprime
        beta = compose(scale_about((0, 0), lam), to_c_prime)
    else:
        alpha, beta = to_c_prime, to_d_dprime
    return Witness(alpha, beta, lam, bool(swapped)), trace


def verify_witness(C: ConvexPolygon, D: ConvexPolygon, w: Witness, tol: float = 1e-7) -> dict:
    """Check every invariant of ``w`` against the original polygons."""
    a = apply(w.alpha, C)
    b = apply(w.beta, D)
    big = apply(scale_about((0, 0), w.lam), a)
    scale = max(a.diameter, b.diameter)
    ca, cb = centroid(a), centroid(b)
    inner = float(signed_distances(b, a.vertices).max())
    outer = float(signed_distances(big, b.vertices).max())
    out = {
        "centroid_alpha": float(np.hypot(*ca)) / scale,
        "centroid_beta": float(np.hypot(*cb)) / scale,
        "inner_excess": inner / scale,
        "outer_excess": outer / big.diameter,
        "lambda": w.lam,
    }
    out["ok"] = bool(
        out["centroid_alpha"] <= 1e-9
        and out["centroid_beta"] <= 1e-9
        and out["inner_excess"] <= tol
        and out["outer_excess"] <= tol
        and w.lam <= BOUND + 1e-9
    )
    return out


def tighten(C: ConvexPolygon, D: ConvexPolygon, w: Witness, tol: float = STRICT_TOL, steps: int = 60) -> float:
    """Smallest ratio (by bisection) for which ``beta(D) ⊂ ratio * alpha(C)`` still verifies."""
    a = apply(w.alpha, C)
    b = apply(w.beta, D)
    sc = b.diameter

    def ok(lam: float) -> bool:
        return contains_polygon(apply(scale_about((0, 0), lam), a), b, tol * sc)

    lo, hi = 1.0, w.lam
    if ok(lo):
        return lo
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
