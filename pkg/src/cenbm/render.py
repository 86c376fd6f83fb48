"""SVG figures of a construction trace and of the pentagon-triangle configuration."""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np
from xml.sax.saxutils import escape

from .hexagon import AffineRegularHexagon, star_over

WIDTH = 800
MARGIN = 0.05


class Scene:
    """Collects shapes in model coordinates and writes them with a fitted viewBox."""

    def __init__(self, title: str = ""):
        self.title = title
        self.items: List[Tuple[str, np.ndarray, dict]] = []

    def polygon(self, pts, stroke="#000", fill="none", width=1.5, dash: Optional[str] = None, label=None,
                opacity: float = 0.08):
        self.items.append(("polygon", np.asarray(pts, float), dict(stroke=stroke, fill=fill, width=width,
                                                                   dash=dash, label=label, opacity=opacity)))

    def point(self, pt, label: str, color="#000", below: bool = False):
        self.items.append(("point", np.asarray(pt, float).reshape(1, 2), dict(color=color, label=label,
                                                                           below=below)))

    def line(self, a, b, stroke="#888", width=1.0, dash: Optional[str] = "4 3"):
        self.items.append(("line", np.array([a, b], float), dict(stroke=stroke, width=width, dash=dash)))

    def bounds(self):
        pts = np.vstack([it[1] for it in self.items])
        return pts.min(0), pts.max(0)

    def to_svg(self) -> str:
        lo, hi = self.bounds()
        span = hi - lo
        pad = MARGIN * max(span.max(), 1e-9)
        lo, hi = lo - pad, hi + pad
        span = hi - lo
        height = WIDTH * span[1] / span[0]
        k = WIDTH / span[0]
        unit = 1.0 / k  # one screen pixel in model units

        def xy(p):
            # flip y so the picture reads with the usual orientation
            return f"{p[0]:.6f},{(lo[1] + hi[1] - p[1]):.6f}"

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0f}" '
            f'viewBox="{lo[0]:.6f} {lo[1]:.6f} {span[0]:.6f} {span[1]:.6f}">',
        ]
        if self.title:
            out.append(f"<title>{escape(self.title)}</title>")
        labels = []
        legend = []
        for kind, pts, st in self.items:
            if kind == "polygon":
                dash = f' stroke-dasharray="{_dash(st["dash"], unit)}"' if st["dash"] else ""
                fill = f'fill="{st["fill"]}" fill-opacity="{st["opacity"]}"' if st["fill"] != "none" else 'fill="none"'
                out.append(f'<polygon points="{" ".join(xy(p) for p in pts)}" {fill} '
                           f'stroke="{st["stroke"]}" stroke-width="{st["width"] * unit:.6f}"{dash}/>')
                if st["label"]:
                    legend.append((st["label"], st["stroke"], st["dash"]))
            elif kind == "line":
                dash = f' stroke-dasharray="{_dash(st["dash"], unit)}"' if st["dash"] else ""
                a, b = (xy(p).split(",") for p in pts)
                out.append(f'<line x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" stroke="{st["stroke"]}" '
                           f'stroke-width="{st["width"] * unit:.6f}"{dash}/>')
            else:
                c = xy(pts[0]).split(",")
                out.append(f'<circle cx="{c[0]}" cy="{c[1]}" r="{3.5 * unit:.6f}" fill="{st["color"]}"/>')
                labels.append((pts[0], st["label"], st["below"]))
        for p, text, below in labels:
            c = xy(p + np.array([5, -16 if below else 5]) * unit).split(",")
            out.append(f'<text x="{c[0]}" y="{c[1]}" font-size="{14 * unit:.6f}" fill="#000" '
                       f'font-family="serif">{escape(text)}</text>')
        # legend in the top left corner, in screen-sized units
        for i, (text, color, dash) in enumerate(legend):
            y = lo[1] + (18 + 18 * i) * unit
            x0 = lo[0] + 10 * unit
            d = f' stroke-dasharray="{_dash(dash, unit)}"' if dash else ""
            out.append(f'<line x1="{x0:.6f}" y1="{y - 4 * unit:.6f}" x2="{x0 + 24 * unit:.6f}" y2="{y - 4 * unit:.6f}" '
                       f'stroke="{color}" stroke-width="{2 * unit:.6f}"{d}/>')
            out.append(f'<text x="{x0 + 30 * unit:.6f}" y="{y:.6f}" font-size="{13 * unit:.6f}" fill="#000" '
                       f'font-family="serif">{escape(text)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _dash(spec: str, unit: float) -> str:
    return " ".join(f"{float(x) * unit:.6f}" for x in spec.split())


def _hexagon(data: dict) -> AffineRegularHexagon:
    return AffineRegularHexagon.from_json(data)


def render_trace(trace: dict) -> str:
    """Construction diagram from the JSON form of a trace (``ConstructionTrace.to_json``)."""
    sc = Scene("construction diagram")
    h_c = _hexagon(trace["H_C_prime"])
    h_dd = _hexagon(trace["H_D_dprime"])
    h_cc = _hexagon(trace["H_C_dprime"])
    sc.polygon(trace["fC_prime"], stroke="#1f77b4", dash="6 4", label="f C'")
    sc.polygon(h_cc.vertices, stroke="#1f77b4", width=1.0, dash="2 3", label="H_C''")
    sc.polygon(star_over(h_dd).boundary(), stroke="#d62728", width=1.0, dash="2 3", label="S(H_D'')")
    sc.polygon(trace["D_dprime"], stroke="#d62728", fill="#d62728", label="D''")
    sc.polygon(h_dd.vertices, stroke="#d62728", width=1.0, label="H_D''")
    sc.polygon(star_over(h_c).boundary(), stroke="#1f77b4", width=1.0, dash="2 3", label="S(H_C')")
    sc.polygon(trace["C_prime"], stroke="#1f77b4", fill="#1f77b4", label="C'")
    sc.polygon(h_c.vertices, stroke="#1f77b4", width=1.0, label="H_C'")
    pts = trace["points"]
    sc.line(pts["d''4bar"], pts["o"])
    sc.point(pts["o"], "o")
    sc.point(pts["d''4bar"], "d''4", "#d62728")
    sc.point(pts["e"], "e", "#1f77b4")
    sc.point(pts["d''1"], "d''1", "#d62728")
    sc.point(pts["cbar'1"], "c'1", "#1f77b4", below=True)
    return sc.to_svg()


def render_pentagon_triangle() -> str:
    from .estimate import pentagon_triangle_witness

    w = pentagon_triangle_witness()
    sc = Scene("pentagon and triangle")
    sc.polygon(w.Tstar.vertices, stroke="#d62728", dash="6 4", label="T*")
    sc.polygon(w.P.vertices, stroke="#000", fill="#000", label="P")
    sc.polygon(w.T.vertices, stroke="#1f77b4", label="T")
    sc.line((-0.5, -1.2), (-0.5, 1.2))
    sc.point((0.0, 0.0), "o")
    return sc.to_svg()


def write(svg: str, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
