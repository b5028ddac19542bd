"""Stokes diagrams: one closed curve per circle of the class, growth drawn
outside and decay inside, with apples and singular rays."""
from __future__ import annotations

import cmath
import math
import xml.etree.ElementTree as ET

from .exponents import apples
from .stokes import IrregularClass, adjoint_cover, singular_directions

SIZE = 400
SAMPLES = 360
AMPLITUDE = 0.12


def _modulation(q, t: float) -> float:
    """sign(Re q) smoothed: cos of the phase of the leading term at z = e^(2 pi i t)."""
    e, c = q.leading
    return math.cos(cmath.phase(complex(c)) - 2 * math.pi * float(e) * t)


def diagram_data(Q: IrregularClass) -> dict:
    """Polylines (in units of the base radius) and marked points."""
    curves = []
    nonzero = [(c, m) for c, m in Q.entries if not c.is_zero()]
    adj = [(c, m) for c, m in adjoint_cover(Q) if not c.is_zero()]
    radii = [1.0 + 0.35 * (k + 1) for k in range(len(nonzero) + len(adj))]
    base = [[math.cos(2 * math.pi * k / SAMPLES), math.sin(2 * math.pi * k / SAMPLES)]
            for k in range(SAMPLES + 1)]
    curves.append({"kind": "base", "radius": 1.0, "points": base})
    apple_marks = []
    for kind, items, offset in (("class", nonzero, 0), ("adjoint", adj, len(nonzero))):
        for k, (circle, _) in enumerate(items):
            R = radii[offset + k]
            q = circle.representative
            n = SAMPLES * circle.ram
            pts = []
            for j in range(n + 1):
                t = circle.ram * j / n
                r = R * (1 + AMPLITUDE * _modulation(q, t) * 0.35 / R)
                a = 2 * math.pi * t
                pts.append([r * math.cos(a), r * math.sin(a)])
            curves.append({"kind": kind, "radius": R, "ram": circle.ram, "points": pts})
            if kind == "adjoint":
                for ap in apples(circle):
                    r = R * (1 - AMPLITUDE * 0.35 / R)
                    a = ap.angle
                    apple_marks.append({"turns": ap.turns_json(), "sheet": ap.sheet,
                                        "point": [r * math.cos(a), r * math.sin(a)]})
    S = singular_directions(Q)
    outer = (radii[-1] if radii else 1.0) + 0.3
    rays = [{"turns": d.direction.turns_json(), "dim": d.dim,
             "points": [[0.0, 0.0], [outer * math.cos(d.direction.angle), outer * math.sin(d.direction.angle)]]}
            for d in S.directions]
    return {"extent": outer, "curves": curves, "apples": apple_marks, "rays": rays}


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def diagram_svg(Q: IrregularClass) -> str:
    data = diagram_data(Q)
    scale = (SIZE / 2 - 20) / data["extent"]
    cx = cy = SIZE / 2

    def xy(p):
        return cx + scale * p[0], cy - scale * p[1]

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(SIZE), height=str(SIZE),
                     viewBox=f"0 0 {SIZE} {SIZE}")
    styles = {"base": ("#000000", "1.5", None), "class": ("#1f5fa8", "1.5", None),
              "adjoint": ("#a83a1f", "1", "4 3")}
    for curve in data["curves"]:
        stroke, width, dash = styles[curve["kind"]]
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(xy, curve["points"]))
        attrs = {"points": pts, "fill": "none", "stroke": stroke, "stroke-width": width,
                 "class": curve["kind"]}
        if dash:
            attrs["stroke-dasharray"] = dash
        ET.SubElement(svg, "polyline", attrs)
    for ray in data["rays"]:
        (x1, y1), (x2, y2) = map(xy, ray["points"])
        ET.SubElement(svg, "line", {"x1": _fmt(x1), "y1": _fmt(y1), "x2": _fmt(x2), "y2": _fmt(y2),
                                    "stroke": "#555555", "stroke-width": "1", "class": "ray"})
        label = ET.SubElement(svg, "text", {"x": _fmt(x2), "y": _fmt(y2), "font-size": "11",
                                            "class": "ray-label"})
        label.text = str(ray["turns"])
    for ap in data["apples"]:
        x, y = xy(ap["point"])
        ET.SubElement(svg, "circle", {"cx": _fmt(x), "cy": _fmt(y), "r": "4", "fill": "#a83a1f",
                                      "class": "apple"})
    return ET.tostring(svg, encoding="unicode")
