"""Minimal static SVG plotting: polyline charts and box charts.

Charts are built with xml.etree so the output is always well-formed XML.
This intentionally stays far below a plotting library: axes, ticks, labeled
polylines, circles and box glyphs are all the planner's reports need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.etree import ElementTree as ET

__all__ = ["Line", "Circle", "Figure", "box_chart"]

_MARGIN_LEFT = 72.0
_MARGIN_RIGHT = 24.0
_MARGIN_TOP = 36.0
_MARGIN_BOTTOM = 54.0
_FONT = "font-family:sans-serif;font-size:12px"


@dataclass
class Line:
    xs: list
    ys: list
    color: str = "black"
    width: float = 1.0
    label: str | None = None


@dataclass
class Circle:
    x: float
    y: float
    radius: float       # in data units
    stroke: str = "black"
    fill: str = "none"
    opacity: float = 1.0


@dataclass
class Figure:
    """A single x/y panel with data-space lines and circles."""

    title: str
    xlabel: str
    ylabel: str
    width: float = 640.0
    height: float = 480.0
    equal_aspect: bool = False
    lines: list = field(default_factory=list)
    circles: list = field(default_factory=list)

    def add_line(self, xs, ys, color="black", width=1.0, label=None):
        self.lines.append(Line(list(xs), list(ys), color, width, label))

    def add_circle(self, x, y, radius, stroke="black", fill="none", opacity=1.0):
        self.circles.append(Circle(x, y, radius, stroke, fill, opacity))

    def _data_bounds(self):
        xs, ys = [], []
        for line in self.lines:
            xs.extend(line.xs)
            ys.extend(line.ys)
        for c in self.circles:
            xs.extend((c.x - c.radius, c.x + c.radius))
            ys.extend((c.y - c.radius, c.y + c.radius))
        if not xs:
            xs, ys = [0.0, 1.0], [0.0, 1.0]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if x_hi - x_lo < 1e-12:
            x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
        if y_hi - y_lo < 1e-12:
            y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
        pad_x = 0.04 * (x_hi - x_lo)
        pad_y = 0.04 * (y_hi - y_lo)
        return x_lo - pad_x, x_hi + pad_x, y_lo - pad_y, y_hi + pad_y

    def to_svg(self) -> str:
        x_lo, x_hi, y_lo, y_hi = self._data_bounds()
        plot_w = self.width - _MARGIN_LEFT - _MARGIN_RIGHT
        plot_h = self.height - _MARGIN_TOP - _MARGIN_BOTTOM
        if self.equal_aspect:
            scale = min(plot_w / (x_hi - x_lo), plot_h / (y_hi - y_lo))
            x_mid, y_mid = 0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)
            x_lo, x_hi = x_mid - 0.5 * plot_w / scale, x_mid + 0.5 * plot_w / scale
            y_lo, y_hi = y_mid - 0.5 * plot_h / scale, y_mid + 0.5 * plot_h / scale

        def px(x):
            return _MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

        def py(y):
            return _MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

        svg = ET.Element("svg", {
            "xmlns": "http://www.w3.org/2000/svg",
            "width": f"{self.width:g}",
            "height": f"{self.height:g}",
            "viewBox": f"0 0 {self.width:g} {self.height:g}",
        })
        ET.SubElement(svg, "rect", {
            "x": "0", "y": "0", "width": f"{self.width:g}", "height": f"{self.height:g}",
            "fill": "white",
        })
        ET.SubElement(svg, "rect", {
            "x": f"{_MARGIN_LEFT:g}", "y": f"{_MARGIN_TOP:g}",
            "width": f"{plot_w:g}", "height": f"{plot_h:g}",
            "fill": "none", "stroke": "#404040",
        })
        for tx in _ticks(x_lo, x_hi):
            x = px(tx)
            ET.SubElement(svg, "line", {
                "x1": f"{x:.2f}", "y1": f"{_MARGIN_TOP + plot_h:.2f}",
                "x2": f"{x:.2f}", "y2": f"{_MARGIN_TOP + plot_h + 5:.2f}",
                "stroke": "#404040",
            })
            _text(svg, x, _MARGIN_TOP + plot_h + 18, _fmt(tx), anchor="middle")
        for ty in _ticks(y_lo, y_hi):
            y = py(ty)
            ET.SubElement(svg, "line", {
                "x1": f"{_MARGIN_LEFT - 5:.2f}", "y1": f"{y:.2f}",
                "x2": f"{_MARGIN_LEFT:.2f}", "y2": f"{y:.2f}",
                "stroke": "#404040",
            })
            _text(svg, _MARGIN_LEFT - 8, y + 4, _fmt(ty), anchor="end")

        for c in self.circles:
            rx = c.radius / (x_hi - x_lo) * plot_w
            ET.SubElement(svg, "circle", {
                "cx": f"{px(c.x):.2f}", "cy": f"{py(c.y):.2f}", "r": f"{rx:.2f}",
                "stroke": c.stroke, "fill": c.fill, "opacity": f"{c.opacity:g}",
            })
        for line in self.lines:
            points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(line.xs, line.ys))
            ET.SubElement(svg, "polyline", {
                "points": points, "fill": "none",
                "stroke": line.color, "stroke-width": f"{line.width:g}",
            })

        _text(svg, self.width / 2, _MARGIN_TOP - 12, self.title, anchor="middle", bold=True)
        _text(svg, self.width / 2, self.height - 12, self.xlabel, anchor="middle")
        _text(svg, 16, self.height / 2, self.ylabel, anchor="middle",
              transform=f"rotate(-90 16 {self.height / 2:g})")

        labeled = [l for l in self.lines if l.label]
        seen = []
        y_leg = _MARGIN_TOP + 14
        for line in labeled:
            if line.label in seen:
                continue
            seen.append(line.label)
            x0 = _MARGIN_LEFT + plot_w - 130
            ET.SubElement(svg, "line", {
                "x1": f"{x0:.2f}", "y1": f"{y_leg - 4:.2f}",
                "x2": f"{x0 + 24:.2f}", "y2": f"{y_leg - 4:.2f}",
                "stroke": line.color, "stroke-width": "2",
            })
            _text(svg, x0 + 30, y_leg, line.label)
            y_leg += 16

        return ET.tostring(svg, encoding="unicode", xml_declaration=True)


def _text(svg, x, y, s, anchor="start", bold=False, transform=None):
    attrs = {
        "x": f"{x:.2f}", "y": f"{y:.2f}",
        "style": _FONT + (";font-weight:bold" if bold else ""),
        "text-anchor": anchor,
    }
    if transform:
        attrs["transform"] = transform
    el = ET.SubElement(svg, "text", attrs)
    el.text = s


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e5 or abs(v) < 1e-3:
        return f"{v:.2e}"
    return f"{v:g}"


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0 or not math.isfinite(span):
        return [lo]
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if span / step <= target:
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * span:
        out.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return out


def box_chart(groups: dict[str, list[float]], title: str, ylabel: str,
              width: float = 480.0, height: float = 420.0) -> str:
    """Box-and-whisker chart (quartiles, median, min/max) per labeled group."""
    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": f"{width:g}", "height": f"{height:g}",
        "viewBox": f"0 0 {width:g} {height:g}",
    })
    ET.SubElement(svg, "rect", {
        "x": "0", "y": "0", "width": f"{width:g}", "height": f"{height:g}", "fill": "white",
    })
    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM
    ET.SubElement(svg, "rect", {
        "x": f"{_MARGIN_LEFT:g}", "y": f"{_MARGIN_TOP:g}",
        "width": f"{plot_w:g}", "height": f"{plot_h:g}",
        "fill": "none", "stroke": "#404040",
    })

    values = [v for vs in groups.values() for v in vs]
    if values:
        y_lo, y_hi = min(values), max(values)
    else:
        y_lo, y_hi = 0.0, 1.0
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.06 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    def py(v):
        return _MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * plot_h

    for ty in _ticks(y_lo, y_hi):
        y = py(ty)
        ET.SubElement(svg, "line", {
            "x1": f"{_MARGIN_LEFT - 5:.2f}", "y1": f"{y:.2f}",
            "x2": f"{_MARGIN_LEFT:.2f}", "y2": f"{y:.2f}", "stroke": "#404040",
        })
        _text(svg, _MARGIN_LEFT - 8, y + 4, _fmt(ty), anchor="end")

    n = max(len(groups), 1)
    slot = plot_w / n
    box_w = 0.4 * slot
    for i, (label, vals) in enumerate(groups.items()):
        cx = _MARGIN_LEFT + (i + 0.5) * slot
        _text(svg, cx, _MARGIN_TOP + plot_h + 18, label, anchor="middle")
        if not vals:
            _text(svg, cx, _MARGIN_TOP + plot_h / 2, "no data", anchor="middle")
            continue
        q = _quartiles(vals)
        for y1, y2 in ((q.low, q.q1), (q.q3, q.high)):
            ET.SubElement(svg, "line", {
                "x1": f"{cx:.2f}", "y1": f"{py(y1):.2f}",
                "x2": f"{cx:.2f}", "y2": f"{py(y2):.2f}", "stroke": "black",
            })
        for yv in (q.low, q.high):
            ET.SubElement(svg, "line", {
                "x1": f"{cx - box_w / 4:.2f}", "y1": f"{py(yv):.2f}",
                "x2": f"{cx + box_w / 4:.2f}", "y2": f"{py(yv):.2f}", "stroke": "black",
            })
        ET.SubElement(svg, "rect", {
            "x": f"{cx - box_w / 2:.2f}", "y": f"{py(q.q3):.2f}",
            "width": f"{box_w:.2f}", "height": f"{max(py(q.q1) - py(q.q3), 0.5):.2f}",
            "fill": "#9ecae1", "stroke": "black",
        })
        ET.SubElement(svg, "line", {
            "x1": f"{cx - box_w / 2:.2f}", "y1": f"{py(q.median):.2f}",
            "x2": f"{cx + box_w / 2:.2f}", "y2": f"{py(q.median):.2f}",
            "stroke": "black", "stroke-width": "2",
        })

    _text(svg, width / 2, _MARGIN_TOP - 12, title, anchor="middle", bold=True)
    _text(svg, 16, height / 2, ylabel, anchor="middle",
          transform=f"rotate(-90 16 {height / 2:g})")
    return ET.tostring(svg, encoding="unicode", xml_declaration=True)


@dataclass(frozen=True)
class _Quartiles:
    low: float
    q1: float
    median: float
    q3: float
    high: float


def _quartiles(vals: list[float]) -> _Quartiles:
    s = sorted(vals)

    def quantile(p: float) -> float:
        k = p * (len(s) - 1)
        f = math.floor(k)
        c = min(f + 1, len(s) - 1)
        return s[f] + (k - f) * (s[c] - s[f])

    return _Quartiles(s[0], quantile(0.25), quantile(0.5), quantile(0.75), s[-1])
