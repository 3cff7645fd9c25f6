"""Minimal SVG output for diagnostics: polylines, polygons, ellipses, circles."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

import numpy as np


class SvgCanvas:
    """Drawing surface in world coordinates (y up) mapped onto a fixed-width image."""

    def __init__(self, xmin, xmax, ymin, ymax, width: int = 800, margin: float = 0.05):
        dx, dy = xmax - xmin, ymax - ymin
        pad = margin * max(dx, dy, 1e-9)
        self.xmin, self.ymax = xmin - pad, ymax + pad
        span_x, span_y = dx + 2 * pad, dy + 2 * pad
        self.scale = width / span_x
        self.width = width
        self.height = int(math.ceil(span_y * self.scale))
        self.items: list[str] = []

    def _pt(self, x, y):
        return (x - self.xmin) * self.scale, (self.ymax - y) * self.scale

    def _points(self, pts) -> str:
        return " ".join("%.3f,%.3f" % self._pt(x, y) for x, y in np.asarray(pts, dtype=float))

    def _style(self, stroke, fill, width, opacity) -> str:
        return f'stroke={quoteattr(stroke)} fill={quoteattr(fill)} stroke-width="{width}" opacity="{opacity:.3f}"'

    def polyline(self, pts, stroke="black", width=1.0, opacity=1.0):
        if len(pts) >= 2:
            self.items.append(f'<polyline points="{self._points(pts)}" {self._style(stroke, "none", width, opacity)}/>')

    def polygon(self, pts, stroke="black", fill="none", width=1.0, opacity=1.0):
        self.items.append(f'<polygon points="{self._points(pts)}" {self._style(stroke, fill, width, opacity)}/>')

    def ellipse(self, cx, cy, a, b, theta, stroke="black", fill="none", width=1.0, opacity=1.0):
        px, py = self._pt(cx, cy)
        # the y flip turns a counter-clockwise world rotation into a clockwise one
        self.items.append(
            f'<ellipse cx="{px:.3f}" cy="{py:.3f}" rx="{a * self.scale:.3f}" ry="{b * self.scale:.3f}" '
            f'transform="rotate({-math.degrees(theta):.4f} {px:.3f} {py:.3f})" {self._style(stroke, fill, width, opacity)}/>'
        )

    def circle(self, cx, cy, r, stroke="black", fill="none", width=1.0, opacity=1.0):
        px, py = self._pt(cx, cy)
        self.items.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="{r * self.scale:.3f}" {self._style(stroke, fill, width, opacity)}/>')

    def text(self, x, y, s, size=12):
        px, py = self._pt(x, y)
        self.items.append(f'<text x="{px:.3f}" y="{py:.3f}" font-size="{size}" font-family="sans-serif">{escape(s)}</text>')

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n<rect width="100%" height="100%" fill="white"/>\n'
        )
        return head + "\n".join(self.items) + "\n</svg>\n"
