"""Minimal SVG writer for maps (north up, east right) and simple charts."""
from __future__ import annotations

import math
from html import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


class Canvas:
    """Accumulates SVG elements in pixel coordinates."""

    def __init__(self, width: int = 720, height: int = 720):
        self.width = width
        self.height = height
        self.items: list[str] = []

    def add(self, element: str) -> None:
        self.items.append(element)

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None, opacity=1.0):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" stroke="{stroke}" '
            f'stroke-width="{width}" stroke-opacity="{opacity}"{extra}/>'
        )

    def polyline(self, pts, stroke="#000", width=1.0, fill="none", opacity=1.0):
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        self.add(
            f'<polyline points="{coords}" fill="{fill}" stroke="{stroke}" stroke-width="{width}" '
            f'stroke-opacity="{opacity}"/>'
        )

    def circle(self, x, y, r, stroke="none", fill="#000", width=1.0, opacity=1.0):
        self.add(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{fill}" fill-opacity="{opacity}" '
            f'stroke="{stroke}" stroke-width="{width}"/>'
        )

    def path(self, d: str, fill="none", stroke="#000", width=1.0, opacity=1.0):
        self.add(
            f'<path d="{d}" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}" stroke-width="{width}" '
            'fill-rule="evenodd"/>'
        )

    def rect(self, x, y, w, h, fill="#000", opacity=1.0):
        self.add(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="{fill}" '
            f'fill-opacity="{opacity}"/>'
        )

    def text(self, x, y, s, size=12, anchor="start", fill="#000"):
        self.add(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" font-family="sans-serif" '
            f'text-anchor="{anchor}" fill="{fill}">{escape(str(s))}</text>'
        )

    def render(self) -> str:
        body = "\n".join(self.items)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="100%" height="100%" fill="#fff"/>\n{body}\n</svg>\n'
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())


class MapView:
    """Canvas with a north-east world frame, equal scale on both axes."""

    def __init__(self, north_range, east_range, size: int = 720, margin: int = 40):
        n0, n1 = north_range
        e0, e1 = east_range
        span = max(n1 - n0, e1 - e0, 1e-9)
        self.scale = (size - 2 * margin) / span
        self.n_mid = 0.5 * (n0 + n1)
        self.e_mid = 0.5 * (e0 + e1)
        self.canvas = Canvas(size, size)
        self.size = size

    def xy(self, north: float, east: float) -> tuple[float, float]:
        x = 0.5 * self.size + (east - self.e_mid) * self.scale
        y = 0.5 * self.size - (north - self.n_mid) * self.scale
        return x, y

    def sector(self, center, r_in, r_out, start, width, fill="#9ecae1", opacity=0.35):
        """Annular sector between compass bearings ``start`` and ``start + width``."""
        n_steps = max(8, int(96 * width / (2 * math.pi)))
        angles = [start + width * k / n_steps for k in range(n_steps + 1)]
        outer = [self.xy(center.north + r_out * math.cos(a), center.east + r_out * math.sin(a)) for a in angles]
        inner = [self.xy(center.north + r_in * math.cos(a), center.east + r_in * math.sin(a)) for a in reversed(angles)]
        if width >= 2 * math.pi - 1e-9:
            d = "M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in outer) + " Z"
            if r_in > 0:
                d += " M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in inner) + " Z"
        else:
            d = "M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in outer + inner) + " Z"
        self.canvas.path(d, fill=fill, stroke="#3182bd", width=1.0, opacity=opacity)

    def ring(self, center, radius, stroke="#555", dash=None):
        x, y = self.xy(center.north, center.east)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.canvas.add(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(radius * self.scale)}" fill="none" '
            f'stroke="{stroke}" stroke-width="1"{extra}/>'
        )

    def segment(self, a, b, **kw):
        self.canvas.line(*self.xy(*a), *self.xy(*b), **kw)

    def points(self, pts, r=1.5, fill="#000", opacity=0.8):
        for n, e in pts:
            self.canvas.circle(*self.xy(n, e), r, fill=fill, opacity=opacity)

    def polyline(self, pts, **kw):
        self.canvas.polyline([self.xy(n, e) for n, e in pts], **kw)

    def label(self, north, east, s, **kw):
        x, y = self.xy(north, east)
        self.canvas.text(x + 4, y - 4, s, **kw)


class Chart:
    """Axes with linear scales for line plots and bar histograms."""

    def __init__(self, canvas: Canvas, box, x_range, y_range, title="", x_label="", y_label=""):
        self.c = canvas
        self.x0, self.y0, self.w, self.h = box
        self.xr = x_range if x_range[1] > x_range[0] else (x_range[0], x_range[0] + 1)
        self.yr = y_range if y_range[1] > y_range[0] else (y_range[0], y_range[0] + 1)
        c = canvas
        c.line(self.x0, self.y0 + self.h, self.x0 + self.w, self.y0 + self.h)
        c.line(self.x0, self.y0, self.x0, self.y0 + self.h)
        c.text(self.x0 + self.w / 2, self.y0 - 10, title, size=14, anchor="middle")
        c.text(self.x0 + self.w / 2, self.y0 + self.h + 34, x_label, anchor="middle")
        c.text(self.x0 - 8, self.y0 - 10, y_label, anchor="start")
        for k in range(5):
            fx = self.xr[0] + (self.xr[1] - self.xr[0]) * k / 4
            fy = self.yr[0] + (self.yr[1] - self.yr[0]) * k / 4
            x, y = self.px(fx, self.yr[0])[0], self.px(self.xr[0], fy)[1]
            c.text(x, self.y0 + self.h + 16, f"{fx:.4g}", size=10, anchor="middle")
            c.text(self.x0 - 6, y + 4, f"{fy:.4g}", size=10, anchor="end")

    def px(self, x, y):
        fx = (x - self.xr[0]) / (self.xr[1] - self.xr[0])
        fy = (y - self.yr[0]) / (self.yr[1] - self.yr[0])
        return self.x0 + fx * self.w, self.y0 + self.h - fy * self.h

    def series(self, xs, ys, color, width=1.5):
        pts = [self.px(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
        if len(pts) > 1:
            self.c.polyline(pts, stroke=color, width=width)

    def bars(self, edges, counts, color, opacity=0.45):
        for lo, hi, n in zip(edges[:-1], edges[1:], counts):
            if n <= 0:
                continue
            x1, y1 = self.px(lo, n)
            x2, y2 = self.px(hi, self.yr[0])
            self.c.rect(x1, y1, x2 - x1, y2 - y1, fill=color, opacity=opacity)

    def legend(self, entries):
        for k, (name, color) in enumerate(entries):
            y = self.y0 + 14 + 16 * k
            x = self.x0 + self.w - 170
            self.c.rect(x, y - 9, 12, 10, fill=color)
            self.c.text(x + 18, y, name, size=11)
