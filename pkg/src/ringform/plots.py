"""Hand-rolled SVG renderers for trajectory, error, and diagnostics plots.

Polyline-based, no plotting dependency.  Error magnitudes use a log10 axis
with a floor clamp at 1e-16; everything else is linear.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .dynamics import TrajectoryLog

LOG_FLOOR = 1e-16

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#bcbd22",
    "#e377c2",
    "#7f7f7f",
)


def _pts(xs: np.ndarray, ys: np.ndarray) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))


def _polyline(xs, ys, color: str, width: float = 1.2, dash: str | None = None) -> str:
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="{width}"'
        f'{dash_attr} points="{_pts(xs, ys)}"/>'
    )


def _text(x: float, y: float, s: str, size: int = 11, anchor: str = "start") -> str:
    return (
        f'<text x="{x:.1f}" y="{y:.1f}" font-family="sans-serif" '
        f'font-size="{size}" text-anchor="{anchor}">{escape(s)}</text>'
    )


def _document(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    bg = f'<rect width="{width}" height="{height}" fill="white"/>'
    return "\n".join([head, bg, *body, "</svg>"]) + "\n"


class _Axes:
    """Maps data coordinates into an SVG pixel box and draws a frame."""

    def __init__(self, x0, y0, w, h, xlim, ylim):
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xmin, self.xmax = xlim
        self.ymin, self.ymax = ylim
        if self.xmax <= self.xmin:
            self.xmax = self.xmin + 1.0
        if self.ymax <= self.ymin:
            self.ymax = self.ymin + 1.0

    def px(self, x):
        return self.x0 + (np.asarray(x) - self.xmin) / (self.xmax - self.xmin) * self.w

    def py(self, y):
        return self.y0 + self.h - (np.asarray(y) - self.ymin) / (self.ymax - self.ymin) * self.h

    def frame(self, title: str, xlabel: str, ylabel: str) -> list[str]:
        parts = [
            f'<rect x="{self.x0}" y="{self.y0}" width="{self.w}" height="{self.h}" '
            f'fill="none" stroke="#444" stroke-width="1"/>',
            _text(self.x0 + self.w / 2, self.y0 - 6, title, 12, "middle"),
            _text(self.x0 + self.w / 2, self.y0 + self.h + 28, xlabel, 11, "middle"),
            _text(self.x0 - 8, self.y0 + self.h / 2, ylabel, 11, "end"),
            _text(self.x0, self.y0 + self.h + 14, f"{self.xmin:.4g}", 9),
            _text(self.x0 + self.w, self.y0 + self.h + 14, f"{self.xmax:.4g}", 9, "end"),
            _text(self.x0 - 4, self.y0 + self.h, f"{self.ymin:.4g}", 9, "end"),
            _text(self.x0 - 4, self.y0 + 10, f"{self.ymax:.4g}", 9, "end"),
        ]
        return parts


def plot_trajectories(log: TrajectoryLog) -> str:
    """Agent paths with the initial ring dashed and the final ring solid."""
    zs = np.array([s.positions for s in log.states])  # (samples, n, 2)
    n = zs.shape[1]
    xmin, xmax = zs[:, :, 0].min(), zs[:, :, 0].max()
    ymin, ymax = zs[:, :, 1].min(), zs[:, :, 1].max()
    pad = 0.08 * max(xmax - xmin, ymax - ymin, 1e-9)
    # equal aspect: widen the short side
    span = max(xmax - xmin, ymax - ymin) + 2 * pad
    cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
    ax = _Axes(60, 30, 480, 480, (cx - span / 2, cx + span / 2), (cy - span / 2, cy + span / 2))
    body = ax.frame("formation trajectories", "x", "y")
    ring0 = np.vstack([zs[0], zs[0][:1]])
    ring1 = np.vstack([zs[-1], zs[-1][:1]])
    body.append(_polyline(ax.px(ring0[:, 0]), ax.py(ring0[:, 1]), "#888", 1.0, "6,4"))
    for i in range(n):
        c = _PALETTE[i % len(_PALETTE)]
        body.append(_polyline(ax.px(zs[:, i, 0]), ax.py(zs[:, i, 1]), c, 0.9))
        body.append(
            f'<circle cx="{float(ax.px(zs[-1, i, 0])):.2f}" '
            f'cy="{float(ax.py(zs[-1, i, 1])):.2f}" r="3.5" fill="{c}"/>'
        )
    body.append(_polyline(ax.px(ring1[:, 0]), ax.py(ring1[:, 1]), "#222", 1.4))
    return _document(600, 560, body)


def plot_errors(log: TrajectoryLog) -> str:
    """Semilog magnitudes |eps_i(t)| per agent plus V(t)."""
    t = log.times()
    eps = np.abs(log.eps_matrix())
    v = log.V()
    n = eps.shape[1]
    ylog = np.log10(np.maximum(np.column_stack([eps, v]), LOG_FLOOR))
    ax = _Axes(70, 30, 560, 360, (t[0], t[-1]), (ylog.min() - 0.3, ylog.max() + 0.3))
    body = ax.frame("angle errors and Lyapunov function", "t", "log10")
    for i in range(n):
        yi = np.log10(np.maximum(eps[:, i], LOG_FLOOR))
        body.append(_polyline(ax.px(t), ax.py(yi), _PALETTE[i % len(_PALETTE)], 0.8))
    body.append(_polyline(ax.px(t), ax.py(np.log10(np.maximum(v, LOG_FLOOR))), "#000", 1.6))
    body.append(_text(ax.x0 + 6, ax.y0 + 14, "black: V(t); colors: |eps_i(t)|", 10))
    return _document(680, 440, body)


def plot_diagnostics(log: TrajectoryLog) -> str:
    """Stacked panels of rho, angle sum, and minimum pairwise distance."""
    t = log.times()
    panels = [
        ("rho = sum of edge lengths", log.rho()),
        ("angle sum (rad)", log.theta_sum()),
        ("min pairwise distance", log.min_dist()),
    ]
    body: list[str] = []
    y0 = 30
    for title, y in panels:
        lo, hi = float(y.min()), float(y.max())
        margin = 0.05 * max(hi - lo, 1e-12 * max(abs(hi), 1.0), 1e-15)
        ax = _Axes(70, y0, 560, 140, (t[0], t[-1]), (lo - margin, hi + margin))
        body += ax.frame(title, "t" if title == panels[-1][0] else "", "")
        body.append(_polyline(ax.px(t), ax.py(y), "#1f77b4", 1.2))
        y0 += 190
    return _document(680, y0 + 10, body)
