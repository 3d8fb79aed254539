"""Static SVG line plots of a run: trajectories, time-to-go, accelerations, speed and lead angle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .sim import RunRecord

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
TARGET_COLOUR = "#222222"


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(count, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


@dataclass
class _Series:
    x: np.ndarray
    y: np.ndarray
    colour: str
    label: str
    dashed: bool = False


@dataclass
class Axes:
    title: str
    xlabel: str
    ylabel: str
    equal_aspect: bool = False
    series: list[_Series] = field(default_factory=list)

    def line(self, x: Sequence[float], y: Sequence[float], colour: str, label: str = "", dashed: bool = False) -> None:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if keep.any():
            self.series.append(_Series(x[keep], y[keep], colour, label, dashed))

    def _limits(self) -> tuple[float, float, float, float]:
        if not self.series:
            return 0.0, 1.0, 0.0, 1.0
        xs = np.concatenate([s.x for s in self.series])
        ys = np.concatenate([s.y for s in self.series])
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
        if x1 - x0 < 1e-12:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 - y0 < 1e-12:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.04 * (y1 - y0)
        return float(x0), float(x1), float(y0 - pad), float(y1 + pad)

    def render(self, left: float, top: float, width: float, height: float) -> str:
        x0, x1, y0, y1 = self._limits()
        if self.equal_aspect:
            # same metres per pixel on both axes
            scale = max((x1 - x0) / width, (y1 - y0) / height)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            x0, x1 = cx - 0.5 * scale * width, cx + 0.5 * scale * width
            y0, y1 = cy - 0.5 * scale * height, cy + 0.5 * scale * height

        def px(v):
            return left + (v - x0) / (x1 - x0) * width

        def py(v):
            return top + height - (v - y0) / (y1 - y0) * height

        parts = [
            f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(width)}" height="{_fmt(height)}" '
            'fill="white" stroke="#444" stroke-width="1"/>',
            f'<text x="{_fmt(left + width / 2)}" y="{_fmt(top - 10)}" text-anchor="middle" '
            f'font-size="14" font-weight="bold">{escape(self.title)}</text>',
            f'<text x="{_fmt(left + width / 2)}" y="{_fmt(top + height + 38)}" text-anchor="middle" '
            f'font-size="12">{escape(self.xlabel)}</text>',
            f'<text x="{_fmt(left - 52)}" y="{_fmt(top + height / 2)}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 {_fmt(left - 52)} {_fmt(top + height / 2)})">{escape(self.ylabel)}</text>',
        ]
        for t in nice_ticks(x0, x1):
            X = px(t)
            parts.append(f'<line x1="{_fmt(X)}" y1="{_fmt(top)}" x2="{_fmt(X)}" y2="{_fmt(top + height)}" stroke="#eee"/>')
            parts.append(
                f'<text x="{_fmt(X)}" y="{_fmt(top + height + 16)}" text-anchor="middle" font-size="10">{t:g}</text>'
            )
        for t in nice_ticks(y0, y1):
            Y = py(t)
            parts.append(f'<line x1="{_fmt(left)}" y1="{_fmt(Y)}" x2="{_fmt(left + width)}" y2="{_fmt(Y)}" stroke="#eee"/>')
            parts.append(
                f'<text x="{_fmt(left - 6)}" y="{_fmt(Y + 3)}" text-anchor="end" font-size="10">{t:g}</text>'
            )
        for s in self.series:
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(s.x, s.y))
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{s.colour}" stroke-width="1.5"{dash}/>')
        labelled = [s for s in self.series if s.label]
        for k, s in enumerate(labelled):
            ly = top + 14 + 16 * k
            lx = left + width - 110
            parts.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 4)}" x2="{_fmt(lx + 20)}" y2="{_fmt(ly - 4)}" stroke="{s.colour}" stroke-width="2"/>')
            parts.append(f'<text x="{_fmt(lx + 26)}" y="{_fmt(ly)}" font-size="11">{escape(s.label)}</text>')
        return "\n".join(parts)


class Figure:
    """A vertical stack of axes rendered to one SVG document."""

    def __init__(self, width: int = 760, panel_height: int = 320) -> None:
        self.width = width
        self.panel_height = panel_height
        self.axes: list[Axes] = []

    def add_axes(self, title: str, xlabel: str, ylabel: str, equal_aspect: bool = False) -> Axes:
        ax = Axes(title, xlabel, ylabel, equal_aspect)
        self.axes.append(ax)
        return ax

    def to_svg(self) -> str:
        margin_l, margin_r, margin_t, gap = 80, 20, 40, 70
        inner_w = self.width - margin_l - margin_r
        height = margin_t + len(self.axes) * (self.panel_height + gap)
        body = [
            ax.render(margin_l, margin_t + k * (self.panel_height + gap), inner_w, self.panel_height)
            for k, ax in enumerate(self.axes)
        ]
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{height}" '
            f'viewBox="0 0 {self.width} {height}" font-family="sans-serif">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n' + "\n".join(body) + "\n</svg>\n"
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_svg(), encoding="utf-8")


def _colour(i: int) -> str:
    return PALETTE[i % len(PALETTE)]


def _active_mask(record: RunRecord, i: int) -> np.ndarray:
    """Rows up to and including pursuer ``i``'s interception."""
    t_hit = record.summary.interception_times[i]
    return record.times <= (t_hit if t_hit is not None else np.inf) + 1e-12


def trajectory_figure(record: RunRecord) -> Figure:
    fig = Figure(panel_height=480)
    ax = fig.add_axes("Trajectories", "x [m]", "y [m]", equal_aspect=True)
    for i in range(record.n_pursuers):
        m = _active_mask(record, i)
        ax.line(record.pursuer_states[m, i, 0], record.pursuer_states[m, i, 1], _colour(i), f"P{i + 1}")
    last = max((t for t in record.summary.interception_times if t is not None), default=record.times[-1])
    m = record.times <= last + 1e-12
    ax.line(record.target_states[m, 0], record.target_states[m, 1], TARGET_COLOUR, "Target", dashed=True)
    return fig


def tgo_figure(record: RunRecord) -> Figure:
    fig = Figure()
    ax = fig.add_axes("Time-to-go", "t [s]", "t_go [s]")
    for i in range(record.n_pursuers):
        ax.line(record.times, record.tgo[:, i], _colour(i), f"P{i + 1}")
    return fig


def acceleration_figure(record: RunRecord) -> Figure:
    fig = Figure()
    ax = fig.add_axes("Filtered acceleration", "t [s]", "a [m/s^2]")
    for i in range(record.n_pursuers):
        m = _active_mask(record, i)
        ax.line(record.times[m], record.a_filt[m, i], _colour(i), f"P{i + 1}")
    return fig


def speed_lead_figure(record: RunRecord) -> Figure:
    fig = Figure(panel_height=260)
    v_ax = fig.add_axes("Speed", "t [s]", "V [m/s]")
    d_ax = fig.add_axes("Lead angle", "t [s]", "delta [deg]")
    for i in range(record.n_pursuers):
        m = _active_mask(record, i)
        v_ax.line(record.times[m], record.pursuer_states[m, i, 2], _colour(i), f"P{i + 1}")
        d_ax.line(record.times[m], np.degrees(record.delta[m, i]), _colour(i), f"P{i + 1}")
    return fig


PLOTS = {
    "trajectories.svg": trajectory_figure,
    "time_to_go.svg": tgo_figure,
    "accelerations.svg": acceleration_figure,
    "speed_lead_angle.svg": speed_lead_figure,
}


def write_plots(record: RunRecord, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    written = []
    for name, build in PLOTS.items():
        path = out / name
        build(record).save(path)
        written.append(path)
    return written
