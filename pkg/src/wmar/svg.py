"""Minimal SVG line charts (axes, ticks, legend) with no plotting dependency."""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 55


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(x) for x in np.arange(start, hi + step * 1e-9, step)]


def _num(x: float) -> str:
    return f"{x:.6g}"


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi <= ylo:
            yhi = ylo + 1.0
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi

    def x(self, v):
        return LEFT + (v - self.xlo) / (self.xhi - self.xlo) * (W - LEFT - RIGHT)

    def y(self, v):
        return H - BOTTOM - (v - self.ylo) / (self.yhi - self.ylo) * (H - TOP - BOTTOM)


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str) -> list[str]:
    out = [
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{H - BOTTOM}" x2="{W - RIGHT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<text x="{(LEFT + W - RIGHT) / 2:.1f}" y="{H - 12}" text-anchor="middle" '
        f'font-size="13">{escape(xlabel)}</text>',
        f'<text x="16" y="{(TOP + H - BOTTOM) / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {(TOP + H - BOTTOM) / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(fr.xlo, fr.xhi):
        px = fr.x(t)
        out.append(f'<line x1="{px:.2f}" y1="{H - BOTTOM}" x2="{px:.2f}" y2="{H - BOTTOM + 5}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{H - BOTTOM + 18}" text-anchor="middle" '
                   f'font-size="11">{_num(t)}</text>')
    for t in _ticks(fr.ylo, fr.yhi):
        py = fr.y(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{py:.2f}" x2="{LEFT}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{py + 4:.2f}" text-anchor="end" '
                   f'font-size="11">{_num(t)}</text>')
    return out


def _polyline(fr: _Frame, xs, ys, color: str, width: float = 1.5) -> str:
    pts = " ".join(f"{fr.x(x):.2f},{fr.y(y):.2f}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{pts}"/>'


def _wrap(body: list[str]) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">\n' + "\n".join(body) + "\n</svg>\n")


def line_chart(series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
               title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """One polyline per ``(label, xs, ys)`` with a legend on the right."""
    xs_all = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.zeros(1)
    ys_all = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.zeros(1)
    fr = _Frame(xs_all.min(), xs_all.max(), min(0.0, ys_all.min()), ys_all.max() * 1.05)
    body = _axes(fr, title, xlabel, ylabel)
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        body.append(_polyline(fr, xs, ys, color))
        ly = TOP + 10 + 20 * k
        body.append(f'<line x1="{W - RIGHT + 15}" y1="{ly}" x2="{W - RIGHT + 40}" y2="{ly}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{W - RIGHT + 45}" y="{ly + 4}" font-size="12">{escape(label)}</text>')
    return _wrap(body)


def quantile_fan(p: Sequence[float], curves: np.ndarray, title: str = "") -> str:
    """Quantile functions over time; later instants are drawn lighter."""
    curves = np.atleast_2d(np.asarray(curves, float))
    fr = _Frame(0.0, 1.0, 0.0, 1.0)
    body = _axes(fr, title, "p", "quantile")
    n = curves.shape[0]
    for t, row in enumerate(curves):
        light = 15 + int(70 * t / max(n - 1, 1))
        body.append(_polyline(fr, p, row, f"hsl(215,70%,{light}%)", 1.0))
    return _wrap(body)
