"""Dependency-free SVG rendering of ROC curves (step plots + legend)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["write_roc_svg"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def write_roc_svg(curves: dict, path, truncate_y: bool = False, title: str = "ROC") -> None:
    """curves maps a label to an (n, 2) array of (far_per_m2, pd) points."""
    y_lo = 0.5 if truncate_y else 0.0
    x_hi = max((float(np.asarray(c).reshape(-1, 2)[:, 0].max())
                for c in curves.values() if np.asarray(c).size), default=1.0)
    x_hi = x_hi if x_hi > 0 else 1.0

    def sx(far):
        return _ML + (far / x_hi) * (_W - _ML - _MR)

    def sy(pd):
        frac = (pd - y_lo) / (1.0 - y_lo)
        return _H - _MB - max(frac, 0.0) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        # axes
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" text-anchor="middle" '
        f'font-size="12">false alarms per square meter</text>',
        f'<text x="16" y="{(_MT + _H - _MB) / 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">probability of detection</text>',
    ]
    for i in range(5):
        far = x_hi * i / 4
        pd = y_lo + (1.0 - y_lo) * i / 4
        parts.append(
            f'<text x="{sx(far):.1f}" y="{_H - _MB + 16}" text-anchor="middle" '
            f'font-size="10">{_fmt(far)}</text>'
        )
        parts.append(
            f'<text x="{_ML - 6}" y="{sy(pd):.1f}" text-anchor="end" '
            f'font-size="10">{_fmt(pd)}</text>'
        )
        parts.append(
            f'<line x1="{_ML}" y1="{sy(pd):.1f}" x2="{_W - _MR}" y2="{sy(pd):.1f}" '
            f'stroke="#dddddd" stroke-width="0.5"/>'
        )

    for idx, (label, pts) in enumerate(curves.items()):
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
        color = _PALETTE[idx % len(_PALETTE)]
        if pts.size:
            # step curve: hold pd until the next far value
            coords = [(sx(pts[0, 0]), sy(pts[0, 1]))]
            for (f0, p0), (f1, p1) in zip(pts[:-1], pts[1:]):
                coords.append((sx(f1), sy(p0)))
                coords.append((sx(f1), sy(p1)))
            d = "M " + " L ".join(f"{x:.2f} {y:.2f}" for x, y in coords)
            parts.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 16 + 16 * idx
        parts.append(
            f'<line x1="{_W - _MR - 150}" y1="{ly}" x2="{_W - _MR - 120}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 114}" y="{ly + 4}" font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
