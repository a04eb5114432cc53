"""SVG 1.1 pictures of two-dimensional fans: rays, shaded chambers, dashed limit rays."""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import IoError

SIZE = 480
RADIUS = 200
SHADES = ("#dbe7f3", "#f3e3cf")


def _unit(x: float, y: float) -> tuple:
    n = math.hypot(x, y)
    return x / n, y / n


def _point(direction: tuple, r: float = RADIUS) -> tuple:
    """Screen coordinates; the y axis points up in the picture."""
    ux, uy = _unit(*direction)
    c = SIZE / 2
    return c + r * ux, c - r * uy


def _fmt(p: tuple) -> str:
    return f"{p[0]:.2f},{p[1]:.2f}"


def fan_svg(fan, depth_label: str = "", axis_labels=("N1", "N2")) -> str:
    """SVG text for a fan with integral ``rays`` (ordered) and QuadRay ``closure``."""
    rays = list(fan.rays)
    if not rays:
        raise ValueError("fan has no rays")
    c = SIZE / 2
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    for i, (a, b) in enumerate(zip(rays, rays[1:])):
        pa, pb = _point(a), _point(b)
        parts.append(f'<polygon points="{_fmt((c, c))} {_fmt(pa)} {_fmt(pb)}" '
                     f'fill="{SHADES[i % 2]}" stroke="none"/>')
    for r in rays:
        p = _point(r)
        parts.append(f'<line x1="{c}" y1="{c}" x2="{p[0]:.2f}" y2="{p[1]:.2f}" stroke="#1f3b57" stroke-width="1"/>')
    for r in getattr(fan, "closure", ()) or ():
        p = _point(r.as_floats(), RADIUS + 10)
        q = _point(r.as_floats(), RADIUS + 24)
        parts.append(f'<line x1="{c}" y1="{c}" x2="{p[0]:.2f}" y2="{p[1]:.2f}" stroke="#b0302a" '
                     f'stroke-width="1.5" stroke-dasharray="6,4"/>')
        parts.append(f'<text x="{q[0]:.2f}" y="{q[1]:.2f}" font-family="serif" font-size="12" '
                     f'text-anchor="middle" fill="#b0302a">{escape(_closure_label(r))}</text>')
    ax, ay = axis_labels
    parts.append(f'<text x="{SIZE - 20}" y="{c - 6}" font-family="serif" font-size="12">{escape(ax)}</text>')
    parts.append(f'<text x="{c + 6}" y="16" font-family="serif" font-size="12">{escape(ay)}</text>')
    if depth_label:
        parts.append(f'<text x="10" y="{SIZE - 10}" font-family="serif" font-size="12">{escape(depth_label)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _closure_label(ray) -> str:
    if ray.x == 0:
        return "slope ∞"
    return f"slope {ray.slope()}"


def emit_fan_svg(fan, out, depth_label: str = "", axis_labels=("N1", "N2")) -> Path:
    text = fan_svg(fan, depth_label, axis_labels)
    path = Path(out)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path
