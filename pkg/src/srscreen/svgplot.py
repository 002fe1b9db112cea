"""Minimal SVG line charts for curve overlays; no rendering dependencies."""

from __future__ import annotations

from pathlib import Path

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 64, 24, 40, 56


def _scale(v: float, lo: float, hi: float, out_lo: float, out_hi: float) -> float:
    if hi == lo:
        return (out_lo + out_hi) / 2
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo)


def line_chart(
    series: list[tuple[str, list[tuple[float, float]]]],
    title: str,
    xlabel: str,
    ylabel: str,
    x_range: tuple[float, float] | None = None,
    y_range: tuple[float, float] | None = None,
) -> str:
    """Render labeled (x, y) polylines; single-point series become markers."""
    xs = [p[0] for _, pts in series for p in pts]
    ys = [p[1] for _, pts in series for p in pts]
    if not xs:
        raise ValueError("no points to plot")
    x_lo, x_hi = x_range if x_range else (min(xs), max(xs))
    y_lo, y_hi = y_range if y_range else (min(ys), max(ys))
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x: float) -> float:
        return _scale(x, x_lo, x_hi, _ML, _W - _MR)

    def py(y: float) -> float:
        return _scale(y, y_lo, y_hi, _H - _MB, _MT)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}"'
        f' viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
    ]
    # axes frame and ticks
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}"'
        f' height="{_H - _MT - _MB}" fill="none" stroke="#333"/>'
    )
    for i in range(6):
        fx = x_lo + (x_hi - x_lo) * i / 5
        fy = y_lo + (y_hi - y_lo) * i / 5
        parts.append(
            f'<line x1="{px(fx):.1f}" y1="{_H - _MB}" x2="{px(fx):.1f}"'
            f' y2="{_H - _MB + 5}" stroke="#333"/>'
            f'<text x="{px(fx):.1f}" y="{_H - _MB + 18}" text-anchor="middle">{fx:.2f}</text>'
        )
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(fy):.1f}" x2="{_ML}" y2="{py(fy):.1f}" stroke="#333"/>'
            f'<text x="{_ML - 8}" y="{py(fy) + 4:.1f}" text-anchor="end">{fy:.2f}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 16}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle"'
        f' transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.1f})">{ylabel}</text>'
    )
    for i, (label, pts) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        if len(pts) == 1:
            x, y = pts[0]
            parts.append(
                f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="5" fill="{color}"/>'
            )
        else:
            coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        ly = _MT + 16 + 16 * i
        parts.append(
            f'<line x1="{_W - _MR - 150}" y1="{ly}" x2="{_W - _MR - 126}" y2="{ly}"'
            f' stroke="{color}" stroke-width="3"/>'
            f'<text x="{_W - _MR - 120}" y="{ly + 4}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_chart(path: str | Path, *args, **kwargs) -> None:
    Path(path).write_text(line_chart(*args, **kwargs), encoding="utf-8")
