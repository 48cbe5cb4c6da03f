"""Standalone SVG line charts: a metric against node count, one line per protocol."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from statistics import mean
from xml.sax.saxutils import escape

from .metrics import RunRecord

METRICS = {
    "delivery_ratio": "Delivery ratio (fraction)",
    "avg_hops": "Average hops (relays)",
    "avg_e2e_delay": "Average end-to-end delay (s)",
}
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 60


class EmptySelectionError(ValueError):
    pass


def series(records: list[RunRecord], metric: str, case: str) -> dict[str, list[tuple[int, float]]]:
    """Mean of ``metric`` over seeds for each (protocol, num_nodes) in ``case``."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; valid metrics: {', '.join(METRICS)}")
    groups: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in records:
        if r.case == case:
            groups[r.protocol][r.num_nodes].append(getattr(r, metric))
    if not groups:
        raise EmptySelectionError(f"no records for case {case!r}")
    return {p: sorted((n, mean(v)) for n, v in pts.items()) for p, pts in sorted(groups.items())}


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    step = (hi - lo) / count
    return [lo + i * step for i in range(count + 1)]


def render_svg(data: dict[str, list[tuple[int, float]]], metric: str, case: str) -> str:
    xs = [x for pts in data.values() for x, _ in pts]
    ys = [y for pts in data.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(0.0, min(ys)), max(ys)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def px(x):
        return LEFT + (pw / 2 if x_hi == x_lo else (x - x_lo) / (x_hi - x_lo) * pw)

    def py(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{LEFT + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">'
        f"{escape(METRICS[metric])}, case {escape(case)}</text>",
        f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    for x in sorted(set(xs)):
        out.append(f'<line x1="{px(x):.1f}" y1="{TOP + ph}" x2="{px(x):.1f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(x):.1f}" y="{TOP + ph + 18}" text-anchor="middle" font-size="11">{x}</text>')
    for y in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{LEFT - 5}" y1="{py(y):.1f}" x2="{LEFT}" y2="{py(y):.1f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{py(y) + 4:.1f}" text-anchor="end" font-size="11">{y:.3g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{H - 15}" text-anchor="middle" font-size="12">'
               "Number of nodes (vehicles)</text>")
    out.append(f'<text x="18" y="{TOP + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.1f})">{escape(METRICS[metric])}</text>')

    for i, (proto, pts) in enumerate(data.items()):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
        out.append(f'<polyline class="series" data-protocol="{escape(proto)}" points="{coords}" '
                   f'fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{color}"/>')
        ly = TOP + 10 + 20 * i
        lx = LEFT + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}" font-size="12">{escape(proto.upper())}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(records: list[RunRecord], metric: str, case: str, path: str | Path) -> Path:
    data = series(records, metric, case)
    path = Path(path)
    path.write_text(render_svg(data, metric, case), encoding="utf-8")
    return path
