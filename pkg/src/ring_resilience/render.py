"""Static SVG figures: trajectory circles, ring arcs, robot start positions.

Rendering needs coordinates, so abstract scenarios are rejected. The
output is a pure function of the inputs (no timestamps, no randomness),
which keeps repeated renders byte-identical.
"""

from __future__ import annotations

import math

from .geometry import TWO_PI, Scenario, ScenarioError
from .rings import RingSet
from .scheduling import Schedule

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#17becf",
    "#e377c2",
    "#8c564b",
    "#bcbd22",
    "#7f7f7f",
    "#aec7e8",
    "#98df8a",
)


def ring_color(ring_id: int) -> str:
    return PALETTE[ring_id % len(PALETTE)]


def render_svg(
    scenario: Scenario,
    ring_set: RingSet | None = None,
    schedule: Schedule | None = None,
    *,
    size: int = 640,
) -> str:
    if not scenario.circles:
        raise ScenarioError("abstract scenarios carry no coordinates to render")
    pad_world = 0.6
    xs = [c.x for c in scenario.circles]
    ys = [c.y for c in scenario.circles]
    minx, maxx = min(xs) - 1.0 - pad_world, max(xs) + 1.0 + pad_world
    miny, maxy = min(ys) - 1.0 - pad_world, max(ys) + 1.0 + pad_world
    scale = size / (maxx - minx)
    width = size
    height = max(1, round((maxy - miny) * scale))

    def px(x: float, y: float) -> tuple[float, float]:
        return (x - minx) * scale, (maxy - y) * scale

    def pt(traj: int, theta: float) -> tuple[float, float]:
        c = scenario.circles[traj]
        return px(c.x + math.cos(theta), c.y + math.sin(theta))

    out: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    r_px = scale
    for c in scenario.circles:
        cx, cy = px(c.x, c.y)
        out.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r_px:.2f}" fill="none" '
            f'stroke="#c8c8c8" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{cx:.2f}" y="{cy:.2f}" font-size="12" fill="#999999" '
            f'text-anchor="middle" dominant-baseline="central">{c.id}</text>'
        )
    if ring_set is not None:
        for ring in ring_set.rings:
            color = ring_color(ring.id)
            for arc in ring.arcs:
                # World counterclockwise appears counterclockwise on screen
                # after the y flip, which is SVG sweep flag 0.
                sweep = 0 if arc.direction == 1 else 1
                x0, y0 = pt(arc.traj, arc.start)
                if arc.length >= TWO_PI - 1e-9:
                    mid = arc.start + math.pi * arc.direction
                    xm, ym = pt(arc.traj, mid)
                    d = (
                        f"M {x0:.2f} {y0:.2f} "
                        f"A {r_px:.2f} {r_px:.2f} 0 0 {sweep} {xm:.2f} {ym:.2f} "
                        f"A {r_px:.2f} {r_px:.2f} 0 0 {sweep} {x0:.2f} {y0:.2f}"
                    )
                else:
                    large = 1 if arc.length > math.pi else 0
                    x1, y1 = pt(arc.traj, arc.end)
                    d = (
                        f"M {x0:.2f} {y0:.2f} "
                        f"A {r_px:.2f} {r_px:.2f} 0 {large} {sweep} {x1:.2f} {y1:.2f}"
                    )
                out.append(
                    f'<path d="{d}" fill="none" stroke="{color}" '
                    f'stroke-width="3" stroke-linecap="round"/>'
                )
        for idx, ring in enumerate(ring_set.rings):
            out.append(
                f'<text x="8" y="{16 + 14 * idx}" font-size="11" '
                f'fill="{ring_color(ring.id)}">ring {ring.id}: k={ring.k}, '
                f"length={ring.length / math.pi:.0f}π</text>"
            )
    if schedule is not None:
        for traj in range(scenario.n):
            x, y = pt(traj, schedule.f[traj])
            out.append(
                f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#222222" '
                f'stroke="#ffffff" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{x + 6:.2f}" y="{y - 6:.2f}" font-size="10" '
                f'fill="#222222">r{traj}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
