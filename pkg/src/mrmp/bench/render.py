"""Deterministic SVG rendering of instances, solutions, and roadmaps.

2D scenarios render natively; 3D scenarios are projected orthographically
onto the xy-plane. Obstacles are black-filled, robot bodies colored per
robot (capsules as round-capped strokes), solution paths thin polylines,
roadmap edges light gray. Output is byte-stable for fixed inputs.
"""

from __future__ import annotations

import numpy as np

from ..robots import forward_kinematics

PALETTE = (
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
    "#46f00f", "#42d4f4", "#f032e6", "#9a6324", "#808000",
)


def _f(x: float) -> str:
    return f"{x:.5f}"


class _Canvas:
    def __init__(self, size: int):
        self.size = size
        self.lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">',
            f'<rect class="frame" x="0" y="0" width="{size}" height="{size}" '
            'fill="white" stroke="black" stroke-width="1"/>',
        ]

    def pt(self, p):
        return self.size * float(p[0]), self.size * (1.0 - float(p[1]))

    def circle(self, cls, center, radius, **style):
        x, y = self.pt(center)
        attrs = "".join(f' {k.replace("_", "-")}="{v}"' for k, v in style.items())
        self.lines.append(
            f'<circle class="{cls}" cx="{_f(x)}" cy="{_f(y)}" '
            f'r="{_f(radius * self.size)}"{attrs}/>')

    def line(self, cls, a, b, **style):
        x1, y1 = self.pt(a)
        x2, y2 = self.pt(b)
        attrs = "".join(f' {k.replace("_", "-")}="{v}"' for k, v in style.items())
        self.lines.append(
            f'<line class="{cls}" x1="{_f(x1)}" y1="{_f(y1)}" '
            f'x2="{_f(x2)}" y2="{_f(y2)}"{attrs}/>')

    def polyline(self, cls, pts, **style):
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in (self.pt(p) for p in pts))
        attrs = "".join(f' {k.replace("_", "-")}="{v}"' for k, v in style.items())
        self.lines.append(f'<polyline class="{cls}" points="{coords}" fill="none"{attrs}/>')

    def finish(self) -> str:
        return "\n".join(self.lines) + "\n</svg>\n"


def _ref_point(model, q):
    """2D reference point of a state: position components or the arm tip."""
    if model.num_pos:
        return (float(q[0]), float(q[1]))
    tip = forward_kinematics(model, q)[-1].b
    return (float(tip[0]), float(tip[1]))


def _draw_body(cv, cls, model, q, color, fill_opacity=None, dashed=False):
    style = {"stroke": color, "fill": color}
    if fill_opacity is not None:
        style["fill_opacity"] = fill_opacity
        style["stroke_opacity"] = fill_opacity
    if dashed:
        style = {"stroke": color, "fill": "none", "stroke_dasharray": "3,3"}
    for cap in forward_kinematics(model, q):
        a = (cap.a[0], cap.a[1])
        b = (cap.b[0], cap.b[1])
        if a == b:
            cv.circle(cls, a, cap.radius, **style)
        else:
            width = max(1.0, 2.0 * cap.radius * cv.size)
            cv.line(cls, a, b, stroke=style["stroke"], stroke_width=_f(width),
                    stroke_linecap="round",
                    **({"stroke_dasharray": "3,3"} if dashed else
                       {"stroke_opacity": style.get("stroke_opacity", 1)}))


def render(instance, solution=None, roadmaps=None, size: int = 512) -> str:
    """SVG document for an instance, optionally with solution and roadmaps.

    `roadmaps` is a list of roadmap JSON dicts (vertices/edges/start/goal),
    one per robot, as produced by Roadmap.to_json_dict().
    """
    cv = _Canvas(size)
    models = instance.models

    if roadmaps:
        for i, rm in enumerate(roadmaps):
            model = models[i]
            verts = [np.asarray(q, dtype=float) for q in rm["vertices"]]
            refs = [_ref_point(model, q) for q in verts]
            for u, adj in enumerate(rm["edges"]):
                for v, _w in adj:
                    if int(v) == u:
                        continue
                    cv.line("rm-edge", refs[u], refs[int(v)],
                            stroke="#cccccc", stroke_width="0.7")
            for ref in refs:
                cv.circle("rm-vertex", ref, 1.6 / size, fill="#999999")

    for obs in instance.obstacles:
        cv.circle("obstacle", (obs.center[0], obs.center[1]), obs.radius,
                  fill="black")

    if solution is not None:
        for i, path in enumerate(solution.paths):
            color = PALETTE[i % len(PALETTE)]
            pts = [_ref_point(models[i], q) for q in path]
            cv.polyline("path", pts, stroke=color, stroke_width="1.2")

    for i, model in enumerate(models):
        color = PALETTE[i % len(PALETTE)]
        _draw_body(cv, "robot-goal", model, instance.goals[i], color, dashed=True)
        _draw_body(cv, "robot-start", model, instance.starts[i], color,
                   fill_opacity="0.85")

    return cv.finish()
