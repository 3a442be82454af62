"""Geometry exports: per-layer SVG floor plans and a Wavefront OBJ mesh.

Each strip layer becomes one SVG with a 1000 x 1000 viewport; boxes appear
as rectangles labeled with their id and z-range.  The OBJ lists every box
as an eight-vertex cuboid with six quad faces.
"""

from __future__ import annotations

from fractions import Fraction

from .model import Instance, Packing, as_fraction

SCALE = 1000


def _color(box_id: int) -> str:
    hue = (box_id * 47) % 360
    return f"hsl({hue}, 65%, 75%)"


def svg_layers(instance: Instance, packing: Packing,
               layer_height) -> list[tuple[int, str]]:
    """One (layer_index, svg_text) per occupied layer; a box belongs to the
    layer containing its bottom coordinate."""
    lh = as_fraction(layer_height)
    by_id = {b.id: b for b in instance.boxes}
    layers: dict[int, list] = {}
    for p in packing.placements:
        layers.setdefault(int(p.z / lh), []).append(p)
    out = []
    for idx in sorted(layers):
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{SCALE}" '
            f'height="{SCALE}" viewBox="0 0 {SCALE} {SCALE}">',
            f'<rect x="0" y="0" width="{SCALE}" height="{SCALE}" '
            f'fill="white" stroke="black"/>',
        ]
        for p in sorted(layers[idx], key=lambda q: q.box_id):
            b = by_id[p.box_id]
            x = float(p.x) * SCALE
            y = float(p.y) * SCALE
            w = float(b.length) * SCALE
            h = float(b.width) * SCALE
            z0, z1 = float(p.z), float(p.z + b.height)
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" '
                f'height="{h:.2f}" fill="{_color(p.box_id)}" '
                f'stroke="black" stroke-width="1"/>')
            fs = max(8.0, min(16.0, w / 4))
            parts.append(
                f'<text x="{x + w / 2:.2f}" y="{y + h / 2:.2f}" '
                f'font-size="{fs:.1f}" text-anchor="middle" '
                f'dominant-baseline="middle">'
                f'{p.box_id}:{z0:.3g}-{z1:.3g}</text>')
        parts.append("</svg>")
        out.append((idx, "\n".join(parts)))
    return out


def obj_export(instance: Instance, packing: Packing) -> str:
    """All placed cuboids as one OBJ mesh (8 vertices, 6 quads per box)."""
    by_id = {b.id: b for b in instance.boxes}
    lines = ["# strip packing export"]
    base = 1
    for p in sorted(packing.placements, key=lambda q: q.box_id):
        b = by_id[p.box_id]
        x0, y0, z0 = float(p.x), float(p.y), float(p.z)
        x1 = float(p.x + b.length)
        y1 = float(p.y + b.width)
        z1 = float(p.z + b.height)
        lines.append(f"o box{p.box_id}")
        for z in (z0, z1):
            for y in (y0, y1):
                for x in (x0, x1):
                    lines.append(f"v {x:.9g} {y:.9g} {z:.9g}")
        # vertex order: (x,y,z) bits with x fastest
        quads = [
            (0, 1, 3, 2), (4, 6, 7, 5),   # bottom, top
            (0, 2, 6, 4), (1, 5, 7, 3),   # x faces
            (0, 4, 5, 1), (2, 3, 7, 6),   # y faces
        ]
        for q in quads:
            lines.append("f " + " ".join(str(base + i) for i in q))
        base += 8
    return "\n".join(lines) + "\n"
