"""Minimal SVG drawings of polygon families."""

from __future__ import annotations

from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def surfaces_svg(surfaces, labels=None, width=640, margin=20, gap=0.5):
    """Draw each surface's polygons in one shared coordinate frame.

    Polygons of one surface are laid out left to right; successive surfaces
    are overlaid in different colours so a deformation reads directly.
    """
    labels = labels or [f"surface {i}" for i in range(len(surfaces))]
    layers = []
    for surf in surfaces:
        x = 0.0
        polys = []
        for p in surf.polygons:
            raw = [complex(v) for v in p.vertices()]
            shift = x - min(v.real for v in raw)
            polys.append((p.label, [v + shift for v in raw]))
            x += max(v.real for v in raw) - min(v.real for v in raw) + gap
        layers.append(polys)
    pts = [v for polys in layers for _, poly in polys for v in poly]
    xmin, xmax = min(v.real for v in pts), max(v.real for v in pts)
    ymin, ymax = min(v.imag for v in pts), max(v.imag for v in pts)
    scale = (width - 2 * margin) / max(xmax - xmin, ymax - ymin, 1e-12)
    height = int(round((ymax - ymin) * scale + 2 * margin + 16 * len(surfaces)))

    def tr(v):
        return (margin + (v.real - xmin) * scale, margin + (ymax - v.imag) * scale)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    for i, (polys, label) in enumerate(zip(layers, labels)):
        color = _COLORS[i % len(_COLORS)]
        for plabel, poly in polys:
            coords = " ".join(f"{a:.3f},{b:.3f}" for a, b in map(tr, poly))
            out.append(f'<polygon points="{coords}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"><title>{escape(str(plabel))}</title></polygon>')
        out.append(f'<text x="{margin}" y="{height - 6 - 16 * (len(surfaces) - 1 - i)}" '
                   f'fill="{color}" font-size="12">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
