"""Static SVG rasters of box-grid data (no plotting dependency)."""

from __future__ import annotations

from .conley import Grid

_PALETTE = ["#1b6ca8", "#c43b3b", "#2f9e44", "#b8860b", "#7048b6",
            "#0c8599", "#d6336c", "#5c940d", "#a0522d", "#364fc7"]


def render_boxes(grid: Grid, rows, size: int = 640, comment: str = "") -> str:
    """SVG raster of (box_id, class_id) pairs, colored by class.

    A pure function of its inputs: identical rows yield identical bytes.
    """
    x_lo, x_hi, t_lo, t_hi = grid.window
    sx = size / (x_hi - x_lo)
    sy = size / (t_hi - t_lo)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    if comment:
        safe = comment.replace("--", "- -")
        out.append(f"<!-- {safe} -->")
    out.append(f'<rect width="{size}" height="{size}" fill="#ffffff"/>')
    for box_id, class_id in rows:
        bx0, bx1, bt0, bt1 = grid.box_bounds(int(box_id))
        px = (bx0 - x_lo) * sx
        py = (t_hi - bt1) * sy
        w = (bx1 - bx0) * sx
        h = (bt1 - bt0) * sy
        color = _PALETTE[int(class_id) % len(_PALETTE)]
        out.append(f'<rect x="{px:.3f}" y="{py:.3f}" width="{w:.3f}" '
                   f'height="{h:.3f}" fill="{color}"/>')
    out.append(f'<rect width="{size}" height="{size}" fill="none" '
               f'stroke="#222222" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
