"""
LabelMap - SVG Renderer
Standalone SVG scatter plot of a 2-D map, one fill color per class plus a
legend. Output text depends only on the inputs.
"""

from dataclasses import dataclass, field
from html import escape
from typing import Tuple
import logging

import numpy as np

from labelmap.config import (
    PLOT_HEIGHT, PLOT_MARGIN_FRACTION, PLOT_PALETTE, PLOT_POINT_RADIUS, PLOT_WIDTH
)
from labelmap.errors import InvalidConfig, SizeMismatch
from labelmap.mapping.geometry import Embedding, as_labels

logger = logging.getLogger(__name__)

LEGEND_ROW_HEIGHT = 16
LEGEND_FONT_SIZE = 12


@dataclass(frozen=True)
class PlotSpec:
    width: int = PLOT_WIDTH
    height: int = PLOT_HEIGHT
    point_radius: float = PLOT_POINT_RADIUS
    palette: Tuple[str, ...] = field(default=PLOT_PALETTE)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidConfig(f"Plot size must be positive, got {self.width}x{self.height}")
        if not self.point_radius > 0:
            raise InvalidConfig(f"Point radius must be positive, got {self.point_radius}")
        if not self.palette:
            raise InvalidConfig("Palette is empty")


def _num(v):
    return f"{v:.2f}"


def class_colors(labels, palette):
    """Class -> color, classes in string-sorted order, palette cycled."""
    return {label: palette[i % len(palette)] for i, label in enumerate(as_labels(labels).classes)}


def _viewport(y, spec: PlotSpec):
    """Map data coordinates to pixels: aspect kept, 5% margin, y axis up."""
    lo = y.min(axis=0)
    span = y.max(axis=0) - lo
    if not np.any(span > 0):
        lo = lo - 0.5
        span = np.ones(2)

    margin_x = PLOT_MARGIN_FRACTION * spec.width
    margin_y = PLOT_MARGIN_FRACTION * spec.height
    inner = np.array([spec.width - 2 * margin_x, spec.height - 2 * margin_y])
    scale = min(inner[a] / span[a] for a in range(2) if span[a] > 0)
    pad = (inner - span * scale) / 2 + np.array([margin_x, margin_y])

    def to_pixels(points):
        px = pad + (points - lo) * scale
        px[:, 1] = spec.height - px[:, 1]
        return px

    return to_pixels


def svg_text(e: Embedding, labels, spec: PlotSpec = None):
    """Render the scatter plot and return the SVG document as a string."""
    spec = spec or PlotSpec()
    labels = as_labels(labels)
    if len(labels) != e.n:
        raise SizeMismatch(f"{len(labels)} labels for {e.n} points")

    colors = class_colors(labels, spec.palette)
    pixels = _viewport(e.y, spec)(e.y)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" fill="white"/>',
        '<g id="points">',
    ]
    for (px, py), label in zip(pixels, labels.labels):
        out.append(f'<circle cx="{_num(px)}" cy="{_num(py)}" r="{_num(spec.point_radius)}" '
                   f'fill="{colors[label]}"><title>{escape(str(label))}</title></circle>')
    out.append('</g>')

    out.append(f'<g id="legend" font-family="sans-serif" font-size="{LEGEND_FONT_SIZE}">')
    for row, (label, color) in enumerate(colors.items()):
        cy = 10 + LEGEND_ROW_HEIGHT * row + LEGEND_ROW_HEIGHT / 2
        out.append(f'<circle cx="16.00" cy="{_num(cy)}" r="5.00" fill="{color}"/>')
        out.append(f'<text x="26.00" y="{_num(cy + 4)}">{escape(str(label))}</text>')
    out.append('</g>')
    out.append('</svg>')
    return '\n'.join(out) + '\n'


def render_svg(e: Embedding, labels, spec: PlotSpec = None, path=None):
    """Write the SVG scatter plot to path; returns the document text."""
    text = svg_text(e, labels, spec)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    logger.info(f"Wrote SVG map of {e.n} points to {path}")
    return text
