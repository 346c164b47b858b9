"""Export modules - coordinates, traces, quality reports and SVG maps."""
