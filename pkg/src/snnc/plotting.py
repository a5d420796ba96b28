"""Rate-versus-position figures from sweep CSV files.

The SVG is assembled directly so that each scheme is exactly one
``<polyline>``; a matplotlib PNG with the same curves is written next to it.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .sweep import RELAY_HEADER, TWRC_HEADER, atomic_write, read_rows

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#7f7f7f", "#9467bd", "#ff7f0e")
# cf coincides with nnc on the relay channel; dash it so both stay visible
DASHED = ("cf",)
WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 55


class PlotError(ValueError):
    pass


def load_curves(csv_path) -> tuple[str, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """Return ``(ylabel, {scheme: (d, y)})`` in first-appearance order."""
    header, rows = read_rows(csv_path)
    if tuple(header) == RELAY_HEADER:
        key, ylabel = "rate", "rate (bits/channel use)"
    elif tuple(header) == TWRC_HEADER:
        key, ylabel = "sum", "sum rate (bits/channel use)"
    else:
        raise PlotError(f"{csv_path}: unknown CSV schema {header}")
    if not rows:
        raise PlotError(f"{csv_path}: no data rows")
    curves: dict[str, list] = {}
    for i, row in enumerate(rows, start=2):
        try:
            d, y = float(row["d"]), float(row[key])
        except (KeyError, TypeError, ValueError):
            raise PlotError(f"{csv_path}: line {i}: malformed row") from None
        curves.setdefault(row["scheme"], []).append((d, y))
    out = {}
    for s, pts in curves.items():
        pts.sort()
        arr = np.array(pts)
        out[s] = (arr[:, 0], arr[:, 1])
    return ylabel, out


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def svg_document(curves, ylabel: str) -> ET.Element:
    xs = np.concatenate([c[0] for c in curves.values()])
    ys = np.concatenate([c[1] for c in curves.values()])
    x0, x1 = float(xs.min()), float(xs.max())
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.05, x1 + 0.05
    y0, y1 = 0.0, float(ys.max()) * 1.05 or 1.0
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(WIDTH), height=str(HEIGHT),
                     viewBox=f"0 0 {WIDTH} {HEIGHT}", attrib={"font-family": "sans-serif", "font-size": "12"})
    ET.SubElement(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="white")
    axes = ET.SubElement(svg, "g", stroke="black", attrib={"stroke-width": "1"})
    ET.SubElement(axes, "line", x1=str(LEFT), y1=str(TOP + ph), x2=str(LEFT + pw), y2=str(TOP + ph))
    ET.SubElement(axes, "line", x1=str(LEFT), y1=str(TOP), x2=str(LEFT), y2=str(TOP + ph))
    labels = ET.SubElement(svg, "g", fill="black")
    for t in _ticks(x0, x1):
        ET.SubElement(axes, "line", x1=f"{sx(t):.2f}", y1=str(TOP + ph), x2=f"{sx(t):.2f}", y2=str(TOP + ph + 5))
        ET.SubElement(labels, "text", x=f"{sx(t):.2f}", y=str(TOP + ph + 18),
                      attrib={"text-anchor": "middle"}).text = f"{t:g}"
    for t in _ticks(y0, y1):
        ET.SubElement(axes, "line", x1=str(LEFT - 5), y1=f"{sy(t):.2f}", x2=str(LEFT), y2=f"{sy(t):.2f}")
        ET.SubElement(labels, "text", x=str(LEFT - 8), y=f"{sy(t) + 4:.2f}",
                      attrib={"text-anchor": "end"}).text = f"{t:g}"
    ET.SubElement(labels, "text", x=f"{LEFT + pw / 2:.1f}", y=str(HEIGHT - 12),
                  attrib={"text-anchor": "middle"}).text = "relay position d"
    ET.SubElement(labels, "text", x="16", y=f"{TOP + ph / 2:.1f}",
                  transform=f"rotate(-90 16 {TOP + ph / 2:.1f})",
                  attrib={"text-anchor": "middle"}).text = ylabel

    for i, (name, (d, y)) in enumerate(curves.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(d, y))
        style = {"stroke-width": "1.5", "data-scheme": name}
        if name in DASHED:
            style["stroke-dasharray"] = "6 4"
        ET.SubElement(svg, "polyline", points=pts, fill="none", stroke=color, attrib=style)
        ly = TOP + 10 + 18 * i
        lx = LEFT + pw + 15
        ET.SubElement(svg, "line", x1=str(lx), y1=str(ly), x2=str(lx + 25), y2=str(ly), stroke=color,
                      attrib={k: v for k, v in style.items() if k != "data-scheme"})
        ET.SubElement(svg, "text", x=str(lx + 32), y=str(ly + 4)).text = name
    return svg


def _render_png(curves, ylabel: str, path: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, (name, (d, y)) in enumerate(curves.items()):
        ax.plot(d, y, color=COLORS[i % len(COLORS)], label=name, lw=1.5, ls="--" if name in DASHED else "-")
    ax.set_xlabel("relay position d")
    ax.set_ylabel(ylabel)
    ax.set_ylim(bottom=0)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    tmp = path.with_name(f".{path.name}.tmp.png")
    fig.savefig(tmp, dpi=120, metadata={"Software": None})
    plt.close(fig)
    tmp.replace(path)


def emit_plot(csv_path, svg_path, png: bool = True) -> Path:
    """Render ``csv_path`` to ``svg_path`` (and a sibling PNG unless ``png`` is False)."""
    ylabel, curves = load_curves(csv_path)
    svg_path = Path(svg_path)
    doc = svg_document(curves, ylabel)
    ET.indent(doc)
    atomic_write(svg_path, ET.tostring(doc, encoding="unicode") + "\n")
    if png:
        _render_png(curves, ylabel, svg_path.with_suffix(".png"))
    return svg_path
