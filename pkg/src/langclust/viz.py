"""Deterministic dendrogram export: JSON (round-trips), Graphviz DOT, and a
hand-rolled SVG with merge heights on the y-axis and an optional colored
K-cluster cut."""

from __future__ import annotations

from pathlib import Path

from .cluster import ClusterAssignment, Dendrogram, cut_dendrogram

FORMATS = ("json", "dot", "svg")

# colorblind-friendly palette; above-cut links stay steel blue
PALETTE = ["#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#aec7e8"]
LINK_COLOR = "#1f77b4"


def leaf_order(dendrogram: Dendrogram) -> list[int]:
    """Left-to-right leaf positions implied by the merge tree."""
    children: dict[int, tuple[int, int]] = {}
    for a, b, _, nid in dendrogram.merges:
        children[nid] = (a, b)
    root = dendrogram.merges[-1][3] if dendrogram.merges else 0
    order = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node in children:
            a, b = children[node]
            stack.append(b)
            stack.append(a)
        else:
            order.append(node)
    return order


def dendrogram_to_dot(dendrogram: Dendrogram) -> str:
    lines = ["digraph dendrogram {", "  rankdir=BT;", "  node [shape=box];"]
    for i, label in enumerate(dendrogram.labels):
        lines.append(f'  n{i} [label="{label}"];')
    for a, b, height, nid in dendrogram.merges:
        lines.append(f'  n{nid} [label="{height:.4f}" shape=point];')
        lines.append(f"  n{a} -> n{nid};")
        lines.append(f"  n{b} -> n{nid};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dendrogram_to_svg(dendrogram: Dendrogram, k: int | None = None,
                      width: int = 720, height: int = 420) -> str:
    n = dendrogram.n_leaves
    margin = 40
    label_band = 28
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin - label_band
    base_y = float(height - margin - label_band)
    order = leaf_order(dendrogram)
    xpos = {leaf: margin + plot_w * (i + 0.5) / n for i, leaf in enumerate(order)}
    ypos = {leaf: base_y for leaf in order}
    max_h = max((m[2] for m in dendrogram.merges), default=1.0) or 1.0

    colors = {leaf: LINK_COLOR for leaf in order}
    if k is not None:
        cut = cut_dendrogram(dendrogram, k)
        for leaf in order:
            idx = cut.assignment[dendrogram.labels[leaf]]
            colors[leaf] = PALETTE[idx % len(PALETTE)]

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    within = n - k if k is not None else 0  # merges below the cut stay colored
    for i, (a, b, h, nid) in enumerate(dendrogram.merges):
        y = base_y - plot_h * (h / max_h)
        color = colors[a] if i < within else LINK_COLOR
        parts.append(f'<path d="M {xpos[a]:.1f} {ypos[a]:.1f} V {y:.1f} H {xpos[b]:.1f} '
                     f'V {ypos[b]:.1f}" stroke="{color}" fill="none" stroke-width="1.5"/>')
        xpos[nid] = (xpos[a] + xpos[b]) / 2.0
        ypos[nid] = y
        colors[nid] = color
    for leaf in order:
        parts.append(f'<text x="{xpos[leaf]:.1f}" y="{height - margin}" font-size="12" '
                     f'text-anchor="middle" fill="{colors[leaf]}">{dendrogram.labels[leaf]}</text>')
    parts.append(f'<text x="{margin}" y="{margin - 10}" font-size="11" fill="#444">'
                 f'merge distance up to {max_h:.3f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_dendrogram(dendrogram: Dendrogram, fmt: str, path, k: int | None = None) -> None:
    """Write the dendrogram in one of FORMATS; unknown formats are rejected."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown dendrogram format {fmt!r} (expected one of {FORMATS})")
    if fmt == "json":
        text = dendrogram.to_json() + "\n"
    elif fmt == "dot":
        text = dendrogram_to_dot(dendrogram)
    else:
        text = dendrogram_to_svg(dendrogram, k=k)
    Path(path).write_text(text, encoding="utf-8")
