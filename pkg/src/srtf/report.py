"""Plain-text listing of the regions a model flags as under-sampled."""
from __future__ import annotations

from .data import format_float
from .forest import SrfModel


def _vec(v) -> str:
    return "[" + ", ".join(format_float(x) for x in v) + "]"


def region_lines(region: dict, number: int, tree_index: int) -> list[str]:
    lines = [f"region {number}: tree {tree_index}, {region['status']}, depth {region['depth']}",
             f"  points: {region['n_points']}",
             f"  residual RAE: {format_float(region['residual_rae'])}",
             f"  bbox lo: {_vec(region['bbox_lo'])}",
             f"  bbox hi: {_vec(region['bbox_hi'])}"]
    if region["path"]:
        lines.append("  constraints:")
        for c in region["path"]:
            op = "<=" if c["side"] == "le" else ">"
            lines.append(f"    x . {_vec(c['normal'])} {op} {format_float(c['threshold'])}")
    else:
        lines.append("  constraints: none (whole domain)")
    return lines


def format_report(model) -> str:
    trees = model.trees if isinstance(model, SrfModel) else [model]
    kind = "srf" if isinstance(model, SrfModel) else "srt"
    regions = [(i, r) for i, t in enumerate(trees) for r in t.insufficient_regions()]
    out = [f"model: {kind}, dim {trees[0].dim}, {len(trees)} tree(s)"]
    for i, t in enumerate(trees):
        n_ins = sum(1 for j, _ in regions if j == i)
        out.append(f"tree {i}: {t.node_count} nodes, depth {t.depth}, {len(t.leaves())} leaves, "
                   f"{n_ins} insufficient region(s), split {t.mode}, seed {t.seed}")
    out.append(f"insufficient regions: {len(regions)}")
    for k, (i, r) in enumerate(regions, start=1):
        out.extend(region_lines(r, k, i))
    return "\n".join(out) + "\n"


def near_ball(region: dict, center, radius: float) -> bool:
    """Whether the region's bounding box meets the closed ball of ``radius`` about ``center``."""
    sq = 0.0
    for c, lo, hi in zip(center, region["bbox_lo"], region["bbox_hi"]):
        q = min(max(c, lo), hi)
        sq += (q - c) ** 2
    return sq <= radius * radius
