"""Model documents.

A model is stored as a JSON document with a ``version`` field, the working
parameters and, per tree, a flat node array in pre-order. Each node records
its status and statistics, its splitting hyperplane (internal nodes), its
kernel shape parameter, centers and coefficients, and the ids of its two
children. Every real is written with 17 significant digits so that a
reloaded model predicts bit-identically. Nodes are one per line to keep
documents diffable.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InvalidArgumentError, UnsupportedVersionError
from .exploration import KernelSpec, Refinement
from .forest import SrfModel
from .params import WorkingParams
from .tree import Hyperplane, SrtModel, TreeNode

FORMAT_NAME = "srtf-model"
FORMAT_VERSION = 1


def _enc(obj) -> str:
    """Compact JSON with floats at 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise InvalidArgumentError("model contains a non-finite value")
        s = format(x, ".17g")
        return s if any(c in s for c in ".en") else s + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_enc(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_enc(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _node_records(model: SrtModel) -> list[dict]:
    nodes = list(model.nodes())
    ids = {id(n): i for i, n in enumerate(nodes)}
    out = []
    for i, n in enumerate(nodes):
        ref = n.refinement
        out.append({
            "id": i,
            "status": n.status,
            "depth": n.depth,
            "path": "".join(map(str, n.path)),
            "n_points": n.n_points,
            "residual_rae": n.residual_rae,
            "n_bar_c": n.n_bar_c,
            "bbox_lo": n.bbox[0],
            "bbox_hi": n.bbox[1],
            "normal": n.hyperplane.normal if n.hyperplane is not None else None,
            "threshold": n.hyperplane.threshold if n.hyperplane is not None else None,
            "kernel": ref.kernel.kind,
            "delta": ref.kernel.delta,
            "beta": ref.kernel.beta,
            "kappa": ref.kappa,
            "stop_reason": ref.stop_reason,
            "centers": ref.centers.ravel(),
            "coefficients": ref.coefficients,
            "children": [ids[id(c)] for c in n.children] if n.children is not None else None,
        })
    return out


def dumps_model(model) -> str:
    if isinstance(model, SrtModel):
        kind, trees, master = "srt", [model], None
    elif isinstance(model, SrfModel):
        kind, trees, master = "srf", model.trees, model.master_seed
    else:
        raise InvalidArgumentError(f"not a model: {type(model).__name__}")
    head = {"format": FORMAT_NAME, "version": FORMAT_VERSION, "kind": kind, "dim": trees[0].dim,
            "n_t": len(trees), "master_seed": master, "params": trees[0].params.to_dict()}
    lines = ["{"]
    for k, v in head.items():
        lines.append(f"  {json.dumps(k)}: {_enc(v)},")
    lines.append('  "trees": [')
    for t_i, tree in enumerate(trees):
        lines.append(f'    {{"seed": {tree.seed}, "mode": {json.dumps(tree.mode)}, "nodes": [')
        recs = _node_records(tree)
        for n_i, rec in enumerate(recs):
            lines.append("      " + _enc(rec) + ("," if n_i < len(recs) - 1 else ""))
        lines.append("    ]}" + ("," if t_i < len(trees) - 1 else ""))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize_model(model, path) -> None:
    Path(path).write_text(dumps_model(model))


def _vec(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DataFormatError(f"{what} must be a flat list of numbers")
    return arr


def _build_tree(doc_tree: dict, dim: int, params: WorkingParams) -> SrtModel:
    recs = doc_tree["nodes"]
    if not recs:
        raise DataFormatError("tree without nodes")
    nodes = []
    for expect, rec in enumerate(recs):
        if rec["id"] != expect:
            raise DataFormatError(f"node ids must be 0..n-1 in order (got {rec['id']} at {expect})")
        coeffs = _vec(rec["coefficients"], "coefficients")
        centers = _vec(rec["centers"], "centers")
        if centers.size != coeffs.size * dim:
            raise DataFormatError(f"node {expect}: {centers.size} center coordinates for {coeffs.size} centers")
        ref = Refinement(kernel=KernelSpec(rec["kernel"], float(rec["delta"]), float(rec["beta"])),
                         centers=centers.reshape(coeffs.size, dim), coefficients=coeffs,
                         kappa=float(rec["kappa"]), stop_reason=rec["stop_reason"])
        hp = None
        if rec["normal"] is not None:
            normal = _vec(rec["normal"], "normal")
            if normal.size != dim:
                raise DataFormatError(f"node {expect}: hyperplane normal has {normal.size} entries")
            hp = Hyperplane(normal=normal, threshold=float(rec["threshold"]))
        path = tuple(int(c) for c in rec["path"])
        nodes.append(TreeNode(refinement=ref, status=rec["status"], depth=int(rec["depth"]),
                              n_points=int(rec["n_points"]), residual_rae=float(rec["residual_rae"]),
                              bbox=(_vec(rec["bbox_lo"], "bbox"), _vec(rec["bbox_hi"], "bbox")),
                              path=path, hyperplane=hp, n_bar_c=float(rec["n_bar_c"])))
    for node, rec in zip(nodes, recs):
        kids = rec["children"]
        if kids is None:
            if node.hyperplane is not None:
                raise DataFormatError("leaf node carries a hyperplane")
            continue
        if node.hyperplane is None or len(kids) != 2:
            raise DataFormatError("internal node needs a hyperplane and two children")
        try:
            node.children = (nodes[kids[0]], nodes[kids[1]])
        except (IndexError, TypeError):
            raise DataFormatError(f"bad child ids {kids}") from None
    return SrtModel(root=nodes[0], dim=dim, params=params, seed=int(doc_tree["seed"]),
                    mode=doc_tree["mode"])


def loads_model(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"model document is truncated or malformed: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(doc, dict) or "version" not in doc:
        raise DataFormatError("model document has no version field")
    if doc["version"] != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"model format version {doc['version']} is not supported (this build reads version {FORMAT_VERSION})")
    try:
        if doc.get("format") != FORMAT_NAME:
            raise DataFormatError(f"not a {FORMAT_NAME} document")
        dim = int(doc["dim"])
        params = WorkingParams.from_dict(doc["params"])
        trees = [_build_tree(t, dim, params) for t in doc["trees"]]
        if doc["kind"] == "srt":
            if len(trees) != 1:
                raise DataFormatError("an srt document holds exactly one tree")
            return trees[0]
        if doc["kind"] == "srf":
            return SrfModel(trees=trees, n_t=int(doc["n_t"]), master_seed=int(doc["master_seed"]))
        raise DataFormatError(f"unknown model kind {doc['kind']!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataFormatError):
            raise
        raise DataFormatError(f"malformed model document: {exc!r}") from None


def deserialize_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None
    return loads_model(text)
