"""Sparse residual tree: exploration-splitting recursion and prediction.

Each node fits an RBF refinement to the residual it inherits, subtracts it on
all of its points and, unless the residual is already within the expected
relative error, cuts itself in two along a hyperplane. Children that would be
too small to support a sparse refinement end the branch as an
insufficient-data leaf, which is what the training report is for.

Nodes are processed one depth level at a time. Every node draws from its own
random stream keyed by ``(seed, path)``, so the result does not depend on the
worker count or scheduling.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, InvalidArgumentError
from .exploration import (
    ExplorationBudget,
    KernelSpec,
    Refinement,
    apply_refinement,
    explore_refinement,
    update_center_average,
)
from .params import WorkingParams
from .sampling import quasi_uniform_extend, random_index_subset

logger = logging.getLogger(__name__)

SPLIT_MODES = ("equal", "random")
STATUSES = ("internal", "leaf-converged", "leaf-insufficient", "leaf-degenerate")

RANDOM_PERCENT_RANGE = (37, 62)


def rae(predictions, truths) -> float:
    """Max absolute error over max absolute truth (absolute error when all truths are 0)."""
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if p.shape != t.shape or p.size == 0:
        raise InvalidArgumentError("predictions and truths must be non-empty and equally long")
    err = float(np.max(np.abs(p - t)))
    scale = float(np.max(np.abs(t)))
    return err / scale if scale > 0 else err


def project(points: np.ndarray, normal: np.ndarray) -> np.ndarray:
    # elementwise row sums rather than BLAS so routing is independent of batch size
    return (points * normal).sum(axis=1)


@dataclass(frozen=True)
class Hyperplane:
    normal: np.ndarray
    threshold: float

    def first_side(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of rows routed to the first child (``x . n <= c``)."""
        return project(np.atleast_2d(points), self.normal) <= self.threshold


@dataclass
class TreeNode:
    refinement: Refinement
    status: str
    depth: int
    n_points: int
    residual_rae: float
    bbox: tuple[np.ndarray, np.ndarray]
    path: tuple[int, ...] = ()
    hyperplane: Hyperplane | None = None
    children: tuple["TreeNode", "TreeNode"] | None = None
    n_bar_c: float = 0.0
    # training-only bookkeeping, never serialized
    point_index: np.ndarray | None = None
    fit_index: np.ndarray | None = None
    fit_residual: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def n_centers(self) -> int:
        return self.refinement.n_centers


@dataclass
class SrtModel:
    root: TreeNode
    dim: int
    params: WorkingParams
    seed: int
    mode: str = "equal"

    def nodes(self):
        """Pre-order traversal (node, then first child subtree, then second)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.children is not None:
                stack.append(node.children[1])
                stack.append(node.children[0])

    def leaves(self):
        return [n for n in self.nodes() if n.is_leaf]

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes())

    def predict(self, points) -> np.ndarray:
        return predict_srt(self, points)

    def leaf_of(self, points) -> list[TreeNode]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = []
        for x in pts:
            node = self.root
            while node.children is not None:
                node = node.children[0] if node.hyperplane.first_side(x[None, :])[0] else node.children[1]
            out.append(node)
        return out

    def insufficient_regions(self) -> list[dict]:
        return [_region_record(n, self) for n in self.nodes()
                if n.status in ("leaf-insufficient", "leaf-degenerate")]


@dataclass
class TrainingReport:
    insufficient_regions: list[dict] = field(default_factory=list)
    node_log: list[dict] = field(default_factory=list)
    n_bar_c_trail: list[float] = field(default_factory=list)
    wall_time: float = 0.0
    peak_points: int = 0
    points_processed: int = 0

    def to_dict(self) -> dict:
        return {
            "insufficient_regions": self.insufficient_regions,
            "node_log": self.node_log,
            "n_bar_c_trail": self.n_bar_c_trail,
            "wall_time": self.wall_time,
            "peak_points": self.peak_points,
            "points_processed": self.points_processed,
        }


def _constraint_path(model: SrtModel, target: TreeNode) -> list[dict]:
    out = []
    node = model.root
    for side in target.path:
        hp = node.hyperplane
        out.append({"normal": hp.normal.tolist(), "threshold": hp.threshold,
                    "side": "le" if side == 0 else "gt"})
        node = node.children[side]
    return out


def _region_record(node: TreeNode, model: SrtModel) -> dict:
    return {
        "status": node.status,
        "path": _constraint_path(model, node),
        "bbox_lo": node.bbox[0].tolist(),
        "bbox_hi": node.bbox[1].tolist(),
        "n_points": node.n_points,
        "residual_rae": node.residual_rae,
        "depth": node.depth,
    }


def choose_split(points, residual):
    """Pick the two splitting points of a node and the cut direction.

    The first point is the one of ``d + 1`` farthest-point samples (started
    away from the mean) whose Voronoi cell has the largest mean squared
    residual; the second is the subset point farthest from it.
    """
    points = np.asarray(points, dtype=float)
    residual = np.asarray(residual, dtype=float).ravel()
    n, d = points.shape
    if n < 2:
        raise DegenerateGeometryError("need at least two points to split")
    qu = quasi_uniform_extend(points, (), d + 1, "mean-farthest")
    size = qu.size
    sums = np.bincount(qu.nearest_label, weights=residual * residual, minlength=size)
    counts = np.bincount(qu.nearest_label, minlength=size)
    score = np.where(counts > 0, sums / np.maximum(counts, 1), -np.inf)
    a = qu.selected[int(np.argmax(score))]
    xa = points[a]
    dist = np.sqrt(((points - xa) ** 2).sum(axis=1))
    b = int(np.argmax(dist))
    if dist[b] == 0.0:
        raise DegenerateGeometryError("all subset points coincide")
    return a, b, points[b] - xa


def split_rank(n: int, mode: str, rng: np.random.Generator | None = None,
               percent: int | None = None) -> int:
    """Size of the first child: ``ceil(n/2)`` or ``ceil(p n / 100)`` with ``p`` in 37..62."""
    if mode == "equal":
        k = (n + 1) // 2
    elif mode == "random":
        if percent is None:
            lo, hi = RANDOM_PERCENT_RANGE
            percent = int(rng.integers(lo, hi + 1))
        k = -(-percent * n // 100)
    else:
        raise InvalidArgumentError(f"unknown split mode {mode!r}")
    return min(max(k, 1), n - 1)


def partition(points, direction, mode: str = "equal", rng=None, percent: int | None = None):
    """Split rows by their projection on ``direction``.

    Returns ``(first, second, hyperplane)`` where ``first``/``second`` are
    sorted row indices. The first child takes the ``k`` smallest projections
    (ties by row index) and the threshold is the ``k``-th smallest projection.
    When equal projections straddle rank ``k`` the cut moves to the nearest
    rank where they do not, so that routing by ``x . n <= c`` reproduces the
    partition exactly.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    direction = np.asarray(direction, dtype=float).ravel()
    n = len(points)
    if n < 2:
        raise InvalidArgumentError("need at least two points to partition")
    if not np.any(direction != 0):
        raise InvalidArgumentError("split direction must be nonzero")
    proj = project(points, direction)
    order = np.argsort(proj, kind="stable")
    sp = proj[order]
    if sp[0] == sp[-1]:
        raise DegenerateGeometryError("all projections coincide")
    k = split_rank(n, mode, rng, percent)
    if sp[k - 1] == sp[k]:
        breaks = np.flatnonzero(sp[:-1] < sp[1:]) + 1  # admissible first-child sizes
        k = int(breaks[np.argmin(np.abs(breaks - k))])
    threshold = float(sp[k - 1])
    first = np.sort(order[:k])
    second = np.sort(order[k:])
    return first, second, Hyperplane(normal=direction.copy(), threshold=threshold)


def _empty_refinement(dim: int) -> Refinement:
    return Refinement(kernel=KernelSpec(), centers=np.zeros((0, dim)),
                      coefficients=np.zeros(0), eps_trail=[], kappa=1.0,
                      stop_reason="column-limit", center_index=np.zeros(0, dtype=np.int64))


@dataclass
class _Task:
    index: np.ndarray          # global row indices owned by the node
    residual: np.ndarray       # residual on those rows
    path: tuple[int, ...]
    counts: tuple[int, ...]    # center counts along the path (excluding this node)
    inherited: np.ndarray      # global row indices of the parent's centers on this side


@dataclass
class _Outcome:
    node: TreeNode
    children: list[_Task]
    log: dict


class _Trainer:
    def __init__(self, X, f, params: WorkingParams, mode: str, seed: int, keep_fit_data: bool):
        self.X = X
        self.f = f
        self.p = params
        self.mode = mode
        self.seed = int(seed)
        self.keep = keep_fit_data
        self.n, self.d = X.shape
        scale = float(np.max(np.abs(f)))
        self.scale = scale if scale > 0 else 1.0
        self.omega2 = params.omega2_for(self.scale)
        self.min_centers = params.min_centers_for(self.d)

    def rng_for(self, path):
        ss = np.random.SeedSequence(self.seed, spawn_key=(len(path),) + tuple(path))
        return np.random.default_rng(ss)

    def subset_size(self, task: _Task) -> int:
        m = len(task.index)
        if not task.path:
            n_i = self.p.root_subset_size(m, self.d)
        else:
            n_i = min(m, int(round(self.p.n_i_factor * update_center_average(task.counts))))
        return max(n_i, self.d + 2)

    def pick_subset(self, task: _Task, rng) -> tuple[np.ndarray, np.ndarray]:
        """Local rows of the exploration subset, and positions of the inherited centers in it."""
        m = len(task.index)
        inherited_local = np.searchsorted(task.index, task.inherited)
        n_i = self.subset_size(task)
        if n_i >= m:
            sub = np.arange(m)
        else:
            pool = np.setdiff1d(np.arange(m), inherited_local, assume_unique=True)
            n_rand = min(len(pool), max(n_i - len(inherited_local), self.d + 2))
            pick = pool[random_index_subset(len(pool), n_rand, rng)] if n_rand else pool[:0]
            sub = np.union1d(inherited_local, pick)
        return sub, np.searchsorted(sub, inherited_local)

    def leaf(self, task, status, refinement, residual, n_bar, **extra) -> TreeNode:
        Xn = self.X[task.index]
        return TreeNode(
            refinement=refinement, status=status, depth=len(task.path), n_points=len(task.index),
            residual_rae=float(np.max(np.abs(residual))) / self.scale if len(residual) else 0.0,
            bbox=(Xn.min(axis=0), Xn.max(axis=0)), path=task.path, n_bar_c=n_bar,
            point_index=task.index, **extra)

    def process(self, task: _Task) -> _Outcome:
        idx, r = task.index, task.residual
        m, d = len(idx), self.d
        rng = self.rng_for(task.path)
        Xn = self.X[idx]
        log = {"path": "".join(map(str, task.path)), "depth": len(task.path), "n_points": m}
        prior_bar = update_center_average(task.counts) if task.counts else 0.0
        if m < d + 2:
            node = self.leaf(task, "leaf-insufficient", _empty_refinement(d), r, prior_bar)
            log.update(n_centers=0, status=node.status, stop_reason=None, kappa=None, eps_trail=[])
            return _Outcome(node, [], log)

        sub, inh_pos = self.pick_subset(task, rng)
        budget = ExplorationBudget(n_i=len(sub), min_centers=self.min_centers, omega1=self.p.omega1,
                                   omega2=self.omega2, omega3=self.p.omega3, n_bar_c=prior_bar)
        try:
            ref = explore_refinement(r[sub], Xn[sub], inh_pos, budget, self.p.kernel, self.p.beta)
        except DegenerateGeometryError:
            node = self.leaf(task, "leaf-degenerate", _empty_refinement(d), r, prior_bar)
            log.update(n_centers=0, status=node.status, stop_reason=None, kappa=None, eps_trail=[])
            return _Outcome(node, [], log)

        r_new = r - apply_refinement(ref, Xn)
        counts = task.counts + (ref.n_centers,)
        n_bar = update_center_average(counts)
        extra = {}
        if self.keep:
            extra = {"fit_index": idx[sub], "fit_residual": r[sub].copy()}
        center_global = idx[sub[ref.center_index]]
        node_rae = float(np.max(np.abs(r_new))) / self.scale
        log.update(n_centers=ref.n_centers, stop_reason=ref.stop_reason, kappa=ref.kappa,
                   eps_trail=ref.eps_trail, n_subset=len(sub), n_bar_c=n_bar, residual_rae=node_rae)

        children: list[_Task] = []
        if node_rae <= self.p.epsilon:
            status = "leaf-converged"
        else:
            try:
                _, _, direction = choose_split(Xn[sub], r_new[sub])
                first, second, hp = partition(Xn, direction, self.mode, rng)
            except DegenerateGeometryError:
                status = "leaf-degenerate"
            else:
                limit = self.p.omega4 * n_bar
                if len(first) < limit or len(second) < limit:
                    status = "leaf-insufficient"
                else:
                    status = "internal"
                    side = hp.first_side(self.X[center_global]) if len(center_global) else np.zeros(0, bool)
                    for k, rows in enumerate((first, second)):
                        inh = center_global[side] if k == 0 else center_global[~side]
                        children.append(_Task(idx[rows], r_new[rows], task.path + (k,), counts,
                                              np.sort(inh)))
        log["status"] = status
        if status == "internal":
            node = TreeNode(refinement=ref, status=status, depth=len(task.path), n_points=m,
                            residual_rae=node_rae, bbox=(Xn.min(axis=0), Xn.max(axis=0)),
                            path=task.path, hyperplane=hp, n_bar_c=n_bar, **extra)
        else:
            node = self.leaf(task, status, ref, r_new, n_bar, **extra)
        return _Outcome(node, children, log)


def validate_dataset(points, values) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    f = np.asarray(values, dtype=np.float64).ravel()
    if X.ndim != 2 or len(X) == 0:
        raise InvalidArgumentError("points must be a non-empty N x d array")
    if len(f) != len(X):
        raise InvalidArgumentError(f"{len(X)} points but {len(f)} values")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(f))):
        raise InvalidArgumentError("points and values must be finite")
    uniq, inverse, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
    if len(uniq) != len(X):
        dup = np.flatnonzero(counts[inverse.ravel()] > 1)
        raise InvalidArgumentError(f"duplicate points at rows {dup[:10].tolist()}")
    return np.ascontiguousarray(X), f


def train_srt(points, values, params: WorkingParams | None = None, mode: str = "equal",
              seed: int = 0, threads: int = 1, keep_fit_data: bool = False):
    """Train one sparse residual tree.

    Returns ``(model, report)``. ``threads`` only changes how the nodes of a
    depth level are scheduled; the model is identical for any value.
    ``keep_fit_data`` retains each node's exploration subset and inherited
    residual so per-node stability checks can be replayed.
    """
    params = params or WorkingParams()
    if mode not in SPLIT_MODES:
        raise InvalidArgumentError(f"unknown split mode {mode!r}")
    X, f = validate_dataset(points, values)
    start = time.perf_counter()
    trainer = _Trainer(X, f, params, mode, seed, keep_fit_data)
    report = TrainingReport()

    root_task = _Task(np.arange(len(X)), f.copy(), (), (), np.zeros(0, dtype=np.int64))
    frontier = [(root_task, None, 0)]
    root = None
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while frontier:
            tasks = [t for t, _, _ in frontier]
            level_points = sum(len(t.index) for t in tasks)
            report.peak_points = max(report.peak_points, level_points)
            report.points_processed += level_points
            outcomes = list(pool.map(trainer.process, tasks)) if pool else [trainer.process(t) for t in tasks]
            nxt = []
            pending_pairs: dict[int, list] = {}
            for (task, parent, side), out in zip(frontier, outcomes):
                if parent is None:
                    root = out.node
                else:
                    pending_pairs.setdefault(id(parent), [parent, None, None])[1 + side] = out.node
                report.node_log.append(out.log)
                report.n_bar_c_trail.append(out.node.n_bar_c)
                for k, child in enumerate(out.children):
                    nxt.append((child, out.node, k))
            for parent, first, second in pending_pairs.values():
                parent.children = (first, second)
            frontier = nxt
    finally:
        if pool is not None:
            pool.shutdown()

    model = SrtModel(root=root, dim=X.shape[1], params=params, seed=int(seed), mode=mode)
    report.insufficient_regions = model.insufficient_regions()
    report.wall_time = time.perf_counter() - start
    logger.info("trained SRT: %d nodes, depth %d, %.3fs", model.node_count, model.depth, report.wall_time)
    return model, report


def predict_srt(model: SrtModel, points) -> np.ndarray:
    """Sum the refinements of every node on each point's root-to-leaf route."""
    X = np.asarray(points, dtype=float)
    single = X.ndim == 1 and model.dim > 1 or X.ndim == 0
    X = np.atleast_2d(X)
    if model.dim == 1 and X.shape[1] != 1:
        X = X.reshape(-1, 1)
    if X.shape[1] != model.dim:
        raise InvalidArgumentError(f"expected {model.dim}-dimensional points, got {X.shape[1]}")
    out = np.zeros(len(X))
    stack = [(model.root, np.arange(len(X)))]
    while stack:
        node, ids = stack.pop()
        if len(ids) == 0:
            continue
        sub = X[ids]
        out[ids] += apply_refinement(node.refinement, sub)
        if node.children is not None:
            side = node.hyperplane.first_side(sub)
            stack.append((node.children[1], ids[~side]))
            stack.append((node.children[0], ids[side]))
    return float(out[0]) if single else out


def depth_bound(n: int, omega4: float, n_bar_c: float) -> int:
    return math.ceil(math.log2(max(n / (omega4 * n_bar_c), 1.0))) + 2
