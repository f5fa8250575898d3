"""Per-node adaptive RBF refinement.

A refinement is a small RBF expansion fitted by least squares to the residual
on a sparse subset of the node's points. Centers are drawn greedily from a
farthest-point sequence, always picking the candidate whose Voronoi cell
carries the largest mean squared temporary residual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DegenerateGeometryError, InvalidArgumentError
from .lsq import IncrementalQR
from .sampling import QuasiUniformState

KERNELS = ("gaussian", "inverse-multiquadric")

STOP_REASONS = ("condition", "no-improvement", "column-limit", "rank-deficient")

# rows per block when evaluating kernel sums on large point sets
_BLOCK_ENTRIES = 1 << 21


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "gaussian"
    delta: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise InvalidArgumentError(f"unknown kernel {self.kind!r}")
        if not self.delta > 0:
            raise InvalidArgumentError("shape parameter must be positive")
        if self.kind == "inverse-multiquadric" and not self.beta > 0:
            raise InvalidArgumentError("inverse-multiquadric exponent must be positive")

    def check_dim(self, dim: int) -> None:
        if self.kind == "inverse-multiquadric" and not self.beta > dim / 2:
            raise InvalidArgumentError(f"inverse-multiquadric needs beta > d/2 = {dim / 2}")

    def of_sqdist(self, sqdist: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            return np.exp(-(self.delta * self.delta) * sqdist)
        return (1.0 / (self.delta * self.delta) + np.sqrt(sqdist)) ** (-self.beta)


def kernel_eval(spec: KernelSpec, x, center) -> float:
    diff = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
    return float(spec.of_sqdist(np.asarray(np.dot(diff, diff))))


def kernel_matrix(spec: KernelSpec, points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Dense ``len(points) x len(centers)`` matrix of kernel values."""
    return spec.of_sqdist(cdist(points, centers, "sqeuclidean"))


def shape_parameter(points, omega3: float) -> float:
    """Shape parameter for which the Gaussian at the subset mean decays to ``omega3``
    at the farthest subset point."""
    if not 0.0 < omega3 < 1.0:
        raise InvalidArgumentError("omega3 must lie in (0, 1)")
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    mean = points.mean(axis=0)
    max_sq = float(((points - mean) ** 2).sum(axis=1).max())
    if max_sq == 0.0:
        raise DegenerateGeometryError("all points coincide with their mean")
    return math.sqrt(-math.log(omega3) / max_sq)


@dataclass
class ExplorationBudget:
    n_i: int
    min_centers: int
    omega1: float = 1e8
    omega2: float = 0.0
    omega3: float = 0.05
    n_bar_c: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.omega3 < 1.0:
            raise InvalidArgumentError("omega3 must lie in (0, 1)")
        if not self.omega1 > 1.0:
            raise InvalidArgumentError("omega1 must exceed 1")
        if self.omega2 < 0:
            raise InvalidArgumentError("omega2 must be non-negative")


@dataclass
class Refinement:
    """One node's RBF layer.

    ``center_index`` refers to rows of the subset the refinement was fitted
    on; it is training bookkeeping and is not serialized.
    """

    kernel: KernelSpec
    centers: np.ndarray
    coefficients: np.ndarray
    eps_trail: list[float] = field(default_factory=list)
    kappa: float = 1.0
    stop_reason: str = "column-limit"
    center_index: np.ndarray | None = None

    @property
    def n_centers(self) -> int:
        return len(self.coefficients)


def apply_refinement(refinement: Refinement, points) -> np.ndarray:
    """Evaluate ``sum_i alpha_i K(x, chi_i)`` at every row of ``points``."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[None, :]
    out = np.zeros(len(points))
    k = refinement.n_centers
    if k == 0 or len(points) == 0:
        return out
    step = max(1, _BLOCK_ENTRIES // k)
    for lo in range(0, len(points), step):
        block = kernel_matrix(refinement.kernel, points[lo:lo + step], refinement.centers)
        out[lo:lo + step] = block @ refinement.coefficients
    return out


def update_center_average(node_counts) -> float:
    """Mean center count over the nodes of a root-to-node path."""
    counts = list(node_counts)
    if not counts:
        raise InvalidArgumentError("need at least one node count")
    return sum(counts) / len(counts)


def explore_refinement(residual, points, inherited=(), budget: ExplorationBudget | None = None,
                       kernel: str = "gaussian", beta: float = 1.0) -> Refinement:
    """Greedy center selection minimising the residual's 2-norm on ``points``.

    Parameters
    ----------
    residual : array_like
        Current residual at each subset point.
    points : array_like
        The sparsified node subset, one row per point.
    inherited : sequence of int
        Rows of ``points`` holding the parent's centers. They seed the
        farthest-point sequence and enter the basis first.
    budget : ExplorationBudget
        Subset size, minimum center count and the condition / improvement /
        shape controls.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    residual = np.asarray(residual, dtype=float).ravel()
    n, d = points.shape
    if len(residual) != n:
        raise InvalidArgumentError("residual and points disagree in length")
    if n < d + 2:
        raise InvalidArgumentError(f"exploration needs at least d+2 = {d + 2} points, got {n}")
    if budget is None:
        budget = ExplorationBudget(n_i=n, min_centers=d + 3)
    spec = KernelSpec(kernel, shape_parameter(points, budget.omega3), beta)
    spec.check_dim(d)

    qr = IncrementalQR(residual, capacity=64)
    cols = np.empty((n, 64))
    centers: list[int] = []
    eps = [qr.residual_rms()]
    qu = QuasiUniformState(points)

    def try_append(idx: int) -> str | None:
        nonlocal cols
        col = kernel_matrix(spec, points, points[idx:idx + 1])[:, 0]
        qr.append(col)
        if qr.r_factor[-1, -1] == 0.0:
            qr.drop_last()
            return "rank-deficient"
        if qr.condition_estimate() > budget.omega1:
            qr.drop_last()
            return "condition"
        qr.commit()
        j = len(centers)
        if j == cols.shape[1]:
            cols = np.concatenate([cols, np.empty_like(cols)], axis=1)
        cols[:, j] = col
        centers.append(idx)
        eps.append(qr.residual_rms())
        return None

    inherited = [int(i) for i in inherited]
    for idx in inherited:
        qu.add(idx)
    stop = None
    for idx in inherited:
        try_append(idx)  # an ill-conditioned inherited column is simply skipped
    if not inherited:
        qu.extend(1, "mean-nearest")
        stop = try_append(qu.selected[0])

    retried = False
    while stop is None:
        j = len(centers)
        if j >= n:
            stop = "column-limit"
            break
        qu.extend(j + d + 1)
        taken = set(centers)
        cands = sorted(s for s in qu.selected if s not in taken)
        if not cands:
            stop = "column-limit"
            break
        temp = residual - cols[:, :j] @ qr.solve() if j else residual
        labels = qu.nearest_label
        size = qu.size
        sums = np.bincount(labels, weights=temp * temp, minlength=size)
        counts = np.bincount(labels, minlength=size)
        pos = {s: p for p, s in enumerate(qu.selected)}
        cand_pos = np.array([pos[s] for s in cands])
        live = counts[cand_pos] > 0
        if not live.any():
            if retried:
                stop = "column-limit"
                break
            retried = True
            qu.extend(qu.size + d + 1)
            continue
        scores = np.where(live, sums[cand_pos] / np.maximum(counts[cand_pos], 1), -np.inf)
        best = cands[int(np.argmax(scores))]
        stop = try_append(best)
        if stop is not None:
            break
        if len(centers) >= budget.min_centers and eps[-2] - eps[-1] < budget.omega2:
            stop = "no-improvement"
        elif len(centers) >= n:
            stop = "column-limit"

    if centers:
        alpha = qr.solve()
        kappa = qr.condition_estimate()
    else:
        alpha = np.zeros(0)
        kappa = 1.0
    idx = np.array(centers, dtype=np.int64)
    return Refinement(kernel=spec, centers=points[idx].copy(), coefficients=alpha,
                      eps_trail=eps, kappa=kappa, stop_reason=stop, center_index=idx)
