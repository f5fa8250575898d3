"""Sparse residual forest: several trees with different decompositions.

The first tree splits at the median, the others at random percentile ranks.
A prediction averages only the trees whose squared deviation from the
ensemble mean is below the mean squared deviation, which discards the trees
that are currently suffering from a nearby piece boundary.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .params import WorkingParams
from .tree import SrtModel, TrainingReport, predict_srt, train_srt


def tree_seed(master_seed: int, index: int) -> int:
    """Seed of tree ``index``: first word of ``SeedSequence(master_seed, spawn_key=(index,))``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass
class SrfModel:
    trees: list[SrtModel]
    n_t: int
    master_seed: int

    def __post_init__(self):
        if self.n_t < 1 or len(self.trees) != self.n_t:
            raise InvalidArgumentError("a forest needs n_t >= 1 trees")
        dims = {t.dim for t in self.trees}
        if len(dims) != 1:
            raise InvalidArgumentError("trees disagree in dimension")

    @property
    def dim(self) -> int:
        return self.trees[0].dim

    @property
    def params(self) -> WorkingParams:
        return self.trees[0].params

    def predict(self, points) -> np.ndarray:
        return predict_srf(self, points)

    def tree_predictions(self, points) -> np.ndarray:
        """``(n_t, N)`` array of the individual tree predictions."""
        return np.stack([np.atleast_1d(predict_srt(t, points)) for t in self.trees])


def train_srf(points, values, params: WorkingParams | None = None, n_t: int | None = None,
              master_seed: int = 0, threads: int = 1):
    """Train ``n_t`` trees (tree 0 equal splitting, the rest random splitting).

    Returns ``(model, reports)``. With ``threads > 1`` the trees are trained
    concurrently; the models do not depend on it.
    """
    params = params or WorkingParams()
    n_t = params.n_trees if n_t is None else int(n_t)
    if n_t < 1:
        raise InvalidArgumentError("n_t must be at least 1")

    def one(i):
        mode = "equal" if i == 0 else "random"
        return train_srt(points, values, params, mode=mode, seed=tree_seed(master_seed, i))

    if threads > 1 and n_t > 1:
        with ThreadPoolExecutor(max_workers=min(threads, n_t)) as pool:
            results = list(pool.map(one, range(n_t)))
    else:
        results = [one(i) for i in range(n_t)]
    trees = [m for m, _ in results]
    reports: list[TrainingReport] = [r for _, r in results]
    return SrfModel(trees=trees, n_t=n_t, master_seed=int(master_seed)), reports


def combine(preds) -> np.ndarray:
    """Filtered mean over the tree axis of an ``(n_t, N)`` prediction array.

    Sums are exactly rounded (``math.fsum``), so the result does not depend
    on tree order.
    """
    preds = np.asarray(preds, dtype=float)
    if preds.ndim == 1:
        preds = preds[:, None]
    n_t, n = preds.shape
    out = np.empty(n)
    lo = preds.min(axis=0)
    hi = preds.max(axis=0)
    for k in range(n):
        s = preds[:, k].tolist()
        m = math.fsum(s) / n_t
        dev = [(v - m) ** 2 for v in s]
        cut = math.fsum(dev) / n_t
        keep = [v for v, e in zip(s, dev) if e < cut]
        out[k] = math.fsum(keep) / len(keep) if keep else m
    # rounding in the divisions can step one ulp outside the tree hull
    return np.clip(out, lo, hi)


def predict_srf(model: SrfModel, points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    single = X.ndim == 1 and model.dim > 1 or X.ndim == 0
    out = combine(model.tree_predictions(X))
    return float(out[0]) if single else out
