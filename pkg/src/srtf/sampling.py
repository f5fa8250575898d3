"""Point-set primitives: samplers, sparsification and farthest-point subsequences.

All arg-max / arg-min selections over points break ties toward the smallest
point index, which is what ``numpy.argmax``/``argmin`` do natively.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .errors import InvalidArgumentError

MAX_HALTON_DIM = 16

START_RULES = ("mean-nearest", "mean-farthest")


def halton_sequence(count: int, dim: int) -> np.ndarray:
    """Unscrambled Halton points with indices ``1..count`` (no burn-in, no leap).

    Coordinate ``k`` is the radical inverse of the index in the ``k``-th prime
    base, so every value lies strictly inside (0, 1).
    """
    if dim < 1 or dim > MAX_HALTON_DIM:
        raise InvalidArgumentError(f"halton dimension must be in 1..{MAX_HALTON_DIM}, got {dim}")
    if count < 1:
        raise InvalidArgumentError(f"count must be positive, got {count}")
    engine = qmc.Halton(d=dim, scramble=False)
    engine.fast_forward(1)  # index 0 is the origin
    return engine.random(count)


def scale_to_box(unit_points: np.ndarray, lo, hi) -> np.ndarray:
    lo = np.broadcast_to(np.asarray(lo, dtype=float), unit_points.shape[1:])
    hi = np.broadcast_to(np.asarray(hi, dtype=float), unit_points.shape[1:])
    return lo + unit_points * (hi - lo)


def sample_points(sampler: str, count: int, dim: int, lo=0.0, hi=1.0, rng=None) -> np.ndarray:
    """Draw ``count`` points in the box ``[lo, hi]^dim``.

    ``normal`` draws are centred on the box midpoint with a standard deviation
    of a quarter of the box width and are not clipped.
    """
    if sampler == "halton":
        return scale_to_box(halton_sequence(count, dim), lo, hi)
    rng = np.random.default_rng(rng)
    if sampler == "uniform":
        return scale_to_box(rng.random((count, dim)), lo, hi)
    if sampler == "normal":
        lo_arr = np.broadcast_to(np.asarray(lo, dtype=float), (dim,))
        hi_arr = np.broadcast_to(np.asarray(hi, dtype=float), (dim,))
        return (lo_arr + hi_arr) / 2 + rng.standard_normal((count, dim)) * (hi_arr - lo_arr) / 4
    raise InvalidArgumentError(f"unknown sampler {sampler!r}")


def random_index_subset(n_total: int, n_sub: int, rng: np.random.Generator) -> np.ndarray:
    """``n_sub`` distinct indices drawn uniformly from ``0..n_total-1``.

    ``n_sub`` larger than ``n_total`` is clamped rather than rejected.
    """
    if n_total < 1 or n_sub < 1:
        raise InvalidArgumentError("n_total and n_sub must be positive")
    n_sub = min(n_sub, n_total)
    return rng.choice(n_total, size=n_sub, replace=False, shuffle=True)


def _distances_to(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    return np.sqrt(((points - center) ** 2).sum(axis=1))


@dataclass
class QuasiUniformState:
    """Farthest-point selection over a fixed point set.

    ``nearest_label[i]`` indexes into ``selected`` (not into the point set) and
    ``sep_history`` holds the max-min distance realised by every farthest-point
    step, in order.
    """

    points: np.ndarray
    selected: list[int] = field(default_factory=list)
    nearest_label: np.ndarray | None = None
    nearest_dist: np.ndarray | None = None
    sep_history: list[float] = field(default_factory=list)
    capped: bool = False

    def __post_init__(self):
        n = len(self.points)
        if self.nearest_dist is None:
            self.nearest_dist = np.full(n, np.inf)
        if self.nearest_label is None:
            self.nearest_label = np.full(n, -1, dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self.selected)

    def add(self, index: int) -> None:
        index = int(index)
        dist = _distances_to(self.points, self.points[index])
        closer = dist < self.nearest_dist  # strict: earlier selections keep ties
        self.nearest_dist = np.where(closer, dist, self.nearest_dist)
        self.nearest_label[closer] = len(self.selected)
        self.selected.append(index)

    def start(self, rule: str) -> None:
        mean = self.points.mean(axis=0)
        dist = _distances_to(self.points, mean)
        if rule == "mean-nearest":
            self.add(int(np.argmin(dist)))
        elif rule == "mean-farthest":
            self.add(int(np.argmax(dist)))
        else:
            raise InvalidArgumentError(f"unknown start rule {rule!r}")

    def extend(self, target_count: int, start_rule: str = "mean-nearest") -> "QuasiUniformState":
        n = len(self.points)
        if target_count > n:
            self.capped = True
            target_count = n
        if not self.selected and target_count > 0:
            self.start(start_rule)
        while len(self.selected) < target_count:
            nxt = int(np.argmax(self.nearest_dist))
            self.sep_history.append(float(self.nearest_dist[nxt]))
            self.add(nxt)
        return self


def quasi_uniform_extend(points, seed_indices=(), target_count: int = 1,
                         start_rule: str = "mean-nearest") -> QuasiUniformState:
    """Seed a farthest-point selection and grow it to ``target_count`` points.

    Seeds are registered in the given order. Without seeds the first point is
    the one nearest to (``mean-nearest``) or farthest from (``mean-farthest``)
    the coordinate mean.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if start_rule not in START_RULES:
        raise InvalidArgumentError(f"unknown start rule {start_rule!r}")
    seeds = [int(i) for i in seed_indices]
    if len(set(seeds)) != len(seeds):
        raise InvalidArgumentError("seed indices must be distinct")
    if any(i < 0 or i >= len(points) for i in seeds):
        raise InvalidArgumentError("seed index out of range")
    state = QuasiUniformState(points)
    for i in seeds:
        state.add(i)
    return state.extend(target_count, start_rule)


def estimate_fill_distance(points, box_lo, box_hi, n_probe: int, rng=None) -> float:
    """Monte Carlo lower bound on the fill distance of ``points`` in a box.

    Returns the largest nearest-point distance over ``n_probe`` uniform probes.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if n_probe < 1:
        raise InvalidArgumentError("n_probe must be positive")
    rng = np.random.default_rng(rng)
    lo = np.broadcast_to(np.asarray(box_lo, dtype=float), points.shape[1:])
    hi = np.broadcast_to(np.asarray(box_hi, dtype=float), points.shape[1:])
    probes = lo + rng.random((n_probe, points.shape[1])) * (hi - lo)
    dist, _ = cKDTree(points).query(probes)
    return float(np.max(dist))
