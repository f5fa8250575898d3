"""Benchmark suites behind ``srtf bench``.

Every suite returns result rows with the columns in ``BENCH_COLUMNS`` (cells
that do not apply are left empty) and a dict of named grids for plotting.
Working parameters per suite are fixed module constants so that a run is
reproducible from the command line alone.
"""
from __future__ import annotations

import time

import numpy as np

from .data import rmae
from .errors import InvalidArgumentError
from .forest import train_srf
from .functions import franke, local_osc, osc_1d, quad_saddle
from .params import WorkingParams
from .report import near_ball
from .sampling import halton_sequence
from .tree import rae, train_srt

BENCH_COLUMNS = (
    "suite", "method", "n", "dim", "seed", "n_trees", "n_test",
    "test_rmae", "test_max_rae", "train_rae", "nodes", "depth", "root_centers",
    "insufficient", "insufficient_near_origin", "train_seconds", "predict_us_per_point",
)

# quadratic target in one node: wide kernels and a fine improvement threshold
FIG2_PARAMS = WorkingParams(epsilon=0.01, omega2_factor=1e-3, omega3=0.2)
# oscillating target: tight condition cap and narrow kernels keep small leaves from overshooting
FIG8_PARAMS = WorkingParams(epsilon=0.01, omega1=1e2, omega3=1e-3)
FRANKE3D_PARAMS = WorkingParams(epsilon=1e-3, omega2_factor=1e-3, omega3=0.2)
SCALING_PARAMS = WorkingParams(epsilon=0.01)
FOREST1D_PARAMS = WorkingParams(epsilon=0.01)

SUITES = ("fig2", "fig8", "franke3d", "scaling", "forest1d")


def square_grid(lo: float, hi: float, per_side: int) -> np.ndarray:
    g = np.linspace(lo, hi, per_side)
    a, b = np.meshgrid(g, g)
    return np.column_stack([a.ravel(), b.ravel()])


def _row(suite, method, model, n, dim, seed, **extra) -> dict:
    row = dict.fromkeys(BENCH_COLUMNS, "")
    row.update(suite=suite, method=method, n=n, dim=dim, seed=seed)
    trees = model.trees if method == "srf" else [model]
    row.update(n_trees=len(trees),
               nodes=sum(t.node_count for t in trees),
               depth=max(t.depth for t in trees),
               root_centers=trees[0].root.n_centers)
    row.update(extra)
    return row


def _error_grid(points, truth, pred) -> tuple[list[str], np.ndarray]:
    d = points.shape[1]
    cols = [f"x{i + 1}" for i in range(d)] + ["truth", "prediction", "error"]
    return cols, np.column_stack([points, truth, pred, pred - truth])


def suite_fig2(seed: int = 0, **_):
    X = -7 + 14 * halton_sequence(500, 2)
    f = quad_saddle(X)
    t0 = time.perf_counter()
    model, rep = train_srt(X, f, FIG2_PARAMS, seed=seed)
    elapsed = time.perf_counter() - t0
    G = square_grid(-7, 7, 100)
    g_true, g_pred = quad_saddle(G), model.predict(G)
    row = _row("fig2", "srt", model, 500, 2, seed, n_test=len(G),
               test_rmae=rmae(g_pred, g_true), test_max_rae=rae(g_pred, g_true),
               train_rae=rae(model.predict(X), f), insufficient=len(rep.insufficient_regions),
               train_seconds=elapsed)
    return [row], {"fig2_grid": _error_grid(G, g_true, g_pred)}


def suite_fig8(seed: int = 0, sizes=(3000, 6000), **_):
    G = square_grid(-7, 7, 100)
    g_true = local_osc(G)
    rows, grids = [], {}
    for n in sizes:
        X = -7 + 14 * halton_sequence(n, 2)
        f = local_osc(X)
        t0 = time.perf_counter()
        model, rep = train_srt(X, f, FIG8_PARAMS, seed=seed)
        elapsed = time.perf_counter() - t0
        g_pred = model.predict(G)
        near = sum(near_ball(r, (0.0, 0.0), 3.0) for r in rep.insufficient_regions)
        rows.append(_row("fig8", "srt", model, n, 2, seed, n_test=len(G),
                         test_rmae=rmae(g_pred, g_true), test_max_rae=rae(g_pred, g_true),
                         train_rae=rae(model.predict(X), f), insufficient=len(rep.insufficient_regions),
                         insufficient_near_origin=near, train_seconds=elapsed))
        grids[f"fig8_n{n}_grid"] = _error_grid(G, g_true, g_pred)
    return rows, grids


def suite_franke3d(seed: int = 0, repeats: int = 5, sizes=(10_000, 100_000), n_trees: int = 5, **_):
    """SRT and SRF on 3-D Franke. The smallest size is repeated over ``repeats`` seeds."""
    Z = np.random.default_rng(seed).random((5000, 3))
    z_true = franke(Z)
    rows = []
    for k, n in enumerate(sizes):
        X = halton_sequence(n, 3)
        f = franke(X)
        for r in range(repeats if k == 0 else 1):
            s = seed + r
            t0 = time.perf_counter()
            tree, rep = train_srt(X, f, FRANKE3D_PARAMS, seed=s)
            t_tree = time.perf_counter() - t0
            pred = tree.predict(Z)
            rows.append(_row("franke3d", "srt", tree, n, 3, s, n_test=len(Z),
                             test_rmae=rmae(pred, z_true), test_max_rae=rae(pred, z_true),
                             insufficient=len(rep.insufficient_regions), train_seconds=t_tree))
            t0 = time.perf_counter()
            forest, reps = train_srf(X, f, FRANKE3D_PARAMS, n_trees, s)
            t_forest = time.perf_counter() - t0
            pred = forest.predict(Z)
            rows.append(_row("franke3d", "srf", forest, n, 3, s, n_test=len(Z),
                             test_rmae=rmae(pred, z_true), test_max_rae=rae(pred, z_true),
                             insufficient=sum(len(r.insufficient_regions) for r in reps),
                             train_seconds=t_forest))
    return rows, {}


def suite_scaling(seed: int = 0, repeats: int = 3, sizes=(10_000, 100_000, 200_000, 1_000_000), **_):
    """Training and per-point prediction times on 2-D Franke (best of ``repeats``)."""
    probes = np.random.default_rng(seed).random((20_000, 2))
    p_true = franke(probes)
    rows = []
    for n in sizes:
        X = halton_sequence(n, 2)
        f = franke(X)
        best_train = best_pred = np.inf
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            model, rep = train_srt(X, f, SCALING_PARAMS, seed=seed)
            best_train = min(best_train, time.perf_counter() - t0)
            t0 = time.perf_counter()
            pred = model.predict(probes)
            best_pred = min(best_pred, time.perf_counter() - t0)
        rows.append(_row("scaling", "srt", model, n, 2, seed, n_test=len(probes),
                         test_rmae=rmae(pred, p_true), test_max_rae=rae(pred, p_true),
                         insufficient=len(rep.insufficient_regions), train_seconds=best_train,
                         predict_us_per_point=1e6 * best_pred / len(probes)))
    return rows, {}


def suite_forest1d(seed: int = 0, repeats: int = 20, n_trees: int = 5, **_):
    """1-D oscillating target on 1000 equispaced points; one forest per master seed."""
    X = (10 * np.arange(1000) / 999 - 5)[:, None]
    f = osc_1d(X)
    Z = np.linspace(-5, 5, 2001)[:, None]
    z_true = osc_1d(Z)
    rows = []
    for s in range(seed, seed + repeats):
        forest, _ = train_srf(X, f, FOREST1D_PARAMS, n_trees, s)
        per_tree = forest.tree_predictions(Z)
        for i, tree in enumerate(forest.trees):
            rows.append(_row("forest1d", "srt", tree, 1000, 1, s, n_test=len(Z),
                             test_rmae=rmae(per_tree[i], z_true), test_max_rae=rae(per_tree[i], z_true)))
        pred = forest.predict(Z)
        rows.append(_row("forest1d", "srf", forest, 1000, 1, s, n_test=len(Z),
                         test_rmae=rmae(pred, z_true), test_max_rae=rae(pred, z_true)))
    return rows, {}


_RUNNERS = {"fig2": suite_fig2, "fig8": suite_fig8, "franke3d": suite_franke3d,
            "scaling": suite_scaling, "forest1d": suite_forest1d}


def run_suite(name: str, seed: int = 0, **options):
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown suite {name!r}; choose from {list(SUITES)}") from None
    return runner(seed=seed, **{k: v for k, v in options.items() if v is not None})
