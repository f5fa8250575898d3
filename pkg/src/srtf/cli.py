"""Command-line entry point: ``srtf gen|fit|predict|report|bench``.

Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .data import Dataset, format_float, load_csv, read_points, rmae, save_csv
from .errors import InvalidArgumentError, SrtfError
from .forest import train_srf
from .functions import TEST_FUNCTIONS, test_function_eval
from .params import WorkingParams
from .report import format_report
from .sampling import sample_points
from .serialization import deserialize_model, serialize_model
from .tree import rae, train_srt

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _box(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi but got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("box needs lo < hi")
    return lo, hi


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srtf", description="Sparse residual trees and forests for scattered data.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="sample a test function into a CSV dataset")
    g.add_argument("--fn", required=True, choices=sorted(TEST_FUNCTIONS))
    g.add_argument("--sampler", default="halton", choices=("halton", "uniform", "normal"))
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--dim", type=_positive_int, default=2)
    g.add_argument("--box", type=_box, help="lo,hi for every coordinate (write --box=-7,7 for negative lo)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--header", action="store_true", help="write a header row")
    g.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="train an SRT (--trees 1) or an SRF")
    f.add_argument("--data", required=True)
    f.add_argument("--header", action="store_true", help="the data file has a header row")
    f.add_argument("--epsilon", type=float, default=0.01, help="expected relative absolute error")
    f.add_argument("--trees", type=_positive_int, default=1)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--omega1", type=float, help="condition cap (default 1e8)")
    f.add_argument("--omega2", type=float, help="absolute improvement threshold")
    f.add_argument("--omega2-factor", type=float,
                   help="improvement threshold as a multiple of epsilon * max|f| (default 0.01)")
    f.add_argument("--omega3", type=float, help="shape factor in (0,1) (default 0.05)")
    f.add_argument("--omega4", type=float, help="smallest child as a multiple of the center average (default 2)")
    f.add_argument("--kernel", choices=("gaussian", "inverse-multiquadric"))
    f.add_argument("--beta", type=float, help="inverse-multiquadric exponent")
    f.add_argument("--n-i-root", type=_positive_int, help="root exploration subset size (default 500*d)")
    f.add_argument("--min-centers", type=_positive_int)
    f.add_argument("--threads", type=_positive_int, default=1)
    f.add_argument("--model", required=True)
    f.add_argument("--report", help="write the training report (JSON) here")

    pr = sub.add_parser("predict", help="evaluate a model on the points of a CSV file")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--header", action="store_true")
    pr.add_argument("--out", required=True)

    r = sub.add_parser("report", help="list the insufficient-data regions of a model")
    r.add_argument("--model", required=True)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True, choices=bench_mod.SUITES)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=_positive_int, help="seeds (franke3d, forest1d) or timing repeats (scaling)")
    b.add_argument("--sizes", help="comma-separated sample sizes (fig8, franke3d, scaling)")
    b.add_argument("--out", required=True)
    return p


def cmd_gen(a) -> int:
    default_box = TEST_FUNCTIONS[a.fn][2]
    if a.fn == "osc-1d" and a.dim != 1:
        raise InvalidArgumentError("osc-1d is one-dimensional; use --dim 1")
    lo, hi = a.box if a.box is not None else default_box
    rng = np.random.default_rng(a.seed)
    X = sample_points(a.sampler, a.n, a.dim, lo, hi, rng)
    y = test_function_eval(a.fn, X)
    prov = {"fn": a.fn, "sampler": a.sampler, "n": a.n, "dim": a.dim,
            "box": f"{format_float(lo)},{format_float(hi)}", "seed": a.seed}
    save_csv(Dataset(X, y, prov), a.out, header=a.header)
    return EXIT_OK


def _params_from(a) -> WorkingParams:
    over = {"epsilon": a.epsilon, "omega1": a.omega1, "omega2": a.omega2, "omega2_factor": a.omega2_factor,
            "omega3": a.omega3, "omega4": a.omega4, "kernel": a.kernel, "beta": a.beta,
            "n_i_root": a.n_i_root, "min_centers": a.min_centers, "n_trees": a.trees}
    if a.omega2 is not None and a.omega2_factor is not None:
        raise InvalidArgumentError("--omega2 and --omega2-factor are mutually exclusive")
    return WorkingParams(**{k: v for k, v in over.items() if v is not None})


def cmd_fit(a) -> int:
    params = _params_from(a)
    ds = load_csv(a.data, has_header=a.header)
    if a.trees == 1:
        model, rep = train_srt(ds.points, ds.values, params, seed=a.seed, threads=a.threads)
        reports = [rep]
    else:
        model, reports = train_srf(ds.points, ds.values, params, a.trees, a.seed, threads=a.threads)
    serialize_model(model, a.model)
    train_rae = rae(model.predict(ds.points), ds.values)
    n_ins = sum(len(r.insufficient_regions) for r in reports)
    print(f"trained {'SRT' if a.trees == 1 else f'SRF of {a.trees} trees'} on {ds.n} points: "
          f"training RAE {train_rae:.6g}, {n_ins} insufficient region(s)")
    if a.report:
        doc = {"params": params.to_dict(), "training_rae": train_rae,
               "trees": [r.to_dict() for r in reports]}
        Path(a.report).write_text(json.dumps(doc, indent=1) + "\n")
    return EXIT_OK


def cmd_predict(a) -> int:
    model = deserialize_model(a.model)
    ds = read_points(a.data, model.dim, has_header=a.header)
    pred = np.atleast_1d(model.predict(ds.points))
    d = model.dim
    cols = [f"x{i + 1}" for i in range(d)] + ["prediction"]
    if ds.values is not None:
        cols += ["truth", "error"]
    lines = [",".join(cols)]
    for i, x in enumerate(ds.points):
        cells = [format_float(v) for v in x] + [format_float(pred[i])]
        if ds.values is not None:
            cells += [format_float(ds.values[i]), format_float(pred[i] - ds.values[i])]
        lines.append(",".join(cells))
    Path(a.out).write_text("\n".join(lines) + "\n")
    if ds.values is not None:
        value, fallback = rmae(pred, ds.values, return_flag=True)
        note = " (all truths are zero: mean absolute error)" if fallback else ""
        print(f"RMAE {value:.6g}{note}, max RAE {rae(pred, ds.values):.6g} on {ds.n} points")
    return EXIT_OK


def cmd_report(a) -> int:
    sys.stdout.write(format_report(deserialize_model(a.model)))
    return EXIT_OK


def cmd_bench(a) -> int:
    sizes = None
    if a.sizes:
        try:
            sizes = tuple(int(float(v)) for v in a.sizes.split(","))
        except ValueError:
            raise InvalidArgumentError(f"bad --sizes {a.sizes!r}") from None
    rows, grids = bench_mod.run_suite(a.suite, seed=a.seed, repeats=a.repeats, sizes=sizes)
    out = Path(a.out)
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=bench_mod.BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (format_float(v) if isinstance(v, float) else v) for k, v in row.items()})
    for name, (cols, arr) in grids.items():
        path = out.with_name(f"{out.stem}_{name}.csv")
        body = "\n".join(",".join(format_float(v) for v in r) for r in arr)
        path.write_text(",".join(cols) + "\n" + body + "\n")
    for row in rows:
        print(", ".join(f"{k}={row[k]:.4g}" if isinstance(row[k], float) else f"{k}={row[k]}"
                        for k in ("suite", "method", "n", "seed", "test_rmae", "test_max_rae", "nodes")
                        if row[k] != ""))
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "predict": cmd_predict, "report": cmd_report, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except SrtfError as exc:
        print(f"srtf {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
