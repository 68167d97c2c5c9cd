"""
Command-line interface.

Subcommands: ``predict``, ``transform``, ``diagnose``, ``popsim`` and
``samplesim``. Exit codes: 0 success, 2 validation error, 3 numerical error,
4 I/O error.
"""

import argparse
import json
import math
import os
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .datasets import empirical_example
from .errors import DimensionMismatch, NumericalError, ValidationError
from .linalg import offdiag
from .matrixio import read_matrix, write_matrix, write_table, write_text
from .model import FactorModel
from .predictors import (
    CP_FROM_REGRESSION,
    KINDS,
    MCDONALD,
    REGRESSION,
    diagnose,
    score_weights,
    standardize,
    transform_scores,
)
from .summary import SUMMARY_COLUMNS
from . import popsim, samplesim

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

FILTER_KEYS = {"q", "sl", "phi", "p_per_q", "var_sl", "nl", "n"}


def _parse_filters(items, allowed):
    filters = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ValidationError(f"bad filter {item!r}; use key=value with key in {sorted(allowed)}")
        try:
            filters[key] = [float(v) for v in value.split(",")]
        except ValueError:
            raise ValidationError(f"bad filter value in {item!r}") from None
    return filters


def _matches(levels, filters):
    return all(
        any(math.isclose(float(levels[k]), v, abs_tol=1e-9) for v in vals)
        for k, vals in filters.items()
    )


def _load_model(args):
    if args.fixture:
        model, sigma = empirical_example()
    else:
        if not (args.loadings and args.phi):
            raise ValidationError("give --loadings and --phi, or --fixture")
        model = FactorModel.from_loadings(read_matrix(args.loadings), read_matrix(args.phi))
        sigma = None
    if args.sigma:
        sigma = read_matrix(args.sigma)
    return model, sigma


# -- subcommands -----------------------------------------------------------------


def cmd_predict(args):
    model, sigma = _load_model(args)
    data = read_matrix(args.data)
    if data.shape[1] != model.p:
        raise DimensionMismatch(f"data has {data.shape[1]} columns, model has p = {model.p}")
    if args.standardize:
        data = standardize(data)
    os.makedirs(args.out, exist_ok=True)
    header = [f"F{j + 1}" for j in range(model.q)]
    kinds = args.kinds.split(",") if args.kinds else list(KINDS)
    for kind in kinds:
        w = score_weights(model, kind.strip(), sigma)
        path = os.path.join(args.out, f"scores_{w.kind}.csv")
        write_matrix(path, w.apply(data), header=header)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_transform(args):
    scores = read_matrix(args.scores)
    phi = read_matrix(args.phi)
    out = transform_scores(scores, phi)
    write_matrix(args.out, out, header=[f"F{j + 1}" for j in range(out.shape[1])])
    print(f"wrote {args.out}")
    return EXIT_OK


def _fmt_matrix(M):
    return "\n".join("  " + " ".join(f"{v:8.3f}" for v in row) for row in np.atleast_2d(M))


def format_diagnosis(model, reports, mcdonald=False):
    kinds = [REGRESSION, CP_FROM_REGRESSION] + ([MCDONALD] if mcdonald else [])
    labels = {REGRESSION: "P_r", CP_FROM_REGRESSION: "P_c2", MCDONALD: "P_c"}
    lines = ["Determinacies:", "        " + " ".join(f"{labels[k]:>8}" for k in kinds)]
    for j in range(model.q):
        lines.append(f"  F{j + 1:<4} " + " ".join(f"{reports[k].determinacy[j]:8.3f}" for k in kinds))
    for k, name in ((REGRESSION, "Cor_r"), (CP_FROM_REGRESSION, "Cor_c2")) + (
        ((MCDONALD, "Cor_c"),) if mcdonald else ()
    ):
        lines += [f"Inter-correlations ({name}):", _fmt_matrix(reports[k].intercorrelations)]
    if model.q > 1:
        bias = offdiag(reports[REGRESSION].bias)
        lines += [
            "Bias and loss:",
            f"  mean off-diagonal Phi            {np.mean(offdiag(model.phi)):8.3f}",
            f"  mean off-diagonal Cor_r          {np.mean(offdiag(reports[REGRESSION].intercorrelations)):8.3f}",
            f"  mean bias Cor_r - Phi            {np.mean(bias):8.3f}",
            f"  max |bias|                       {np.max(np.abs(bias)):8.3f}",
        ]
    lines.append(f"  mean loss P_c2 - P_r             {np.mean(reports[CP_FROM_REGRESSION].loss):8.3f}")
    if mcdonald:
        lines.append(f"  mean loss P_c - P_r              {np.mean(reports[MCDONALD].loss):8.3f}")
    return "\n".join(lines)


def cmd_diagnose(args):
    model, sigma = _load_model(args)
    reports = diagnose(model, sigma)
    print(format_diagnosis(model, reports, mcdonald=args.mcdonald))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        kinds = [REGRESSION, CP_FROM_REGRESSION] + ([MCDONALD] if args.mcdonald else [])
        rows = [[f"F{j + 1}"] + [reports[k].determinacy[j] for k in kinds] for j in range(model.q)]
        write_table(os.path.join(args.out, "determinacy.csv"), ["factor"] + list(kinds), rows)
        for k in kinds:
            write_matrix(os.path.join(args.out, f"intercorrelations_{k}.csv"),
                         reports[k].intercorrelations)
        write_matrix(os.path.join(args.out, "bias_regression.csv"), reports[REGRESSION].bias)
    return EXIT_OK


def cmd_popsim(args):
    filters = _parse_filters(args.filter, FILTER_KEYS - {"n"})
    conds = [c for c in popsim.enumerate_population_grid() if _matches(c.as_dict(), filters)]
    if not conds:
        raise ValidationError("filter selects no conditions")
    records = popsim.run_population(conds)
    os.makedirs(args.out, exist_ok=True)
    table = popsim.summary_table(records, keys=("sl", "q", None))
    write_table(os.path.join(args.out, "population_summary.csv"), SUMMARY_COLUMNS, table.as_rows())
    fig = popsim.figure_data(records)
    write_table(os.path.join(args.out, "population_figures.csv"), popsim.FIGURE_COLUMNS,
                [[r[c] for c in popsim.FIGURE_COLUMNS] for r in fig])
    write_table(os.path.join(args.out, "population_records.csv"), popsim.RECORD_COLUMNS,
                [r.as_row() for r in records])
    print(f"{len(records)} conditions evaluated")
    _print_summary(table)
    return EXIT_OK


def _print_summary(table):
    for r in table:
        print(f"  {r.group:<10} {r.metric:<7} {r.mean:8.3f} ({r.sd:.3f})  n={r.n_conditions}")


def cmd_samplesim(args):
    if args.replicates < 1:
        raise ValidationError("--replicates must be >= 1")
    filters = _parse_filters(args.filter, FILTER_KEYS)
    conds = [
        c for c in samplesim.enumerate_sample_grid(args.replicates, args.seed)
        if _matches(c.as_dict(), filters)
    ]
    if not conds:
        raise ValidationError("filter selects no conditions")
    aggs = samplesim.run_sample_grid(conds, workers=args.workers, max_iter=args.max_iter,
                                     eps=args.eps)
    os.makedirs(args.out, exist_ok=True)
    table = samplesim.sample_summary(aggs, keys=("sl", None))
    write_table(os.path.join(args.out, "sample_summary.csv"), SUMMARY_COLUMNS, table.as_rows())
    fig = samplesim.figure_data_samples(aggs)
    write_table(os.path.join(args.out, "sample_figures.csv"), samplesim.FIGURE_COLUMNS,
                [[r[c] for c in samplesim.FIGURE_COLUMNS] for r in fig])
    header, rows = samplesim.condition_rows(aggs)
    write_table(os.path.join(args.out, "sample_conditions.csv"), header, rows)
    manifest = {
        "seed": args.seed,
        "replicates": args.replicates,
        "filters": {k: v for k, v in sorted(filters.items())},
        "n_conditions": len(conds),
        "conditions": [c.as_dict() for c in conds],
        "excluded_total": sum(a.excluded_count for a in aggs),
        "paf": {"eps": args.eps, "max_iter": args.max_iter, "heywood_clamp": samplesim.HEYWOOD_CLAMP},
        "rng": "PCG64(SeedSequence(seed, spawn_key=(q, round(1000*sl), round(1000*phi), "
               "p_per_q, var_sl, nl, n, replicate))) -> Box-Muller normals",
        "versions": {
            "cpscores": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    write_text(os.path.join(args.out, "manifest.json"), json.dumps(manifest, indent=2) + "\n")
    print(f"{len(conds)} conditions x {args.replicates} replicates; "
          f"{manifest['excluded_total']} replicates excluded")
    _print_summary(table)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cpscores",
        description="Regression vs correlation-preserving factor score predictors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_args(p):
        p.add_argument("--loadings", help="p x q loading matrix (CSV)")
        p.add_argument("--phi", help="q x q factor correlation matrix (CSV)")
        p.add_argument("--sigma", help="p x p observed correlation matrix (CSV); "
                                       "default: implied by the model")
        p.add_argument("--fixture", action="store_true",
                       help="use the bundled empirical example")

    p = sub.add_parser("predict", help="compute factor scores from data")
    model_args(p)
    p.add_argument("--data", required=True, help="n x p data matrix (CSV)")
    p.add_argument("--kinds", help=f"comma-separated subset of {','.join(KINDS)}")
    p.add_argument("--standardize", action="store_true",
                   help="center and scale data columns (n - 1) first")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("transform", help="make given scores correlation preserving")
    p.add_argument("--scores", required=True, help="n x q factor scores (CSV)")
    p.add_argument("--phi", required=True, help="q x q target correlations (CSV)")
    p.add_argument("--out", required=True, help="output CSV file")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("diagnose", help="determinacy, inter-correlations, bias and loss")
    model_args(p)
    p.add_argument("--mcdonald", action="store_true", help="also report McDonald's predictor")
    p.add_argument("--out", help="directory for CSV reports")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("popsim", help="population simulation over the design grid")
    p.add_argument("--filter", action="append", metavar="KEY=VALUE",
                   help="restrict the grid, e.g. q=3 or phi=0,0.3 (repeatable)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_popsim)

    p = sub.add_parser("samplesim", help="Monte Carlo sample simulation")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--replicates", type=int, default=samplesim.DEFAULT_REPLICATES)
    p.add_argument("--filter", action="append", metavar="KEY=VALUE",
                   help="restrict the grid, e.g. q=9 or n=900 (repeatable)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: CPU count)")
    p.add_argument("--eps", type=float, default=samplesim.PAF_EPS,
                   help="PAF convergence threshold on communality change")
    p.add_argument("--max-iter", type=int, default=samplesim.PAF_MAX_ITER)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_samplesim)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
