"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
Set ``INDSUB_LOG_LEVEL`` (DEBUG, INFO, ...) for log output on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import io as fio
from .baselines import fit_pca, fit_random_projection
from .evaluation import CLASSIFIERS, MethodConfig, SplitSpec, run_experiment, separation_matrix
from .ispp import DegenerateIterateError, FitConfig, fit_algorithm1, oracle_projection, transform
from .linalg import numerical_rank
from .plots import heatmap_svg, scatter_svg
from .subspace import Subspace, is_independent, margin, sum_subspace, synth_union

log = logging.getLogger("indsub")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Everything ``eval`` needs; loadable from JSON, unknown keys rejected."""

    method: str = "ispp"
    dim: int | None = None
    lam: float = 0.0
    iter_max: int = 200
    gamma_tol: float = 1e-8
    seed: int = 0
    cg_tol: float = 1e-10
    cg_max_iter: int = 1000
    classifier: str = "ridge"
    classifier_lam: float = 1e-3
    train_fraction: float = 0.5
    split_seed: int = 0
    stratified: bool = True
    runs: int = 1
    workers: int = 1
    report: str | None = None
    csv: str | None = None

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**mapping)
        cfg.validate()
        return cfg

    def validate(self):
        if self.runs < 1:
            raise UsageError("runs must be >= 1")
        try:
            self.method_config()
            self.split_spec()
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def fit_config(self):
        return FitConfig(self.lam, self.iter_max, self.gamma_tol, self.seed, self.cg_tol, self.cg_max_iter)

    def method_config(self):
        return MethodConfig(self.method, self.dim, self.fit_config(), self.classifier, self.classifier_lam)

    def split_spec(self):
        return SplitSpec(self.train_fraction, self.split_seed, self.stratified)


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _r(v):
    return repr(float(v))


def _summary_path(out, given):
    return given if given else f"{out}.txt"


def cmd_synth(args):
    data, bases = synth_union(args.n, args.dims, args.per_class, args.noise, args.seed)
    fio.write_dataset(args.out, data)
    if args.basis_out:
        fio.write_bases(args.basis_out, bases)
    print(f"wrote {args.out}: n={data.ambient_dim} N={data.n_samples} K={data.class_count}")


def cmd_import_csv(args):
    data = fio.read_dataset_csv(args.csv, normalize=not args.no_normalize)
    fio.write_dataset(args.out, data)
    print(f"wrote {args.out}: n={data.ambient_dim} N={data.n_samples} K={data.class_count}")


def cmd_export_csv(args):
    fio.write_dataset_csv(args.out, fio.read_dataset(args.data))
    print(f"wrote {args.out}")


def cmd_fit(args):
    if args.method == "oracle":
        if not args.basis:
            raise UsageError("--method oracle needs --basis")
        model = oracle_projection(fio.read_bases(args.basis), args.pair_index)
    else:
        if not args.data:
            raise UsageError(f"--method {args.method} needs --data")
        data = fio.read_dataset(args.data)
        if args.method == "ispp":
            if not data.is_normalized():
                log.info("normalizing dataset columns to unit length")
                data = data.normalized()
            cfg = FitConfig(args.lam, args.iter_max, args.gamma_tol, args.seed, args.cg_tol, args.cg_max_iter)
            model = fit_algorithm1(data, cfg, workers=args.workers)
        elif args.method == "pca":
            model = fit_pca(data.features, _need_dim(args))
        else:
            model = fit_random_projection(data.ambient_dim, _need_dim(args), args.seed)
    fio.write_model(args.out, model)
    summary = fio.model_summary(model)
    fio.atomic_write(_summary_path(args.out, args.summary), summary.encode())
    print(f"wrote {args.out}: method={model.method} m={model.dim}")


def _need_dim(args):
    if not args.dim:
        raise UsageError(f"--method {args.method} needs --dim")
    return args.dim


def _load_pair(args):
    model = fio.read_model(args.model)
    data = fio.read_dataset(args.data)
    if data.ambient_dim != model.ambient_dim:
        raise UsageError(f"dataset has n={data.ambient_dim}, model expects {model.ambient_dim}")
    return model, data


def cmd_transform(args):
    model, data = _load_pair(args)
    projected = data.with_features(transform(model, data.features))
    if args.csv:
        fio.write_dataset_csv(args.out, projected)
    else:
        fio.write_dataset(args.out, projected)
    print(f"wrote {args.out}: m={projected.ambient_dim} N={projected.n_samples}")


def cmd_margins(args):
    if bool(args.basis) == bool(args.data):
        raise UsageError("give exactly one of --basis or --data")
    if args.basis:
        spans = [s.basis for s in fio.read_bases(args.basis)]
    else:
        data = fio.read_dataset(args.data)
        spans = [data.class_features(k) for k in data.classes]
    if args.model:
        model = fio.read_model(args.model)
        if spans[0].shape[0] != model.ambient_dim:
            raise UsageError("model and input dimensions differ")
        spans = [model.matrix.T @ s for s in spans]
    subspaces = [Subspace.from_span(s, args.rank_tol) for s in spans]
    rows = []
    K = len(subspaces)
    for k in range(K):
        for j in range(K):
            if j != k:
                rows.append([k + 1, j + 1, _r(margin(subspaces[k], subspaces[j]))])
        if K > 2:
            rest = sum_subspace(subspaces[:k] + subspaces[k + 1 :])
            rows.append([k + 1, "rest", _r(margin(subspaces[k], rest))])
    fio.write_csv(args.out, ["class", "other", "margin"], rows)
    stacked = np.hstack([s.basis for s in subspaces])
    print(
        f"wrote {args.out}: independent={str(is_independent(subspaces, args.rank_tol)).lower()} "
        f"rank={numerical_rank(stacked, args.rank_tol)} dims={','.join(str(s.dim) for s in subspaces)}"
    )


def cmd_separation(args):
    model, data = _load_pair(args)
    sep = separation_matrix(model, data)
    K = data.class_count
    header = ["class"] + [f"c{j}" for j in range(1, K + 1)]
    rows = [[i + 1] + [_r(v) for v in sep.gram[i]] for i in range(K)]
    fio.write_csv(args.out, header, rows)
    if args.svg:
        fio.atomic_write(args.svg, heatmap_svg(sep.gram, title="|Z^T Z|").encode())
    off = np.abs(sep.gram - np.diag(np.diag(sep.gram)))
    print(f"wrote {args.out}: K={K} max_offdiag={off.max():.6g}")


def cmd_eval(args):
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        cfg = RunConfig.from_mapping(raw)
    else:
        cfg = RunConfig.from_mapping(
            {
                "method": args.method,
                "dim": args.dim,
                "lam": args.lam,
                "iter_max": args.iter_max,
                "gamma_tol": args.gamma_tol,
                "seed": args.seed,
                "cg_tol": args.cg_tol,
                "cg_max_iter": args.cg_max_iter,
                "classifier": args.classifier,
                "classifier_lam": args.classifier_lam,
                "train_fraction": args.train_fraction,
                "split_seed": args.split_seed,
                "stratified": not args.unstratified,
                "runs": args.runs,
                "workers": args.workers,
                "report": args.report,
                "csv": args.csv,
            }
        )
    if not cfg.report and not cfg.csv:
        raise UsageError("give --report and/or --csv")
    data = fio.read_dataset(args.data)
    if not data.is_normalized():
        data = data.normalized()
    report = run_experiment(data, cfg.method_config(), cfg.split_spec(), cfg.runs, cfg.workers)
    if cfg.report:
        fio.atomic_write(cfg.report, report.to_text().encode())
    if cfg.csv:
        header, rows = report.csv_rows()
        fio.write_csv(cfg.csv, header, rows)
    print(f"{report.method} dim={report.dim} acc={report.accuracy_mean:.4f} +- {report.accuracy_std:.4f} runs={report.runs}")


def cmd_plot2d(args):
    model, data = _load_pair(args)
    K = data.class_count if model.pairs is None else model.pairs.shape[1] // 2
    if not 1 <= args.block <= max(K, 1):
        raise UsageError(f"--block must be in 1..{K}")
    if model.pairs is not None:
        plane = model.block(args.block)
    else:
        plane = model.matrix[:, 2 * (args.block - 1) : 2 * args.block]
    if plane.shape[1] != 2:
        raise UsageError("selected block does not span a plane")
    x = data.features if model.mean is None else data.features - model.mean[:, None]
    pts = plane.T @ x
    keep = np.ones(data.n_samples, dtype=bool)
    if args.classes:
        keep = np.isin(data.labels, args.classes)
    rows = [[int(lbl), _r(p[0]), _r(p[1])] for lbl, p in zip(data.labels[keep], pts[:, keep].T)]
    fio.write_csv(args.out, ["label", "x", "y"], rows)
    if args.svg:
        fio.atomic_write(args.svg, scatter_svg(pts[:, keep], data.labels[keep], title=f"block {args.block}").encode())
    print(f"wrote {args.out}: {len(rows)} points")


def build_parser():
    p = _Parser(prog="indsub", description="Independence-preserving projections for unions of subspaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="sample a labeled union of random subspaces")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--dims", type=_int_list, required=True)
    s.add_argument("--per-class", type=int, required=True)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="data.bin")
    s.add_argument("--basis-out")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("import-csv", help="convert 'label,f1..fn' rows to a dataset file")
    s.add_argument("--csv", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--no-normalize", action="store_true")
    s.set_defaults(func=cmd_import_csv)

    s = sub.add_parser("export-csv", help="write a dataset file as CSV rows")
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_export_csv)

    def fit_flags(s):
        s.add_argument("--lambda", dest="lam", type=float, default=0.0)
        s.add_argument("--iter-max", type=int, default=200)
        s.add_argument("--gamma-tol", type=float, default=1e-8)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--cg-tol", type=float, default=1e-10)
        s.add_argument("--cg-max-iter", type=int, default=1000)
        s.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("fit", help="fit a projection model")
    s.add_argument("--data")
    s.add_argument("--basis", help="ground-truth bases file (oracle method)")
    s.add_argument("--method", choices=("ispp", "pca", "rp", "oracle"), default="ispp")
    s.add_argument("--dim", type=int)
    s.add_argument("--pair-index", type=int, default=1)
    s.add_argument("--out", required=True)
    s.add_argument("--summary")
    fit_flags(s)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("transform", help="project a dataset through a model")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--csv", action="store_true", help="write CSV instead of a dataset file")
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("margins", help="pairwise and class-vs-rest subspace margins")
    s.add_argument("--basis")
    s.add_argument("--data")
    s.add_argument("--model")
    s.add_argument("--rank-tol", type=float, default=1e-8)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_margins)

    s = sub.add_parser("separation", help="K x K cosines of projected class directions")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--svg")
    s.set_defaults(func=cmd_separation)

    s = sub.add_parser("eval", help="train/test classification after projection")
    s.add_argument("--data", required=True)
    s.add_argument("--config", help="JSON run configuration (replaces the flags below)")
    s.add_argument("--method", choices=("ispp", "pca", "rp"), default="ispp")
    s.add_argument("--dim", type=int)
    s.add_argument("--classifier", choices=CLASSIFIERS, default="ridge")
    s.add_argument("--classifier-lambda", dest="classifier_lam", type=float, default=1e-3)
    s.add_argument("--train-fraction", type=float, default=0.5)
    s.add_argument("--split-seed", type=int, default=0)
    s.add_argument("--unstratified", action="store_true")
    s.add_argument("--runs", type=int, default=1)
    s.add_argument("--report")
    s.add_argument("--csv")
    fit_flags(s)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("plot2d", help="project onto one class plane (CSV + optional SVG)")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--block", type=int, default=1)
    s.add_argument("--classes", type=_int_list)
    s.add_argument("--out", required=True)
    s.add_argument("--svg")
    s.set_defaults(func=cmd_plot2d)
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("INDSUB_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (np.linalg.LinAlgError, DegenerateIterateError, FloatingPointError) as exc:
        print(f"indsub: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as exc:
        print(f"indsub: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
