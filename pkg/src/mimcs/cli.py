"""Command-line front end.

Exit codes: 0 success, 1 config error, 2 input error, 3 stage failure,
4 incompatible model bundle.
"""
import argparse
import io
import json
import logging
import os
import sys

import numpy as np

from . import dataset, evaluation, mcs, mi_weights, pca
from .config import ConfigError, PipelineConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_STAGE, EXIT_BUNDLE = 0, 1, 2, 3, 4

log = logging.getLogger("mimcs")


class InputError(Exception):
    pass


def _add_common(p, pipeline=True):
    p.add_argument("--input", help="CSV file in UCI Pima layout")
    p.add_argument("--out", help="directory for machine-readable outputs")
    p.add_argument("-v", "--verbose", action="count", default=0)
    if pipeline:
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--folds", type=int)
        p.add_argument("--components", type=int)
        p.add_argument("--kernel-variant", choices=("sqrt", "squared"))
        p.add_argument("--budget", type=int)
        p.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="mimcs", description="MI-weighted, MCS-tuned FWSVM pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("stats", help="per-feature summary table"), pipeline=False)
    _add_common(sub.add_parser("pca", help="fit standardisation + PCA"))
    _add_common(sub.add_parser("weights", help="MI feature weights"))
    _add_common(sub.add_parser("tune", help="MCS search for (C, gamma) on a training split"))
    _add_common(sub.add_parser("train", help="fit the full pipeline and write a model bundle"))
    p = sub.add_parser("predict", help="apply a model bundle to CSV rows")
    _add_common(p, pipeline=False)
    p.add_argument("--model", required=True, help="model bundle written by train or cv")
    p = sub.add_parser("cv", help="k-fold (or single holdout) evaluation")
    _add_common(p)
    p.add_argument("--holdout", action="store_true", help="single stratified split instead of k folds")
    p = sub.add_parser("print-config", help="print the effective configuration")
    _add_common(p)
    return parser


def resolve_config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "threads", 1) is not None and args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    return cfg.replace(
        seed=args.seed,
        folds=args.folds,
        n_components=args.components,
        kernel_variant=args.kernel_variant,
        budget=args.budget,
    )


def _read_matrix(path):
    if not path:
        raise InputError("--input is required")
    try:
        records = dataset.load_csv(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if not records:
        raise InputError(f"{path}: no data rows")
    return dataset.to_matrix(records)


def _outdir(args):
    if not args.out:
        return None
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write(outdir, name, text):
    if outdir is None:
        return
    with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_stats(args):
    m = _read_matrix(args.input)
    stats = dataset.summary_stats(m)
    print(dataset.format_stats_table(stats))
    doc = {"n_rows": m.n, "features": dataset.stats_records(stats)}
    _write(_outdir(args), "stats.json", evaluation.dumps(doc))
    return EXIT_OK


def _standardized(m):
    std = dataset.standardize_fit(m)
    return std, dataset.standardize_apply(std, m)


def cmd_pca(args):
    cfg = resolve_config(args)
    m = _read_matrix(args.input)
    std, z = _standardized(m)
    model = pca.pca_fit(z, cfg.n_components)
    print(f"{'Component':>9}  {'Eigenvalue':>10}")
    for k, lam in enumerate(model.eigenvalues, start=1):
        print(f"{k:>9}  {lam:>10.4f}")
    print(f"explained variance ratio: {model.explained_variance_ratio:.4f}")
    _write(_outdir(args), "pca.json", evaluation.dumps({"standardization": std.to_dict(), "pca": model.to_dict()}))
    return EXIT_OK


def _features_for_weights(cfg, m):
    _, z = _standardized(m)
    if cfg.weight_target == "pca":
        z = pca.pca_transform(pca.pca_fit(z, cfg.n_components), z)
    return z


def cmd_weights(args):
    cfg = resolve_config(args)
    m = _read_matrix(args.input)
    try:
        w = mi_weights.compute_weights(_features_for_weights(cfg, m), cfg.parzen())
    except mi_weights.DegenerateWeightsError as exc:
        raise evaluation.StageError("weights", exc) from exc
    print(w.table())
    _write(_outdir(args), "weights.json", evaluation.dumps({"target": cfg.weight_target, "features": w.records()}))
    return EXIT_OK


def cmd_tune(args):
    cfg = resolve_config(args)
    m = _read_matrix(args.input)
    train_idx, _ = dataset.stratified_holdout(m.y, cfg.holdout_size, cfg.seed)
    pipe = evaluation.fit_pipeline(m.take(train_idx), cfg, evaluation._fold_seed(cfg, 0))
    t = pipe.tuning
    print(f"C = {t['C']:.6g}  gamma = {t['gamma']:.6g}  tuning fitness = {t['tuning_fitness']:.4f}")
    print(pipe.weights.table())
    out = _outdir(args)
    _write(out, "tune.json", evaluation.dumps({
        "C": t["C"],
        "gamma": t["gamma"],
        "tuning_fitness": t["tuning_fitness"],
        "fitness_mode": t["fitness_mode"],
        "kernel_variant": t["kernel_variant"],
        "weights": pipe.weights.records(),
        "n_train": int(train_idx.size),
        "config": cfg.to_dict(),
    }))
    _write(out, "trace.csv", pipe.search.trace_csv())
    return EXIT_OK


def cmd_train(args):
    cfg = resolve_config(args)
    m = _read_matrix(args.input)
    pipe = evaluation.fit_pipeline(m, cfg, evaluation._fold_seed(cfg, 0))
    t = pipe.tuning
    print(f"C = {t['C']:.6g}  gamma = {t['gamma']:.6g}  training accuracy = {t['training_accuracy']:.4f}")
    out = _outdir(args)
    _write(out, "bundle.json", evaluation.dumps(pipe.to_bundle()))
    _write(out, "trace.csv", pipe.search.trace_csv())
    return EXIT_OK


def parse_rows(text, d):
    """Rows of ``d`` features, optionally followed by a 0/1 label."""
    rows, labels = [], []
    for line_no, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if not rows and not dataset._is_number(fields[0]):
            continue
        if len(fields) not in (d, d + 1):
            raise dataset.ParseError(line_no, f"expected {d} or {d + 1} fields, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise dataset.ParseError(line_no, "non-numeric field") from None
        rows.append(vals[:d])
        labels.append(vals[d] if len(vals) > d else None)
    if not rows:
        raise InputError("no rows to predict")
    y = None
    if all(v is not None for v in labels):
        y = np.array([1.0 if v == 1 else -1.0 for v in labels])
    return np.array(rows), y


def cmd_predict(args):
    try:
        pipe = evaluation.load_bundle(args.model)
    except OSError as exc:
        raise InputError(f"cannot read {args.model}: {exc.strerror}") from None
    if not args.input:
        raise InputError("--input is required")
    try:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
    X, y = parse_rows(text, pipe.standardization.means.shape[0])
    dec = np.atleast_1d(pipe.decision_values(X))
    labels = np.where(dec >= 0, 1, -1)
    buf = io.StringIO()
    buf.write("label,decision_value\n")
    for lab, v in zip(labels, dec):
        buf.write(f"{int(lab)},{float(v)!r}\n")
    sys.stdout.write(buf.getvalue())
    _write(_outdir(args), "predictions.csv", buf.getvalue())
    if y is not None:
        log.info("accuracy on labelled rows: %.4f", float(np.mean(labels == y)))
    return EXIT_OK


def cmd_cv(args):
    cfg = resolve_config(args)
    m = _read_matrix(args.input)
    if args.holdout:
        report = evaluation.holdout(m, cfg)
    else:
        report = evaluation.cross_validate(m, cfg, threads=args.threads)
    print(report.render(), end="")
    out = _outdir(args)
    _write(out, "report.json", report.to_json())
    _write(out, "report.txt", report.render())
    for f in report.folds:
        _write(out, f"bundle_fold{f.fold}.json", evaluation.dumps(f.pipeline.to_bundle()))
        _write(out, f"trace_fold{f.fold}.csv", f.pipeline.search.trace_csv())
    return EXIT_OK


def cmd_print_config(args):
    cfg = resolve_config(args)
    sys.stdout.write(json.dumps(cfg.to_dict(), indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "stats": cmd_stats,
    "pca": cmd_pca,
    "weights": cmd_weights,
    "tune": cmd_tune,
    "train": cmd_train,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "print-config": cmd_print_config,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, mcs.ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except evaluation.BundleError as exc:
        print(f"bundle error: {exc}", file=sys.stderr)
        return EXIT_BUNDLE
    except evaluation.StageError as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (InputError, dataset.ParseError, dataset.ValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
