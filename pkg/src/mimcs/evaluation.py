"""Three-stage pipeline (PCA, MI weights, MCS-tuned FWSVM), confusion-matrix
metrics and single-split / k-fold experiment drivers."""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dataset, mcs, mi_weights, pca, wfsvm
from .config import PipelineConfig
from .seeding import derive_int

log = logging.getLogger(__name__)

BUNDLE_SCHEMA = "mimcs-bundle/1"
REPORT_SCHEMA = "mimcs-report/1"


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause, fold=None):
        where = f"fold {fold}: " if fold is not None else ""
        super().__init__(f"{where}stage '{stage}' failed: {cause}")
        self.stage = stage
        self.fold = fold
        self.cause = cause


class BundleError(ValueError):
    pass


# ------------------------------------------------------------------ metrics


@dataclass(frozen=True)
class ConfusionMatrix:
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self):
        return self.tn + self.fp + self.fn + self.tp

    def __add__(self, other):
        return ConfusionMatrix(self.tn + other.tn, self.fp + other.fp, self.fn + other.fn, self.tp + other.tp)

    def to_dict(self):
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp}


@dataclass(frozen=True)
class Metrics:
    """Ratios in [0, 1]; ``None`` marks a ratio whose denominator is zero."""

    accuracy: Optional[float]
    sensitivity: Optional[float]
    specificity: Optional[float]

    @property
    def undefined(self):
        return [k for k, v in self.to_dict().items() if v is None]

    def to_dict(self):
        return {"accuracy": self.accuracy, "sensitivity": self.sensitivity, "specificity": self.specificity}


def confusion(predictions, truth):
    p = np.asarray(predictions).ravel()
    t = np.asarray(truth).ravel()
    if p.shape != t.shape:
        raise ValueError(f"predictions ({p.size}) and truth ({t.size}) differ in length")
    pos_p, pos_t = p > 0, t > 0
    return ConfusionMatrix(
        tn=int(np.sum(~pos_p & ~pos_t)),
        fp=int(np.sum(pos_p & ~pos_t)),
        fn=int(np.sum(~pos_p & pos_t)),
        tp=int(np.sum(pos_p & pos_t)),
    )


def _ratio(num, den):
    return num / den if den > 0 else None


def metrics(cm):
    return Metrics(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        sensitivity=_ratio(cm.tp, cm.tp + cm.fn),
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
    )


# ------------------------------------------------------------------ fitness


class FitnessEvaluator:
    """Accuracy of an FWSVM at ``(C, gamma)`` on a fixed training set.

    ``mode="train"`` scores training accuracy (classified / total);
    ``mode="inner_cv"`` scores pooled accuracy over seeded stratified inner
    folds. Weighted distances are computed once and reused for every
    ``(C, gamma)`` since only the kernel's scale changes.
    """

    def __init__(self, train, weights, variant="sqrt", mode="train", inner_folds=5, seed=0,
                 tolerance=1e-3, max_iter=1_000_000):
        if mode not in ("train", "inner_cv"):
            raise ValueError(f"unknown fitness mode {mode!r}")
        self.train = train
        self.alpha = weights.alpha if isinstance(weights, mi_weights.FeatureWeights) else np.asarray(weights, float)
        self.variant = variant
        self.mode = mode
        self.tolerance = tolerance
        self.max_iter = max_iter
        self.D = wfsvm.weighted_sqdist_matrix(train.X, self.alpha)
        self.splits = []
        if mode == "inner_cv":
            k = min(inner_folds, int(min(np.sum(train.y > 0), np.sum(train.y < 0))))
            if k < 2:
                raise ValueError("inner cross-validation needs two members of each class")
            plan = dataset.stratified_kfold(train.y, k, derive_int(seed, "inner-cv"))
            self.splits = [(plan.train_indices(f), plan.test_indices(f)) for f in range(k)]

    def kernel(self, gamma):
        return wfsvm.KernelSpec(gamma, self.alpha, self.variant)

    def score(self, C, gamma):
        spec = self.kernel(gamma)
        K = spec.from_sqdist(self.D)
        params = wfsvm.SvmParams(C, self.tolerance, self.max_iter)
        y = self.train.y
        if self.mode == "train":
            sol = wfsvm.solve_dual(K, y, params)
            pred = np.where(sol.decision_on_train(K, y) >= 0, 1.0, -1.0)
            return float(np.mean(pred == y))
        correct = 0
        for tr, te in self.splits:
            sol = wfsvm.solve_dual(K[np.ix_(tr, tr)], y[tr], params)
            dec = K[np.ix_(te, tr)] @ (sol.multipliers * y[tr]) + sol.bias
            correct += int(np.sum(np.where(dec >= 0, 1.0, -1.0) == y[te]))
        return correct / y.shape[0]

    def __call__(self, C, gamma):
        try:
            return self.score(C, gamma)
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            log.warning("fitness evaluation failed at C=%r gamma=%r: %s", C, gamma, exc)
            return 0.0


def fitness(C, gamma, train, weights, variant="sqrt", mode="train", **kwargs):
    return FitnessEvaluator(train, weights, variant, mode, **kwargs)(C, gamma)


def position_to_params(position, cfg):
    C, gamma = float(position[0]), float(position[1])
    if cfg.search_space == "log":
        C, gamma = 10.0**C, 10.0**gamma
    return C, gamma


# ----------------------------------------------------------------- pipeline


@dataclass(eq=False)
class FittedPipeline:
    standardization: dataset.StandardizationParams
    pca: Optional[pca.PcaModel]
    weights: mi_weights.FeatureWeights
    model: wfsvm.SvmModel
    tuning: dict
    search: Optional[mcs.McsResult] = None

    def features(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.standardization.means.shape[0]:
            raise dataset.ValidationError(
                f"expected {self.standardization.means.shape[0]} features, got {X.shape[1]}"
            )
        Z = (X - self.standardization.means) / self.standardization.stds
        return pca.pca_transform(self.pca, Z) if self.pca is not None else Z

    def decision_values(self, X):
        return wfsvm.decision_value(self.model, self.features(X))

    def predict(self, X):
        return np.where(self.decision_values(X) >= 0, 1, -1)

    def to_bundle(self):
        return {
            "schema": BUNDLE_SCHEMA,
            "standardization": self.standardization.to_dict(),
            "pca": self.pca.to_dict() if self.pca is not None else None,
            "weights": self.weights.to_dict(),
            "kernel": self.model.kernel.to_dict(),
            "svm": self.model.to_dict(),
            "tuning": self.tuning,
        }

    @classmethod
    def from_bundle(cls, data):
        if not isinstance(data, dict) or data.get("schema") != BUNDLE_SCHEMA:
            found = data.get("schema") if isinstance(data, dict) else None
            raise BundleError(f"unsupported bundle schema {found!r}; expected {BUNDLE_SCHEMA!r}")
        try:
            return cls(
                standardization=dataset.StandardizationParams.from_dict(data["standardization"]),
                pca=pca.PcaModel.from_dict(data["pca"]) if data["pca"] is not None else None,
                weights=mi_weights.FeatureWeights.from_dict(data["weights"]),
                model=wfsvm.SvmModel.from_dict(data["svm"]),
                tuning=dict(data["tuning"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BundleError(f"malformed bundle: {exc}") from None


def dumps(obj):
    """Deterministic JSON text (full-precision floats, fixed key order)."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def save_bundle(pipeline, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(pipeline.to_bundle()))


def load_bundle(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BundleError(f"{path}: not a JSON bundle ({exc})") from None
    return FittedPipeline.from_bundle(data)


class _Stage:
    def __init__(self, name, fold):
        self.name, self.fold = name, fold

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc, self.fold) from exc
        return False


def fit_pipeline(train, cfg, seed=None, hook=None, row_ids=None, fold=None):
    """Fit standardisation, PCA, MI weights, MCS tuning and the final FWSVM.

    ``hook(stage, row_ids)`` is called before each stage with the row ids
    that stage is fitted on; it lets callers audit for leakage.
    """
    seed = cfg.seed if seed is None else seed
    ids = np.arange(train.n) if row_ids is None else np.asarray(row_ids)

    def touch(stage):
        if hook is not None:
            hook(stage, ids)

    touch("standardize")
    with _Stage("standardize", fold):
        std = dataset.standardize_fit(train)
        feats = dataset.standardize_apply(std, train)
    pca_model = None
    if cfg.weight_target == "pca":
        touch("pca")
        with _Stage("pca", fold):
            pca_model = pca.pca_fit(feats, cfg.n_components)
            feats = pca.pca_transform(pca_model, feats)
    touch("weights")
    with _Stage("weights", fold):
        weights = mi_weights.compute_weights(feats, cfg.parzen())
    touch("tune")
    with _Stage("tune", fold):
        evaluator = FitnessEvaluator(
            feats, weights, cfg.kernel_variant, cfg.fitness_mode, cfg.inner_folds,
            derive_int(seed, "fitness"), cfg.svm_tolerance, cfg.svm_max_iter,
        )
        result = mcs.optimize(lambda x: evaluator(*position_to_params(x, cfg)), cfg.mcs_config(derive_int(seed, "mcs")))
        C, gamma = position_to_params(result.best_position, cfg)
    touch("train")
    with _Stage("train", fold):
        spec = wfsvm.KernelSpec(gamma, weights.alpha, cfg.kernel_variant)
        model = wfsvm.train(feats.X, feats.y, wfsvm.SvmParams(C, cfg.svm_tolerance, cfg.svm_max_iter), spec)
        train_acc = float(np.mean(wfsvm.predict(model, feats.X) == feats.y))
    tuning = {
        "C": C,
        "gamma": gamma,
        "kernel_variant": cfg.kernel_variant,
        "fitness_mode": cfg.fitness_mode,
        "search_space": cfg.search_space,
        "tuning_fitness": result.best_fitness,
        "mcs_evaluations": result.evaluations,
        "training_accuracy": train_acc,
        "n_train": train.n,
    }
    return FittedPipeline(std, pca_model, weights, model, tuning, result)


@dataclass(eq=False)
class FoldResult:
    fold: int
    confusion: ConfusionMatrix
    metrics: Metrics
    pipeline: FittedPipeline
    n_train: int
    n_test: int

    def diagnostics(self):
        p = self.pipeline
        return {
            "C": p.tuning["C"],
            "gamma": p.tuning["gamma"],
            "tuning_fitness": p.tuning["tuning_fitness"],
            "training_accuracy": p.tuning["training_accuracy"],
            "alpha": p.weights.alpha.tolist(),
            "mi_bits": p.weights.mi_values.tolist(),
            "explained_variance_ratio": p.pca.explained_variance_ratio if p.pca is not None else None,
            "eigenvalues": p.pca.eigenvalues.tolist() if p.pca is not None else None,
            "n_support_vectors": int(p.model.multipliers.size),
            "solver_converged": p.model.converged,
            "mcs_evaluations": p.tuning["mcs_evaluations"],
            "mcs_trace": [
                {"generation": r.generation, "evaluations": r.evaluations,
                 "best_fitness": r.best_fitness, "best_position": list(r.best_position)}
                for r in p.search.trace
            ] if p.search is not None else [],
        }

    def to_dict(self):
        return {
            "fold": self.fold,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "confusion": self.confusion.to_dict(),
            "metrics": self.metrics.to_dict(),
            "diagnostics": self.diagnostics(),
        }


def _run_split(data, train_idx, test_idx, cfg, seed, hook=None, fold=0):
    train, test = data.take(train_idx), data.take(test_idx)
    pipe = fit_pipeline(train, cfg, seed, hook, train_idx, fold)
    if hook is not None:
        hook("evaluate", np.asarray(test_idx))
    with _Stage("evaluate", fold):
        cm = confusion(pipe.predict(test.X), test.y)
    return FoldResult(fold, cm, metrics(cm), pipe, train.n, test.n)


def run_fold(train, test, cfg, seed=None, hook=None):
    """Fit on ``train`` and score on ``test`` (both raw-feature SampleMatrix)."""
    both = dataset.SampleMatrix(np.vstack([train.X, test.X]), np.concatenate([train.y, test.y]))
    tr = np.arange(train.n)
    te = np.arange(train.n, both.n)
    res = _run_split(both, tr, te, cfg, cfg.seed if seed is None else seed, hook)
    return res.confusion, res.metrics, res


def _mean_std(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    return float(np.mean(vals)), float(np.std(vals))


@dataclass(eq=False)
class PipelineReport:
    mode: str
    config: PipelineConfig
    folds: list = field(default_factory=list)

    @property
    def pooled_confusion(self):
        total = ConfusionMatrix(0, 0, 0, 0)
        for f in self.folds:
            total = total + f.confusion
        return total

    def aggregate(self):
        out = {}
        for name in ("accuracy", "sensitivity", "specificity"):
            mean, std = _mean_std([getattr(f.metrics, name) for f in self.folds])
            out[name] = {"mean": mean, "std": std}
        pooled = self.pooled_confusion
        out["pooled_confusion"] = pooled.to_dict()
        out["pooled_metrics"] = metrics(pooled).to_dict()
        return out

    def to_dict(self):
        return {
            "schema": REPORT_SCHEMA,
            "mode": self.mode,
            "config": self.config.to_dict(),
            "folds": [f.to_dict() for f in self.folds],
            "aggregate": self.aggregate(),
        }

    def to_json(self):
        return dumps(self.to_dict())

    def confusion_table(self):
        cm = self.pooled_confusion
        label = "pooled over folds" if len(self.folds) > 1 else "test split"
        return "\n".join([
            f"Confusion matrix ({label}, {cm.total} samples)",
            f"{'Output/desired':<16}{'Non-diabetics':>15}{'Diabetics':>11}",
            f"{'Non-diabetics':<16}{cm.tn:>15}{cm.fn:>11}",
            f"{'Diabetics':<16}{cm.fp:>15}{cm.tp:>11}",
        ])

    def metrics_table(self):
        def pct(v):
            return "undefined" if v is None else f"{100 * v:.2f}"

        lines = [f"{'':<14}{'Sensitivity (%)':>17}{'Specificity (%)':>17}{'Accuracy (%)':>14}"]
        for f in self.folds:
            m = f.metrics
            lines.append(f"{'fold ' + str(f.fold):<14}{pct(m.sensitivity):>17}{pct(m.specificity):>17}{pct(m.accuracy):>14}")
        agg = self.aggregate()
        if len(self.folds) > 1:
            lines.append(
                f"{'mean':<14}{pct(agg['sensitivity']['mean']):>17}"
                f"{pct(agg['specificity']['mean']):>17}{pct(agg['accuracy']['mean']):>14}"
            )
            pm = agg["pooled_metrics"]
            lines.append(f"{'pooled':<14}{pct(pm['sensitivity']):>17}{pct(pm['specificity']):>17}{pct(pm['accuracy']):>14}")
        return "\n".join(lines)

    def render(self):
        c = self.config
        head = (
            f"MI-MCS-FWSVM {self.mode}: kernel={c.kernel_variant} fitness={c.fitness_mode} "
            f"components={c.n_components} budget={c.budget} seed={c.seed}"
        )
        return "\n\n".join([head, self.confusion_table(), self.metrics_table()]) + "\n"


def _fold_seed(cfg, k):
    return derive_int(cfg.seed, "fold", k)


def cross_validate(data, cfg, threads=1, hook=None):
    """Stratified k-fold run of the full pipeline, folds tuned independently."""
    plan = dataset.stratified_kfold(data.y, cfg.folds, cfg.seed)

    def one(k):
        return _run_split(data, plan.train_indices(k), plan.test_indices(k), cfg, _fold_seed(cfg, k), hook, k)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            folds = list(ex.map(one, range(cfg.folds)))
    else:
        folds = [one(k) for k in range(cfg.folds)]
    return PipelineReport("kfold", cfg, folds)


def holdout(data, cfg, hook=None):
    """Single stratified split with ``cfg.holdout_size`` test rows."""
    train_idx, test_idx = dataset.stratified_holdout(data.y, cfg.holdout_size, cfg.seed)
    res = _run_split(data, train_idx, test_idx, cfg, _fold_seed(cfg, 0), hook, 0)
    return PipelineReport("holdout", cfg, [res])


def midpoint_params(cfg):
    """Centre of the (C, gamma) search box in the configured search space."""
    mid = [0.5 * (lo + hi) for lo, hi in cfg.mcs_config(0).bounds]
    return position_to_params(mid, cfg)

