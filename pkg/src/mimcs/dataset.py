"""Pima CSV ingestion, summary statistics, z-scoring and stratified folds."""
import io
import math
from dataclasses import dataclass

import numpy as np

from .seeding import derive_rng

N_FEATURES = 8
FEATURE_NAMES = (
    "pregnancies",
    "plasma_glucose",
    "diastolic_bp",
    "triceps_skinfold",
    "serum_insulin",
    "bmi",
    "pedigree",
    "age",
)


class ParseError(ValueError):
    """Malformed CSV line."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(ValueError):
    """Well-formed input that violates a data invariant."""


@dataclass(frozen=True)
class RawRecord:
    features: tuple
    label: int


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """Feature matrix ``X`` (n x d) with labels ``y`` in {+1, -1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64).ravel()
        if X.ndim != 2 or X.shape[1] < 1:
            raise ValidationError(f"X must be a 2-D matrix with d >= 1, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValidationError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise ValidationError("labels must be +1 or -1")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.intp)
        return SampleMatrix(self.X[idx], self.y[idx])

    def with_features(self, X):
        return SampleMatrix(X, self.y)


@dataclass(frozen=True)
class FeatureSummary:
    mean: float
    std: float
    min: float
    max: float


@dataclass(frozen=True, eq=False)
class StandardizationParams:
    means: np.ndarray
    stds: np.ndarray

    def to_dict(self):
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["means"], dtype=float), np.asarray(data["stds"], dtype=float))


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_indices(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def fold_sizes(self):
        return np.bincount(self.assignments, minlength=self.k)


def _is_number(field):
    try:
        float(field)
    except ValueError:
        return False
    return True


def parse_csv(text):
    """Parse UCI-layout CSV (8 features + 0/1 label per line).

    ``text`` may be a string or a text stream. Blank lines are skipped; a
    single leading header line is skipped when its first field is not numeric.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    records = []
    seen_content = False
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if not seen_content:
            seen_content = True
            if not _is_number(fields[0]):
                continue
        if len(fields) != N_FEATURES + 1:
            raise ParseError(line_no, f"expected {N_FEATURES + 1} fields, got {len(fields)}")
        values = []
        for col, field in enumerate(fields, start=1):
            try:
                v = float(field)
            except ValueError:
                raise ParseError(line_no, f"field {col} is not numeric: {field!r}") from None
            if not math.isfinite(v):
                raise ParseError(line_no, f"field {col} is not finite: {field!r}")
            values.append(v)
        label = values[-1]
        if label not in (0.0, 1.0):
            raise ValidationError(f"line {line_no}: label must be 0 or 1, got {fields[-1]!r}")
        records.append(RawRecord(tuple(values[:-1]), int(label)))
    return records


def load_csv(path):
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh)


def to_matrix(records):
    if not records:
        raise ValidationError("cannot build a sample matrix from zero records")
    X = np.array([r.features for r in records], dtype=np.float64)
    y = np.array([1.0 if r.label == 1 else -1.0 for r in records])
    return SampleMatrix(X, y)


def summary_stats(m, ddof=1):
    """Per-feature mean, standard deviation, min and max.

    ``ddof=1`` (sample standard deviation) is what reproduces the published
    Pima summary table; a single sample reports std 0.
    """
    X = m.X
    means = X.mean(axis=0)
    if m.n - ddof > 0:
        stds = X.std(axis=0, ddof=ddof)
    else:
        stds = np.zeros(m.d)
    return [
        FeatureSummary(float(a), float(s), float(lo), float(hi))
        for a, s, lo, hi in zip(means, stds, X.min(axis=0), X.max(axis=0))
    ]


def _fmt_num(v):
    return f"{v:g}"


def stats_records(stats):
    return [
        {"feature": j + 1, "mean": s.mean, "std": s.std, "min": s.min, "max": s.max}
        for j, s in enumerate(stats)
    ]


def format_stats_table(stats):
    lines = [f"{'Feature':>7}  {'Mean':>8}  {'Std':>8}  {'Min/max':>13}"]
    for j, s in enumerate(stats, start=1):
        mm = f"{_fmt_num(s.min)}/{_fmt_num(s.max)}"
        lines.append(f"{j:>7}  {s.mean:>8.1f}  {s.std:>8.1f}  {mm:>13}")
    return "\n".join(lines)


def standardize_fit(m):
    if m.n < 2:
        raise ValidationError("standardization needs at least two samples")
    means = m.X.mean(axis=0)
    stds = m.X.std(axis=0)
    const = np.flatnonzero(stds == 0.0)
    if const.size:
        raise ValidationError(
            "cannot standardize constant column(s): "
            + ", ".join(str(int(c) + 1) for c in const)
        )
    return StandardizationParams(means, stds)


def standardize_apply(params, m):
    if params.means.shape[0] != m.d:
        raise ValidationError(f"params have {params.means.shape[0]} features, data has {m.d}")
    return m.with_features((m.X - params.means) / params.stds)


def stratified_kfold(y, k, seed):
    """Seeded stratified k-fold assignment.

    Each class is shuffled and dealt round-robin, the dealing position
    carrying over between classes, so fold sizes differ by at most one and
    every class is spread within one sample of its share.
    """
    y = np.asarray(y).ravel()
    n = y.shape[0]
    if k < 2:
        raise ValidationError(f"fold count must be >= 2, got {k}")
    if k > n:
        raise ValidationError(f"fold count {k} exceeds sample count {n}")
    rng = derive_rng(seed, "folds")
    assignments = np.empty(n, dtype=np.intp)
    offset = 0
    for cls in np.unique(y)[::-1]:
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.shape[0])]
        assignments[idx] = (offset + np.arange(idx.shape[0])) % k
        offset += idx.shape[0]
    return FoldPlan(k, assignments, seed)


def stratified_holdout(y, test_size, seed):
    """Seeded stratified train/test split with exactly ``test_size`` test rows.

    ``test_size`` may be a count or a fraction in (0, 1). Per-class test
    counts follow largest-remainder apportionment of the class shares.
    """
    y = np.asarray(y).ravel()
    n = y.shape[0]
    if 0 < test_size < 1:
        test_size = int(round(test_size * n))
    test_size = int(test_size)
    if not 1 <= test_size < n:
        raise ValidationError(f"test size must be in [1, {n - 1}], got {test_size}")
    classes = np.unique(y)[::-1]
    counts = np.array([np.sum(y == c) for c in classes])
    quota = test_size * counts / n
    alloc = np.floor(quota).astype(int)
    order = np.argsort(-(quota - alloc), kind="stable")
    alloc[order[: test_size - alloc.sum()]] += 1
    rng = derive_rng(seed, "holdout")
    test = []
    for cls, take in zip(classes, alloc):
        idx = np.flatnonzero(y == cls)
        test.append(idx[rng.permutation(idx.shape[0])[:take]])
    test = np.sort(np.concatenate(test))
    train = np.setdiff1d(np.arange(n), test)
    return train, test
