"""Parzen-window mutual information between each feature and the class label,
normalised into kernel feature weights."""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import ValidationError


class DegenerateWeightsError(ValueError):
    """Every feature carries zero information, so weights are undefined."""


@dataclass(frozen=True)
class ClassPrior:
    labels: tuple
    counts: tuple
    total: int

    @property
    def probabilities(self):
        return tuple(c / self.total for c in self.counts)

    def as_dict(self):
        return dict(zip(self.labels, self.probabilities))


@dataclass(frozen=True)
class ParzenConfig:
    """Gaussian-window estimator settings.

    ``bandwidth`` is ``"silverman"`` or a positive float. With
    ``leave_one_out`` each sample's posterior is estimated without itself.
    """

    bandwidth: object = "silverman"
    leave_one_out: bool = False
    log_base: float = 2.0

    def __post_init__(self):
        if self.bandwidth != "silverman":
            h = float(self.bandwidth)
            if not h > 0:
                raise ValidationError(f"fixed bandwidth must be positive, got {self.bandwidth}")
            object.__setattr__(self, "bandwidth", h)

    def to_dict(self):
        return {"bandwidth": self.bandwidth, "leave_one_out": self.leave_one_out, "log_base": self.log_base}


@dataclass(frozen=True, eq=False)
class FeatureWeights:
    alpha: np.ndarray
    mi_values: np.ndarray

    def to_dict(self):
        return {"alpha": self.alpha.tolist(), "mi_bits": self.mi_values.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["alpha"], dtype=float), np.asarray(data["mi_bits"], dtype=float))

    def records(self):
        return [
            {"feature": k + 1, "mi_bits": float(mi), "alpha": float(a)}
            for k, (mi, a) in enumerate(zip(self.mi_values, self.alpha))
        ]

    def table(self):
        lines = [f"{'Feature':>7}  {'MI (bits)':>10}  {'alpha':>8}"]
        for r in self.records():
            lines.append(f"{r['feature']:>7}  {r['mi_bits']:>10.4f}  {r['alpha']:>8.4f}")
        return "\n".join(lines)


def class_prior(y):
    y = np.asarray(y).ravel()
    if y.size == 0:
        raise ValidationError("class prior of an empty label vector")
    labels, counts = np.unique(y, return_counts=True)
    labels, counts = labels[::-1], counts[::-1]
    return ClassPrior(
        tuple(int(v) if float(v).is_integer() else float(v) for v in labels),
        tuple(int(c) for c in counts),
        int(y.size),
    )


def entropy(prior, base=2.0):
    h = 0.0
    for p in prior.probabilities:
        if p > 0.0:
            h -= p * math.log(p)
    return h / math.log(base)


def resolve_bandwidth(f, cfg):
    if cfg.bandwidth != "silverman":
        return float(cfg.bandwidth)
    f = np.asarray(f, dtype=float)
    sigma = float(np.std(f, ddof=1)) if f.size > 1 else 0.0
    if sigma == 0.0:
        # constant column: every window weight is equal for any h
        return 1.0
    return 1.06 * sigma * f.size ** (-0.2)


def _encode(y):
    labels, cls = np.unique(np.asarray(y).ravel(), return_inverse=True)
    return labels, cls.astype(np.intp)


def _posteriors(f, y, queries, cfg, exclude_self):
    f = np.ascontiguousarray(f, dtype=np.float64).ravel()
    if f.size < 2:
        raise ValidationError("Parzen estimation needs at least two samples")
    if f.size != np.asarray(y).size:
        raise ValidationError("feature column and labels differ in length")
    labels, cls = _encode(y)
    h = resolve_bandwidth(f, cfg)
    post = kernels.parzen_posteriors(f, cls, labels.size, np.ascontiguousarray(queries, dtype=np.float64), h, exclude_self)
    if not np.all(np.isfinite(post)):
        raise FloatingPointError("Parzen window denominator vanished")
    return labels, post


def parzen_posterior(f, y, x, cfg=ParzenConfig()):
    """Class posterior p(y | x) at a single query value, as ``{label: prob}``."""
    labels, post = _posteriors(f, y, np.array([float(x)]), cfg, False)
    return {int(lab): float(p) for lab, p in zip(labels, post[0])}


def conditional_entropy(f, y, cfg=ParzenConfig()):
    """Resubstitution (or leave-one-out) estimate of H(Y | f) in ``cfg.log_base`` units."""
    f = np.asarray(f, dtype=float).ravel()
    _, post = _posteriors(f, y, f, cfg, cfg.leave_one_out)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(post > 0.0, post * np.log(post), 0.0)
    return float(-terms.sum() / f.size / math.log(cfg.log_base))


def mutual_info(f, y, cfg=ParzenConfig(), clamp=True):
    mi = entropy(class_prior(y), cfg.log_base) - conditional_entropy(f, y, cfg)
    return max(mi, 0.0) if clamp else mi


def weights_from_mi(mi_values):
    mi = np.maximum(np.asarray(mi_values, dtype=float), 0.0)
    total = mi.sum()
    if not total > 0.0:
        raise DegenerateWeightsError("all features have zero mutual information with the label")
    return FeatureWeights(mi / total, mi)


def compute_weights(m, cfg=ParzenConfig()):
    mi = np.array([mutual_info(m.X[:, k], m.y, cfg) for k in range(m.d)])
    return weights_from_mi(mi)
