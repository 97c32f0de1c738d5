"""Flat, JSON-serialisable pipeline configuration."""
import json
import math
from dataclasses import asdict, dataclass, fields

from .mcs import McsConfig
from .mi_weights import ParzenConfig
from .wfsvm import VARIANTS


class ConfigError(ValueError):
    pass


FITNESS_MODES = ("train", "inner_cv")
SEARCH_SPACES = ("linear", "log")
WEIGHT_TARGETS = ("pca", "raw")


@dataclass(frozen=True)
class PipelineConfig:
    n_components: int = 4
    C_bounds: tuple = (1e-3, 200.0)
    gamma_bounds: tuple = (1e-3, 2.0)
    kernel_variant: str = "sqrt"
    folds: int = 10
    holdout_size: int = 78
    seed: int = 0
    # tuning
    fitness_mode: str = "inner_cv"
    inner_folds: int = 5
    search_space: str = "linear"
    budget: int = 2000
    n_nests: int = 25
    frac_abandon: float = 0.75
    frac_top: float = 0.25
    max_levy_step: float = 1.0
    levy_exponent: float = 1.5
    # feature weighting
    weight_target: str = "pca"
    parzen_bandwidth: object = "silverman"
    parzen_leave_one_out: bool = False
    # solver
    svm_tolerance: float = 1e-3
    svm_max_iter: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "C_bounds", tuple(float(v) for v in self.C_bounds))
        object.__setattr__(self, "gamma_bounds", tuple(float(v) for v in self.gamma_bounds))
        self.validate()

    def validate(self):
        for name in ("C_bounds", "gamma_bounds"):
            b = getattr(self, name)
            if len(b) != 2 or not 0 < b[0] < b[1]:
                raise ConfigError(f"{name} must be an ordered positive interval, got {list(b)}")
        if not 1 <= self.n_components <= 8:
            raise ConfigError(f"n_components must be in [1, 8], got {self.n_components}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.inner_folds < 2:
            raise ConfigError(f"inner_folds must be >= 2, got {self.inner_folds}")
        if self.kernel_variant not in VARIANTS:
            raise ConfigError(f"kernel_variant must be one of {VARIANTS}")
        if self.fitness_mode not in FITNESS_MODES:
            raise ConfigError(f"fitness_mode must be one of {FITNESS_MODES}")
        if self.search_space not in SEARCH_SPACES:
            raise ConfigError(f"search_space must be one of {SEARCH_SPACES}")
        if self.weight_target not in WEIGHT_TARGETS:
            raise ConfigError(f"weight_target must be one of {WEIGHT_TARGETS}")
        if self.holdout_size < 1:
            raise ConfigError("holdout_size must be positive")
        if self.budget < self.n_nests:
            raise ConfigError(f"budget {self.budget} is smaller than the initial population {self.n_nests}")
        if self.svm_tolerance <= 0 or self.svm_max_iter < 1:
            raise ConfigError("svm_tolerance and svm_max_iter must be positive")
        try:
            self.mcs_config(0)
            self.parzen()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def mcs_config(self, seed):
        if self.search_space == "log":
            bounds = [tuple(math.log10(v) for v in self.C_bounds), tuple(math.log10(v) for v in self.gamma_bounds)]
        else:
            bounds = [self.C_bounds, self.gamma_bounds]
        return McsConfig(
            bounds=bounds,
            max_evaluations=self.budget,
            n_nests=self.n_nests,
            frac_abandon=self.frac_abandon,
            frac_top=self.frac_top,
            max_levy_step=self.max_levy_step,
            levy_exponent=self.levy_exponent,
            seed=seed,
        )

    def parzen(self):
        return ParzenConfig(self.parzen_bandwidth, self.parzen_leave_one_out)

    def to_dict(self):
        out = asdict(self)
        out["C_bounds"] = list(self.C_bounds)
        out["gamma_bounds"] = list(self.gamma_bounds)
        return out

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def replace(self, **changes):
        data = self.to_dict()
        data.update({k: v for k, v in changes.items() if v is not None})
        return PipelineConfig.from_dict(data)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat JSON object")
    return PipelineConfig.from_dict(data)
