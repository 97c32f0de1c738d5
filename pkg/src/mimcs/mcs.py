"""Modified Cuckoo Search: a box-constrained, gradient-free maximiser.

Each generation the nests are ranked by fitness. The worst fraction is
replaced unconditionally by Levy flights whose step shrinks as A/sqrt(G);
every top nest either crosses over with a random top partner along the
golden-ratio line or, if it drew itself, takes a small A/G**2 Levy step.
Offspring of the top phase replace a uniformly drawn nest only when they
are strictly fitter.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import derive_rng

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class McsConfig:
    bounds: tuple
    max_evaluations: int = 2000
    n_nests: int = 25
    frac_abandon: float = 0.75
    frac_top: float = 0.25
    max_levy_step: float = 1.0
    levy_exponent: float = 1.5
    seed: int = 0

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] < 1:
            raise ConfigError("bounds must be a sequence of (lo, hi) pairs")
        if np.any(b[:, 0] >= b[:, 1]):
            raise ConfigError("every bound needs lo < hi")
        object.__setattr__(self, "bounds", tuple((float(lo), float(hi)) for lo, hi in b))
        if self.n_nests < 4:
            raise ConfigError("need at least 4 nests")
        if not 0.0 < self.frac_abandon < 1.0:
            raise ConfigError("frac_abandon must lie in (0, 1)")
        if not 0.0 < self.frac_top < 1.0:
            raise ConfigError("frac_top must lie in (0, 1)")
        if not self.max_levy_step > 0:
            raise ConfigError("max_levy_step must be positive")
        if not 0.0 < self.levy_exponent <= 2.0:
            raise ConfigError("levy_exponent must lie in (0, 2]")

    @property
    def dimension(self):
        return len(self.bounds)

    @property
    def n_top(self):
        return max(2, int(math.floor(self.frac_top * self.n_nests)))

    @property
    def n_abandon(self):
        return min(int(math.floor(self.frac_abandon * self.n_nests)), self.n_nests - self.n_top)


@dataclass(frozen=True)
class TraceRow:
    generation: int
    evaluations: int
    best_fitness: float
    best_position: tuple


@dataclass
class McsResult:
    best_position: np.ndarray
    best_fitness: float
    trace: list = field(default_factory=list)
    evaluations: int = 0

    def trace_csv(self):
        buf = io.StringIO()
        p = len(self.best_position)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["generation", "evaluations", "best_fitness"] + [f"x{k}" for k in range(p)])
        for row in self.trace:
            writer.writerow(
                [row.generation, row.evaluations, repr(row.best_fitness)] + [repr(v) for v in row.best_position]
            )
        return buf.getvalue()


def mantegna_sigma(beta):
    num = math.gamma(1.0 + beta) * math.sin(math.pi * beta / 2.0)
    den = math.gamma((1.0 + beta) / 2.0) * beta * 2.0 ** ((beta - 1.0) / 2.0)
    return (num / den) ** (1.0 / beta)


def levy_step(p, step_size, rng, beta=1.5):
    """Heavy-tailed step of length ``p`` (Mantegna's ratio u / |v|**(1/beta))."""
    u = rng.normal(0.0, mantegna_sigma(beta), size=p)
    v = rng.normal(0.0, 1.0, size=p)
    return step_size * u / np.abs(v) ** (1.0 / beta)


def step_schedule(generation, max_step, context="abandon"):
    if generation < 1:
        raise ValueError("generation numbers start at 1")
    if context == "abandon":
        return max_step / math.sqrt(generation)
    if context == "top_duplicate":
        return max_step / generation**2
    raise ValueError(f"unknown step context {context!r}")


def crossover_position(x_i, x_j, f_i, f_j):
    """Move the worse parent ``|x_i - x_j| / phi`` towards the better one.

    Equal fitness gives the midpoint.
    """
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if f_i == f_j:
        return 0.5 * (x_i + x_j)
    worse, better = (x_i, x_j) if f_i < f_j else (x_j, x_i)
    dx = np.abs(x_i - x_j) / GOLDEN_RATIO
    return worse + np.sign(better - worse) * dx


def optimize(objective, cfg, map_fn=map):
    """Maximise ``objective(position) -> float`` inside ``cfg.bounds``.

    Candidates of one phase are generated first (consuming the RNG in a
    fixed order), evaluated through ``map_fn`` and then applied in order,
    so an executor's ``map`` can be passed without changing results.
    """
    if cfg.max_evaluations < cfg.n_nests:
        raise ConfigError(
            f"budget {cfg.max_evaluations} is smaller than the initial population {cfg.n_nests}"
        )
    rng = derive_rng(cfg.seed, "mcs")
    bounds = np.asarray(cfg.bounds)
    lo, hi = bounds[:, 0], bounds[:, 1]
    width = hi - lo
    n, p = cfg.n_nests, cfg.dimension
    A = cfg.max_levy_step

    state = {"evals": 0, "best_f": -math.inf, "best_x": None}

    def evaluate(cands):
        cands = [np.clip(c, lo, hi) for c in cands]
        vals = [float(v) for v in map_fn(objective, cands)]
        state["evals"] += len(cands)
        for c, v in zip(cands, vals):
            if v > state["best_f"]:
                state["best_f"], state["best_x"] = v, c.copy()
        return cands, vals

    pos, vals = evaluate([lo + rng.random(p) * width for _ in range(n)])
    pos = np.array(pos)
    fit = np.array(vals)

    G = 1
    trace = [TraceRow(G, state["evals"], state["best_f"], tuple(state["best_x"].tolist()))]
    while state["evals"] < cfg.max_evaluations:
        G += 1
        order = np.argsort(-fit, kind="stable")
        top = order[: cfg.n_top]
        abandon = order[n - cfg.n_abandon:]

        room = cfg.max_evaluations - state["evals"]
        abandon = abandon[:room]
        alpha = step_schedule(G, A, "abandon")
        cands = [pos[i] + levy_step(p, alpha, rng, cfg.levy_exponent) * width for i in abandon]
        cands, vals = evaluate(cands)
        for i, x, f in zip(abandon, cands, vals):
            pos[i], fit[i] = x, f

        room = cfg.max_evaluations - state["evals"]
        cands, targets = [], []
        for i in top[:room]:
            j = top[rng.integers(top.shape[0])]
            if i == j:
                alpha = step_schedule(G, A, "top_duplicate")
                x = pos[i] + levy_step(p, alpha, rng, cfg.levy_exponent) * width
            else:
                x = crossover_position(pos[i], pos[j], fit[i], fit[j])
            cands.append(x)
            targets.append(int(rng.integers(n)))
        cands, vals = evaluate(cands)
        for l, x, f in zip(targets, cands, vals):
            if f > fit[l]:
                pos[l], fit[l] = x, f

        trace.append(TraceRow(G, state["evals"], state["best_f"], tuple(state["best_x"].tolist())))

    return McsResult(state["best_x"], state["best_f"], trace, state["evals"])
