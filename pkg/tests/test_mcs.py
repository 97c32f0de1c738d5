import math

import numpy as np
import pytest
from concurrent.futures import ThreadPoolExecutor
from hypothesis import given, settings, strategies as st

from mimcs import mcs
from mimcs.mcs import GOLDEN_RATIO, McsConfig


def sphere(x):
    return -float(x[0] ** 2 + x[1] ** 2)


def rosenbrock(x):
    return -float((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)


def hill_tail_exponent(samples, frac=0.01):
    """Hill estimator of the tail index from the largest ``frac`` of samples."""
    s = np.sort(np.abs(samples))[::-1]
    k = int(frac * s.size)
    return 1.0 / np.mean(np.log(s[:k] / s[k]))


def test_levy_tail_exponent():
    rng = np.random.default_rng(0)
    steps = mcs.levy_step(100_000, 1.0, rng, beta=1.5)
    assert abs(hill_tail_exponent(steps) - 1.5) < 0.2


def test_levy_scaling_and_determinism():
    a = mcs.levy_step(5, 1.0, np.random.default_rng(3))
    b = mcs.levy_step(5, 1.0, np.random.default_rng(3))
    assert np.array_equal(a, b)
    tiny = mcs.levy_step(5, 1e-300, np.random.default_rng(3))
    assert np.allclose(tiny, 0.0, atol=1e-290)
    assert np.allclose(mcs.levy_step(5, 2.5, np.random.default_rng(3)), 2.5 * a, rtol=1e-15)


def test_mantegna_sigma_beta_15():
    assert mcs.mantegna_sigma(1.5) == pytest.approx(0.6966, abs=1e-4)


def test_step_schedule():
    assert mcs.step_schedule(1, 1.0, "abandon") == 1.0
    assert mcs.step_schedule(4, 1.0, "abandon") == 0.5
    assert mcs.step_schedule(4, 1.0, "top_duplicate") == 1 / 16
    seq = [mcs.step_schedule(g, 0.7) for g in range(1, 200)]
    assert all(b < a for a, b in zip(seq, seq[1:]))
    with pytest.raises(ValueError):
        mcs.step_schedule(0, 1.0)
    with pytest.raises(ValueError):
        mcs.step_schedule(2, 1.0, "sideways")


def test_crossover_examples():
    assert np.allclose(mcs.crossover_position([0, 0], [GOLDEN_RATIO] * 2, 0.0, 1.0), [1, 1])
    assert np.allclose(mcs.crossover_position([0, 0], [2, 2], 0.5, 0.5), [1, 1])
    assert mcs.crossover_position([0.0], [1.0], 0.0, 1.0)[0] == pytest.approx(0.618034, abs=1e-6)
    # the worse parent is the one that moves, whichever argument it is
    assert mcs.crossover_position([1.0], [0.0], 1.0, 0.0)[0] == pytest.approx(0.618034, abs=1e-6)


coord = st.floats(-100, 100, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=4), st.floats(-1, 1), st.floats(-1, 1))
def test_crossover_stays_on_segment(pairs, fi, fj):
    xi = np.array([p[0] for p in pairs])
    xj = np.array([p[1] for p in pairs])
    out = mcs.crossover_position(xi, xj, fi, fj)
    lo, hi = np.minimum(xi, xj), np.maximum(xi, xj)
    assert np.all(out >= lo - 1e-9) and np.all(out <= hi + 1e-9)


def test_config_validation():
    with pytest.raises(mcs.ConfigError):
        McsConfig(bounds=[(1, 0)])
    with pytest.raises(mcs.ConfigError):
        McsConfig(bounds=[(0, 1)], n_nests=3)
    with pytest.raises(mcs.ConfigError):
        McsConfig(bounds=[(0, 1)], frac_abandon=1.0)
    with pytest.raises(mcs.ConfigError):
        McsConfig(bounds=[(0, 1)], frac_top=0.0)
    cfg = McsConfig(bounds=[(0, 1)])
    assert (cfg.n_top, cfg.n_abandon) == (6, 18)
    small = McsConfig(bounds=[(0, 1)], n_nests=4)
    assert small.n_top == 2 and small.n_abandon == 2


def test_budget_too_small():
    with pytest.raises(mcs.ConfigError):
        mcs.optimize(sphere, McsConfig(bounds=[(-5, 5)] * 2, max_evaluations=10, n_nests=25))


@pytest.mark.parametrize("budget", [25, 26, 31, 1000, 2000, 2017])
def test_budget_exact_and_bounds(budget):
    seen = []

    def obj(x):
        seen.append(np.array(x))
        return sphere(x)

    cfg = McsConfig(bounds=[(-5, 5), (-1, 3)], max_evaluations=budget, seed=1)
    res = mcs.optimize(obj, cfg)
    assert len(seen) == budget == res.evaluations
    pts = np.array(seen)
    assert np.all(pts[:, 0] >= -5) and np.all(pts[:, 0] <= 5)
    assert np.all(pts[:, 1] >= -1) and np.all(pts[:, 1] <= 3)
    assert res.trace[-1].evaluations == budget
    assert res.best_fitness == max(sphere(p) for p in pts)


def test_sphere_converges():
    hits = 0
    for seed in range(20):
        cfg = McsConfig(bounds=[(-5, 5)] * 2, max_evaluations=10_000, seed=seed)
        res = mcs.optimize(sphere, cfg)
        hits += np.linalg.norm(res.best_position) < 1e-3
        f = [r.best_fitness for r in res.trace]
        assert all(b >= a for a, b in zip(f, f[1:]))
    assert hits >= 19


def test_rosenbrock_majority():
    good = 0
    for seed in range(7):
        cfg = McsConfig(bounds=[(-2, 2)] * 2, max_evaluations=20_000, seed=seed)
        good += mcs.optimize(rosenbrock, cfg).best_fitness >= -1e-2
    assert good >= 4


def test_constant_objective():
    cfg = McsConfig(bounds=[(0, 1)] * 3, max_evaluations=503, seed=2)
    res = mcs.optimize(lambda x: 7.0, cfg)
    assert res.evaluations == 503
    assert {r.best_fitness for r in res.trace} == {7.0}
    # first-encountered wins on ties
    assert res.trace[0].best_position == res.trace[-1].best_position


def test_determinism_and_map_fn():
    cfg = McsConfig(bounds=[(-2, 2)] * 2, max_evaluations=1500, seed=11)
    a = mcs.optimize(rosenbrock, cfg)
    b = mcs.optimize(rosenbrock, cfg)
    with ThreadPoolExecutor(4) as pool:
        c = mcs.optimize(rosenbrock, cfg, map_fn=pool.map)
    assert a.trace_csv() == b.trace_csv() == c.trace_csv()
    other = mcs.optimize(rosenbrock, McsConfig(bounds=[(-2, 2)] * 2, max_evaluations=1500, seed=12))
    assert other.trace_csv() != a.trace_csv()


def test_trace_csv_layout():
    res = mcs.optimize(sphere, McsConfig(bounds=[(-1, 1)] * 2, max_evaluations=60, seed=0))
    lines = res.trace_csv().splitlines()
    assert lines[0] == "generation,evaluations,best_fitness,x0,x1"
    assert len(lines) == len(res.trace) + 1
    first = lines[1].split(",")
    assert first[:2] == ["1", "25"]
