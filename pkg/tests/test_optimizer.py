import itertools
import math

import numpy as np
import pytest

import oracles
from slkbell.errors import BudgetTooSmall
from slkbell.functional import slope
from slkbell.measurement import CANONICAL_OFFSETS, PhaseOffsets
from slkbell.optimizer import (
    _best_index,
    batch_objective,
    evaluate_objective,
    grid_size,
    optimize,
)
from slkbell.state import concurrence, maximally_entangled, product_state, random_schmidt

TSIRELSON = 2 * math.sqrt(2)


def test_objective_canonical_values():
    assert evaluate_objective(maximally_entangled(2), CANONICAL_OFFSETS) == pytest.approx(TSIRELSON, abs=1e-12)
    for d in range(2, 7):
        s = random_schmidt(d, 40 + d)
        assert abs(evaluate_objective(s, CANONICAL_OFFSETS) - slope(d) * concurrence(s)) < 1e-9


def test_objective_degenerate_zero_offsets():
    # both of Alice's observables coincide, as do Bob's: value = 2 C11 = 2
    value = evaluate_objective(maximally_entangled(2), PhaseOffsets(0, 0, 0, 0))
    assert value == pytest.approx(oracles.bell_value([2**-0.5] * 2, (0, 0, 0, 0)), abs=1e-12)
    assert value == pytest.approx(2.0, abs=1e-12)
    assert value < TSIRELSON


def test_batch_objective_matches_scalar():
    rng = np.random.default_rng(1)
    for d in (2, 3, 5):
        s = random_schmidt(d, d)
        pts = rng.uniform(-2, 2, (20, 4))
        expected = [evaluate_objective(s, PhaseOffsets(*p)) for p in pts]
        np.testing.assert_allclose(batch_objective(s, pts), expected, atol=1e-12)


def test_objective_symmetries():
    d = 3
    s = random_schmidt(d, 2)
    base = PhaseOffsets(0.11, 0.62, 0.3, -0.4)
    v0 = evaluate_objective(s, base)
    periodic = PhaseOffsets(base.delta1 - d, base.delta2, base.epsilon1 + 2 * d, base.epsilon2 + d)
    assert evaluate_objective(s, periodic) == pytest.approx(v0, abs=1e-12)
    for t in (0.5, 1.0, -3.0):
        gauge = PhaseOffsets(base.delta1 + t, base.delta2 + t, base.epsilon1 - t, base.epsilon2 - t)
        assert evaluate_objective(s, gauge) == pytest.approx(v0, abs=1e-12)


def test_grid_size_and_budget_errors():
    assert grid_size(2, 10**4) == 8
    assert grid_size(3, 10**4) == 9  # 12^4 does not fit, coarsened
    assert grid_size(2, 17) == 2
    with pytest.raises(BudgetTooSmall):
        grid_size(2, 16)
    with pytest.raises(BudgetTooSmall):
        optimize(maximally_entangled(2), budget=5)


def test_tie_break_is_lexicographic():
    pts = np.array([[0.5, 0, 0, 0], [0.25, 0.5, 0, 0], [0.25, 0.25, 0.75, 0]])
    assert _best_index(np.array([1.0, 1.0, 1.0]), pts) == 2
    assert _best_index(np.array([1.0, 2.0, 1.0]), pts) == 1


def test_bell_state_d2_no_improvement_over_tsirelson():
    r = optimize(maximally_entangled(2), budget=10**4, seed=0)
    assert r.best_value >= TSIRELSON - 1e-6
    assert r.improvement <= 1e-6
    assert r.evaluations <= 10**4


@pytest.mark.parametrize("d", [2, 3])
def test_product_state_stays_zero(d):
    r = optimize(product_state(d), budget=3000, seed=1)
    assert abs(r.best_value) < 1e-9
    assert np.max(np.abs([v for _, v in r.trace])) < 1e-9
    # brute-force confirmation on a coarse grid, independent of the library
    for offs in itertools.product((0.0, 0.3, 0.75), repeat=4):
        assert abs(oracles.bell_value([1.0] + [0.0] * (d - 1), offs)) < 1e-12


def test_max_entangled_d3_exploratory():
    r = optimize(maximally_entangled(3), budget=10**5, seed=0)
    assert r.improvement >= 0
    assert r.evaluations <= 10**5
    assert r.best_value >= r.canonical_value - 1e-9


@pytest.mark.parametrize("d,seed", [(2, 3), (3, 4), (4, 5), (5, 6)])
def test_canonical_floor_and_monotone_trace(d, seed):
    s = random_schmidt(d, seed)
    r = optimize(s, budget=3000, seed=seed)
    assert r.best_value >= slope(d) * concurrence(s) - 1e-9
    assert r.best_value >= r.canonical_value - 1e-9
    assert r.improvement == r.best_value - r.canonical_value
    best = r.best_so_far()
    assert np.all(np.diff(best) >= 0)
    assert best[-1] == r.best_value
    assert len(r.trace) == r.evaluations <= 3000


def test_optimize_is_deterministic():
    s = random_schmidt(3, 12)
    a = optimize(s, budget=4000, seed=7)
    b = optimize(s, budget=4000, seed=7)
    assert a.best_offsets == b.best_offsets
    assert a.best_value == b.best_value
    assert a.trace_csv() == b.trace_csv()


def test_trace_csv_header():
    r = optimize(maximally_entangled(2), budget=100, seed=0)
    lines = r.trace_csv().splitlines()
    assert lines[0] == "eval_index,delta1,delta2,epsilon1,epsilon2,value"
    assert len(lines) == r.evaluations + 1
    assert lines[1].startswith("0,0,0.5,0.25,-0.25,")
