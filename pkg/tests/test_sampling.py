import math

import numpy as np
import pytest
from scipy import stats

from slkbell.errors import EmptyBlock, InvalidTable
from slkbell.functional import evaluate, slk_value_from_probabilities
from slkbell.measurement import JointProbabilityTable, difference_distribution, probability_table
from slkbell.sampling import (
    CountTable,
    ExperimentPlan,
    estimate_concurrence,
    estimate_slk,
    simulate_counts,
    weight_tensor,
)
from slkbell.state import maximally_entangled, product_state, random_schmidt

SQRT2 = math.sqrt(2)
P_EQUAL_D2 = math.cos(math.pi / 8) ** 2


def test_plan_validation():
    s = maximally_entangled(2)
    with pytest.raises(ValueError):
        ExperimentPlan(s, shots_per_setting=0)
    with pytest.raises(ValueError):
        ExperimentPlan(s, visibility=1.5)


def test_simulation_is_deterministic():
    plan = ExperimentPlan(random_schmidt(3, 1), shots_per_setting=5000, visibility=0.8, seed=9)
    a, b = simulate_counts(plan), simulate_counts(plan)
    np.testing.assert_array_equal(a.counts, b.counts)
    other = simulate_counts(ExperimentPlan(plan.state, shots_per_setting=5000, visibility=0.8, seed=10))
    assert not np.array_equal(a.counts, other.counts)


def test_blocks_sum_to_shots():
    c = simulate_counts(ExperimentPlan(random_schmidt(4, 2), shots_per_setting=777, seed=1))
    assert np.all(c.block_shots == 777)
    assert c.shots == 777


def test_zero_visibility_is_uniform():
    d = 3
    c = simulate_counts(ExperimentPlan(maximally_entangled(d), shots_per_setting=10**6, visibility=0.0, seed=4))
    for block in c.counts.reshape(4, d * d):
        assert stats.chisquare(block).pvalue > 0.001


def test_full_visibility_equal_outcome_frequency():
    c = simulate_counts(ExperimentPlan(maximally_entangled(2), shots_per_setting=10**6, seed=5))
    freq = difference_distribution(c.frequencies(), 1, 1, "A-B")[0]
    assert abs(freq - P_EQUAL_D2) < 0.002


@pytest.mark.parametrize("d", range(2, 9))
def test_plug_in_on_exact_frequencies(d):
    s = random_schmidt(d, d)
    table = probability_table(s)
    est = estimate_slk(CountTable.expected(table, 12345), n_boot=0)
    assert est.value == pytest.approx(evaluate(s).value, abs=1e-12)
    assert est.method == "plug-in"


@pytest.mark.parametrize("d", range(2, 9))
def test_visibility_linearity_exact(d):
    s = random_schmidt(d, 3 * d)
    exact = evaluate(s).value
    for v in (0.0, 0.3, 0.9):
        noisy = probability_table(s).mixed(v)
        assert slk_value_from_probabilities(noisy) == pytest.approx(v * exact, abs=1e-12)


def test_weight_tensor_matches_functional():
    rng = np.random.default_rng(0)
    for d in range(2, 7):
        p = rng.random((2, 2, d, d))
        p /= p.sum(axis=(2, 3), keepdims=True)
        table = JointProbabilityTable(d, p)
        assert np.sum(weight_tensor(d) * p) == pytest.approx(slk_value_from_probabilities(table), abs=1e-12)


def test_coverage_d2_bell_state():
    s = maximally_entangled(2)
    hits = 0
    for seed in range(100):
        c = simulate_counts(ExperimentPlan(s, shots_per_setting=10**6, seed=seed))
        est = estimate_slk(c, seed=seed)
        hits += abs(est.value - 2 * SQRT2) <= 3 * est.std_error
    assert hits >= 99


def test_std_error_scales_as_inverse_sqrt_shots():
    s = maximally_entangled(3)
    n = 20_000
    small = estimate_slk(simulate_counts(ExperimentPlan(s, shots_per_setting=n, seed=1)), seed=1)
    large = estimate_slk(simulate_counts(ExperimentPlan(s, shots_per_setting=4 * n, seed=2)), seed=2)
    assert small.std_error / large.std_error == pytest.approx(2.0, rel=0.15)


def test_concurrence_estimates_on_exact_frequencies():
    me = estimate_concurrence(CountTable.expected(probability_table(maximally_entangled(5)), 1000))
    assert me.value == pytest.approx(1.0, abs=1e-12)
    assert me.quantity == "concurrence" and me.in_range
    prod = estimate_concurrence(CountTable.expected(probability_table(product_state(4)), 1000))
    assert abs(prod.value) < 1e-12
    noisy = CountTable.expected(probability_table(maximally_entangled(3)).mixed(0.9), 1000)
    assert estimate_concurrence(noisy, n_boot=0).value == pytest.approx(0.9, abs=1e-12)


def test_concurrence_estimate_reports_out_of_range():
    c = simulate_counts(ExperimentPlan(maximally_entangled(2), shots_per_setting=50, seed=3))
    values = [estimate_concurrence(simulate_counts(ExperimentPlan(maximally_entangled(2), shots_per_setting=50, seed=i)), n_boot=0) for i in range(40)]
    assert any(v.value > 1 and v.in_range is False for v in values)
    assert estimate_concurrence(c).std_error > 0


def test_single_shot_gives_finite_nonzero_error():
    c = simulate_counts(ExperimentPlan(maximally_entangled(2), shots_per_setting=1, seed=0))
    est = estimate_slk(c)
    assert math.isfinite(est.value)
    assert est.std_error > 0


def test_empty_block_rejected():
    counts = np.zeros((2, 2, 2, 2), dtype=int)
    counts[0, 0, 0, 0] = 5
    with pytest.raises(EmptyBlock):
        estimate_slk(CountTable(2, counts))


def test_negative_counts_rejected():
    counts = np.ones((2, 2, 2, 2), dtype=int)
    counts[1, 1, 0, 0] = -1
    with pytest.raises(InvalidTable):
        CountTable(2, counts)


def test_bootstrap_is_seeded():
    c = simulate_counts(ExperimentPlan(random_schmidt(3, 0), shots_per_setting=1000, seed=0))
    assert estimate_slk(c, seed=5) == estimate_slk(c, seed=5)


def test_count_table_roundtrips():
    c = simulate_counts(ExperimentPlan(random_schmidt(3, 8), shots_per_setting=321, seed=2))
    csv_text = c.to_csv()
    assert csv_text.splitlines()[0] == "a,b,k,l,count"
    back = CountTable.from_csv(csv_text)
    np.testing.assert_array_equal(back.counts, c.counts)
    assert back.counts.dtype.kind == "i"
    js = CountTable.from_json(c.to_json())
    np.testing.assert_array_equal(js.counts, c.counts)
    assert js.offsets == c.offsets


def test_external_counts_sparse_csv():
    text = "a,b,k,l,count\n1,1,0,0,10\n1,2,1,1,5\n2,1,0,1,3\n2,2,1,0,4\n"
    c = CountTable.from_csv(text)
    assert c.d == 2
    est = estimate_slk(c, n_boot=50)
    assert math.isfinite(est.value)
