import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from slkbell.errors import InvalidDimension, NonHermitianSpectrum
from slkbell.functional import (
    bell_weights,
    evaluate,
    lr_bound,
    predicted_value,
    slk_from_correlations,
    slk_from_probabilities,
    violation_threshold,
)
from slkbell.measurement import (
    CANONICAL_OFFSETS,
    CorrelationSpectrum,
    PhaseOffsets,
    correlation_spectrum,
    probability_table,
)
from slkbell.state import (
    concurrence,
    maximally_entangled,
    new_schmidt,
    pair_sum,
    product_state,
    random_schmidt,
)

SQRT2 = math.sqrt(2)


def test_weights_d2():
    np.testing.assert_allclose(bell_weights(2).f, [1.0, -1.0], atol=1e-15)


def test_weights_d4_first_entry():
    # (cot(pi/16) - 1)/sqrt2 evaluated directly
    assert bell_weights(4).f[0] == pytest.approx(2.8477590650225735, abs=1e-12)
    assert bell_weights(4).f[0] == pytest.approx(oracles.weights(4)[0], abs=1e-15)


@pytest.mark.parametrize("d", range(2, 101))
def test_weights_sum_to_zero(d):
    assert abs(math.fsum(bell_weights(d).f)) < 1e-10


def test_weights_invalid_dimension():
    with pytest.raises(InvalidDimension):
        bell_weights(1)


def test_probability_path_tsirelson_point():
    res = slk_from_probabilities(probability_table(maximally_entangled(2)))
    assert res.value == pytest.approx(2 * SQRT2, abs=1e-12)
    assert res.path == "probability"
    assert res.violated


@pytest.mark.parametrize("d", range(2, 13))
def test_product_states_give_zero(d):
    for idx in (0, d - 1):
        table = probability_table(product_state(d, idx))
        assert abs(slk_from_probabilities(table).value) < 1e-12
        assert abs(slk_from_correlations(correlation_spectrum(table)).value) < 1e-10


def test_max_entangled_d3():
    res = evaluate(maximally_entangled(3))
    assert res.value == pytest.approx(4 * SQRT2, abs=1e-12)
    assert res.value == pytest.approx(oracles.bell_value([3**-0.5] * 3, CANONICAL_OFFSETS.as_tuple()), abs=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_probability_path_matches_brute_force_oracle(d):
    for seed in range(3):
        s = random_schmidt(d, seed)
        for offs in [CANONICAL_OFFSETS, PhaseOffsets(0.13, 0.41, 0.77, -0.05)]:
            got = evaluate(s, offs).value
            assert got == pytest.approx(oracles.bell_value(list(s.coeffs), offs.as_tuple()), abs=1e-12)


def test_correlation_path_examples():
    spectrum = correlation_spectrum(probability_table(maximally_entangled(2)))
    assert slk_from_correlations(spectrum).value == pytest.approx(2 * SQRT2, abs=1e-10)
    s = random_schmidt(4, 17)
    table = probability_table(s)
    assert slk_from_correlations(correlation_spectrum(table)).value == pytest.approx(
        slk_from_probabilities(table).value, abs=1e-9
    )


def test_correlation_path_rejects_non_hermitian_spectrum():
    spectrum = correlation_spectrum(probability_table(random_schmidt(3, 1)))
    values = spectrum.values.copy()
    values[0, 0, 1] += 0.1j
    with pytest.raises(NonHermitianSpectrum):
        slk_from_correlations(CorrelationSpectrum(3, values))


def test_lr_bound_values():
    assert lr_bound(2) == pytest.approx(2.0, abs=1e-12)
    # cot(pi/12) = 2 + sqrt3, cot(pi/4) = 1
    expected = (3 * (2 + math.sqrt(3)) - 1) / SQRT2 - 2 * SQRT2
    assert lr_bound(3) == pytest.approx(expected, abs=1e-12)
    assert lr_bound(3) == pytest.approx(4.381341, abs=1e-6)
    with pytest.raises(InvalidDimension):
        lr_bound(1)


def test_lr_bound_increasing():
    values = [lr_bound(d) for d in range(2, 51)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_violation_threshold():
    assert violation_threshold(2) == pytest.approx(1 / SQRT2, abs=1e-12)
    assert violation_threshold(3) == pytest.approx(lr_bound(3) / (4 * SQRT2), abs=1e-15)
    assert violation_threshold(3) == pytest.approx(0.774519, abs=1e-6)
    assert all(violation_threshold(d) < 1 for d in range(2, 13))


def ensemble(ds=range(2, 9), n=100):
    for d in ds:
        for seed in range(n):
            yield random_schmidt(d, 1000 * d + seed)


def test_path_equivalence_ensemble():
    worst = 0.0
    for s in ensemble():
        table = probability_table(s)
        a = slk_from_probabilities(table).value
        b = slk_from_correlations(correlation_spectrum(table)).value
        worst = max(worst, abs(a - b))
    assert worst < 1e-9


def test_path_equivalence_off_canonical():
    rng = np.random.default_rng(3)
    for d in range(2, 7):
        for _ in range(10):
            offs = PhaseOffsets(*rng.uniform(-1, 1, 4))
            s = random_schmidt(d, int(rng.integers(1 << 30)))
            a = evaluate(s, offs, "probability").value
            b = evaluate(s, offs, "correlation").value
            assert abs(a - b) < 1e-9


def test_linear_relation_and_closed_form():
    for s in ensemble():
        value = evaluate(s).value
        assert abs(value - 2 * SQRT2 * (s.d - 1) * concurrence(s)) < 1e-9
        assert abs(value - 4 * SQRT2 * pair_sum(s)) < 1e-9
        assert abs(value - oracles.closed_form_value(list(s.coeffs))) < 1e-9
        assert abs(value - predicted_value(s)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 5, allow_nan=False), min_size=2, max_size=6).filter(lambda c: sum(c) > 1e-3),
       st.randoms())
def test_value_invariant_under_coefficient_permutation(raw, rnd):
    perm = list(raw)
    rnd.shuffle(perm)
    a = evaluate(new_schmidt(len(raw), raw)).value
    b = evaluate(new_schmidt(len(raw), perm)).value
    assert a == pytest.approx(b, abs=1e-9)


def test_classification_consistency():
    margin = 1e-9
    checked = 0
    for s in ensemble(range(2, 9), 200):
        res = evaluate(s)
        assert res.violated == (res.value > res.lr_bound)
        c, thr = concurrence(s), violation_threshold(s.d)
        if abs(c - thr) <= margin:
            continue
        assert res.violated == (c > thr)
        checked += 1
    assert checked > 1000


@pytest.mark.parametrize("theta", np.linspace(0.01, math.pi / 2 - 0.01, 15))
def test_chsh_reduction_d2(theta):
    s = new_schmidt(2, [math.cos(theta), math.sin(theta)])
    for offs in [CANONICAL_OFFSETS, PhaseOffsets(0.1, 0.3, 0.2, 0.9), PhaseOffsets(0, 0, 0, 0)]:
        ref = oracles.chsh(list(s.coeffs), offs.as_tuple())
        assert evaluate(s, offs).value == pytest.approx(ref, abs=1e-10)
        assert evaluate(s, offs, "correlation").value == pytest.approx(ref, abs=1e-10)


def test_result_json():
    res = evaluate(maximally_entangled(2))
    data = json.loads(res.to_json())
    assert {"d", "value", "path", "lr_bound", "violated", "offsets"} <= set(data)
    assert data["offsets"]["epsilon2"] == -0.25
    assert data["state_digest"] == maximally_entangled(2).digest()
