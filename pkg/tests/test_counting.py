import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnt import counting
from qnt import statevec as sv


def test_no_marks_gives_zero_outcome():
    dist = counting.predict_distribution(16, 0, 8, 2)
    assert dist[0, 0] == pytest.approx(1)
    assert dist.sum() == pytest.approx(1)


def test_integral_phase_splits_between_two_outcomes():
    # t = 2, N = 4: f = P/4 = 2 exactly.
    dist = counting.predict_distribution(4, 2, 8)
    assert dist[2] == pytest.approx(0.5) and dist[6] == pytest.approx(0.5)
    np.testing.assert_allclose(counting.simulate_distribution(4, 2, 8), dist, atol=1e-14)


def test_all_marked_gives_half_period():
    dist = counting.predict_distribution(8, 8, 8)
    assert dist[4] == pytest.approx(1)


def test_unmarked_count_returns_ancillas_to_zero_exactly():
    setup = counting.CountSetup(16, 8, 2, counting.first_t_predicate(0))
    state = counting.count_transform(counting.prepare_flat(setup), setup)
    ancilla_zero = np.abs(state.amps[0, 0]) ** 2
    assert ancilla_zero.sum() == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("N, t, P, R", [(16, 4, 16, 1), (8, 3, 8, 2), (6, 5, 4, 3), (5, 1, 8, 1)])
def test_simulation_matches_closed_form(N, t, P, R):
    np.testing.assert_allclose(counting.simulate_distribution(N, t, P, R), counting.predict_distribution(N, t, P, R), atol=1e-12)


@pytest.mark.parametrize("N, t, P, R", [(8, 3, 8, 1), (6, 2, 4, 2), (16, 5, 8, 2), (4, 2, 8, 1)])
def test_amplitudes_carry_the_cancelling_phase(N, t, P, R):
    """Amplitude-level check of the factorised form, phase ``f_R`` included."""
    setup = counting.CountSetup(N, P, R, counting.first_t_predicate(t))
    state = counting.count_transform(counting.prepare_flat(setup), setup)
    w = counting.SincWeights(counting.phase_fraction(N, t, P), P)
    fr = w.phase_r(R)
    for ls in itertools.product(range(P), repeat=R):
        block = state.amps[ls]
        b1 = block[:t].sum() / math.sqrt(t)
        b2 = block[t:].sum() / math.sqrt(N - t)
        common = np.exp(1j * np.pi * sum(ls) * (1 - 1 / P))
        plus = np.prod([w.s_plus[l] for l in ls])
        minus = np.prod([w.s_minus[l] for l in ls])
        up, down = np.exp(1j * np.pi * fr) * plus, np.exp(-1j * np.pi * fr) * minus
        assert b1 == pytest.approx(common * (up - down) / 2j, abs=1e-12)
        assert b2 == pytest.approx(common * (up + down) / 2, abs=1e-12)
        # Any other phase gives the same probability.
        for shift in (0.3, 1.7):
            alt = (np.exp(1j * np.pi * (fr + shift)) * plus, np.exp(-1j * np.pi * (fr + shift)) * minus)
            assert abs((alt[0] - alt[1]) / 2j) ** 2 + abs((alt[0] + alt[1]) / 2) ** 2 == pytest.approx(abs(b1) ** 2 + abs(b2) ** 2, abs=1e-12)


@given(st.integers(2, 64), st.data(), st.sampled_from([4, 8, 16, 32]), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_outcome_law_is_complete(N, data, P, R):
    t = data.draw(st.integers(0, N))
    assert counting.predict_distribution(N, t, P, R).sum() == pytest.approx(1, abs=1e-12)


def test_sinc_limit_squares_to_one():
    for P in (4, 8):
        for j in range(-2, 3):
            assert counting.sinc_weight(j * P, P) ** 2 == pytest.approx(1)
    assert counting.sinc_weight(0.5, 2) == pytest.approx(math.sin(math.pi / 2) / (2 * math.sin(math.pi / 4)))


@pytest.mark.parametrize("P", [8, 16, 32, 64])
def test_two_nearest_outcomes_hold_most_mass(P):
    for f in np.linspace(1.01, P / 2 - 1.01, 25):
        probs = counting.folded_outcome_probabilities(np.array([f]), P)[0]
        near = {math.floor(f), math.ceil(f), P - math.floor(f), P - math.ceil(f)}
        assert sum(probs[l] for l in near) >= 8 / math.pi**2


def test_estimate_from_outcome_examples():
    est = counting.estimate_from_outcome(2, 8, 4)
    assert est.t == pytest.approx(2)
    assert est.theta == pytest.approx(math.pi / 4)
    assert counting.estimate_from_outcome(6, 8, 4).t == pytest.approx(2)
    assert counting.estimate_from_outcome(0, 8, 4).t == 0
    assert est.error_bound == pytest.approx(math.pi * 4 / 8 * (math.pi / 8 + 2 * math.sqrt(0.5)))


def test_integral_phase_modal_outcome_is_exact():
    for N, t, P in [(4, 2, 8), (8, 4, 16), (16, 8, 8), (2, 1, 32)]:
        dist = counting.predict_distribution(N, t, P)
        est = counting.estimate_from_outcome(int(np.argmax(dist)), P, N)
        assert est.t == pytest.approx(t)


def test_estimate_rejects_out_of_range_outcome():
    with pytest.raises(ValueError):
        counting.estimate_from_outcome(8, 8, 4)


def test_majority_prefers_most_frequent_then_smaller():
    ests = [counting.estimate_from_outcome(o, 16, 16) for o in (3, 3, 13, 4)]
    assert round(counting.majority_estimate(ests).t) == round(ests[0].t)
    tie = [counting.estimate_from_outcome(o, 16, 16) for o in (3, 4)]
    assert counting.majority_estimate(tie).outcome == 3
    with pytest.raises(ValueError):
        counting.majority_estimate([])


def test_interpolated_estimate_recovers_fractional_phase():
    N, t, P = 16, 6, 16
    f = counting.phase_fraction(N, t, P)
    probs = counting.folded_outcome_probabilities(np.array([f]), P)[0]
    rng = np.random.default_rng(0)
    outcomes = rng.choice(P, size=400, p=probs / probs.sum())
    est = counting.interpolated_estimate(outcomes, P, N)
    assert est.f == pytest.approx(f, abs=0.05)
    assert round(est.t) == t


def test_interpolated_estimate_on_exact_zero():
    assert counting.interpolated_estimate([0, 0, 0], 8, 16).t == pytest.approx(0, abs=1e-6)


def test_setup_validation():
    pred = counting.first_t_predicate(1)
    for args in [(1, 8, 1), (8, 6, 1), (8, 8, 0)]:
        with pytest.raises(ValueError):
            counting.CountSetup(*args, pred)
    with pytest.raises(ValueError):
        counting.phase_fraction(4, 5, 8)


def test_count_state_stays_under_cap(monkeypatch):
    monkeypatch.setenv("QNT_MAX_DIM", "64")
    with pytest.raises(sv.SimulationCapError):
        counting.simulate_distribution(16, 1, 8)
