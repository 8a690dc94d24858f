import math

import numpy as np
import pytest

from qnt import ntcore, primality
from qnt import statevec as sv
from qnt.primality import PrimalityConfig, Verdict


@pytest.mark.parametrize("k", [2, 3, 7, 13, 31, 61])
@pytest.mark.parametrize("P, R", [(4, 1), (8, 1), (8, 2), (16, 1)])
def test_primes_always_read_probably_prime(k, P, R):
    assert primality.zero_probability(k, P, R) == pytest.approx(1, abs=1e-12)
    for seed in range(3):
        assert primality.run_primality(PrimalityConfig(k, P, R, seed)).verdict is Verdict.PROBABLY_PRIME


def test_prime_state_returns_ancillas_exactly():
    state, setup = primality.prepare_state(7, 8, 2)
    assert np.abs(state.amps[0, 0]) ** 2 == pytest.approx(np.full(7, 1 / 7), abs=1e-14)


def test_nine_matches_its_closed_form():
    theta = math.asin(math.sqrt(6 / 9))
    f = 8 * theta / math.pi
    alpha = math.sin(math.pi * f) / (8 * math.sin(math.pi * f / 8))
    assert primality.alpha(9, 8) == pytest.approx(alpha)
    assert primality.zero_probability(9, 8, 1) == pytest.approx(alpha**2, abs=1e-12)


def test_fifteen_zero_probability_is_small():
    p = primality.zero_probability(15, 8, 1)
    assert p == pytest.approx(primality.alpha(15, 8) ** 2, abs=1e-12)
    assert p <= primality.error_probability_bound(8, 1) == pytest.approx(1 / 48)


@pytest.mark.parametrize("k", [9, 15, 21, 25, 33, 49])
@pytest.mark.parametrize("P", [4, 8, 16])
def test_zero_probability_factorises_over_repetitions(k, P):
    one = primality.zero_probability(k, P, 1)
    assert primality.zero_probability(k, P, 2) == pytest.approx(one**2, abs=1e-12)
    assert primality.zero_probability(k, P, 3) == pytest.approx(one**3, abs=1e-12)


def test_composites_below_65():
    for k in range(4, 65):
        if ntcore.is_prime(k):
            continue
        for P in (8, 16):
            for R in (1, 2):
                p = primality.zero_probability(k, P, R)
                assert p == pytest.approx(primality.alpha(k, P) ** (2 * R), abs=1e-12)
                if primality.f_k(k, P) >= P / 3:
                    assert p <= primality.error_probability_bound(P, R) + 1e-12, (k, P, R)


def test_verdict_reflects_measured_ancillas():
    for seed in range(20):
        out = primality.run_primality(PrimalityConfig(15, 8, 2, seed))
        assert (out.verdict is Verdict.PROBABLY_PRIME) == (out.measured == (0, 0))
        assert len(out.measured) == 2


def test_runs_are_reproducible():
    a = primality.run_primality(PrimalityConfig(21, 8, 2, 5))
    b = primality.run_primality(PrimalityConfig(21, 8, 2, 5))
    assert a == b


def test_error_probability_bound_example():
    assert primality.error_probability_bound(8, 2) == pytest.approx(0.000434, abs=1e-6)


@pytest.mark.parametrize("kwargs", [dict(k=1), dict(k=9, P=6), dict(k=9, P=2), dict(k=9, R=0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PrimalityConfig(**kwargs)


def test_config_respects_cap(monkeypatch):
    monkeypatch.setenv("QNT_MAX_DIM", "1000")
    with pytest.raises(sv.SimulationCapError):
        PrimalityConfig(21, 8, 2)
