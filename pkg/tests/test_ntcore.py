import numpy as np
import pytest
from hypothesis import given, strategies as st

from qnt import ntcore
from qnt.ntcore import WitnessVerdict


def naive_is_witness(k, a):
    """Strong-witness test from the full power sequence a^1..a^(k-1), no modpow."""
    h, l = 0, k - 1
    while l % 2 == 0:
        h, l = h + 1, l // 2
    powers = [1]
    for _ in range(k - 1):
        powers.append(powers[-1] * a % k)
    if powers[l] == 1:
        return False
    return not any(powers[l * 2**i] == k - 1 for i in range(h))


def trial_division_is_prime(n):
    return n >= 2 and all(n % d for d in range(2, n))


@pytest.mark.parametrize("n, h, l", [(12, 2, 3), (7, 0, 7), (1, 0, 1), (1024, 10, 1)])
def test_decompose_odd_examples(n, h, l):
    dec = ntcore.decompose_odd(n)
    assert (dec.h, dec.l) == (h, l)


def test_decompose_odd_round_trips_up_to_a_million():
    for n in range(1, 10**6 + 1):
        dec = ntcore.decompose_odd(n)
        assert dec.l % 2 == 1 and dec.value == n


def test_decompose_odd_rejects_zero():
    with pytest.raises(ValueError):
        ntcore.decompose_odd(0)


def test_mod_pow_examples():
    assert all(ntcore.mod_pow(a, 0, 9) == 1 for a in range(9))
    assert ntcore.mod_pow(0, 5, 7) == 0
    assert ntcore.mod_pow(2, 14, 15) == 4


def test_mod_pow_matches_repeated_multiplication():
    for m in range(2, 65):
        for a in range(m):
            acc = 1
            for e in range(65):
                assert ntcore.mod_pow(a, e, m) == acc % m
                acc = acc * a % m


@pytest.mark.parametrize("args", [(1, 2, 1), (0, 2, 0), (5, 2, 5), (-1, 2, 7), (2, -1, 7)])
def test_mod_pow_rejects_bad_input(args):
    with pytest.raises(ValueError):
        ntcore.mod_pow(*args)


@pytest.mark.parametrize(
    "k, a, verdict",
    [
        (15, 4, WitnessVerdict.WITNESS),
        (15, 14, WitnessVerdict.NON_WITNESS),
        (561, 2, WitnessVerdict.WITNESS),
        (2, 1, WitnessVerdict.NON_WITNESS),
    ],
)
def test_witness_examples(k, a, verdict):
    assert ntcore.witness(k, a) is verdict


def test_no_base_witnesses_a_prime():
    assert not any(ntcore.witness(7, a) for a in range(1, 7))


@pytest.mark.parametrize("k, a", [(15, 0), (15, 15), (15, 16), (1, 1)])
def test_witness_rejects_out_of_range(k, a):
    with pytest.raises(ValueError):
        ntcore.witness(k, a)


def test_witness_agrees_with_naive_definition():
    for k in range(2, 220):
        for a in range(1, k):
            assert bool(ntcore.witness(k, a)) == naive_is_witness(k, a), (k, a)


@pytest.mark.parametrize("k, t, liars", [(7, 0, [1, 2, 3, 4, 5, 6]), (9, 6, [1, 8]), (15, 12, [1, 14])])
def test_count_witnesses_examples(k, t, liars):
    assert ntcore.count_witnesses(k) == t
    assert ntcore.liars(k) == liars


def test_witness_gap_and_prime_soundness_to_2001():
    for k in range(2, 2002):
        t = ntcore.count_witnesses(k)
        if trial_division_is_prime(k):
            assert t == 0
        elif k % 2:
            assert t >= 3 * (k - 1) / 4, k


def test_even_composite_four_is_below_three_quarters():
    # The 3/4 gap is an odd-composite statement; k = 4 has witnesses {2, 3} only.
    assert ntcore.count_witnesses(4) == 2 < 3 * 3 / 4


def test_is_witness_treats_zero_base_as_liar():
    assert not ntcore.is_witness(15, 0)
    assert ntcore.witness_table(16)[15].sum() == 12
    assert not ntcore.witness_table(16)[:2].any()


@pytest.mark.parametrize("n, count", [(16, 6), (32, 11), (2, 0), (3, 1)])
def test_sieve_pi_examples(n, count):
    assert ntcore.sieve_pi(n)[0] == count


def test_sieve_matches_trial_division():
    count, primes = ntcore.sieve_pi(500)
    assert primes == [k for k in range(500) if trial_division_is_prime(k)]
    assert count == len(primes)


@pytest.mark.parametrize("two_n, count", [(20, 4), (10, 3), (4, 1), (16, 4)])
def test_r2_pairs_examples(two_n, count):
    assert ntcore.r2_pairs(two_n) == count


@given(st.integers(2, 300).map(lambda n: 2 * n))
def test_r2_pairs_matches_brute_force(two_n):
    brute = sum(trial_division_is_prime(k) and trial_division_is_prime(two_n - k) for k in range(two_n))
    assert ntcore.r2_pairs(two_n) == brute


def test_r2_pairs_rejects_odd():
    with pytest.raises(ValueError):
        ntcore.r2_pairs(21)


def test_pair_mask_is_symmetric():
    mask = ntcore.pair_mask(40)
    assert np.array_equal(mask[1:], mask[1:][::-1])
