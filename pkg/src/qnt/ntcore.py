"""Classical number theory: strong witnesses, prime sieves and pair counts.

These functions are the ground truth for every quantum estimate in the
package, and the witness predicate is the oracle all phase flips are
built from.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Integers stay in machine words; nothing here is meant for N above 2**20.
MAX_INT = 1 << 20


@dataclass(frozen=True)
class OddDecomposition:
    h: int
    l: int

    @property
    def value(self) -> int:
        return (1 << self.h) * self.l


class WitnessVerdict(enum.Enum):
    WITNESS = "witness"
    NON_WITNESS = "non-witness"

    def __bool__(self) -> bool:
        return self is WitnessVerdict.WITNESS


def decompose_odd(n: int) -> OddDecomposition:
    """Split ``n`` as ``2**h * l`` with ``l`` odd."""
    if n < 1:
        raise ValueError(f"decompose_odd needs n >= 1, got {n}")
    h = 0
    while n % 2 == 0:
        n //= 2
        h += 1
    return OddDecomposition(h, n)


def mod_pow(a: int, e: int, m: int) -> int:
    """``a**e mod m`` by square-and-multiply (backed by the builtin ``pow``)."""
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    if e < 0:
        raise ValueError("exponent must be non-negative")
    if not 0 <= a < m:
        raise ValueError(f"base must lie in [0, {m}), got {a}")
    return pow(a, e, m)


def witness(k: int, a: int) -> WitnessVerdict:
    """Strong (Miller-Rabin) witness test of base ``a`` against ``k``.

    ``a`` is a non-witness when ``a**l == 1`` or ``a**(l * 2**i) == -1``
    (mod k) for some ``0 <= i < h``, where ``k - 1 = 2**h * l``.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if not 1 <= a < k:
        raise ValueError(f"base must satisfy 1 <= a < k, got a={a}, k={k}")
    dec = decompose_odd(k - 1)
    x = mod_pow(a, dec.l, k)
    if x == 1:
        return WitnessVerdict.NON_WITNESS
    for _ in range(dec.h):
        if x == k - 1:
            return WitnessVerdict.NON_WITNESS
        x = x * x % k
    return WitnessVerdict.WITNESS


def is_witness(k: int, a: int) -> bool:
    """Total version of :func:`witness` used by the quantum oracles.

    Bases outside ``[1, k)`` (in particular ``a = 0``) are non-witnesses,
    so a prime ``k`` marks nothing in the full register ``[0, k)``.
    """
    if k < 2 or not 1 <= a < k:
        return False
    return bool(witness(k, a))


def liars(k: int) -> list[int]:
    return [a for a in range(1, k) if not witness(k, a)]


@lru_cache(maxsize=None)
def count_witnesses(k: int) -> int:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    return sum(1 for a in range(1, k) if witness(k, a))


@lru_cache(maxsize=64)
def witness_table(size: int) -> np.ndarray:
    """Boolean table ``T[k, a] = is_witness(k, a)`` for ``0 <= k, a < size``."""
    table = np.zeros((size, size), dtype=bool)
    for k in range(2, size):
        for a in range(1, k):
            table[k, a] = bool(witness(k, a))
    table.setflags(write=False)
    return table


def prime_mask(n: int) -> np.ndarray:
    """Sieve of Eratosthenes: boolean array ``is_prime[0:n]``."""
    if n < 0 or n > MAX_INT:
        raise ValueError(f"sieve size must lie in [0, {MAX_INT}]")
    mask = np.ones(max(n, 2), dtype=bool)
    mask[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask[:n]


def sieve_pi(n: int) -> tuple[int, list[int]]:
    """Number of primes below ``n`` and the primes themselves."""
    if n < 2:
        raise ValueError(f"sieve_pi needs N >= 2, got {n}")
    primes = np.flatnonzero(prime_mask(n)).tolist()
    return len(primes), primes


def is_prime(k: int) -> bool:
    return k >= 2 and bool(prime_mask(k + 1)[k])


def pair_mask(two_n: int) -> np.ndarray:
    """``good[k]`` is True when both ``k`` and ``two_n - k`` are prime."""
    if two_n < 4 or two_n % 2:
        raise ValueError(f"need an even integer >= 4, got {two_n}")
    primes = prime_mask(two_n + 1)
    k = np.arange(two_n)
    return primes[k] & primes[two_n - k]


def r2_pairs(two_n: int) -> int:
    """Ordered representations of ``two_n`` as ``k + (two_n - k)`` with both prime."""
    return int(pair_mask(two_n).sum())
