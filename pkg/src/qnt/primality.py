"""Quantum primality test: R-fold witness counting on a single ``k``.

The witness register spans ``a in [0, k)``; ``a = 0`` is never a witness,
so a prime ``k`` marks nothing, every Grover power acts as the identity
on the flat state and all ancillas come back to ``|0...0>`` exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import ntcore
from . import statevec as sv
from .counting import CountSetup, count_transform, is_power_of_two, phase_fraction, prepare_flat, zero_amplitude


class Verdict(enum.Enum):
    COMPOSITE_CERTAIN = "composite"
    PROBABLY_PRIME = "probably-prime"


@dataclass(frozen=True)
class PrimalityConfig:
    k: int
    P: int = 8
    R: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.P < 4 or not is_power_of_two(self.P):
            raise ValueError(f"P must be a power of two >= 4, got {self.P}")
        if self.R < 1:
            raise ValueError(f"R must be >= 1, got {self.R}")
        if self.P**self.R * self.k > sv.max_dim():
            raise sv.SimulationCapError(
                f"P^R*k = {self.P**self.R * self.k} exceeds the dimension cap {sv.max_dim()}"
            )


@dataclass(frozen=True)
class PrimalityOutcome:
    verdict: Verdict
    measured: tuple[int, ...]
    error_probability_bound: float
    zero_probability: float


def error_probability_bound(P: int, R: int) -> float:
    """``(2 / (sqrt(3) P))**(2R)``: chance a composite reads as all-zero when ``f >= P/3``."""
    return (2 / (math.sqrt(3) * P)) ** (2 * R)


def witness_predicate(k: int) -> sv.PhasePredicate:
    table = np.array([ntcore.is_witness(k, a) for a in range(k)], dtype=bool)
    return sv.PhasePredicate(("a",), lambda a: table[a])


def setup_for(k: int, P: int, R: int) -> CountSetup:
    return CountSetup(k, P, R, witness_predicate(k))


def prepare_state(k: int, P: int, R: int) -> tuple[sv.QState, CountSetup]:
    """``|psi_3>``: the pre-measurement state over ``(m_1..m_R, a)``."""
    setup = setup_for(k, P, R)
    return count_transform(prepare_flat(setup), setup), setup


def zero_probability(k: int, P: int, R: int) -> float:
    """Simulated probability that every ancilla reads 0."""
    state, setup = prepare_state(k, P, R)
    joint = sv.marginal_probabilities(state, setup.ancillas)
    return float(joint[(0,) * R])


def alpha(k: int, P: int) -> float:
    """Closed-form zero-outcome amplitude ``alpha_k`` with ``t_k`` counted over ``[0, k)``."""
    return zero_amplitude(f_k(k, P), P)


def f_k(k: int, P: int) -> float:
    return phase_fraction(k, ntcore.count_witnesses(k), P)


def run_primality(config: PrimalityConfig) -> PrimalityOutcome:
    state, setup = prepare_state(config.k, config.P, config.R)
    joint = sv.marginal_probabilities(state, setup.ancillas)
    rng = sv.make_rng(config.seed)
    measured = []
    for name in setup.ancillas:
        outcome, state = sv.measure(state, name, rng)
        measured.append(outcome)
    verdict = Verdict.PROBABLY_PRIME if not any(measured) else Verdict.COMPOSITE_CERTAIN
    return PrimalityOutcome(
        verdict,
        tuple(measured),
        error_probability_bound(config.P, config.R),
        float(joint[(0,) * config.R]),
    )
