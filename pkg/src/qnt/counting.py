"""Quantum counting: the COUNT transform, its exact outcome law and estimators.

COUNT takes a flat domain register of dimension ``N`` and ``R`` flat
ancillas of dimension ``P``, applies ``G**(m_1+...+m_R)`` to the domain and
a DFT to each ancilla.  With ``sin(theta) = sqrt(t/N)`` and
``f = P*theta/pi`` the ancilla tuple ``(l_1..l_R)`` is observed with
probability ``(prod s_plus(l_i)**2 + prod s_minus(l_i)**2) / 2`` where
``s_pm(l) = sin(pi(l +- f)) / (P sin(pi(l +- f)/P))``.

That law follows from writing the Grover amplitudes as
``sin((2M+1)theta) = (e^{i(2M+1)theta} - e^{-i(2M+1)theta}) / 2i`` (same for
cos): each exponential factorises over the ancillas, the two branches
attach to the orthogonal domain vectors ``(-+i B_1 + B_2)/sqrt(2)``, so
the cross terms and every global phase drop out of the Born rule.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import statevec as sv


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class CountSetup:
    N: int
    P: int
    R: int
    predicate: sv.PhasePredicate

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"domain dimension must be >= 2, got {self.N}")
        if self.P < 2 or not is_power_of_two(self.P):
            raise ValueError(f"ancilla dimension must be a power of two >= 2, got {self.P}")
        if self.R < 1:
            raise ValueError(f"repetitions R must be >= 1, got {self.R}")

    @property
    def ancillas(self) -> tuple[str, ...]:
        return tuple(f"m{i + 1}" for i in range(self.R))

    def layout(self) -> sv.RegisterLayout:
        return sv.RegisterLayout([(name, self.P) for name in self.ancillas] + [("a", self.N)])


@dataclass(frozen=True)
class CountEstimate:
    outcome: int
    P: int
    N: int
    f: float
    theta: float
    t: float
    error_bound: float
    members: tuple[int, ...] = field(default=(), compare=False)

    def as_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "f": self.f,
            "theta": self.theta,
            "t_est": self.t,
            "error_bound": self.error_bound,
        }


def sinc_weight(x, P: int):
    """``sin(pi x) / (P sin(pi x / P))`` with the analytic limit at ``x = jP``.

    The limit is ``(-1)**(j*(P-1))``; only its square ever reaches a
    probability.
    """
    x = np.asarray(x, dtype=float)
    den = P * np.sin(np.pi * x / P)
    j = np.rint(x / P)
    singular = np.abs(x - j * P) < 1e-12
    limit = np.where((j * (P - 1)) % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(singular, limit, np.sin(np.pi * x) / np.where(singular, 1.0, den))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SincWeights:
    """Per-outcome weights ``s_minus(l), s_plus(l)`` for one ancilla.

    The COUNT phase ``f_R = f (R + (1-R)/P)`` multiplies the two branches by
    ``e^{+-i pi f_R}`` only and never changes a probability.
    """

    f: float
    P: int

    @property
    def outcomes(self) -> np.ndarray:
        return np.arange(self.P)

    @property
    def s_minus(self) -> np.ndarray:
        return sinc_weight(self.outcomes - self.f, self.P)

    @property
    def s_plus(self) -> np.ndarray:
        return sinc_weight(self.outcomes + self.f, self.P)

    def phase_r(self, R: int) -> float:
        return self.f * (R + (1 - R) / self.P)


def phase_fraction(N: int, t: float, P: int) -> float:
    """``f = P * arcsin(sqrt(t/N)) / pi``, in ``[0, P/2]``."""
    if not 0 <= t <= N:
        raise ValueError(f"need 0 <= t <= N, got t={t}, N={N}")
    return P * math.asin(math.sqrt(t / N)) / math.pi


def zero_amplitude(f: float, P: int) -> float:
    """``alpha = sin(pi f) / (P sin(pi f / P))``, amplitude of outcome 0."""
    return float(sinc_weight(f, P))


def predict_distribution(N: int, t: float, P: int, R: int = 1) -> np.ndarray:
    """Exact law of the ``R`` measured ancillas, shape ``(P,)*R``."""
    if R < 1:
        raise ValueError("R must be >= 1")
    w = SincWeights(phase_fraction(N, t, P), P)
    plus, minus = np.ones(()), np.ones(())
    for _ in range(R):
        plus = np.multiply.outer(plus, w.s_plus**2)
        minus = np.multiply.outer(minus, w.s_minus**2)
    return (plus + minus) / 2


def prepare_flat(setup: CountSetup) -> sv.QState:
    state = sv.init_zero(setup.layout())
    for name in setup.ancillas:
        sv.apply_dft(state, name)
    sv.apply_dft(state, "a")
    return state


def count_transform(state: sv.QState, setup: CountSetup) -> sv.QState:
    """Controlled ``G**(m_1+...+m_R)`` on the domain, then ``F`` on each ancilla."""
    sv.apply_controlled_grover_power(state, setup.ancillas, "a", setup.N, setup.predicate)
    for name in setup.ancillas:
        sv.apply_dft(state, name)
    return state


def first_t_predicate(t: int) -> sv.PhasePredicate:
    """Marks domain values ``0..t-1``; the standard synthetic oracle."""
    return sv.PhasePredicate(("a",), lambda a: a < t)


def simulate_distribution(N: int, t: int, P: int, R: int = 1) -> np.ndarray:
    setup = CountSetup(N, P, R, first_t_predicate(t))
    state = count_transform(prepare_flat(setup), setup)
    return sv.marginal_probabilities(state, setup.ancillas)


def folded(outcome: int, P: int) -> int:
    return min(outcome, P - outcome)


def _estimate(f: float, outcome: int, P: int, N: int, members=()) -> CountEstimate:
    theta = math.pi * f / P
    t = N * math.sin(theta) ** 2
    bound = math.pi * N / P * (math.pi / P + 2 * math.sqrt(t / N))
    return CountEstimate(outcome, P, N, f, theta, t, bound, tuple(members))


def estimate_from_outcome(outcome: int, P: int, N: int) -> CountEstimate:
    """Map a measured ``l`` to ``t = N sin^2(pi min(l, P-l) / P)`` plus its error bound."""
    if not 0 <= outcome < P:
        raise ValueError(f"outcome must lie in [0, {P}), got {outcome}")
    return _estimate(float(folded(outcome, P)), outcome, P, N, (outcome,))


def majority_estimate(estimates: Sequence[CountEstimate]) -> CountEstimate:
    """Most frequent rounded ``t``; ties go to the smaller value."""
    if not estimates:
        raise ValueError("majority_estimate needs at least one estimate")
    votes = Counter(round(e.t) for e in estimates)
    top = max(votes.values())
    winner = min(v for v, c in votes.items() if c == top)
    return min(estimates, key=lambda e: abs(e.t - winner))


def folded_outcome_probabilities(f: np.ndarray, P: int) -> np.ndarray:
    """``p[i, l]``: single-ancilla law at phase ``f[i]`` (rows sum to 1)."""
    f = np.asarray(f, dtype=float)[:, None]
    l = np.arange(P)[None, :]
    return (sinc_weight(l + f, P) ** 2 + sinc_weight(l - f, P) ** 2) / 2


def interpolated_estimate(outcomes: Sequence[int], P: int, N: int, resolution: float = 1e-4) -> CountEstimate:
    """Majority rule with a fractional offset between the two leading bins.

    The majority folded outcome ``a`` fixes the neighbourhood ``[a-1, a+1]``;
    within it the offset is the maximum-likelihood phase under the ideal
    single-ancilla law, fitted to all repeated outcomes.  This recovers the
    non-integral part of ``f`` that a single outcome cannot carry.
    """
    if len(outcomes) == 0:
        raise ValueError("interpolated_estimate needs at least one outcome")
    counts = np.bincount(np.asarray(outcomes, dtype=np.int64), minlength=P)
    fold = Counter()
    for value, c in enumerate(counts):
        if c:
            fold[folded(value, P)] += int(c)
    top = max(fold.values())
    a = min(v for v, c in fold.items() if c == top)
    lo, hi = max(a - 1.0, 0.0), min(a + 1.0, P / 2)
    grid = np.linspace(lo, hi, int(round((hi - lo) / resolution)) + 1)
    probs = folded_outcome_probabilities(grid, P)
    with np.errstate(divide="ignore"):
        loglik = np.where(counts[None, :] > 0, np.log(np.maximum(probs, 1e-300)) * counts[None, :], 0.0).sum(axis=1)
    best = int(np.argmax(loglik))
    return _estimate(float(grid[best]), a, P, N, tuple(int(o) for o in outcomes))
