"""Counting ordered prime pairs ``k + (2N - k) = 2N``.

Same main loop as :mod:`qnt.pnt`, with a sub-loop that runs two witness
counts per branch (one for ``k``, one for its partner ``2N - k``) and
flips the phase only when both counting ancillas read 0.  The partner is
a function of ``k``, so it is never stored as its own register.

Registers: ``k`` (dim 2N), ``mP1``, ``mP2`` (dim P), ``a1``, ``a2`` (dim 2N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import ntcore
from . import statevec as sv
from .counting import CountEstimate, is_power_of_two
from .pnt import CountingRun, ErrorBudget, SubLoop, prepare_counting, residual_bound, residual_norm_sq


@dataclass(frozen=True)
class HlConfig:
    two_n: int = 16
    P: int = 8
    Q: int = 16
    repetitions: int = 50
    seed: int = 0
    nu: float = 0.5
    mu: float = 2.0

    def __post_init__(self):
        if self.two_n < 8 or self.two_n % 2:
            raise ValueError(f"2N must be an even integer >= 8, got {self.two_n}")
        for name in ("P", "Q"):
            value = getattr(self, name)
            if value < 4 or not is_power_of_two(value):
                raise ValueError(f"{name} must be a power of two >= 4, got {value}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.nu <= 0 or self.mu <= 0:
            raise ValueError("nu and mu must be positive")
        size = self.Q * self.two_n**3 * self.P**2
        if size > sv.max_dim():
            raise sv.SimulationCapError(f"Q*(2N)^3*P^2 = {size} exceeds the dimension cap {sv.max_dim()}")


def layout(two_n: int, P: int) -> sv.RegisterLayout:
    return sv.RegisterLayout([("k", two_n), ("mP1", P), ("mP2", P), ("a1", two_n), ("a2", two_n)])


def s_prime_operator(two_n: int, P: int, witnesses: np.ndarray | None = None) -> sv.Operation:
    """``S'_1``: nested witness counts for ``k`` and ``2N - k``, flip, uncompute.

    ``witnesses`` is a ``(2N+1, 2N)`` table ``T[j, a]`` (witness of ``j``),
    defaulting to the strong-witness table.
    """
    if witnesses is None:
        witnesses = ntcore.witness_table(two_n + 1)[:, :two_n]
    table = np.asarray(witnesses, dtype=bool)
    ks = np.arange(two_n)
    own, partner = table[ks], table[two_n - ks]

    def own_dim(k):
        return np.maximum(k, 1)

    def partner_dim(k):
        return np.maximum(two_n - k, 1)

    compute = sv.Sequential((
        sv.DFT("mP1"),
        sv.DFT("mP2"),
        sv.ControlledDFT("k", "a1", own_dim),
        sv.ControlledDFT("k", "a2", partner_dim),
        sv.ControlledGroverPower(("mP1",), "a1", sv.ControlledDim("k", own_dim), sv.PhasePredicate.table(("k", "a1"), own)),
        sv.ControlledGroverPower(("mP2",), "a2", sv.ControlledDim("k", partner_dim), sv.PhasePredicate.table(("k", "a2"), partner)),
        sv.DFT("mP1"),
        sv.DFT("mP2"),
    ))
    gate = sv.PhasePredicate(("k",), lambda k: (k >= 2) & (two_n - k >= 2))
    return sv.Conjugated(compute, sv.PhaseFlipZero(("mP1", "mP2"), gate))


def pair_sub_loop(two_n: int, P: int, witnesses=None, good=None) -> SubLoop:
    if good is None:
        good = ntcore.pair_mask(two_n)
    return SubLoop(layout(two_n, P), s_prime_operator(two_n, P, witnesses), np.asarray(good, dtype=bool), P)


def apply_s_prime(state: sv.QState) -> sv.QState:
    return state.apply(s_prime_operator(state.layout.dim("k"), state.layout.dim("mP1")))


def s_prime_error(two_n: int, P: int, witnesses=None, good=None) -> ErrorBudget:
    return ErrorBudget(residual_norm_sq(pair_sub_loop(two_n, P, witnesses, good)), residual_bound(P))


@lru_cache(maxsize=8)
def prepare_hl(two_n: int, P: int, Q: int) -> CountingRun:
    HlConfig(two_n, P, Q)
    return prepare_counting(pair_sub_loop(two_n, P), Q)


@dataclass
class HlResult:
    config: HlConfig
    estimate: CountEstimate
    majority: CountEstimate
    singles: list[CountEstimate]
    run: CountingRun

    @property
    def budget(self) -> ErrorBudget:
        return self.run.budget


def run_hl(config: HlConfig) -> HlResult:
    run = prepare_hl(config.two_n, config.P, config.Q)
    est, maj, singles = run.estimate(config.seed, config.repetitions)
    return HlResult(config, est, maj, singles, run)


def check_hl(result: HlResult) -> dict:
    """Estimate against the brute-force pair count and ``N / (ln N)**mu``."""
    cfg = result.config
    n = cfg.two_n / 2
    truth = ntcore.r2_pairs(cfg.two_n)
    est = result.estimate
    log_n = math.log(n)
    rho = math.log(cfg.Q) / math.log(log_n)
    delta_exp = abs(est.t - truth)
    within = delta_exp <= est.error_bound
    rho_ok = rho > cfg.mu / 2 + cfg.nu
    if not result.run.ansatz_ok:
        status = "ansatz_violated"
    else:
        status = "pass" if within and rho_ok else "fail"
    return {
        "r2_est": est.t,
        "r2_est_rounded": round(est.t),
        "r2_true": truth,
        "hl_scale": n / log_n**cfg.mu,
        "conjecture_ratio": est.t * log_n**cfg.mu / n,
        "delta_r2_exp": delta_exp,
        "delta_r2_exp_bound": est.error_bound,
        "delta_r2_th": n * log_n ** (-cfg.mu - cfg.nu),
        "rho_effective": rho,
        "rho_condition": rho_ok,
        "f_Q": result.run.f_Q,
        "ansatz_ok": result.run.ansatz_ok,
        "within_error_bound": within,
        "status": status,
    }
