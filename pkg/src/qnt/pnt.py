"""Counting primes below N with a unitary, approximately exact prime oracle.

The sub-loop runs a witness count for every ``k < N`` in parallel and
flips the phase of the branches whose counting ancilla came back to 0,
then uncomputes.  The result ``S~1`` is the prime phase flip up to a small
residual ``|E>``.  The main loop counts the flipped branches with the
iterate ``G~ = U_2 S~1`` exactly like COUNT does.

Registers of the sub-loop: ``k`` (dim N), ``mP`` (dim P), ``a`` (dim N).
The main loop prepends ``mQ`` (dim Q).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import ntcore
from . import statevec as sv
from .counting import (
    CountEstimate,
    estimate_from_outcome,
    interpolated_estimate,
    is_power_of_two,
    majority_estimate,
    phase_fraction,
    predict_distribution,
)


def _branch_dim(k):
    return np.maximum(k, 1)


@dataclass(frozen=True)
class PntConfig:
    N: int = 16
    P: int = 8
    Q: int = 16
    repetitions: int = 50
    seed: int = 0
    delta: float = 0.5

    def __post_init__(self):
        if self.N < 8 or not is_power_of_two(self.N):
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")
        for name in ("P", "Q"):
            value = getattr(self, name)
            if value < 4 or not is_power_of_two(value):
                raise ValueError(f"{name} must be a power of two >= 4, got {value}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        size = self.Q * self.N * self.P * self.N
        if size > sv.max_dim():
            raise sv.SimulationCapError(f"Q*N*P*N = {size} exceeds the dimension cap {sv.max_dim()}")


@dataclass
class ErrorBudget:
    """Residual norms of an approximate oracle and their analytic bounds."""

    e_norm_sq: float
    e_bound: float
    en_norm_sq: list[float] = field(default_factory=list)
    w_err: float | None = None
    w_err_bound: float | None = None

    def as_dict(self) -> dict:
        return {
            "e_norm_sq": self.e_norm_sq,
            "e_bound": self.e_bound,
            "e_within_bound": self.e_norm_sq <= self.e_bound,
            "en_norm_sq": self.en_norm_sq,
            "w_err": self.w_err,
            "w_err_bound": self.w_err_bound,
            "w_err_bound_last_iterate": self.w_err_bound_last_iterate,
        }

    @property
    def w_err_bound_last_iterate(self) -> float | None:
        """Looser ``4 sqrt(<E_Q|E_Q>)`` form, from the last iterate alone."""
        return 4 * math.sqrt(self.en_norm_sq[-1]) if self.en_norm_sq else None


def residual_bound(P: int) -> float:
    """``4 (2 / (sqrt(3) P))**2``."""
    return 4 * (2 / (math.sqrt(3) * P)) ** 2


@dataclass(frozen=True)
class SubLoop:
    """An approximate phase oracle on the ``key`` register plus its ideal target.

    ``good`` lists which ``key`` values the ideal oracle flips; every other
    register must return to ``|0>`` in the ideal picture.
    """

    layout: sv.RegisterLayout
    op: sv.Operation
    good: np.ndarray
    precision: int
    key: str = "k"

    @property
    def n_good(self) -> int:
        return int(self.good.sum())

    @property
    def domain(self) -> int:
        return self.layout.dim(self.key)

    def flat_state(self) -> sv.QState:
        """``|psi0>``: flat over the key register, everything else ``|0>``."""
        state = sv.init_zero(self.layout)
        return sv.apply_dft(state, self.key)

    def basis_vector(self, mask: np.ndarray) -> np.ndarray:
        """Normalised ``sum_{key in mask} |key, 0, ...>`` as a flat vector."""
        vec = np.zeros(self.layout.size, dtype=np.complex128)
        keys = np.flatnonzero(mask)
        if len(keys):
            idx = [self.layout.index(**{self.key: int(k)}) for k in keys]
            vec[idx] = 1 / math.sqrt(len(keys))
        return vec

    def ideal_state(self) -> np.ndarray:
        """``|Psi> = sum (-1)^{good} |key, 0...> / sqrt(dim)``."""
        vec = np.zeros(self.layout.size, dtype=np.complex128)
        for k in range(self.domain):
            vec[self.layout.index(**{self.key: k})] = (-1 if self.good[k] else 1) / math.sqrt(self.domain)
        return vec

    def grover(self) -> sv.Operation:
        """``G~ = U_2 S~``, with ``U_2 = -F S_0 F^dagger`` on the key register."""
        return sv.Sequential((self.op, sv.Diffusion(self.key)))


def s_tilde_operator(N: int, P: int, witnesses: np.ndarray | None = None) -> sv.Operation:
    """``U_1^dagger S_0 U_1`` on registers ``(k, mP, a)``.

    ``U_1`` = F on mP, k-controlled ``F_k`` on a, mP-controlled ``G^m`` on a
    with the witness oracle of ``k``, F on mP.  The phase flip reads only the
    counting ancilla ``mP`` and is gated on ``k >= 2``.
    """
    table = ntcore.witness_table(N) if witnesses is None else np.asarray(witnesses, dtype=bool)
    dim = sv.ControlledDim("k", _branch_dim)
    compute = sv.Sequential((
        sv.DFT("mP"),
        sv.ControlledDFT("k", "a", _branch_dim),
        sv.ControlledGroverPower(("mP",), "a", dim, sv.PhasePredicate.table(("k", "a"), table)),
        sv.DFT("mP"),
    ))
    flip = sv.PhaseFlipZero(("mP",), sv.PhasePredicate(("k",), lambda k: k >= 2))
    return sv.Conjugated(compute, flip)


def sub_layout(N: int, P: int) -> sv.RegisterLayout:
    return sv.RegisterLayout([("k", N), ("mP", P), ("a", N)])


def prime_sub_loop(N: int, P: int, witnesses: np.ndarray | None = None, good: np.ndarray | None = None) -> SubLoop:
    """The prime oracle; ``witnesses``/``good`` override the tables for what-if runs."""
    if good is None:
        good = ntcore.prime_mask(N)
    return SubLoop(sub_layout(N, P), s_tilde_operator(N, P, witnesses), np.asarray(good, dtype=bool), P)


def apply_s_tilde(state: sv.QState, P: int | None = None) -> sv.QState:
    N = state.layout.dim("k")
    return state.apply(s_tilde_operator(N, P or state.layout.dim("mP")))


def apply_g_tilde(state: sv.QState) -> sv.QState:
    N, P = state.layout.dim("k"), state.layout.dim("mP")
    return state.apply(prime_sub_loop(N, P).grover())


def residual(sub: SubLoop) -> np.ndarray:
    """``|E> = S~|psi0> - |Psi>``."""
    out = sub.flat_state().apply(sub.op)
    return out.vector - sub.ideal_state()


def residual_norm_sq(sub: SubLoop) -> float:
    e = residual(sub)
    return float(np.vdot(e, e).real)


def s_tilde_error(N: int, P: int, witnesses=None, good=None) -> ErrorBudget:
    return ErrorBudget(residual_norm_sq(prime_sub_loop(N, P, witnesses, good)), residual_bound(P))


def grover_iterates(sub: SubLoop, n_max: int) -> list[sv.QState]:
    """``G~^n |psi0>`` for ``n = 0..n_max``."""
    g = sub.grover()
    states = [sub.flat_state()]
    for _ in range(n_max):
        states.append(states[-1].copy().apply(g))
    return states


def ideal_iterate(sub: SubLoop, n: int) -> np.ndarray:
    """``sin((2n+1) theta)|G> + cos((2n+1) theta)|B>``."""
    theta = math.asin(math.sqrt(sub.n_good / sub.domain))
    good_vec = sub.basis_vector(sub.good)
    bad_vec = sub.basis_vector(~sub.good)
    return math.sin((2 * n + 1) * theta) * good_vec + math.cos((2 * n + 1) * theta) * bad_vec


def iterate_errors(sub: SubLoop, iterates: list[sv.QState]) -> list[float]:
    out = []
    for n, state in enumerate(iterates):
        e = state.vector - ideal_iterate(sub, n)
        out.append(float(np.vdot(e, e).real))
    return out


def main_loop_state(sub: SubLoop, Q: int, iterates: list[sv.QState] | None = None) -> sv.QState:
    """``(F (x) I) sum_m |m>_Q G~^m |psi0> / sqrt(Q)``.

    With ``iterates`` given, the controlled power is assembled from the
    precomputed ``G~^m |psi0>`` (the control starts flat and the target is
    the same for every ``m``); otherwise it runs as a generic
    :class:`~qnt.statevec.ControlledPower`.
    """
    layout = sv.RegisterLayout([("mQ", Q)] + list(sub.layout.registers))
    if iterates is None:
        state = sv.QState(layout, np.multiply.outer(np.full(Q, 1 / math.sqrt(Q)), sub.flat_state().amps))
        state.apply(sv.ControlledPower("mQ", sub.grover()))
    else:
        amps = np.stack([iterates[m].amps for m in range(Q)]) / math.sqrt(Q)
        state = sv.QState(layout, amps)
    return state.apply(sv.DFT("mQ"))


def target_outcomes(f: float, Q: int) -> list[int]:
    """The four outcomes around ``f``: ``floor/ceil(f)`` and their mirrors."""
    lo, hi = math.floor(f), math.ceil(f)
    return sorted({lo % Q, hi % Q, (Q - lo) % Q, (Q - hi) % Q})


@dataclass
class CountingRun:
    """A prepared main-loop experiment: exact outcome law plus budgets."""

    sub: SubLoop
    Q: int
    probabilities: np.ndarray
    budget: ErrorBudget
    state: sv.QState = field(repr=False)

    @property
    def f_Q(self) -> float:
        return phase_fraction(self.sub.domain, self.sub.n_good, self.Q)

    @property
    def ansatz_ok(self) -> bool:
        return 1 < self.f_Q < self.Q / 2 - 1

    def success_probability(self) -> float:
        return float(self.probabilities[target_outcomes(self.f_Q, self.Q)].sum())

    def ideal_success_probability(self) -> float:
        ideal = predict_distribution(self.sub.domain, self.sub.n_good, self.Q, 1)
        return float(ideal[target_outcomes(self.f_Q, self.Q)].sum())

    def sample(self, seed: int, repetitions: int) -> list[int]:
        """One outcome per repetition; stream ``i`` is seeded by ``(seed, i)``."""
        return [sample_outcome(self.probabilities, np.random.default_rng([seed, i])) for i in range(repetitions)]

    def estimate(self, seed: int, repetitions: int) -> tuple[CountEstimate, CountEstimate, list[CountEstimate]]:
        outcomes = self.sample(seed, repetitions)
        singles = [estimate_from_outcome(o, self.Q, self.sub.domain) for o in outcomes]
        return interpolated_estimate(outcomes, self.Q, self.sub.domain), majority_estimate(singles), singles


def sample_outcome(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Same draw :func:`qnt.statevec.measure` makes from a marginal."""
    probs = probs / probs.sum()
    return int(rng.choice(len(probs), p=probs))


def prepare_counting(sub: SubLoop, Q: int) -> CountingRun:
    iterates = grover_iterates(sub, Q)
    e_norm_sq = residual_norm_sq(sub)
    en = iterate_errors(sub, iterates)
    state = main_loop_state(sub, Q, iterates)
    probs = sv.marginal_probabilities(state, "mQ")
    run = CountingRun(sub, Q, probs, ErrorBudget(e_norm_sq, residual_bound(sub.precision), en), state)
    run.budget.w_err = abs(run.ideal_success_probability() - run.success_probability())
    # Pre-measurement error vector has norm^2 = mean_m <E_m|E_m>, and a
    # projector's probability moves by at most 2 * that norm.
    run.budget.w_err_bound = 2 * math.sqrt(float(np.mean(en[:Q])))
    return run


@lru_cache(maxsize=16)
def prepare_pnt(N: int, P: int, Q: int) -> CountingRun:
    PntConfig(N, P, Q)
    return prepare_counting(prime_sub_loop(N, P), Q)


@dataclass
class PntResult:
    config: PntConfig
    estimate: CountEstimate
    majority: CountEstimate
    singles: list[CountEstimate]
    run: CountingRun

    @property
    def budget(self) -> ErrorBudget:
        return self.run.budget


def run_pnt(config: PntConfig) -> PntResult:
    run = prepare_pnt(config.N, config.P, config.Q)
    est, maj, singles = run.estimate(config.seed, config.repetitions)
    return PntResult(config, est, maj, singles, run)


def check_pnt(result: PntResult, delta: float | None = None) -> dict:
    """Compare the estimate with the sieve count and with ``N / ln N``."""
    cfg = result.config
    delta = cfg.delta if delta is None else delta
    N, Q = cfg.N, cfg.Q
    t_true, _ = ntcore.sieve_pi(N)
    est = result.estimate
    log_n = math.log(N)
    # Q = (ln N)**beta  =>  beta = ln Q / ln ln N
    beta = math.log(Q) / math.log(log_n)
    delta_exp = abs(est.t - t_true)
    bound_true = math.pi * N / Q * (math.pi / Q + 2 * math.sqrt(t_true / N))
    within = delta_exp <= est.error_bound
    beta_ok = beta > delta + 0.5
    run = result.run
    if not run.ansatz_ok:
        status = "ansatz_violated"
    else:
        status = "pass" if within and beta_ok else "fail"
    return {
        "t_est": est.t,
        "t_est_rounded": round(est.t),
        "t_true": t_true,
        "n_over_ln_n": N / log_n,
        "delta_t_exp": delta_exp,
        "delta_t_exp_bound": est.error_bound,
        "delta_t_exp_bound_true_t": bound_true,
        "delta_t_th": N * log_n ** (-delta - 1),
        "beta_effective": beta,
        "beta_condition": beta_ok,
        "f_Q": run.f_Q,
        "ansatz_ok": run.ansatz_ok,
        "within_error_bound": within,
        "status": status,
    }
