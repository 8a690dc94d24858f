"""Exact state-vector simulation of quantum witness counting, prime counting
and prime-pair counting, checked against classical ground truth."""

from .counting import CountEstimate, estimate_from_outcome, majority_estimate, predict_distribution
from .estimators import QuantumPairCounter, QuantumPrimalityTest, QuantumPrimeCounter
from .hl import HlConfig, run_hl
from .ntcore import count_witnesses, r2_pairs, sieve_pi, witness
from .pnt import PntConfig, check_pnt, run_pnt
from .primality import PrimalityConfig, run_primality
from .statevec import QState, RegisterLayout, SimulationCapError

__version__ = "0.1.0"

__all__ = [
    "CountEstimate",
    "HlConfig",
    "PntConfig",
    "PrimalityConfig",
    "QState",
    "QuantumPairCounter",
    "QuantumPrimalityTest",
    "QuantumPrimeCounter",
    "RegisterLayout",
    "SimulationCapError",
    "check_pnt",
    "count_witnesses",
    "estimate_from_outcome",
    "majority_estimate",
    "predict_distribution",
    "r2_pairs",
    "run_hl",
    "run_pnt",
    "run_primality",
    "sieve_pi",
    "witness",
]
