"""scikit-learn style front ends for the simulated pipelines.

Inputs are single columns of integers (``k`` to test, ``N`` to count
below, even ``2N`` to split), so the estimators slot into pipelines,
``cross_val_score`` and ``clone`` like any other.  None of them learns
anything from data: ``fit`` only validates and records the input width.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import hl, pnt, primality


def check_integer_column(X, *, min_value: int, even: bool = False, power_of_two: bool = False) -> np.ndarray:
    """Validate ``X`` as one column of integers and return it as a 1-d int array."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single feature column, got {X.shape[1]}")
    col = X[:, 0]
    if not np.all(np.equal(np.mod(col, 1), 0)):
        raise ValueError("inputs must be integers")
    col = col.astype(np.int64)
    if np.any(col < min_value):
        raise ValueError(f"inputs must be >= {min_value}")
    if even and np.any(col % 2):
        raise ValueError("inputs must be even")
    if power_of_two and np.any(col & (col - 1)):
        raise ValueError("inputs must be powers of two")
    return col


class QuantumPrimalityTest(ClassifierMixin, BaseEstimator):
    """Classify integers as probably prime (1) or certainly composite (0).

    ``predict_proba`` returns the exact outcome law of the simulated test:
    column 1 is the probability that every ancilla reads zero.
    """

    def __init__(self, P: int = 8, R: int = 1, random_state: int | None = None):
        self.P = P
        self.R = R
        self.random_state = random_state

    def fit(self, X, y=None):
        check_integer_column(X, min_value=2)
        primality.PrimalityConfig(2, self.P, self.R)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = 1
        return self

    def predict_proba(self, X):
        check_is_fitted(self)
        ks = check_integer_column(X, min_value=2)
        p_zero = np.array([primality.zero_probability(int(k), self.P, self.R) for k in ks])
        return np.column_stack([1 - p_zero, p_zero])

    def predict(self, X):
        check_is_fitted(self)
        ks = check_integer_column(X, min_value=2)
        seed = 0 if self.random_state is None else self.random_state
        out = []
        for i, k in enumerate(ks):
            res = primality.run_primality(primality.PrimalityConfig(int(k), self.P, self.R, seed + i))
            out.append(int(res.verdict is primality.Verdict.PROBABLY_PRIME))
        return np.array(out)


class _CountingRegressor(RegressorMixin, BaseEstimator):
    def __init__(self, P: int = 8, Q: int = 16, repetitions: int = 50, random_state: int | None = None):
        self.P = P
        self.Q = Q
        self.repetitions = repetitions
        self.random_state = random_state

    def _column(self, X):
        raise NotImplementedError

    def _estimate_config(self, value: int, seed: int = 0):
        raise NotImplementedError

    def _estimate(self, value: int, seed: int) -> float:
        raise NotImplementedError

    def fit(self, X, y=None):
        for value in self._column(X):
            self._estimate_config(int(value))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self)
        seed = 0 if self.random_state is None else self.random_state
        return np.array([self._estimate(int(v), seed + i) for i, v in enumerate(self._column(X))])


class QuantumPrimeCounter(_CountingRegressor):
    """Estimate ``pi(N)``, the number of primes below ``N`` (``N`` a power of two)."""

    def _column(self, X):
        return check_integer_column(X, min_value=8, power_of_two=True)

    def _estimate_config(self, N: int, seed: int = 0) -> pnt.PntConfig:
        return pnt.PntConfig(N, self.P, self.Q, self.repetitions, seed)

    def _estimate(self, N, seed):
        return pnt.run_pnt(self._estimate_config(N, seed)).estimate.t


class QuantumPairCounter(_CountingRegressor):
    """Estimate ``r_2(2N)``, the ordered prime-pair representations of even ``2N``."""

    def _column(self, X):
        return check_integer_column(X, min_value=8, even=True)

    def _estimate_config(self, two_n: int, seed: int = 0) -> hl.HlConfig:
        return hl.HlConfig(two_n, self.P, self.Q, self.repetitions, seed)

    def _estimate(self, two_n, seed):
        return hl.run_hl(self._estimate_config(two_n, seed)).estimate.t
