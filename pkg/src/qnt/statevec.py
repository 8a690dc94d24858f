"""Dense state-vector simulation over registers of arbitrary dimension.

A :class:`QState` holds one complex amplitude per joint basis state of a
:class:`RegisterLayout`, stored as an ndarray with one axis per register.
Unitaries are small operation objects (:class:`DFT`, :class:`GroverStep`,
...) that know how to act on such an array and how to build their own
adjoint, so a recorded sequence can be undone with :func:`run_adjoint`.

Effective dimensions: most operations may act on a leading block
``[0, d)`` of a register only, with ``d`` either fixed or read off another
register's value (:class:`ControlledDim`).  Basis values ``>= d`` are left
untouched, so each branch is the direct sum ``U_d (+) I``.
"""
from __future__ import annotations

import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, Union

import numpy as np

HARD_MAX_DIM = 1 << 24
NORM_ATOL = 1e-12


class SimulationCapError(RuntimeError):
    """Requested state would exceed the dense dimension cap."""


def max_dim() -> int:
    """Current dimension cap; ``QNT_MAX_DIM`` may lower it, never raise it past 2**24."""
    raw = os.environ.get("QNT_MAX_DIM")
    if raw is None:
        return HARD_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"QNT_MAX_DIM must be an integer, got {raw!r}") from None
    if not 1 <= value <= HARD_MAX_DIM:
        raise ValueError(f"QNT_MAX_DIM must lie in [1, {HARD_MAX_DIM}], got {value}")
    return value


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]

    def __init__(self, registers: Sequence[tuple[str, int]]):
        regs = tuple((str(name), int(dim)) for name, dim in registers)
        names = [name for name, _ in regs]
        if not regs:
            raise ValueError("layout needs at least one register")
        if len(set(names)) != len(names):
            raise ValueError(f"register names must be unique: {names}")
        for name, dim in regs:
            if dim < 1:
                raise ValueError(f"register {name!r} has dimension {dim} < 1")
        object.__setattr__(self, "registers", regs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.registers)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no register named {name!r} in {self.names}") from None

    def dim(self, name: str) -> int:
        return self.registers[self.axis(name)][1]

    def index(self, **values: int) -> int:
        """Flat index of a basis state; unspecified registers are 0."""
        unknown = set(values) - set(self.names)
        if unknown:
            raise KeyError(f"unknown registers {sorted(unknown)}")
        idx = tuple(values.get(name, 0) for name in self.names)
        return int(np.ravel_multi_index(idx, self.shape))


def register_values(layout: RegisterLayout, name: str, shape: tuple[int, ...] | None = None) -> np.ndarray:
    """Basis values of one register, shaped to broadcast against the amplitudes.

    ``shape`` is the actual array shape when an operation runs on a slice
    of the state (a controlled power hands sub-arrays to its inner op).
    """
    ax = layout.axis(name)
    n = (shape or layout.shape)[ax]
    out = [1] * len(layout.shape)
    out[ax] = n
    start = 0
    if shape is not None and n != layout.shape[ax]:
        start = layout.shape[ax] - n
    return np.arange(start, start + n).reshape(out)


class QState:
    """Complex amplitudes over a register layout."""

    def __init__(self, layout: RegisterLayout, amps: np.ndarray | None = None):
        if layout.size > max_dim():
            raise SimulationCapError(
                f"total dimension {layout.size} exceeds cap {max_dim()} (QNT_MAX_DIM)"
            )
        self.layout = layout
        if amps is None:
            amps = np.zeros(layout.shape, dtype=np.complex128)
            amps.flat[0] = 1.0
        else:
            amps = np.asarray(amps, dtype=np.complex128).reshape(layout.shape)
        self.amps = amps
        self._tape: Tape | None = None

    @property
    def vector(self) -> np.ndarray:
        return self.amps.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def copy(self) -> "QState":
        return QState(self.layout, self.amps.copy())

    def apply(self, op: "Operation") -> "QState":
        self.amps = op.act(self.amps, self.layout)
        if self._tape is not None:
            self._tape.ops.append(op)
        return self

    def inner(self, other: "QState") -> complex:
        return complex(np.vdot(self.vector, other.vector))

    def amplitude(self, **values: int) -> complex:
        return complex(self.vector[self.layout.index(**values)])

    @contextmanager
    def record(self) -> Iterator["Tape"]:
        """Record every operation applied inside the block, for :func:`run_adjoint`."""
        if self._tape is not None:
            raise RuntimeError("state is already recording")
        tape = Tape()
        self._tape = tape
        try:
            yield tape
        finally:
            self._tape = None

    def to_json(self, threshold: float = 0.0) -> str:
        return json.dumps(dump_state(self, threshold), sort_keys=True)


@dataclass
class Tape:
    ops: list = field(default_factory=list)


class _MeasurementMarker:
    def __repr__(self) -> str:
        return "Measurement()"


def init_zero(layout: RegisterLayout | Sequence[tuple[str, int]]) -> QState:
    if not isinstance(layout, RegisterLayout):
        layout = RegisterLayout(layout)
    return QState(layout)


# --------------------------------------------------------------- operations


@dataclass(frozen=True)
class ControlledDim:
    """Effective dimension read off another register: ``d = fn(value)``."""

    register: str
    fn: Callable[[np.ndarray], np.ndarray]


DimSpec = Union[int, ControlledDim]


def _resolve_dim(dim: DimSpec, layout: RegisterLayout, shape, target: str) -> np.ndarray:
    tdim = layout.dim(target)
    if isinstance(dim, ControlledDim):
        d = np.asarray(dim.fn(register_values(layout, dim.register, shape)), dtype=np.int64)
    else:
        d = np.asarray(int(dim), dtype=np.int64)
    if np.any(d < 1) or np.any(d > tdim):
        raise ValueError(f"effective dimension must lie in [1, {tdim}] for register {target!r}")
    return d


class Operation:
    def act(self, amps: np.ndarray, layout: RegisterLayout) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self) -> "Operation":
        raise NotImplementedError


def dft_matrix(d: int, inverse: bool = False) -> np.ndarray:
    sign = -1.0 if inverse else 1.0
    idx = np.arange(d)
    return np.exp(sign * 2j * np.pi * np.outer(idx, idx) / d) / np.sqrt(d)


def _dft_along(amps: np.ndarray, ax: int, d: int, inverse: bool) -> None:
    if d == 1:
        return
    view = np.moveaxis(amps, ax, -1)
    view[..., :d] = view[..., :d] @ dft_matrix(d, inverse)


@dataclass(frozen=True)
class DFT(Operation):
    """``F_d`` on the block ``[0, d)`` of one register."""

    register: str
    dim: int | None = None
    inverse: bool = False

    def act(self, amps, layout):
        d = layout.dim(self.register) if self.dim is None else self.dim
        if not 1 <= d <= layout.dim(self.register):
            raise ValueError(f"effective_dim {d} exceeds register {self.register!r}")
        _dft_along(amps, layout.axis(self.register), d, self.inverse)
        return amps

    def adjoint(self):
        return DFT(self.register, self.dim, not self.inverse)


@dataclass(frozen=True)
class ControlledDFT(Operation):
    """On each branch ``c`` of ``control`` apply ``F_{dim_of(c)}`` to ``target``."""

    control: str
    target: str
    dim_of: Callable[[np.ndarray], np.ndarray]
    inverse: bool = False

    def act(self, amps, layout):
        cax, tax = layout.axis(self.control), layout.axis(self.target)
        n = amps.shape[cax]
        values = register_values(layout, self.control, amps.shape).reshape(-1)
        dims = np.asarray(self.dim_of(values), dtype=np.int64).reshape(-1)
        tdim = layout.dim(self.target)
        if np.any(dims < 1) or np.any(dims > tdim):
            raise ValueError(f"controlled dimension outside [1, {tdim}]")
        index = [slice(None)] * amps.ndim
        for d in np.unique(dims):
            if d == 1:
                continue
            sel = np.flatnonzero(dims == d)
            index[cax] = sel if len(sel) < n else slice(None)
            block = amps[tuple(index)]
            _dft_along(block, tax, int(d), self.inverse)
            amps[tuple(index)] = block
        return amps

    def adjoint(self):
        return ControlledDFT(self.control, self.target, self.dim_of, not self.inverse)


Predicate = Callable[..., np.ndarray]


@dataclass(frozen=True)
class PhasePredicate:
    """Pure predicate over the basis values of ``registers``.

    ``fn`` receives one broadcastable integer array per register and must
    return a boolean array (numpy-vectorised, no side effects).
    """

    registers: tuple[str, ...]
    fn: Predicate

    def mask(self, layout: RegisterLayout, shape=None) -> np.ndarray:
        args = [register_values(layout, name, shape) for name in self.registers]
        return np.asarray(self.fn(*args), dtype=bool)

    @classmethod
    def table(cls, registers: Sequence[str], table: np.ndarray) -> "PhasePredicate":
        """Predicate given as a lookup table indexed by the register values."""
        table = np.asarray(table, dtype=bool)
        return cls(tuple(registers), lambda *vals: table[vals])


@dataclass(frozen=True)
class PhaseFlipZero(Operation):
    """``S_0``: negate basis states with all ``registers`` at 0.

    ``gate`` optionally restricts the flip to branches where another
    predicate holds (e.g. ``k >= 2``).
    """

    registers: tuple[str, ...]
    gate: PhasePredicate | None = None

    def act(self, amps, layout):
        mask = np.ones((1,) * amps.ndim, dtype=bool)
        for name in self.registers:
            mask = mask & (register_values(layout, name, amps.shape) == 0)
        if self.gate is not None:
            mask = mask & self.gate.mask(layout, amps.shape)
        return np.where(mask, -amps, amps)

    def adjoint(self):
        return self


@dataclass(frozen=True)
class PhaseOracle(Operation):
    """``S_1``: ``amp(x) -> (-1)**predicate(x) * amp(x)``."""

    predicate: PhasePredicate

    def act(self, amps, layout):
        return np.where(self.predicate.mask(layout, amps.shape), -amps, amps)

    def adjoint(self):
        return self


@dataclass(frozen=True)
class GlobalPhase(Operation):
    phase: complex

    def act(self, amps, layout):
        amps *= self.phase
        return amps

    def adjoint(self):
        return GlobalPhase(np.conj(self.phase))


def _domain_mask(layout, shape, target: str, d: np.ndarray) -> np.ndarray:
    return register_values(layout, target, shape) < d


def _diffuse(amps, layout, target, d):
    """``2|u><u| - I`` on ``[0, d)`` of ``target`` (u flat), identity above."""
    ax = layout.axis(target)
    inside = _domain_mask(layout, amps.shape, target, d)
    mean = np.sum(np.where(inside, amps, 0), axis=ax, keepdims=True) / d
    return np.where(inside, 2 * mean - amps, amps)


@dataclass(frozen=True)
class Diffusion(Operation):
    """``-F_d S_0 F_d^dagger`` on ``target``: inversion about the flat state."""

    target: str
    dim: DimSpec | None = None

    def act(self, amps, layout):
        d = _resolve_dim(self.dim if self.dim is not None else layout.dim(self.target), layout, amps.shape, self.target)
        return _diffuse(amps, layout, self.target, d)

    def adjoint(self):
        return self


@dataclass(frozen=True)
class GroverStep(Operation):
    """One Grover iterate ``G = -F S_0 F^dagger S_1`` on the block ``[0, d)``.

    The predicate is only consulted inside the block.  The adjoint applies
    the (self-adjoint) diffusion first and the oracle second.
    """

    target: str
    dim: DimSpec
    predicate: PhasePredicate
    inverse: bool = False

    def _parts(self, amps, layout):
        d = _resolve_dim(self.dim, layout, amps.shape, self.target)
        marked = self.predicate.mask(layout, amps.shape) & _domain_mask(layout, amps.shape, self.target, d)
        return d, marked

    def act(self, amps, layout):
        d, marked = self._parts(amps, layout)
        return _grover(amps, layout, self.target, d, marked, self.inverse)

    def adjoint(self):
        return GroverStep(self.target, self.dim, self.predicate, not self.inverse)


def _grover(amps, layout, target, d, marked, inverse):
    if inverse:
        amps = _diffuse(amps, layout, target, d)
        return np.where(marked, -amps, amps)
    amps = np.where(marked, -amps, amps)
    return _diffuse(amps, layout, target, d)


@dataclass(frozen=True)
class ControlledGroverPower(Operation):
    """Apply ``G**(m_1 + ... + m_R)`` to ``target``, ``m_i`` read from ``controls``."""

    controls: tuple[str, ...]
    target: str
    dim: DimSpec
    predicate: PhasePredicate
    inverse: bool = False

    def act(self, amps, layout):
        step = GroverStep(self.target, self.dim, self.predicate, self.inverse)
        d, marked = step._parts(amps, layout)
        power = np.zeros((1,) * amps.ndim, dtype=np.int64)
        for name in self.controls:
            power = power + register_values(layout, name, amps.shape)
        for j in range(1, int(power.max()) + 1):
            active = power >= j
            amps = np.where(active, _grover(amps, layout, self.target, d, marked, self.inverse), amps)
        return amps

    def adjoint(self):
        return ControlledGroverPower(self.controls, self.target, self.dim, self.predicate, not self.inverse)


@dataclass(frozen=True)
class ControlledPower(Operation):
    """``|m><m| (x) U**m`` for an arbitrary operation ``U`` not touching ``control``."""

    control: str
    op: Operation

    def act(self, amps, layout):
        ax = layout.axis(self.control)
        index = [slice(None)] * amps.ndim
        for j in range(1, amps.shape[ax]):
            index[ax] = slice(j, None)
            sub = np.ascontiguousarray(amps[tuple(index)])
            amps[tuple(index)] = self.op.act(sub, layout)
        return amps

    def adjoint(self):
        return ControlledPower(self.control, self.op.adjoint())


@dataclass(frozen=True)
class Sequential(Operation):
    """Operations applied left to right."""

    ops: tuple[Operation, ...]

    def act(self, amps, layout):
        for op in self.ops:
            amps = op.act(amps, layout)
        return amps

    def adjoint(self):
        return Sequential(tuple(op.adjoint() for op in reversed(self.ops)))


@dataclass(frozen=True)
class Conjugated(Operation):
    """``U^dagger V U``: compute, act in the middle, uncompute."""

    compute: Operation
    middle: Operation

    def act(self, amps, layout):
        amps = self.compute.act(amps, layout)
        amps = self.middle.act(amps, layout)
        return self.compute.adjoint().act(amps, layout)

    def adjoint(self):
        return Conjugated(self.compute, self.middle.adjoint())


# ------------------------------------------------------- functional surface


def apply_dft(state: QState, register: str, effective_dim: int | None = None, direction: str = "forward") -> QState:
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    d = state.layout.dim(register) if effective_dim is None else effective_dim
    if d > state.layout.dim(register) or d < 1:
        raise ValueError(f"effective_dim {d} outside [1, {state.layout.dim(register)}]")
    return state.apply(DFT(register, d, direction == "inverse"))


def apply_controlled_dft(state: QState, control_register: str, target_register: str, dim_of, direction: str = "forward") -> QState:
    return state.apply(ControlledDFT(control_register, target_register, dim_of, direction == "inverse"))


def apply_s0(state: QState, registers: Sequence[str], gate: PhasePredicate | None = None) -> QState:
    return state.apply(PhaseFlipZero(tuple(registers), gate))


def apply_s1(state: QState, predicate: PhasePredicate) -> QState:
    return state.apply(PhaseOracle(predicate))


def grover_step(state: QState, target_register: str, effective_dim: DimSpec, predicate: PhasePredicate) -> QState:
    return state.apply(GroverStep(target_register, effective_dim, predicate))


def apply_controlled_grover_power(state: QState, control_registers: Sequence[str], target_register: str, effective_dim: DimSpec, predicate: PhasePredicate) -> QState:
    return state.apply(ControlledGroverPower(tuple(control_registers), target_register, effective_dim, predicate))


def marginal_probabilities(state: QState, register: str | Sequence[str]) -> np.ndarray:
    """Born-rule marginal over one register (or a joint tuple of registers)."""
    names = (register,) if isinstance(register, str) else tuple(register)
    axes = [state.layout.axis(n) for n in names]
    probs = np.abs(state.amps) ** 2
    other = tuple(i for i in range(probs.ndim) if i not in axes)
    marginal = probs.sum(axis=other)
    # Keep the caller's register order.
    order = np.argsort(np.argsort(axes))
    return np.transpose(marginal, order) if len(axes) > 1 else marginal


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def measure(state: QState, register: str, rng_seed=None) -> tuple[int, QState]:
    """Sample ``register`` by the Born rule and return the collapsed copy.

    The input state is left untouched; a recording tape gets a marker so
    that :func:`run_adjoint` refuses the sequence.
    """
    probs = marginal_probabilities(state, register)
    probs = probs / probs.sum()
    outcome = int(make_rng(rng_seed).choice(len(probs), p=probs))
    if state._tape is not None:
        state._tape.ops.append(_MeasurementMarker())
    ax = state.layout.axis(register)
    collapsed = np.zeros_like(state.amps)
    index = [slice(None)] * state.amps.ndim
    index[ax] = outcome
    collapsed[tuple(index)] = state.amps[tuple(index)]
    collapsed /= np.sqrt(probs[outcome])
    return outcome, QState(state.layout, collapsed)


def run_adjoint(state: QState, tape: Tape | Sequence[Operation]) -> QState:
    """Undo a recorded sequence: adjoints in reverse order."""
    ops = tape.ops if isinstance(tape, Tape) else list(tape)
    if any(isinstance(op, _MeasurementMarker) for op in ops):
        raise ValueError("cannot run the adjoint of a sequence containing measurements")
    for op in reversed(ops):
        state.apply(op.adjoint())
    return state


def dump_state(state: QState, threshold: float = 0.0) -> dict:
    """JSON-ready dump: layout plus ``[index, re, im]`` for ``|amp|**2 > threshold``."""
    vec = state.vector
    keep = np.flatnonzero(np.abs(vec) ** 2 > threshold)
    return {
        "layout": [[name, dim] for name, dim in state.layout.registers],
        "threshold": threshold,
        "amplitudes": [[int(i), float(vec[i].real), float(vec[i].imag)] for i in keep],
    }
