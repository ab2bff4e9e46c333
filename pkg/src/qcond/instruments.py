"""Instruments, bi-instruments, state updating and Holevo instruments.

An instrument is a labeled family of operations whose sum is a channel; it
measures an observable (duals applied to the identity) and updates states
outcome-by-outcome. Families may hold Kraus-form operations or tabulated
linear maps interchangeably; ``total_channel`` is the one surface that
insists on Kraus form.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Iterable, Sequence

import numpy as np

from .channels import Channel, Operation, QuantumMap, map_deviation, map_sum
from .effects import BiObservable, Effect, Observable, State
from .errors import InvariantViolation, OutcomeNotObserved
from .linalg import DEFAULT_ATOL, as_complex_matrix, clipped_eigh

__all__ = [
    "Instrument",
    "BiInstrument",
    "HolevoSpec",
    "given_observable",
    "given_distribution",
    "condition_instrument",
    "given_instrument",
    "holevo_operation",
    "holevo_instrument",
    "holevo_compose",
    "instrument_deviation",
    "bi_instrument_deviation",
]


def _check_uniform_dims(ops: Sequence[QuantumMap], kind: str) -> tuple[int, int]:
    dims = {(op.dim_in, op.dim_out) for op in ops}
    if len(dims) != 1:
        raise InvariantViolation(kind, "uniform dimensions", f"got {sorted(dims)}")
    return next(iter(dims))


@dataclass(frozen=True, eq=False)
class Instrument:
    """Labeled family of operations summing to a channel."""

    outcomes: tuple[str, ...]
    ops: tuple[QuantumMap, ...]
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        outcomes = tuple(str(x) for x in self.outcomes)
        ops = tuple(self.ops)
        if not outcomes or len(set(outcomes)) != len(outcomes):
            raise InvariantViolation("Instrument", "distinct outcome labels")
        if len(ops) != len(outcomes):
            raise InvariantViolation("Instrument", "one operation per outcome")
        _check_uniform_dims(ops, "Instrument")
        try:
            trace_preserving = map_sum(ops, atol).is_trace_preserving(atol)
        except InvariantViolation as exc:
            raise InvariantViolation("Instrument", "total channel", str(exc)) from None
        if not trace_preserving:
            raise InvariantViolation("Instrument", "total channel", "operations must sum to a channel")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "ops", ops)

    @property
    def dim_in(self) -> int:
        return self.ops[0].dim_in

    @property
    def dim_out(self) -> int:
        return self.ops[0].dim_out

    def index(self, label: str) -> int:
        try:
            return self.outcomes.index(label)
        except ValueError:
            raise ValueError(f"unknown outcome label {label!r}") from None

    def op(self, label: str) -> QuantumMap:
        return self.ops[self.index(label)]

    def total(self) -> QuantumMap:
        """The summed map (a channel, by the construction invariant)."""
        return map_sum(self.ops)

    def total_channel(self, atol: float = DEFAULT_ATOL) -> Channel:
        """The summed channel with concatenated Kraus lists.

        Only available when every operation is in Kraus form.
        """
        if not all(isinstance(op, Operation) for op in self.ops):
            raise TypeError("total_channel requires Kraus-form operations")
        kraus = np.concatenate([op.kraus_stack for op in self.ops])  # type: ignore[attr-defined]
        return Channel(kraus, atol)

    def measured_observable(self, atol: float = DEFAULT_ATOL) -> Observable:
        """The observable this instrument measures (duals at the identity)."""
        return Observable(self.outcomes, tuple(op.measured_effect(atol) for op in self.ops), atol)

    def outcome_probability(self, label: str, rho: State | np.ndarray) -> float:
        return float(np.trace(self.op(label).apply(rho)).real)

    def updated_state(self, label: str, rho: State | np.ndarray, atol: float = DEFAULT_ATOL) -> State:
        """Post-measurement state for an observed outcome, renormalized.

        Raises :class:`OutcomeNotObserved` when the outcome probability is
        within ``atol`` of zero.
        """
        out = self.op(label).apply(rho)
        prob = float(np.trace(out).real)
        if prob <= atol:
            raise OutcomeNotObserved(f"outcome {label!r} has probability {prob:.3e}")
        return State(out / prob, atol)

    def subset_probability(self, labels: Iterable[str], rho: State | np.ndarray) -> float:
        return float(sum(self.outcome_probability(x, rho) for x in dict.fromkeys(labels)))


@dataclass(frozen=True, eq=False)
class BiInstrument:
    """Instrument on a product outcome set, stored as an operations grid."""

    outcomes1: tuple[str, ...]
    outcomes2: tuple[str, ...]
    ops: tuple[tuple[QuantumMap, ...], ...]
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        o1 = tuple(str(x) for x in self.outcomes1)
        o2 = tuple(str(y) for y in self.outcomes2)
        if not o1 or len(set(o1)) != len(o1) or not o2 or len(set(o2)) != len(o2):
            raise InvariantViolation("BiInstrument", "distinct outcome labels")
        rows = tuple(tuple(row) for row in self.ops)
        if len(rows) != len(o1) or any(len(r) != len(o2) for r in rows):
            raise InvariantViolation("BiInstrument", "grid shape")
        flat = [op for row in rows for op in row]
        _check_uniform_dims(flat, "BiInstrument")
        try:
            trace_preserving = map_sum(flat, atol).is_trace_preserving(atol)
        except InvariantViolation as exc:
            raise InvariantViolation("BiInstrument", "total channel", str(exc)) from None
        if not trace_preserving:
            raise InvariantViolation("BiInstrument", "total channel")
        object.__setattr__(self, "outcomes1", o1)
        object.__setattr__(self, "outcomes2", o2)
        object.__setattr__(self, "ops", rows)

    @property
    def dim_in(self) -> int:
        return self.ops[0][0].dim_in

    @property
    def dim_out(self) -> int:
        return self.ops[0][0].dim_out

    def op(self, x: str, y: str) -> QuantumMap:
        try:
            i = self.outcomes1.index(x)
            j = self.outcomes2.index(y)
        except ValueError:
            raise ValueError(f"unknown outcome pair ({x!r}, {y!r})") from None
        return self.ops[i][j]

    def total(self) -> QuantumMap:
        return map_sum([op for row in self.ops for op in row])

    def marginal1(self, atol: float = DEFAULT_ATOL) -> Instrument:
        """Sum out the second outcome index."""
        return Instrument(self.outcomes1, tuple(map_sum(row, atol) for row in self.ops), atol)

    def marginal2(self, atol: float = DEFAULT_ATOL) -> Instrument:
        """Sum out the first outcome index."""
        cols = tuple(
            map_sum([self.ops[i][j] for i in range(len(self.outcomes1))], atol)
            for j in range(len(self.outcomes2))
        )
        return Instrument(self.outcomes2, cols, atol)


def given_observable(obs: Observable, ins: Instrument, atol: float = DEFAULT_ATOL) -> BiObservable:
    """The joint bi-observable of measuring ``ins`` and then ``obs``.

    Grid entry ``(x, y)`` is the dual of the ``x``-operation applied to the
    ``y``-effect. Its first marginal is the observable measured by ``ins``
    and its second is ``obs`` conditioned by the total channel.
    """
    if obs.dim != ins.dim_out:
        raise ValueError(f"dimension mismatch: observable {obs.dim} vs instrument output {ins.dim_out}")
    grid = tuple(
        tuple(op.dual_apply(e, atol) for e in obs.effects) for op in ins.ops
    )
    return BiObservable(ins.outcomes, obs.outcomes, grid, atol)


def given_distribution(
    obs: Observable,
    ins: Instrument,
    rho: State,
    subset1: Iterable[str],
    subset2: Iterable[str],
    atol: float = DEFAULT_ATOL,
) -> float:
    """Joint probability of a product outcome set, in factored form.

    Computes ``tr[I(subset1)(rho)]`` times the distribution of ``obs`` in the
    updated state; when the first factor is within ``atol`` of zero the
    factored form is bypassed and the value is 0. Equals the double sum
    ``sum_{x, y} tr[I_x(rho) B_y]`` over the product set.
    """
    labels1 = tuple(dict.fromkeys(subset1))
    labels2 = tuple(dict.fromkeys(subset2))
    for x in labels1:
        ins.index(x)
    for y in labels2:
        obs.index(y)
    if not labels1 or not labels2:
        return 0.0
    sigma = sum(ins.op(x).apply(rho) for x in labels1)
    prob1 = float(np.trace(sigma).real)
    if prob1 <= atol:
        return 0.0
    updated = sigma / prob1
    inner = sum(float(np.trace(updated @ obs.effect(y).matrix).real) for y in labels2)
    return prob1 * inner


def condition_instrument(ch: QuantumMap, ins: Instrument, atol: float = DEFAULT_ATOL) -> Instrument:
    """Pre-compose every operation of ``ins`` with the channel ``ch``."""
    if not ch.is_trace_preserving(atol):
        raise InvariantViolation("conditioning", "channel", "map must be trace preserving")
    if ch.dim_out != ins.dim_in:
        raise ValueError(f"dimension mismatch: channel output {ch.dim_out} vs instrument input {ins.dim_in}")
    return Instrument(ins.outcomes, tuple(ch.then(op) for op in ins.ops), atol)


def given_instrument(ins: Instrument, jns: Instrument, atol: float = DEFAULT_ATOL) -> BiInstrument:
    """The joint bi-instrument of running ``ins`` first, then ``jns``."""
    if ins.dim_out != jns.dim_in:
        raise ValueError(f"dimension mismatch: {ins.dim_out} -> {jns.dim_in}")
    grid = tuple(tuple(iop.then(jop) for jop in jns.ops) for iop in ins.ops)
    return BiInstrument(ins.outcomes, jns.outcomes, grid, atol)


@dataclass(frozen=True, eq=False)
class HolevoSpec:
    """Data of a measure-and-prepare instrument: an observable plus one
    prepared state per outcome."""

    observable: Observable
    states: tuple[State, ...]
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        states = tuple(s if isinstance(s, State) else State(s, atol) for s in self.states)
        if len(states) != self.observable.n_outcomes:
            raise InvariantViolation("HolevoSpec", "one state per outcome")
        if len({s.dim for s in states}) != 1:
            raise InvariantViolation("HolevoSpec", "uniform state dimension")
        object.__setattr__(self, "states", states)

    @property
    def dim_in(self) -> int:
        return self.observable.dim

    @property
    def dim_out(self) -> int:
        return self.states[0].dim

    def state(self, label: str) -> State:
        return self.states[self.observable.index(label)]


def holevo_operation(
    effect: Effect | np.ndarray, state: State | np.ndarray, atol: float = DEFAULT_ATOL
) -> Operation:
    """Kraus form of the measure-and-prepare map ``rho -> tr(rho e) sigma``.

    With spectral decompositions ``e = sum_j a_j |u_j><u_j|`` and
    ``sigma = sum_k p_k |v_k><v_k|`` the Kraus operators are
    ``sqrt(a_j p_k) |v_k><u_j|``, which reproduces the map exactly.
    """
    e = as_complex_matrix(effect)
    s = as_complex_matrix(state)
    evals, evecs = clipped_eigh(e, atol, "effect")
    pvals, pvecs = clipped_eigh(s, atol, "state")
    kraus = [
        np.sqrt(a * p) * np.outer(pvecs[:, k], evecs[:, j].conj())
        for j, a in enumerate(evals)
        if a > 0.0
        for k, p in enumerate(pvals)
        if p > 0.0
    ]
    if not kraus:
        kraus = [np.zeros((s.shape[0], e.shape[0]), dtype=complex)]
    return Operation(kraus, atol)


def holevo_instrument(spec: HolevoSpec, atol: float = DEFAULT_ATOL) -> Instrument:
    """The measure-and-prepare instrument of the given data: outcome ``x``
    acts as ``rho -> tr(rho A_x) alpha_x``."""
    ops = tuple(
        holevo_operation(e, s, atol) for e, s in zip(spec.observable.effects, spec.states)
    )
    return Instrument(spec.observable.outcomes, ops, atol)


def holevo_compose(second: HolevoSpec, first: HolevoSpec, atol: float = DEFAULT_ATOL) -> BiInstrument:
    """Joint bi-instrument of two measure-and-prepare stages, in closed form.

    ``first`` runs first. The grid entry ``(x, y)`` is again a
    measure-and-prepare map with effect ``tr(alpha_x B_y) A_x`` and prepared
    state ``beta_y``, so the result equals
    ``given_instrument(holevo_instrument(first), holevo_instrument(second))``
    without composing any Kraus lists.
    """
    if first.dim_out != second.dim_in:
        raise ValueError(f"dimension mismatch: {first.dim_out} -> {second.dim_in}")
    a_obs = first.observable
    b_obs = second.observable
    grid = []
    for x, ax in zip(a_obs.outcomes, a_obs.effects):
        alpha = first.state(x)
        row = []
        for y, by in zip(b_obs.outcomes, b_obs.effects):
            coeff = float(np.trace(alpha.matrix @ by.matrix).real)
            row.append(holevo_operation(coeff * ax.matrix, second.state(y), atol))
        grid.append(tuple(row))
    return BiInstrument(a_obs.outcomes, b_obs.outcomes, tuple(grid), atol)


def instrument_deviation(a: Instrument, b: Instrument) -> float:
    """Largest map deviation between two instruments on equal outcomes."""
    if a.outcomes != b.outcomes:
        raise ValueError("instruments must share the same ordered outcome labels")
    return max(map_deviation(x, y) for x, y in zip(a.ops, b.ops))


def bi_instrument_deviation(a: BiInstrument, b: BiInstrument) -> float:
    """Largest map deviation between two bi-instruments on equal grids."""
    if a.outcomes1 != b.outcomes1 or a.outcomes2 != b.outcomes2:
        raise ValueError("bi-instruments must share the same ordered outcome labels")
    return max(
        map_deviation(x, y)
        for row_a, row_b in zip(a.ops, b.ops)
        for x, y in zip(row_a, row_b)
    )
