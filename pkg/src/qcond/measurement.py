"""Measurement models and their separable fast paths.

A measurement model couples a base system to a probe through an interaction
instrument into the tensor product (base left, probe right), then reads a
probe observable. Everything measurable about the model is extracted by
partial trace over the probe factor.

The generic extraction produces tabulated linear maps (no Kraus lists are
ever needed for them). The Kraus-separable and Holevo-separable classes
provide closed-form shortcuts as *separate* code paths; their agreement
with the generic pipeline is a test target, not an internal substitution.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .channels import Channel, LinearMap, Operation, QuantumMap
from .effects import BiObservable, Effect, Observable, State
from .errors import InvariantViolation
from .instruments import BiInstrument, HolevoSpec, Instrument, holevo_instrument, holevo_operation
from .linalg import DEFAULT_ATOL, as_complex_matrix, clipped_eigh, frozen_copy, kron, max_abs_diff

__all__ = [
    "MeasurementModel",
    "KrausSeparableChannel",
    "HolevoSeparableSpec",
    "HolevoModelQuantities",
    "holevo_model_quantities",
]


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Base dimension, probe dimension, interaction instrument into
    base ⊗ probe, and a probe observable."""

    dim_base: int
    dim_probe: int
    interaction: Instrument
    probe: Observable

    def __post_init__(self):
        if self.interaction.dim_in != self.dim_base:
            raise InvariantViolation("MeasurementModel", "interaction input dimension")
        if self.interaction.dim_out != self.dim_base * self.dim_probe:
            raise InvariantViolation(
                "MeasurementModel", "interaction output dimension",
                f"expected {self.dim_base * self.dim_probe}, got {self.interaction.dim_out}",
            )
        if self.probe.dim != self.dim_probe:
            raise InvariantViolation("MeasurementModel", "probe dimension")

    def _readout(self, op: QuantumMap, probe_effect: Effect) -> LinearMap:
        # superoperator of m -> tr_probe[op(m) @ (I ⊗ P)]: with row-major
        # vectorization, right multiplication is I ⊗ liftedᵀ
        d = self.dim_base * self.dim_probe
        lifted = kron(np.eye(self.dim_base), probe_effect.matrix)
        right_mult = np.kron(np.eye(d), lifted.T)
        s = _partial_trace_superop(self.dim_base, self.dim_probe) @ right_mult @ op.superoperator()
        return LinearMap(s, self.dim_base, self.dim_base)

    def measured_bi_instrument(self, atol: float = DEFAULT_ATOL) -> BiInstrument:
        """Joint outcome grid: interact, project on a probe effect, trace out
        the probe. Entry ``(x, y)`` maps ``rho`` to
        ``tr_probe[I_x(rho) (I ⊗ P_y)]``."""
        grid = tuple(
            tuple(self._readout(op, p) for p in self.probe.effects)
            for op in self.interaction.ops
        )
        return BiInstrument(self.interaction.outcomes, self.probe.outcomes, grid, atol)

    def measured_instrument(self, atol: float = DEFAULT_ATOL) -> Instrument:
        """The probe-indexed instrument the model realizes on the base space
        (the second marginal of the measured bi-instrument)."""
        total = self.interaction.total()
        ops = tuple(self._readout(total, p) for p in self.probe.effects)
        return Instrument(self.probe.outcomes, ops, atol)

    def reduced_instrument(self, atol: float = DEFAULT_ATOL) -> Instrument:
        """The interaction reduced to the base space (first marginal);
        independent of the probe observable."""
        eye = Effect.identity(self.dim_probe)
        ops = tuple(self._readout(op, eye) for op in self.interaction.ops)
        return Instrument(self.interaction.outcomes, ops, atol)

    def measured_bi_observable(self, atol: float = DEFAULT_ATOL) -> BiObservable:
        """Joint observable of interaction outcome and probe outcome: entry
        ``(x, y)`` is the dual of the ``x``-operation at ``I ⊗ P_y``."""
        eye = np.eye(self.dim_base)
        grid = tuple(
            tuple(op.dual_apply(kron(eye, p.matrix), atol) for p in self.probe.effects)
            for op in self.interaction.ops
        )
        return BiObservable(self.interaction.outcomes, self.probe.outcomes, grid, atol)

    def measured_pointer_observable(self, atol: float = DEFAULT_ATOL) -> Observable:
        """The probe-indexed observable the model measures on the base space
        (second marginal of the measured bi-observable)."""
        return self.measured_bi_observable(atol).marginal2(atol)


def _real_overlap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.trace(a @ b).real)


@lru_cache(maxsize=None)
def _partial_trace_superop(dim_left: int, dim_right: int) -> np.ndarray:
    """Superoperator of the right partial trace, row-major vectorization."""
    d = dim_left * dim_right
    p = np.zeros((dim_left * dim_left, d * d), dtype=complex)
    for i in range(dim_left):
        for j in range(dim_left):
            for k in range(dim_right):
                p[i * dim_left + j, (i * dim_right + k) * d + (j * dim_right + k)] = 1.0
    p.setflags(write=False)
    return p


@dataclass(frozen=True, eq=False)
class KrausSeparableChannel:
    """Channel into base ⊗ probe of the form
    ``rho -> sum_i (K_i rho K_i† ⊗ rho_i)`` with ``sum K_i†K_i = I``.

    ``factors`` act on the base space; ``probe_states`` live on the probe.
    """

    factors: tuple[np.ndarray, ...]
    probe_states: tuple[State, ...]
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        ks = tuple(as_complex_matrix(k) for k in self.factors)
        states = tuple(s if isinstance(s, State) else State(s, atol) for s in self.probe_states)
        if not ks or len(ks) != len(states):
            raise InvariantViolation("KrausSeparableChannel", "one probe state per factor")
        if len({k.shape for k in ks}) != 1 or ks[0].shape[0] != ks[0].shape[1]:
            raise InvariantViolation("KrausSeparableChannel", "square factors of equal dimension")
        if len({s.dim for s in states}) != 1:
            raise InvariantViolation("KrausSeparableChannel", "uniform probe dimension")
        gram = sum(k.conj().T @ k for k in ks)
        if max_abs_diff(gram, np.eye(ks[0].shape[0])) > atol:
            raise InvariantViolation("KrausSeparableChannel", "normalization", "sum K†K must equal I")
        object.__setattr__(self, "factors", tuple(frozen_copy(k) for k in ks))
        object.__setattr__(self, "probe_states", states)

    @property
    def dim_base(self) -> int:
        return self.factors[0].shape[0]

    @property
    def dim_probe(self) -> int:
        return self.probe_states[0].dim

    @classmethod
    def simple(
        cls,
        operators: Sequence[np.ndarray],
        probe_vectors: Sequence[Sequence[complex]],
        atol: float = DEFAULT_ATOL,
    ) -> "KrausSeparableChannel":
        """Separable channel from lifted Kraus operators ``phi -> A_i phi ⊗ psi_i``.

        Requires ``sum A_i†A_i = I`` and unit vectors ``psi_i``; the probe
        states come out pure, ``rho_i = |psi_i><psi_i|``.
        """
        ops = [as_complex_matrix(a) for a in operators]
        vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in probe_vectors]
        if len(ops) != len(vecs):
            raise InvariantViolation("KrausSeparableChannel", "one probe vector per operator")
        for v in vecs:
            if abs(np.linalg.norm(v) - 1.0) > atol:
                raise InvariantViolation("KrausSeparableChannel", "unit probe vectors")
        states = tuple(State(np.outer(v, v.conj()), atol) for v in vecs)
        return cls(tuple(ops), states, atol)

    def lifted_kraus(self, atol: float = DEFAULT_ATOL) -> tuple[np.ndarray, ...]:
        """Kraus operators of the total channel on base ⊗ probe.

        Spectral-decomposing each probe state gives
        ``L_{ik} = sqrt(p_k) (K_i ⊗ |v_k>)``.
        """
        out = []
        for k, s in zip(self.factors, self.probe_states):
            pvals, pvecs = clipped_eigh(s.matrix, atol, "state")
            for j, p in enumerate(pvals):
                if p > 0.0:
                    out.append(np.sqrt(p) * kron(k, pvecs[:, j].reshape(-1, 1)))
        return tuple(out)

    def total_channel(self, atol: float = DEFAULT_ATOL) -> Channel:
        """The separable channel as a Kraus-form channel into base ⊗ probe."""
        return Channel(self.lifted_kraus(atol), atol)

    def dual_on_product(
        self, a: Effect | np.ndarray, b: Effect | np.ndarray, atol: float = DEFAULT_ATOL
    ) -> Effect:
        """Closed form of the total dual on a product effect:
        ``sum_i tr(rho_i b) K_i† a K_i``."""
        am = as_complex_matrix(a)
        bm = as_complex_matrix(b)
        total = np.zeros((self.dim_base, self.dim_base), dtype=complex)
        for k, s in zip(self.factors, self.probe_states):
            total += _real_overlap(s.matrix, bm) * (k.conj().T @ am @ k)
        return Effect(total, atol)

    def outcome_weights(self, probe: Observable) -> np.ndarray:
        """Matrix ``w[i, y] = tr(rho_i P_y)``; each row sums to 1."""
        if probe.dim != self.dim_probe:
            raise ValueError("probe observable dimension mismatch")
        return np.array(
            [[_real_overlap(s.matrix, p.matrix) for p in probe.effects] for s in self.probe_states]
        )

    def measured_instrument(self, probe: Observable, atol: float = DEFAULT_ATOL) -> Instrument:
        """Closed form of the model's probe-indexed instrument:
        outcome ``y`` acts as ``rho -> sum_i tr(rho_i P_y) K_i rho K_i†``."""
        w = np.clip(self.outcome_weights(probe), 0.0, None)
        ops = tuple(
            Operation(tuple(np.sqrt(w[i, y]) * k for i, k in enumerate(self.factors)), atol)
            for y in range(probe.n_outcomes)
        )
        return Instrument(probe.outcomes, ops, atol)

    def pointer_observable(self, probe: Observable, atol: float = DEFAULT_ATOL) -> Observable:
        """Closed form of the model's measured observable:
        ``sum_i tr(rho_i P_y) K_i†K_i`` per probe outcome."""
        w = self.outcome_weights(probe)
        grams = [k.conj().T @ k for k in self.factors]
        effects = tuple(
            sum(w[i, y] * grams[i] for i in range(len(grams))) for y in range(probe.n_outcomes)
        )
        return Observable(probe.outcomes, effects, atol)

    def base_observable(self, atol: float = DEFAULT_ATOL) -> Observable:
        """The observable ``{K_i†K_i}``; the pointer observable is a
        post-processing of it by the outcome-weight kernel."""
        labels = tuple(f"k{i}" for i in range(len(self.factors)))
        return Observable(labels, tuple(k.conj().T @ k for k in self.factors), atol)

    def model(self, probe: Observable, atol: float = DEFAULT_ATOL) -> MeasurementModel:
        """Wrap the separable channel as a single-outcome measurement model."""
        ins = Instrument(("u",), (self.total_channel(atol),), atol)
        return MeasurementModel(self.dim_base, self.dim_probe, ins, probe)


@dataclass(frozen=True, eq=False)
class HolevoSeparableSpec:
    """Measure-and-prepare interaction whose prepared states factor as
    base ⊗ probe products: ``alpha_x = beta_x ⊗ gamma_x``."""

    observable: Observable
    base_states: tuple[State, ...]
    probe_states: tuple[State, ...]
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        base = tuple(s if isinstance(s, State) else State(s, atol) for s in self.base_states)
        probe = tuple(s if isinstance(s, State) else State(s, atol) for s in self.probe_states)
        n = self.observable.n_outcomes
        if len(base) != n or len(probe) != n:
            raise InvariantViolation("HolevoSeparableSpec", "one state pair per outcome")
        if len({s.dim for s in base}) != 1 or len({s.dim for s in probe}) != 1:
            raise InvariantViolation("HolevoSeparableSpec", "uniform state dimensions")
        object.__setattr__(self, "base_states", base)
        object.__setattr__(self, "probe_states", probe)

    @property
    def dim_base(self) -> int:
        return self.base_states[0].dim

    @property
    def dim_probe(self) -> int:
        return self.probe_states[0].dim

    def to_holevo(self, atol: float = DEFAULT_ATOL) -> HolevoSpec:
        """The underlying measure-and-prepare data with product states."""
        states = tuple(
            State(kron(b.matrix, g.matrix), atol)
            for b, g in zip(self.base_states, self.probe_states)
        )
        return HolevoSpec(self.observable, states, atol)

    def interaction(self, atol: float = DEFAULT_ATOL) -> Instrument:
        return holevo_instrument(self.to_holevo(atol), atol)

    def model(self, probe: Observable, atol: float = DEFAULT_ATOL) -> MeasurementModel:
        return MeasurementModel(self.dim_base, self.dim_probe, self.interaction(atol), probe)


@dataclass(frozen=True, eq=False)
class HolevoModelQuantities:
    """Closed-form bundle for a separable measure-and-prepare model.

    ``outcome_weights[x, y] = tr(gamma_x P_y)`` is row-stochastic; the
    pointer observable is the post-processing of the interaction observable
    by exactly that kernel.
    """

    spec: HolevoSeparableSpec
    probe: Observable
    outcome_weights: np.ndarray
    bi_instrument: BiInstrument
    instrument: Instrument
    reduced_instrument: Instrument
    bi_observable: BiObservable
    pointer_observable: Observable

    def dual_effect(self, label: str, a: Effect | np.ndarray, atol: float = DEFAULT_ATOL) -> Effect:
        """Dual of the interaction operation for one outcome:
        ``a -> tr((beta_x ⊗ gamma_x) a) A_x``."""
        i = self.spec.observable.index(label)
        product = kron(self.spec.base_states[i].matrix, self.spec.probe_states[i].matrix)
        coeff = _real_overlap(product, as_complex_matrix(a))
        return Effect(coeff * self.spec.observable.effects[i].matrix, atol)


def holevo_model_quantities(
    spec: HolevoSeparableSpec, probe: Observable, atol: float = DEFAULT_ATOL
) -> HolevoModelQuantities:
    """All closed-form quantities of a separable measure-and-prepare model.

    For weights ``w[x, y] = tr(gamma_x P_y)``:

    * the joint grid entry ``(x, y)`` acts as ``rho -> tr(rho A_x) w[x, y] beta_x``;
    * the probe-indexed instrument sums that grid over ``x``;
    * the reduced instrument is the measure-and-prepare instrument of
      ``(A, beta)``;
    * the joint observable entry is ``w[x, y] A_x`` and the pointer
      observable is ``sum_x w[x, y] A_x``.
    """
    if probe.dim != spec.dim_probe:
        raise ValueError("probe observable dimension mismatch")
    a_obs = spec.observable
    w = np.array(
        [[_real_overlap(g.matrix, p.matrix) for p in probe.effects] for g in spec.probe_states]
    )
    grid = tuple(
        tuple(
            holevo_operation(w[x, y] * a_obs.effects[x].matrix, spec.base_states[x], atol)
            for y in range(probe.n_outcomes)
        )
        for x in range(a_obs.n_outcomes)
    )
    bi_ins = BiInstrument(a_obs.outcomes, probe.outcomes, grid, atol)
    pointer_ins = bi_ins.marginal2(atol)
    reduced = holevo_instrument(HolevoSpec(a_obs, spec.base_states, atol), atol)
    bi_obs = BiObservable(
        a_obs.outcomes,
        probe.outcomes,
        tuple(
            tuple(Effect(w[x, y] * a_obs.effects[x].matrix, atol) for y in range(probe.n_outcomes))
            for x in range(a_obs.n_outcomes)
        ),
        atol,
    )
    pointer_obs = Observable(
        probe.outcomes,
        tuple(
            sum(w[x, y] * a_obs.effects[x].matrix for x in range(a_obs.n_outcomes))
            for y in range(probe.n_outcomes)
        ),
        atol,
    )
    return HolevoModelQuantities(
        spec=spec,
        probe=probe,
        outcome_weights=w,
        bi_instrument=bi_ins,
        instrument=pointer_ins,
        reduced_instrument=reduced,
        bi_observable=bi_obs,
        pointer_observable=pointer_obs,
    )
