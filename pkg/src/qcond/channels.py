"""Operations, channels, dual maps and conditioning.

Operations are kept in Kraus form; the dual (Heisenberg-picture) map is then
``a -> sum_i K_i† a K_i`` with no conversion step. Equality of maps is never
decided by comparing Kraus lists (they are not canonical): use
:func:`map_deviation`, which compares actions on a Hermitian matrix-unit
basis.

:class:`LinearMap` stores a map by its superoperator with respect to
row-major vectorization. It backs maps that arise without a natural Kraus
form (partial-trace pipelines); extracting Kraus operators from one is out
of scope here.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .effects import Effect, Observable, State
from .errors import InvariantViolation
from .linalg import (
    DEFAULT_ATOL,
    as_complex_matrix,
    frozen_copy,
    hermitian_part,
    hermitized_matrix_units,
    is_psd,
    max_abs_diff,
)

__all__ = [
    "QuantumMap",
    "Operation",
    "Channel",
    "LinearMap",
    "map_sum",
    "map_deviation",
    "sequential_product",
    "condition_effect",
    "condition_observable",
    "complete_subnormalized",
]


class QuantumMap:
    """Common interface of the linear maps used in this package.

    Subclasses provide ``apply_matrix`` (Schrödinger picture),
    ``dual_matrix`` (Heisenberg picture) and ``superoperator``. Instances
    are immutable after construction.
    """

    dim_in: int
    dim_out: int

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dual_matrix(self, m: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def superoperator(self) -> np.ndarray:
        raise NotImplementedError

    def apply(self, rho: State | np.ndarray) -> np.ndarray:
        """Apply the map to a state (or any matching square matrix)."""
        m = as_complex_matrix(rho)
        if m.shape != (self.dim_in, self.dim_in):
            raise ValueError(f"dimension mismatch: expected {self.dim_in}, got {m.shape}")
        return self.apply_matrix(m)

    def dual_apply(self, a: Effect | np.ndarray, atol: float = DEFAULT_ATOL) -> Effect:
        """Apply the dual map to an effect; the result is again an effect.

        The raw output is symmetrized before validation to suppress rounding
        asymmetry.
        """
        m = as_complex_matrix(a)
        if m.shape != (self.dim_out, self.dim_out):
            raise ValueError(f"dimension mismatch: expected {self.dim_out}, got {m.shape}")
        return Effect(hermitian_part(self.dual_matrix(m)), atol)

    def measured_effect(self, atol: float = DEFAULT_ATOL) -> Effect:
        """The unique effect ``a`` with ``tr[map(rho)] == tr(rho a)`` for all states."""
        return self.dual_apply(np.eye(self.dim_out), atol)

    def is_trace_preserving(self, atol: float = DEFAULT_ATOL) -> bool:
        eye_out = np.eye(self.dim_out)
        return max_abs_diff(self.dual_matrix(eye_out), np.eye(self.dim_in)) <= atol

    def then(self, other: "QuantumMap") -> "QuantumMap":
        """Sequential product: apply ``self`` first, then ``other``."""
        if self.dim_out != other.dim_in:
            raise ValueError(
                f"dimension mismatch in composition: {self.dim_out} -> {other.dim_in}"
            )
        if isinstance(self, Operation) and isinstance(other, Operation):
            products = np.einsum("mab,nbc->mnac", other.kraus_stack, self.kraus_stack)
            kraus = products.reshape(-1, other.dim_out, self.dim_in)
            cls = Channel if isinstance(self, Channel) and isinstance(other, Channel) else Operation
            return cls(kraus)
        return LinearMap(other.superoperator() @ self.superoperator(), self.dim_in, other.dim_out)


class Operation(QuantumMap):
    """Completely positive trace-non-increasing map in Kraus form.

    ``kraus`` may be a sequence of matrices or one stacked 3-D array; the
    operators are kept stacked internally so applications are single
    ``numpy`` contractions regardless of how long the list is.
    """

    def __init__(self, kraus: Sequence[np.ndarray] | np.ndarray, atol: float = DEFAULT_ATOL):
        if isinstance(kraus, np.ndarray) and kraus.ndim == 3:
            stack = np.array(kraus, dtype=complex)
        else:
            mats = [as_complex_matrix(k) for k in kraus]
            if not mats:
                raise InvariantViolation("Operation", "nonempty Kraus list")
            if len({m.shape for m in mats}) != 1:
                raise InvariantViolation("Operation", "uniform Kraus shape")
            stack = np.stack(mats)
        if stack.shape[0] == 0:
            raise InvariantViolation("Operation", "nonempty Kraus list")
        if not np.all(np.isfinite(stack.real)) or not np.all(np.isfinite(stack.imag)):
            raise InvariantViolation("Operation", "finite entries")
        gram = np.tensordot(stack.conj(), stack, axes=([0, 1], [0, 1]))
        if not is_psd(np.eye(stack.shape[2]) - gram, atol):
            raise InvariantViolation("Operation", "trace non-increasing", "sum K†K must be <= I")
        stack.setflags(write=False)
        self._stack = stack
        self.dim_out, self.dim_in = stack.shape[1], stack.shape[2]
        self._gram = frozen_copy(gram)
        self._superop: np.ndarray | None = None

    @property
    def kraus(self) -> tuple[np.ndarray, ...]:
        return tuple(self._stack)

    @property
    def kraus_stack(self) -> np.ndarray:
        """All Kraus operators as one read-only ``(n, dim_out, dim_in)`` array."""
        return self._stack

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        tmp = self._stack @ m
        return np.tensordot(tmp, self._stack.conj(), axes=([0, 2], [0, 2]))

    def dual_matrix(self, m: np.ndarray) -> np.ndarray:
        tmp = m @ self._stack
        return np.tensordot(self._stack.conj(), tmp, axes=([0, 1], [0, 1]))

    def superoperator(self) -> np.ndarray:
        if self._superop is None:
            s = np.einsum("kab,kcd->acbd", self._stack, self._stack.conj())
            self._superop = frozen_copy(
                s.reshape(self.dim_out * self.dim_out, self.dim_in * self.dim_in)
            )
        return self._superop

    def scaled(self, factor: float, atol: float = DEFAULT_ATOL) -> "Operation":
        """The operation with every Kraus operator multiplied by ``factor``."""
        return Operation(factor * self._stack, atol)


class Channel(Operation):
    """Trace-preserving operation (``sum K†K == I``)."""

    def __init__(self, kraus: Sequence[np.ndarray], atol: float = DEFAULT_ATOL):
        super().__init__(kraus, atol)
        if max_abs_diff(self._gram, np.eye(self.dim_in)) > atol:
            raise InvariantViolation("Channel", "trace preservation", "sum K†K must equal I")

    @classmethod
    def identity(cls, dim: int) -> "Channel":
        return cls((np.eye(dim),))

    @classmethod
    def unitary(cls, u: np.ndarray, atol: float = DEFAULT_ATOL) -> "Channel":
        """Conjugation ``rho -> U rho U†`` by a unitary (or isometry) ``U``."""
        u = as_complex_matrix(u)
        if max_abs_diff(u.conj().T @ u, np.eye(u.shape[1])) > atol:
            raise InvariantViolation("Channel", "unitary", "U†U must equal I")
        return cls((u,), atol)


class LinearMap(QuantumMap):
    """Map on matrices stored as a superoperator (row-major vectorization).

    ``dual_matrix`` applies the conjugate-transposed superoperator, which for
    the completely positive maps built in this package is exactly the
    Heisenberg-picture dual.
    """

    def __init__(self, superoperator: np.ndarray, dim_in: int, dim_out: int):
        s = as_complex_matrix(superoperator)
        if s.shape != (dim_out * dim_out, dim_in * dim_in):
            raise InvariantViolation(
                "LinearMap", "superoperator shape",
                f"expected {(dim_out**2, dim_in**2)}, got {s.shape}",
            )
        self.dim_in = dim_in
        self.dim_out = dim_out
        self._matrix = frozen_copy(s)

    @classmethod
    def from_action(
        cls, action: Callable[[np.ndarray], np.ndarray], dim_in: int, dim_out: int
    ) -> "LinearMap":
        """Tabulate a linear action on the matrix-unit basis."""
        s = np.zeros((dim_out * dim_out, dim_in * dim_in), dtype=complex)
        for col in range(dim_in * dim_in):
            unit = np.zeros(dim_in * dim_in, dtype=complex)
            unit[col] = 1.0
            s[:, col] = action(unit.reshape(dim_in, dim_in)).reshape(-1)
        return cls(s, dim_in, dim_out)

    @classmethod
    def of(cls, qmap: QuantumMap) -> "LinearMap":
        """Re-express any quantum map as a tabulated linear map."""
        return cls(qmap.superoperator(), qmap.dim_in, qmap.dim_out)

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        return (self._matrix @ m.reshape(-1)).reshape(self.dim_out, self.dim_out)

    def dual_matrix(self, m: np.ndarray) -> np.ndarray:
        return (self._matrix.conj().T @ m.reshape(-1)).reshape(self.dim_in, self.dim_in)

    def superoperator(self) -> np.ndarray:
        return self._matrix


def map_sum(maps: Sequence[QuantumMap], atol: float = DEFAULT_ATOL) -> QuantumMap:
    """Sum of quantum maps; stays in Kraus form when every summand is."""
    maps = list(maps)
    if not maps:
        raise ValueError("cannot sum an empty list of maps")
    dims = {(m.dim_in, m.dim_out) for m in maps}
    if len(dims) != 1:
        raise ValueError(f"summands must share dimensions, got {sorted(dims)}")
    if all(isinstance(m, Operation) for m in maps):
        kraus = np.concatenate([m.kraus_stack for m in maps])  # type: ignore[attr-defined]
        return Operation(kraus, atol)
    total = sum(m.superoperator() for m in maps)
    return LinearMap(total, maps[0].dim_in, maps[0].dim_out)


def map_deviation(p: QuantumMap, q: QuantumMap) -> float:
    """Largest entrywise deviation of two maps' actions on a Hermitian basis.

    Zero (up to rounding) iff the maps are equal as linear maps. The actions
    are evaluated through the cached superoperators, which is the same
    comparison at a fraction of the cost for long Kraus lists.
    """
    if (p.dim_in, p.dim_out) != (q.dim_in, q.dim_out):
        raise ValueError("maps must share dimensions")
    diff = p.superoperator() - q.superoperator()
    dev = 0.0
    for b in hermitized_matrix_units(p.dim_in):
        dev = max(dev, float(np.max(np.abs(diff @ b.reshape(-1)))))
    return dev


def sequential_product(first: QuantumMap, second: QuantumMap) -> QuantumMap:
    """Run ``first`` then ``second``; in Kraus form the list ``{L_b K_a}``."""
    return first.then(second)


def _require_channel(ch: QuantumMap, atol: float) -> None:
    if not ch.is_trace_preserving(atol):
        raise InvariantViolation("conditioning", "channel", "map must be trace preserving")


def condition_effect(ch: QuantumMap, b: Effect | np.ndarray, atol: float = DEFAULT_ATOL) -> Effect:
    """The effect ``b`` conditioned by a channel: its dual-map image.

    Its probability in ``rho`` equals the probability of ``b`` in the
    channel output.
    """
    _require_channel(ch, atol)
    return ch.dual_apply(b, atol)


def condition_observable(ch: QuantumMap, obs: Observable, atol: float = DEFAULT_ATOL) -> Observable:
    """Condition every effect of an observable by a channel."""
    _require_channel(ch, atol)
    return Observable(obs.outcomes, tuple(ch.dual_apply(e, atol) for e in obs.effects), atol)


def complete_subnormalized(
    ch: QuantumMap,
    effects: Sequence[Effect | np.ndarray],
    labels: Sequence[str] | None = None,
    atol: float = DEFAULT_ATOL,
) -> Observable:
    """Complete a sub-normalized effect family to an observable.

    Given effects ``b_x`` with ``sum b_x <= I`` on the channel's output
    space, returns the observable ``B_x = b_x + (I - sum b_x) / n`` with
    ``n`` the family size. Conditioning ``B`` by ``ch`` reproduces the
    conditioned ``b_x`` whenever the residual's dual image vanishes.
    """
    _require_channel(ch, atol)
    mats = [as_complex_matrix(e) for e in effects]
    if not mats:
        raise ValueError("need at least one effect to complete")
    if any(m.shape != (ch.dim_out, ch.dim_out) for m in mats):
        raise ValueError("effects must live on the channel's output space")
    residual = np.eye(ch.dim_out) - sum(mats)
    if not is_psd(residual, atol):
        raise InvariantViolation("completion", "sub-normalized family", "sum of effects must be <= I")
    share = residual / len(mats)
    if labels is None:
        labels = tuple(f"x{i}" for i in range(len(mats)))
    return Observable(tuple(labels), tuple(m + share for m in mats), atol)
