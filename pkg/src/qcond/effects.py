"""States, effects, observables and their classical processing.

All value types validate at construction against an absolute tolerance and
are immutable afterwards; operations are pure functions, safe for
unrestricted concurrent use. Outcome labels are strings and their ordering
is fixed by declaration order, so grids and stochastic kernels index
deterministically.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvariantViolation
from .linalg import (
    DEFAULT_ATOL,
    as_complex_matrix,
    frozen_copy,
    is_effect_matrix,
    is_psd,
    max_abs_diff,
    require_square,
)

__all__ = [
    "State",
    "Effect",
    "Observable",
    "BiObservable",
    "StochasticMatrix",
    "OutcomeMap",
    "born_probability",
    "observable_distribution",
    "outcome_probabilities",
    "post_process",
    "part",
    "marginals",
    "affine_combination",
    "certify_coexistence",
    "observable_deviation",
    "bi_observable_deviation",
]


def _distinct_labels(labels: Sequence[str], kind: str) -> tuple[str, ...]:
    out = tuple(str(x) for x in labels)
    if not out:
        raise InvariantViolation(kind, "nonempty outcome set")
    if len(set(out)) != len(out):
        raise InvariantViolation(kind, "distinct outcome labels")
    return out


@dataclass(frozen=True, eq=False)
class State:
    """Unit-trace positive operator (density operator)."""

    matrix: np.ndarray
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        m = as_complex_matrix(self.matrix)
        require_square(m, "State")
        if not is_psd(m, atol):
            raise InvariantViolation("State", "positive")
        if abs(np.trace(m) - 1.0) > atol:
            raise InvariantViolation("State", "unit trace", f"trace {np.trace(m):.6g}")
        object.__setattr__(self, "matrix", frozen_copy(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, vector: Sequence[complex], atol: float = DEFAULT_ATOL) -> "State":
        """Rank-one state |v><v| from a (not necessarily normalized) vector."""
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvariantViolation("State", "nonzero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()), atol)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "State":
        return cls(np.eye(dim) / dim)


@dataclass(frozen=True, eq=False)
class Effect:
    """Operator ``a`` with ``0 <= a <= I``; a yes-no measurement element."""

    matrix: np.ndarray
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        m = as_complex_matrix(self.matrix)
        require_square(m, "Effect")
        if not is_effect_matrix(m, atol):
            raise InvariantViolation("Effect", "between zero and identity")
        object.__setattr__(self, "matrix", frozen_copy(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "Effect":
        return cls(np.eye(dim))

    def complement(self, atol: float = DEFAULT_ATOL) -> "Effect":
        """The complementary effect ``I - a``."""
        return Effect(np.eye(self.dim) - self.matrix, atol)


def _coerce_effects(effects: Sequence, atol: float) -> tuple[Effect, ...]:
    return tuple(e if isinstance(e, Effect) else Effect(e, atol) for e in effects)


@dataclass(frozen=True, eq=False)
class Observable:
    """Labeled family of effects summing to the identity (a POVM).

    ``effects`` may be given as :class:`Effect` objects or raw matrices;
    raw matrices are validated on the way in.
    """

    outcomes: tuple[str, ...]
    effects: tuple[Effect, ...]
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        outcomes = _distinct_labels(self.outcomes, "Observable")
        effects = _coerce_effects(self.effects, atol)
        if len(effects) != len(outcomes):
            raise InvariantViolation("Observable", "one effect per outcome")
        dims = {e.dim for e in effects}
        if len(dims) != 1:
            raise InvariantViolation("Observable", "uniform dimension", f"dims {sorted(dims)}")
        total = sum(e.matrix for e in effects)
        if max_abs_diff(total, np.eye(effects[0].dim)) > atol:
            raise InvariantViolation("Observable", "normalization", "effects must sum to I")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def index(self, label: str) -> int:
        try:
            return self.outcomes.index(label)
        except ValueError:
            raise ValueError(f"unknown outcome label {label!r}") from None

    def effect(self, label: str) -> Effect:
        return self.effects[self.index(label)]

    def effect_over(self, subset: Iterable[str], atol: float = DEFAULT_ATOL) -> Effect:
        """The effect of an outcome subset, ``sum_{x in subset} A_x``."""
        idx = sorted({self.index(x) for x in subset})
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for i in idx:
            total = total + self.effects[i].matrix
        return Effect(total, atol)

    @classmethod
    def trivial(cls, dim: int, label: str = "x0") -> "Observable":
        """Single-outcome observable {I}."""
        return cls((label,), (Effect.identity(dim),))


@dataclass(frozen=True, eq=False)
class BiObservable:
    """Observable on a product outcome set, stored as an effects grid.

    ``effects[i][j]`` is the effect for ``(outcomes1[i], outcomes2[j])``.
    """

    outcomes1: tuple[str, ...]
    outcomes2: tuple[str, ...]
    effects: tuple[tuple[Effect, ...], ...]
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        o1 = _distinct_labels(self.outcomes1, "BiObservable")
        o2 = _distinct_labels(self.outcomes2, "BiObservable")
        rows = tuple(_coerce_effects(row, atol) for row in self.effects)
        if len(rows) != len(o1) or any(len(r) != len(o2) for r in rows):
            raise InvariantViolation("BiObservable", "grid shape", "one effect per outcome pair")
        dims = {e.dim for row in rows for e in row}
        if len(dims) != 1:
            raise InvariantViolation("BiObservable", "uniform dimension")
        dim = next(iter(dims))
        total = sum(e.matrix for row in rows for e in row)
        if max_abs_diff(total, np.eye(dim)) > atol:
            raise InvariantViolation("BiObservable", "normalization", "effects must sum to I")
        object.__setattr__(self, "outcomes1", o1)
        object.__setattr__(self, "outcomes2", o2)
        object.__setattr__(self, "effects", rows)

    @property
    def dim(self) -> int:
        return self.effects[0][0].dim

    def effect(self, x: str, y: str) -> Effect:
        try:
            i = self.outcomes1.index(x)
            j = self.outcomes2.index(y)
        except ValueError:
            raise ValueError(f"unknown outcome pair ({x!r}, {y!r})") from None
        return self.effects[i][j]

    def flatten(self, atol: float = DEFAULT_ATOL) -> Observable:
        """The same observable on flat labels ``"x⊗y"`` in grid order."""
        labels = tuple(f"{x}⊗{y}" for x in self.outcomes1 for y in self.outcomes2)
        flat = tuple(e for row in self.effects for e in row)
        return Observable(labels, flat, atol)

    def marginal1(self, atol: float = DEFAULT_ATOL) -> Observable:
        """Sum out the second outcome index."""
        sums = [sum(e.matrix for e in row) for row in self.effects]
        return Observable(self.outcomes1, tuple(sums), atol)

    def marginal2(self, atol: float = DEFAULT_ATOL) -> Observable:
        """Sum out the first outcome index."""
        sums = [
            sum(self.effects[i][j].matrix for i in range(len(self.outcomes1)))
            for j in range(len(self.outcomes2))
        ]
        return Observable(self.outcomes2, tuple(sums), atol)


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Row-stochastic kernel from source outcomes to target outcomes.

    Entries may arrive within ``atol`` outside ``[0, 1]`` (rounding noise);
    they are clamped into ``[0, 1]`` on construction. Rows must sum to 1
    within ``atol``.
    """

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    weights: np.ndarray
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        sources = _distinct_labels(self.sources, "StochasticMatrix")
        targets = _distinct_labels(self.targets, "StochasticMatrix")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(sources), len(targets)):
            raise InvariantViolation(
                "StochasticMatrix", "shape", f"expected {(len(sources), len(targets))}, got {w.shape}"
            )
        if float(w.min()) < -atol or float(w.max()) > 1.0 + atol:
            raise InvariantViolation("StochasticMatrix", "entries in [0, 1]")
        if float(np.max(np.abs(w.sum(axis=1) - 1.0))) > atol:
            raise InvariantViolation("StochasticMatrix", "row normalization")
        w = np.clip(w, 0.0, 1.0)
        w.setflags(write=False)
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "weights", w)

    @classmethod
    def identity(cls, labels: Sequence[str]) -> "StochasticMatrix":
        n = len(labels)
        return cls(tuple(labels), tuple(labels), np.eye(n))

    @classmethod
    def coarse_graining(cls, sources: Sequence[str], target: str = "y0") -> "StochasticMatrix":
        """Total coarse-graining: every source maps to the single target."""
        return cls(tuple(sources), (target,), np.ones((len(sources), 1)))

    def then(self, other: "StochasticMatrix", atol: float = DEFAULT_ATOL) -> "StochasticMatrix":
        """Compose two kernels: apply ``self`` first, then ``other``."""
        if self.targets != other.sources:
            raise ValueError("kernel composition requires matching intermediate outcomes")
        return StochasticMatrix(self.sources, other.targets, self.weights @ other.weights, atol)


@dataclass(frozen=True, eq=False)
class OutcomeMap:
    """Total surjection from source outcome labels onto target labels.

    ``targets`` fixes the target label order; when omitted it is inferred
    from first appearance in the mapping's iteration order.
    """

    mapping: Mapping[str, str]
    targets: tuple[str, ...] | None = None

    def __post_init__(self):
        mapping = dict(self.mapping)
        if not mapping:
            raise InvariantViolation("OutcomeMap", "nonempty domain")
        targets = self.targets
        if targets is None:
            targets = tuple(dict.fromkeys(mapping.values()))
        else:
            targets = _distinct_labels(targets, "OutcomeMap")
        hit = set(mapping.values())
        if hit != set(targets):
            raise InvariantViolation(
                "OutcomeMap", "surjective", f"targets {sorted(set(targets) - hit)} never hit"
            )
        object.__setattr__(self, "mapping", mapping)
        object.__setattr__(self, "targets", targets)

    @property
    def domain(self) -> tuple[str, ...]:
        return tuple(self.mapping)

    def __call__(self, x: str) -> str:
        try:
            return self.mapping[x]
        except KeyError:
            raise ValueError(f"unknown outcome label {x!r}") from None

    def preimage(self, y: str) -> tuple[str, ...]:
        return tuple(x for x, v in self.mapping.items() if v == y)

    def then(self, other: "OutcomeMap") -> "OutcomeMap":
        """Compose surjections: apply ``self`` first, then ``other``."""
        return OutcomeMap({x: other(y) for x, y in self.mapping.items()}, other.targets)

    def to_stochastic(self, sources: Sequence[str]) -> StochasticMatrix:
        """The 0/1 kernel with ``w[x, y] = 1`` iff ``f(x) == y``."""
        sources = tuple(sources)
        w = np.zeros((len(sources), len(self.targets)))
        for i, x in enumerate(sources):
            w[i, self.targets.index(self(x))] = 1.0
        return StochasticMatrix(sources, self.targets, w)


def born_probability(rho: State, a: Effect, atol: float = DEFAULT_ATOL) -> float:
    """The probability ``tr(rho a)`` that effect ``a`` occurs in state ``rho``."""
    rm = as_complex_matrix(rho)
    am = as_complex_matrix(a)
    if rm.shape != am.shape:
        raise ValueError(f"dimension mismatch: state {rm.shape} vs effect {am.shape}")
    val = complex(np.trace(rm @ am))
    if abs(val.imag) > atol:
        raise InvariantViolation("born probability", "real value", f"imag {val.imag:.3e}")
    if val.real < -atol or val.real > 1.0 + atol:
        raise InvariantViolation("born probability", "range [0, 1]", f"value {val.real:.6g}")
    return float(val.real)


def observable_distribution(
    rho: State, obs: Observable, subset: Iterable[str] | None = None, atol: float = DEFAULT_ATOL
) -> float:
    """Probability of an outcome subset, ``sum_{x in subset} tr(rho A_x)``.

    ``subset=None`` means the full outcome set (total probability 1).
    """
    labels = obs.outcomes if subset is None else tuple(dict.fromkeys(subset))
    return float(sum(born_probability(rho, obs.effect(x), atol) for x in labels))


def outcome_probabilities(rho: State, obs: Observable, atol: float = DEFAULT_ATOL) -> dict[str, float]:
    """Per-outcome probabilities of ``obs`` in state ``rho``, in label order."""
    return {x: born_probability(rho, obs.effect(x), atol) for x in obs.outcomes}


def post_process(obs: Observable, kernel: StochasticMatrix, atol: float = DEFAULT_ATOL) -> Observable:
    """Classically randomize outcomes: ``B_y = sum_x w[x, y] A_x``."""
    if kernel.sources != obs.outcomes:
        raise ValueError("kernel rows must be indexed by the observable's outcomes")
    mats = [m.matrix for m in obs.effects]
    new = [sum(kernel.weights[i, j] * mats[i] for i in range(len(mats))) for j in range(len(kernel.targets))]
    return Observable(kernel.targets, tuple(new), atol)


def part(obs: Observable, f: OutcomeMap, atol: float = DEFAULT_ATOL) -> Observable:
    """Coarse-grain an observable along a surjection of its outcome labels.

    ``B_y = sum {A_x : f(x) = y}``; equivalently the post-processing by the
    0/1 kernel of ``f``. ``f`` must be defined on exactly the observable's
    outcomes; a non-surjective map is rejected at :class:`OutcomeMap`
    construction since it would create an unhit (zero-padded) label.
    """
    if set(f.domain) != set(obs.outcomes):
        missing = sorted(set(obs.outcomes) ^ set(f.domain))
        raise ValueError(f"outcome map must be total on the observable's outcomes (mismatch: {missing})")
    sums = []
    for y in f.targets:
        total = np.zeros((obs.dim, obs.dim), dtype=complex)
        for x in f.preimage(y):
            total = total + obs.effect(x).matrix
        sums.append(total)
    return Observable(f.targets, tuple(sums), atol)


def marginals(grid: BiObservable, atol: float = DEFAULT_ATOL) -> tuple[Observable, Observable]:
    """Both marginals of a bi-observable (sum out the other index)."""
    return grid.marginal1(atol), grid.marginal2(atol)


def affine_combination(
    observables: Sequence[Observable], weights: Sequence[float], atol: float = DEFAULT_ATOL
) -> Observable:
    """Outcome-wise convex mixture of observables on a common outcome set."""
    if len(observables) != len(weights) or not observables:
        raise ValueError("need one weight per observable")
    first = observables[0]
    for obs in observables[1:]:
        if obs.outcomes != first.outcomes:
            raise ValueError("observables must share the same ordered outcome labels")
        if obs.dim != first.dim:
            raise ValueError("observables must share the same dimension")
    w = np.asarray(weights, dtype=float)
    if float(w.min()) < -atol or float(w.max()) > 1.0 + atol:
        raise InvariantViolation("affine combination", "weights in [0, 1]")
    if abs(float(w.sum()) - 1.0) > atol:
        raise InvariantViolation("affine combination", "weights sum to 1", f"sum {w.sum():.6g}")
    mixed = [
        sum(w[i] * observables[i].effects[k].matrix for i in range(len(observables)))
        for k in range(first.n_outcomes)
    ]
    return Observable(first.outcomes, tuple(mixed), atol)


def certify_coexistence(
    a: Observable, b: Observable, joint: BiObservable, atol: float = DEFAULT_ATOL
) -> bool:
    """Check a joint bi-observable certificate for the coexistence of ``a`` and ``b``.

    True iff the marginals of ``joint`` equal ``a`` and ``b`` — outcome label
    tuples included — entrywise within ``atol``. This validates a supplied
    certificate; it does not search for one.
    """
    if joint.outcomes1 != a.outcomes or joint.outcomes2 != b.outcomes:
        return False
    if joint.dim != a.dim or joint.dim != b.dim:
        return False
    m1, m2 = marginals(joint, atol)
    return observable_deviation(m1, a) <= atol and observable_deviation(m2, b) <= atol


def observable_deviation(a: Observable, b: Observable) -> float:
    """Largest entrywise deviation between two observables on equal outcomes."""
    if a.outcomes != b.outcomes:
        raise ValueError("observables must share the same ordered outcome labels")
    return max(max_abs_diff(x.matrix, y.matrix) for x, y in zip(a.effects, b.effects))


def bi_observable_deviation(a: BiObservable, b: BiObservable) -> float:
    """Largest entrywise deviation between two bi-observables on equal grids."""
    if a.outcomes1 != b.outcomes1 or a.outcomes2 != b.outcomes2:
        raise ValueError("bi-observables must share the same ordered outcome labels")
    return max(
        max_abs_diff(x.matrix, y.matrix)
        for row_a, row_b in zip(a.effects, b.effects)
        for x, y in zip(row_a, row_b)
    )
