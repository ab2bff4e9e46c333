"""Tests for Kraus operations, channels, duals and conditioning."""

import numpy as np
import pytest

from qcond.channels import (
    Channel,
    LinearMap,
    Operation,
    complete_subnormalized,
    condition_effect,
    condition_observable,
    map_deviation,
    map_sum,
    sequential_product,
)
from qcond.effects import Effect, Observable, observable_deviation
from qcond.errors import InvariantViolation
from qcond.linalg import max_abs_diff
from qcond.rand import (
    random_channel,
    random_effect,
    random_observable,
    random_state,
    random_unitary,
)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
COLLAPSE = Operation([np.array([[1, 0], [0, 0]], complex), np.array([[0, 1], [0, 0]], complex)])


def test_operation_validation():
    with pytest.raises(InvariantViolation, match="trace non-increasing"):
        Operation([2.0 * np.eye(2)])
    with pytest.raises(InvariantViolation, match="nonempty"):
        Operation([])
    with pytest.raises(InvariantViolation, match="uniform"):
        Operation([np.eye(2), np.eye(3)])


def test_channel_validation():
    Channel([np.eye(2)])
    with pytest.raises(InvariantViolation, match="trace preservation"):
        Channel([np.eye(2) / 2])
    with pytest.raises(InvariantViolation, match="unitary"):
        Channel.unitary(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_apply_identity_channel():
    rho = random_state(3, 0)
    np.testing.assert_allclose(Channel.identity(3).apply(rho), rho.matrix)


def test_apply_bit_flip():
    flip = Channel.unitary(PAULI_X)
    np.testing.assert_allclose(flip.apply(np.diag([1.0, 0.0])), np.diag([0.0, 1.0]))


def test_apply_collapse_channel():
    # oracle: sum_i K_i rho K_i† collapses any qubit state onto |0><0|
    rng = np.random.default_rng(1)
    for _ in range(5):
        rho = random_state(2, rng)
        expected = sum(k @ rho.matrix @ k.conj().T for k in COLLAPSE.kraus)
        out = COLLAPSE.apply(rho)
        np.testing.assert_allclose(out, expected, atol=1e-14)
        np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_dual_identity_channel():
    a = random_effect(3, 2)
    np.testing.assert_allclose(Channel.identity(3).dual_apply(a).matrix, a.matrix, atol=1e-14)


def test_dual_collapse_channel():
    # hand evaluation: dual of the collapse channel at |0><0| is the identity
    out = COLLAPSE.dual_apply(np.diag([1.0, 0.0]))
    np.testing.assert_allclose(out.matrix, np.eye(2), atol=1e-14)


def test_dual_unit_for_channels():
    rng = np.random.default_rng(3)
    for dims in ((2, 2), (2, 3), (3, 2)):
        ch = random_channel(*dims, 2, rng)
        np.testing.assert_allclose(
            ch.dual_apply(np.eye(dims[1])).matrix, np.eye(dims[0]), atol=1e-12
        )


def test_measured_effect():
    assert max_abs_diff(Channel.identity(2).measured_effect().matrix, np.eye(2)) < 1e-14
    half = Operation([np.eye(2) / np.sqrt(2)])
    np.testing.assert_allclose(half.measured_effect().matrix, np.eye(2) / 2, atol=1e-14)
    proj = Operation([np.diag([1.0, 0.0])])
    np.testing.assert_allclose(proj.measured_effect().matrix, np.diag([1.0, 0.0]), atol=1e-14)


def test_trace_of_operation_output_matches_measured_effect():
    rng = np.random.default_rng(4)
    op = random_channel(2, 3, 2, rng).scaled(0.8)
    e = op.measured_effect()
    for _ in range(10):
        rho = random_state(2, rng)
        assert abs(np.trace(op.apply(rho)) - np.trace(rho.matrix @ e.matrix)) < 1e-12


def test_sequential_identity():
    rng = np.random.default_rng(5)
    op = random_channel(2, 3, 2, rng)
    assert map_deviation(Channel.identity(2).then(op), op) < 1e-14
    assert map_deviation(op.then(Channel.identity(3)), op) < 1e-14


def test_sequential_unitaries_compose():
    rng = np.random.default_rng(6)
    u = random_unitary(3, rng)
    v = random_unitary(3, rng)
    seq = sequential_product(Channel.unitary(u), Channel.unitary(v))
    assert isinstance(seq, Channel)
    assert map_deviation(seq, Channel.unitary(v @ u)) < 1e-13


def test_dual_contravariance():
    rng = np.random.default_rng(7)
    for _ in range(20):
        first = random_channel(2, 3, 2, rng).scaled(float(rng.uniform(0.6, 1.0)))
        second = random_channel(3, 2, 2, rng).scaled(float(rng.uniform(0.6, 1.0)))
        b = random_effect(2, rng)
        lhs = first.then(second).dual_matrix(b.matrix)
        rhs = first.dual_matrix(second.dual_matrix(b.matrix))
        assert max_abs_diff(lhs, rhs) < 1e-12


def test_duality_random_triples():
    rng = np.random.default_rng(8)
    for dim in (2, 3):
        for _ in range(25):
            ch = random_channel(dim, dim + 1, 2, rng)
            rho = random_state(dim, rng)
            a = random_effect(dim + 1, rng)
            lhs = np.trace(rho.matrix @ ch.dual_apply(a).matrix)
            rhs = np.trace(ch.apply(rho) @ a.matrix)
            assert abs(lhs - rhs) < 1e-12


def test_dual_additive():
    rng = np.random.default_rng(9)
    for _ in range(10):
        ch = random_channel(2, 3, 2, rng)
        obs = random_observable(3, 3, rng)
        e0, e1 = obs.effects[0].matrix, obs.effects[1].matrix
        assert (
            max_abs_diff(ch.dual_matrix(e0 + e1), ch.dual_matrix(e0) + ch.dual_matrix(e1)) < 1e-13
        )


def test_morphism_iff_trace_preserving():
    rng = np.random.default_rng(10)
    ch = random_channel(2, 3, 2, rng)
    assert ch.is_trace_preserving(1e-9)
    shrunk = ch.scaled(0.9)
    dev = max_abs_diff(shrunk.dual_matrix(np.eye(3)), np.eye(2))
    assert dev >= 1e-2  # fails the unit-preservation check by a wide margin


def test_unitary_conditioning_round_trip():
    rng = np.random.default_rng(11)
    u = random_unitary(3, rng)
    ch = Channel.unitary(u)
    a = random_effect(3, rng)
    conjugated = u @ a.matrix @ u.conj().T
    np.testing.assert_allclose(condition_effect(ch, conjugated).matrix, a.matrix, atol=1e-12)


def test_condition_effect_requires_channel():
    op = Operation([np.eye(2) / 2])
    with pytest.raises(InvariantViolation, match="channel"):
        condition_effect(op, Effect(np.eye(2) / 2))


def test_condition_effect_affine():
    rng = np.random.default_rng(12)
    ch = random_channel(2, 3, 2, rng)
    b1 = random_effect(3, rng)
    b2 = random_effect(3, rng)
    lam = 0.3
    mixed = lam * b1.matrix + (1 - lam) * b2.matrix
    lhs = condition_effect(ch, mixed).matrix
    rhs = lam * condition_effect(ch, b1).matrix + (1 - lam) * condition_effect(ch, b2).matrix
    assert max_abs_diff(lhs, rhs) < 1e-13


def test_condition_observable():
    rng = np.random.default_rng(13)
    ch = random_channel(2, 3, 2, rng)
    obs = random_observable(3, 3, rng)
    out = condition_observable(ch, obs)
    assert out.dim == 2 and out.outcomes == obs.outcomes
    for label, e in zip(obs.outcomes, obs.effects):
        expected = sum(k.conj().T @ e.matrix @ k for k in ch.kraus)
        np.testing.assert_allclose(out.effect(label).matrix, expected, atol=1e-12)
    # identity channel leaves the observable alone; trivial observable maps to itself
    assert observable_deviation(condition_observable(Channel.identity(3), obs), obs) < 1e-14
    trivial = Observable.trivial(3)
    np.testing.assert_allclose(
        condition_observable(ch, trivial).effects[0].matrix, np.eye(2), atol=1e-12
    )


def test_distribution_transfer_through_channel():
    rng = np.random.default_rng(14)
    ch = random_channel(2, 3, 2, rng)
    obs = random_observable(3, 2, rng)
    rho = random_state(2, rng)
    conditioned = condition_observable(ch, obs)
    out_state = ch.apply(rho)
    for label in obs.outcomes:
        lhs = np.trace(rho.matrix @ conditioned.effect(label).matrix)
        rhs = np.trace(out_state @ obs.effect(label).matrix)
        assert abs(lhs - rhs) < 1e-12


def test_complete_subnormalized_zero_residual():
    rng = np.random.default_rng(15)
    ch = random_channel(2, 3, 2, rng)
    obs = random_observable(3, 2, rng)
    out = complete_subnormalized(ch, obs.effects, labels=obs.outcomes)
    assert observable_deviation(out, obs) < 1e-14


def test_complete_subnormalized_uniform_split():
    ch = random_channel(2, 2, 2, 16)
    out = complete_subnormalized(ch, [np.eye(2) / 4, np.eye(2) / 4])
    for e in out.effects:
        np.testing.assert_allclose(e.matrix, np.eye(2) / 2, atol=1e-14)


def test_complete_subnormalized_random_family():
    rng = np.random.default_rng(17)
    for _ in range(10):
        ch = random_channel(2, 3, 2, rng)
        family = random_observable(3, 3, rng).effects[:2]
        out = complete_subnormalized(ch, family)
        total = sum(e.matrix for e in out.effects)
        np.testing.assert_allclose(total, np.eye(3), atol=1e-12)


def test_complete_subnormalized_rejects_oversized_family():
    ch = random_channel(2, 2, 2, 18)
    with pytest.raises(InvariantViolation, match="sub-normalized"):
        complete_subnormalized(ch, [np.eye(2) / 2, np.eye(2) * 0.75])


def test_linear_map_matches_operation():
    rng = np.random.default_rng(19)
    op = random_channel(2, 3, 2, rng)
    lm = LinearMap.of(op)
    assert map_deviation(lm, op) < 1e-14
    tabulated = LinearMap.from_action(op.apply_matrix, 2, 3)
    assert map_deviation(tabulated, op) < 1e-14
    a = random_effect(3, rng)
    np.testing.assert_allclose(lm.dual_matrix(a.matrix), op.dual_matrix(a.matrix), atol=1e-13)


def test_map_sum_promotes_mixed_representations():
    rng = np.random.default_rng(20)
    op = random_channel(2, 2, 1, rng).scaled(np.sqrt(0.5))
    mixed = map_sum([op, LinearMap.of(op)])
    assert isinstance(mixed, LinearMap)
    assert mixed.is_trace_preserving(1e-9)
    both_kraus = map_sum([op, op])
    assert isinstance(both_kraus, Operation)
    assert map_deviation(mixed, both_kraus) < 1e-13


def test_map_deviation_dimension_mismatch():
    with pytest.raises(ValueError):
        map_deviation(Channel.identity(2), Channel.identity(3))
