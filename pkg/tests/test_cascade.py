from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcascade.cascade import (
    ControlCascade, MNCascade, ValleySpec, build_valley, group, hadamard_mn, lower_naive, random_cascade, random_mn,
    staircase_pair, ungroup, valley_registers,
)
from qcascade.circuit import Circuit, Controlled, OneQubit, depth, unitary_of
from qcascade.errors import InvalidBlockSize, NonUnitary
from qcascade.numerics import H, X, block_diag, random_unitary, rev
from qcascade.synthesis import lower_to_basis
from qcascade.verify import check_exact


def staircase_matrix(gates) -> np.ndarray:
    """Oracle: S(g0, rest) = diag(S(rest), S(rest) (g0 x I)), built from block matrices."""
    if not gates:
        return np.eye(2, dtype=complex)
    rest = staircase_matrix(gates[1:])
    first = np.kron(gates[0], np.eye(rest.shape[0] // 2))
    return block_diag(rest, rest @ first)


def test_single_x_staircase_is_cnot() -> None:
    u = unitary_of(lower_naive(MNCascade((X,))))
    assert np.array_equal(u, np.eye(4)[[0, 1, 3, 2]])


def test_identity_staircase() -> None:
    assert np.allclose(unitary_of(lower_naive(MNCascade((np.eye(2),) * 4))), np.eye(32))


def test_staircase_matches_recursive_block_oracle() -> None:
    c = random_mn(6, 0)
    assert np.max(np.abs(unitary_of(lower_naive(c)) - staircase_matrix(list(c.gates)))) <= 1e-12


def test_group_size_one_keeps_unitary() -> None:
    c = random_mn(3, 1)
    g = group(c, 1)
    assert g.m == 3
    assert all(np.allclose(u0, np.eye(2)) for u0, _ in g.blocks)
    assert check_exact(lower_naive(g), lower_naive(c)).distance <= 1e-12


@pytest.mark.parametrize("m, blocks, last", [(4, 2, 2), (5, 3, 1)])
def test_group_pairs(m: int, blocks: int, last: int) -> None:
    c = random_mn(m, m)
    g = group(c, 2)
    assert g.m == blocks and g.sizes[-1] == last
    assert g.num_qubits == c.num_qubits
    assert check_exact(lower_naive(g), lower_naive(c)).distance <= 1e-12
    assert all(np.allclose(a, b) for a, b in zip(ungroup(g), c.gates))


def test_group_rejects_zero() -> None:
    with pytest.raises(InvalidBlockSize):
        group(random_mn(2, 0), 0)


def test_cascade_layout_chains_controls() -> None:
    c = random_cascade(2, 3, 0)
    assert c.layout() == [(0, (1, 2)), (2, (3, 4)), (4, (5, 6))]
    assert c.k == 2 and c.num_qubits == 7


def test_cascade_validation() -> None:
    with pytest.raises(NonUnitary):
        ControlCascade(((np.eye(2), 2 * np.eye(2)),))
    with pytest.raises(InvalidBlockSize):
        ControlCascade(((np.eye(2), np.eye(4)),))
    with pytest.raises(InvalidBlockSize):
        MNCascade((np.eye(4),))


def test_generators_are_seeded() -> None:
    assert all(np.array_equal(a, b) for a, b in zip(random_mn(5, 7).gates, random_mn(5, 7).gates))
    assert all(np.allclose(g, H) for g in hadamard_mn(3).gates)


def test_naive_depth_is_at_least_m() -> None:
    for m in (4, 8):
        d = depth(lower_to_basis(lower_naive(random_mn(m, m))))
        assert m <= d <= 20 * m


def test_valley_of_one_x_layer() -> None:
    assert np.array_equal(unitary_of(build_valley(ValleySpec((X,)))), X)


def test_valley_of_diagonal_layers_is_diagonal() -> None:
    layers = tuple(np.diag(np.exp(1j * np.array([0.3 * i, 0.7 * i]))) for i in range(1, 4))
    u = unitary_of(build_valley(ValleySpec(layers)))
    assert np.allclose(u, np.diag(np.diag(u)))


def test_hadamard_valley_matches_gate_product() -> None:
    u = unitary_of(build_valley(ValleySpec((H, H))))
    # qubit 0 carries the outer layer, qubit 1 the inner one; outer gates are controlled by qubit 1
    gates = [Controlled(((1, True),), (0,), H.conj().T), OneQubit(1, H), Controlled(((1, True),), (0,), H)]
    assert np.allclose(u, unitary_of(Circuit(2, gates)))
    assert valley_registers([1, 1]) == [(1,), (0,)]


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), ell=st.integers(1, 4))
def test_valley_is_reversed_pair_quotient(seed: int, ell: int) -> None:
    rng = np.random.default_rng(seed)
    gates = [random_unitary(2, rng) for _ in range(ell)]
    v0, v1 = staircase_pair(gates)
    assert np.allclose(unitary_of(build_valley(ValleySpec(tuple(gates)))), rev(v1 @ v0.conj().T), atol=1e-12)
