from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcascade.circuit import (
    AllToAll, Circuit, CompilationReport, Controlled, Diagonal, GlobalPhase, Grid2D, Multiplexer, OneQubit, Swap,
    TwoQubit, adjacency_violations, apply_state, assert_adjacent, depth, embed, gate_count, is_lowered, unitary_of,
)
from qcascade.errors import DimensionMismatch, NonAdjacent, NotLowered, TooManyQubits
from qcascade.numerics import H, X, random_unitary


def random_circuit(n: int, count: int, rng: np.random.Generator) -> Circuit:
    gates = []
    for _ in range(count):
        kind = rng.integers(4)
        qs = [int(q) for q in rng.permutation(n)[:3]]
        if kind == 0:
            gates.append(OneQubit(qs[0], random_unitary(2, rng)))
        elif kind == 1 and n >= 2:
            gates.append(TwoQubit(qs[0], qs[1], random_unitary(4, rng)))
        elif kind == 2 and n >= 2:
            gates.append(Controlled(((qs[0], bool(rng.integers(2))),), (qs[1],), random_unitary(2, rng)))
        else:
            gates.append(Diagonal(tuple(qs[:2]), np.exp(2j * np.pi * rng.random(1 << len(qs[:2])))))
    return Circuit(n, gates)


def independent_product(c: Circuit) -> np.ndarray:
    """Oracle: build each gate's full matrix from basis-state images and multiply."""
    n = c.num_qubits
    u = np.eye(1 << n, dtype=complex)
    for g in c.gates:
        qs = list(g.qubits)
        local = g.local_matrix()
        full = np.zeros((1 << n, 1 << n), dtype=complex)
        for col in range(1 << n):
            bits = [(col >> (n - 1 - i)) & 1 for i in range(n)]
            idx = 0
            for q in qs:
                idx = (idx << 1) | bits[q]
            for out in range(local.shape[0]):
                new = list(bits)
                for j, q in enumerate(qs):
                    new[q] = (out >> (len(qs) - 1 - j)) & 1
                row = int("".join(map(str, new)), 2) if n else 0
                full[row, col] += local[out, idx] if qs else local[0, 0]
        u = full @ u
    return u


def test_empty_circuit_is_identity() -> None:
    assert np.array_equal(unitary_of(Circuit(2)), np.eye(4))


def test_closed_controlled_x_is_cnot() -> None:
    u = unitary_of(Circuit(2, [Controlled(((0, True),), (1,), X)]))
    assert np.array_equal(u, np.eye(4)[[0, 1, 3, 2]])


def test_open_control_fires_on_zero() -> None:
    u = unitary_of(Circuit(2, [Controlled(((0, False),), (1,), X)]))
    assert np.array_equal(u, np.eye(4)[[1, 0, 2, 3]])


def test_unitary_matches_independent_product() -> None:
    c = random_circuit(3, 5, np.random.default_rng(0))
    assert np.max(np.abs(unitary_of(c) - independent_product(c))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 4))
def test_inverse_undoes_circuit(seed: int, n: int) -> None:
    c = random_circuit(n, 6, np.random.default_rng(seed))
    assert np.allclose(unitary_of(c.then(c.inverse())), np.eye(1 << n), atol=1e-12)


def test_qubit_zero_is_most_significant() -> None:
    u = unitary_of(Circuit(2, [OneQubit(0, X)]))
    assert np.array_equal(u, np.kron(X, np.eye(2)))


def test_later_gate_multiplies_on_the_left() -> None:
    rng = np.random.default_rng(1)
    a, b = random_unitary(2, rng), random_unitary(2, rng)
    assert np.allclose(unitary_of(Circuit(1, [OneQubit(0, a), OneQubit(0, b)])), b @ a)


def test_global_phase_is_tracked() -> None:
    assert np.allclose(unitary_of(Circuit(1, [GlobalPhase(np.pi)])), -np.eye(2))


def test_apply_state_examples() -> None:
    psi = np.random.default_rng(2).normal(size=8) + 0j
    assert np.array_equal(apply_state(Circuit(3), psi), psi)
    out = apply_state(Circuit(1, [OneQubit(0, H)]), np.array([1, 0]))
    assert np.allclose(out, np.array([1, 1]) / np.sqrt(2))


def test_apply_state_matches_dense_at_ten_qubits() -> None:
    rng = np.random.default_rng(3)
    c = random_circuit(10, 12, rng)
    psi = rng.normal(size=1024) + 1j * rng.normal(size=1024)
    assert np.max(np.abs(apply_state(c, psi) - unitary_of(c) @ psi)) <= 1e-9


def test_multiplexer_is_block_diagonal() -> None:
    rng = np.random.default_rng(4)
    a, b = random_unitary(2, rng), random_unitary(2, rng)
    u = unitary_of(Circuit(2, [Multiplexer((0,), (1,), (a, b))]))
    assert np.allclose(u[:2, :2], a) and np.allclose(u[2:, 2:], b)
    assert np.allclose(u[:2, 2:], 0)


def test_diagonal_respects_qubit_order() -> None:
    phases = np.exp(1j * np.arange(4))
    u = unitary_of(Circuit(2, [Diagonal((1, 0), phases)]))
    # local index is (q1, q0); basis |q0 q1> = |01> has local index 2
    assert np.isclose(u[1, 1], phases[2])


def test_swap_exchanges_qubits() -> None:
    rng = np.random.default_rng(5)
    a, b = random_unitary(2, rng), random_unitary(2, rng)
    c = Circuit(2, [Swap(0, 1), OneQubit(0, a), Swap(0, 1)])
    assert np.allclose(unitary_of(c), np.kron(np.eye(2), a))
    assert np.allclose(embed(b, (1,), 2), np.kron(np.eye(2), b))


def test_depth_examples() -> None:
    assert depth(Circuit(2)) == 0
    assert depth(Circuit(2, [OneQubit(0, X), OneQubit(1, X)])) == 1
    assert depth(Circuit(3, [TwoQubit(0, 1, np.eye(4)), TwoQubit(1, 2, np.eye(4)), OneQubit(0, X)])) == 2
    with pytest.raises(NotLowered):
        depth(Circuit(2, [Controlled(((0, True),), (1,), X)]))


def test_guards_and_bounds() -> None:
    with pytest.raises(DimensionMismatch):
        Circuit(2, [OneQubit(2, X)])
    with pytest.raises(TooManyQubits):
        unitary_of(Circuit(14))
    with pytest.raises(DimensionMismatch):
        apply_state(Circuit(2), np.ones(3))


def test_adjacency_audit() -> None:
    grid = Grid2D(2, 2, ((0, 0), (1, 0), (1, 1), (0, 1)))
    good = Circuit(4, [TwoQubit(0, 1, np.eye(4)), Swap(2, 3)], connectivity=grid)
    bad = Circuit(4, [TwoQubit(0, 2, np.eye(4))], connectivity=grid)
    assert adjacency_violations(good) == [] and adjacency_violations(bad) == [0]
    assert_adjacent(good)
    with pytest.raises(NonAdjacent):
        assert_adjacent(bad)
    assert AllToAll().adjacent(0, 5)
    assert grid.distance(0, 2) == 2


def test_lowered_and_counts() -> None:
    c = Circuit(2, [OneQubit(0, X), GlobalPhase(0.1), TwoQubit(0, 1, np.eye(4))])
    assert is_lowered(c) and gate_count(c) == 2
    assert not is_lowered(Circuit(1, [Diagonal((0,), np.ones(2))]))


def test_report_serializes_extras() -> None:
    rep = CompilationReport(3, 4, 0, extra={"m": 2})
    d = rep.to_dict()
    assert d["depth_basis"] == 3 and d["measured_error"] == "not-checked" and d["m"] == 2
