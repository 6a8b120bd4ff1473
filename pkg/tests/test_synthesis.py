from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qcascade.circuit import (
    Circuit, Controlled, Diagonal, GlobalPhase, Grid2D, Multiplexer, OneQubit, adjacency_violations, is_lowered,
    unitary_of,
)
from qcascade.numerics import op_norm_distance, random_unitary
from qcascade.synthesis import fuse, lower_to_basis, multiplexed_rz, rz, synth_unitary

seeds = st.integers(0, 2**31)


def test_trivial_diagonal_lowers_to_nothing() -> None:
    low = lower_to_basis(Circuit(1, [Diagonal((0,), np.ones(2))]))
    assert all(isinstance(g, GlobalPhase) for g in low.gates)
    assert np.allclose(unitary_of(low), np.eye(2))


def test_one_qubit_diagonal_lowers_to_one_gate() -> None:
    phases = np.array([1, np.exp(1j * np.pi / 4)])
    low = lower_to_basis(Circuit(1, [Diagonal((0,), phases)]))
    assert len(low.gates) == 1 and isinstance(low.gates[0], OneQubit)
    assert np.allclose(low.gates[0].matrix, np.diag(phases))


@settings(max_examples=20, deadline=None)
@given(seed=seeds, controls=st.integers(1, 3))
def test_multiplexed_rz_matches_blocks(seed: int, controls: int) -> None:
    angles = np.random.default_rng(seed).uniform(-np.pi, np.pi, 1 << controls)
    c = Circuit(controls + 1, multiplexed_rz(range(controls), controls, angles))
    expected = np.zeros((2 << controls,) * 2, dtype=complex)
    for x, a in enumerate(angles):
        expected[2 * x:2 * x + 2, 2 * x:2 * x + 2] = rz(a)
    assert np.max(np.abs(unitary_of(c) - expected)) <= 1e-12


def test_multiplexer_with_two_controls_lowers_exactly() -> None:
    rng = np.random.default_rng(0)
    g = Multiplexer((0, 2), (1,), tuple(random_unitary(2, rng) for _ in range(4)))
    c = Circuit(3, [g])
    low = lower_to_basis(c)
    assert is_lowered(low)
    assert op_norm_distance(unitary_of(low), unitary_of(c)) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_unitary_synthesis_is_exact(seed: int, n: int) -> None:
    u = random_unitary(1 << n, np.random.default_rng(seed))
    c = Circuit(n, synth_unitary(range(n), u))
    low = lower_to_basis(c)
    assert is_lowered(low)
    assert op_norm_distance(unitary_of(low), u) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, targets=st.integers(1, 2), controls=st.integers(1, 2))
def test_multiplexer_lowering_is_exact(seed: int, targets: int, controls: int) -> None:
    rng = np.random.default_rng(seed)
    cases = tuple(random_unitary(1 << targets, rng) for _ in range(1 << controls))
    c = Circuit(targets + controls, [Multiplexer(tuple(range(controls)), tuple(range(controls, controls + targets)),
                                                 cases)])
    assert op_norm_distance(unitary_of(lower_to_basis(c)), unitary_of(c)) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_diagonal_and_controlled_lowering(seed: int) -> None:
    rng = np.random.default_rng(seed)
    phases = np.exp(2j * np.pi * rng.random(8))
    c = Circuit(4, [Diagonal((3, 0, 2), phases), Controlled(((1, False), (3, True)), (0, 2), random_unitary(4, rng))])
    assert op_norm_distance(unitary_of(lower_to_basis(c)), unitary_of(c)) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds)
def test_fuse_preserves_unitary_and_never_adds_gates(seed: int) -> None:
    rng = np.random.default_rng(seed)
    c = lower_to_basis(Circuit(3, [Multiplexer((0,), (1, 2), tuple(random_unitary(4, rng) for _ in range(2))),
                                   Controlled(((2, True),), (0,), random_unitary(2, rng))]))
    fused = fuse(c)
    assert len(fused.gates) <= len(c.gates)
    assert op_norm_distance(unitary_of(fused), unitary_of(c)) <= 1e-9


def test_grid_lowering_respects_adjacency() -> None:
    rng = np.random.default_rng(1)
    # a line 0 - 1 - 2 - 3; the multiplexer couples the two ends
    grid = Grid2D(4, 1, ((0, 0), (1, 0), (2, 0), (3, 0)))
    c = Circuit(4, [Multiplexer((0,), (3,), (random_unitary(2, rng), random_unitary(2, rng)))], connectivity=grid)
    low = lower_to_basis(c)
    assert adjacency_violations(low) == []
    assert op_norm_distance(unitary_of(low), unitary_of(c)) <= 1e-9
