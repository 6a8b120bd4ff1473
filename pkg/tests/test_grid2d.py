from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcascade.cascade import lower_naive, random_mn
from qcascade.circuit import (
    Circuit, Diagonal, Grid2D, Multiplexer, Swap, adjacency_violations, depth, unitary_of,
)
from qcascade.errors import BadSpec, InvalidBlockSize, NotABijection
from qcascade.grid2d import (
    compile_mn_2d, embed_tree, hilbert_cells, lightcone_bound, route_permutation, split_shared_controls,
    track_labels,
)
from qcascade.numerics import random_unitary
from qcascade.verify import check_exact


def full_grid(width: int, height: int) -> Grid2D:
    return Grid2D(width, height, tuple((x, y) for y in range(height) for x in range(width)))


def test_tree_with_one_leaf() -> None:
    t = embed_tree(1)
    assert len(t.vertices) == 1 and not t.edges and t.width == t.height == 1


def test_tree_with_four_leaves() -> None:
    t = embed_tree(4)
    assert t.width <= 4 and t.height <= 4
    assert all(len(path) - 1 <= 2 for path in t.edges.values())
    assert len(t.edges) == 6


@pytest.mark.parametrize("leaves", [3, 5, 16, 37, 64])
def test_tree_layout_is_a_valid_embedding(leaves: int) -> None:
    t = embed_tree(leaves)
    cells = list(t.vertices.values())
    assert len(cells) == len(set(cells))
    assert all(0 <= x < t.width and 0 <= y < t.height for x, y in cells)
    assert sum(1 for h, _ in t.vertices if h == 0) == leaves
    for (parent, child), path in t.edges.items():
        assert path[0] == t.vertices[parent] and path[-1] == t.vertices[child]
        assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(path, path[1:]))


def test_tree_edge_lengths_scale_with_sqrt_leaves() -> None:
    ratios = [sum(embed_tree(n).per_level_edge_lengths) / math.sqrt(n) for n in (16, 64, 256)]
    assert max(ratios) <= 1.5 * min(ratios)
    assert max(ratios) <= 2.0


def test_tree_rejects_empty() -> None:
    with pytest.raises(BadSpec):
        embed_tree(0)


def test_identity_route_is_empty() -> None:
    assert route_permutation({}, full_grid(3, 3)).gates == ()


def test_adjacent_swap_route_is_one_gate() -> None:
    c = route_permutation({(0, 0): (1, 0), (1, 0): (0, 0)}, full_grid(3, 2))
    assert len(c.gates) == 1 and isinstance(c.gates[0], Swap)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), w=st.integers(1, 5), h=st.integers(1, 5))
def test_route_realizes_permutation(seed: int, w: int, h: int) -> None:
    grid = full_grid(w, h)
    cells = list(grid.placement)
    image = [cells[i] for i in np.random.default_rng(seed).permutation(len(cells))]
    perm = dict(zip(cells, image))
    c = route_permutation(perm, grid)
    assert track_labels(c) == perm
    assert adjacency_violations(c) == []
    assert depth(c) <= 2 * w + h


def test_route_depth_on_four_by_four() -> None:
    grid = full_grid(4, 4)
    cells = list(grid.placement)
    image = [cells[i] for i in np.random.default_rng(1).permutation(16)]
    c = route_permutation(dict(zip(cells, image)), grid)
    assert depth(c) <= 24


def test_route_moves_amplitudes() -> None:
    grid = full_grid(2, 2)
    perm = {(0, 0): (1, 1), (1, 1): (0, 0)}
    c = route_permutation(perm, grid)
    psi = np.zeros(16)
    psi[0b1000] = 1  # qubit 0 (cell (0, 0)) set
    out = unitary_of(Circuit(4, c.gates)) @ psi
    assert out[0b0001] == pytest.approx(1)


def test_route_rejects_bad_input() -> None:
    with pytest.raises(NotABijection):
        route_permutation({(0, 0): (1, 0)}, full_grid(2, 1))
    with pytest.raises(BadSpec):
        route_permutation({}, Grid2D(2, 2, ((0, 0), (1, 0))))


def test_hilbert_cells_form_a_path() -> None:
    for count in (2, 5, 9, 30, 100):
        w, h, cells = hilbert_cells(count)
        assert len(cells) >= count and len(set(cells)) == len(cells) == w * h
        assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(cells, cells[1:]))


def test_two_dimensional_single_gate() -> None:
    c = random_mn(1, 0)
    circ, report = compile_mn_2d(c)
    assert report.extra["grid"] == [2, 1] and report.ancilla_count == 0
    assert circ.connectivity.adjacent(0, 1)
    assert check_exact(circ, lower_naive(c)).distance <= 1e-12


@pytest.mark.parametrize("m", [2, 4, 6])
def test_two_dimensional_compile_is_exact_and_adjacent(m: int) -> None:
    c = random_mn(m, 30 + m)
    circ, report = compile_mn_2d(c)
    assert adjacency_violations(circ) == []
    res = check_exact(circ, lower_naive(c))
    assert res.distance <= 1e-6 and res.ancilla_residual <= 1e-9
    assert report.depth_basis >= lightcone_bound(circ, 0, m)


def test_two_dimensional_rejects_small_blocks() -> None:
    with pytest.raises(InvalidBlockSize):
        compile_mn_2d(random_mn(3, 0), 1)


def test_split_shared_controls_keeps_action() -> None:
    rng = np.random.default_rng(2)
    # two multiplexers and a diagonal reading qubit 0
    c = Circuit(4, [Multiplexer((0,), (1,), (random_unitary(2, rng), random_unitary(2, rng))),
                    Multiplexer((0,), (2,), (random_unitary(2, rng), random_unitary(2, rng))),
                    Diagonal((0, 3), np.exp(1j * rng.random(4)))])
    split = split_shared_controls(c)
    assert split.num_ancilla == 2
    body = [g for g in split.gates if isinstance(g, (Multiplexer, Diagonal))]
    used = [q for g in body for q in g.qubits]
    assert len(used) == len(set(used))
    res = check_exact(split, c)
    assert res.distance <= 1e-12 and res.ancilla_residual <= 1e-12


def test_split_rejects_written_controls() -> None:
    rng = np.random.default_rng(3)
    cases = (random_unitary(2, rng), random_unitary(2, rng))
    c = Circuit(3, [Multiplexer((0,), (1,), cases), Multiplexer((1,), (2,), cases), Multiplexer((1,), (0,), cases)])
    with pytest.raises(BadSpec):
        split_shared_controls(c)
