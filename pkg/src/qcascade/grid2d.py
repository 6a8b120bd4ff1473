"""Nearest-neighbour compilation on a 2D grid.

Staircase wires are laid along a Hilbert curve, so the wires touched by any
block of the log-depth recursion at level s sit inside a curve segment of
about 2^(s+1) cells, a region of diameter O(2^(s/2)). Each block gate is
applied after swap chains confined to that region bring its qubits next to
each other, and the chains are undone afterwards; regions of gates in the
same layer are disjoint, so their routing runs in parallel and the level
costs add up geometrically to O(sqrt(m)).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cascade import MNCascade
from .circuit import (
    Circuit, CompilationReport, Controlled, Diagonal, Grid2D, Multiplexer, OneQubit, Swap, TwoQubit,
    assert_adjacent, depth, gate_count,
)
from .errors import BadSpec, GuardExceeded, InvalidBlockSize, NonAdjacent, NotABijection
from .numerics import X
from .parallelize import mn_schedule
from .synthesis import fuse, lower_to_basis


# --- tree embedding ----------------------------------------------------------

@dataclass(frozen=True)
class TreeEmbedding:
    """Complete binary tree drawn on a grid; vertices are (height, index)."""

    width: int
    height: int
    leaves: int
    vertices: dict
    edges: dict
    max_edge_length: int
    per_level_edge_lengths: tuple[int, ...]


def _line(a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
    (x0, y0), (x1, y1) = a, b
    path = [(x0, y0)]
    while path[-1][0] != x1:
        x, y = path[-1]
        path.append((x + (1 if x1 > x else -1), y))
    while path[-1][1] != y1:
        x, y = path[-1]
        path.append((x, y + (1 if y1 > y else -1)))
    return path


def embed_tree(leaves: int) -> TreeEmbedding:
    """H-tree layout of the complete binary tree with 2^ceil(log2 leaves) leaves.

    Leaves sit on even-even cells; a vertex of height h is the centre of its
    region, which holds 2^ceil(h/2) x 2^floor(h/2) leaves and is split across
    its longer side. Centres of different heights fall in different residue
    classes, so vertices never share a cell, and edges are straight segments
    of length 2^(ceil(h/2) - 1) or 2^(floor(h/2) - 1).
    Subtrees holding no leaf below ``leaves`` are pruned.
    """
    if leaves < 1:
        raise BadSpec("a tree needs at least one leaf")
    d = (leaves - 1).bit_length()
    vertices, edges, levels = {}, {}, [0] * d

    def centre(h: int, x0: int, y0: int) -> tuple[int, int]:
        w, hh = 1 << ((h + 1) // 2), 1 << (h // 2)
        return 2 * x0 + w - 1, 2 * y0 + hh - 1

    def build(h: int, index: int, x0: int, y0: int) -> bool:
        if index << h >= leaves:
            return False
        vertices[(h, index)] = centre(h, x0, y0)
        if h == 0:
            return True
        w, hh = 1 << ((h + 1) // 2), 1 << (h // 2)
        if h % 2:  # wider than tall: split into left and right halves
            kids = ((x0, y0), (x0 + w // 2, y0))
        else:
            kids = ((x0, y0), (x0, y0 + hh // 2))
        for j, (cx, cy) in enumerate(kids):
            if build(h - 1, 2 * index + j, cx, cy):
                path = _line(vertices[(h, index)], vertices[(h - 1, 2 * index + j)])
                edges[((h, index), (h - 1, 2 * index + j))] = path
                levels[h - 1] = max(levels[h - 1], len(path) - 1)
        return True

    build(d, 0, 0, 0)
    width = 2 * (1 << ((d + 1) // 2)) - 1
    height = 2 * (1 << (d // 2)) - 1
    return TreeEmbedding(width, height, leaves, vertices, edges, max(levels, default=0), tuple(levels))


# --- permutation routing -----------------------------------------------------

def _transposition_sort(keys: list[int]) -> list[list[int]]:
    """Odd-even transposition rounds sorting keys; returns swapped positions per round."""
    keys = list(keys)
    rounds = []
    for r in range(len(keys)):
        swaps = []
        for i in range(r % 2, len(keys) - 1, 2):
            if keys[i] > keys[i + 1]:
                keys[i], keys[i + 1] = keys[i + 1], keys[i]
                swaps.append(i)
        rounds.append(swaps)
    while rounds and not rounds[-1]:
        rounds.pop()
    return rounds


def _color_columns(src_rows: np.ndarray, dst_rows: np.ndarray, src_cols: np.ndarray, height: int,
                   width: int) -> np.ndarray:
    """Give each token a column so every column holds one token per source and destination row.

    The tokens form a width-regular bipartite multigraph between source and
    destination rows; peeling off perfect matchings edge-colours it. Each
    matching is a min-cost one that prefers tokens already in that column,
    so tokens that need not move stay put.
    """
    pool: dict[tuple[int, int], list[int]] = {}
    for t, (a, b) in enumerate(zip(src_rows, dst_rows)):
        pool.setdefault((int(a), int(b)), []).append(t)
    column = np.empty(len(src_rows), dtype=int)
    missing = float(len(src_rows) + 1)
    for c in range(width):
        cost = np.full((height, height), missing)
        for (a, b), ts in pool.items():
            if ts:
                cost[a, b] = 0.0 if any(src_cols[t] == c for t in ts) else 1.0
        rows, cols = linear_sum_assignment(cost)
        for a, b in zip(rows, cols):
            ts = pool[(int(a), int(b))]
            here = [t for t in ts if src_cols[t] == c]
            t = here[0] if here else ts[0]
            ts.remove(t)
            column[t] = c
    return column


def route_permutation(perm: dict, grid: Grid2D) -> Circuit:
    """Swap network moving the state at cell s to cell perm[s] (row, column, row phases).

    Every cell of the grid must hold a qubit. Depth is at most 2*width + height.
    """
    cells = {(x, y) for x in range(grid.width) for y in range(grid.height)}
    at = grid.qubit_at()
    if set(at) != cells:
        raise BadSpec("routing needs a grid with every cell occupied")
    full = {cell: perm.get(cell, cell) for cell in cells}
    if set(full.values()) != cells:
        raise NotABijection("perm is not a bijection on the grid cells")
    w, h = grid.width, grid.height
    # token at source cell (x, y)
    tokens = sorted(cells, key=lambda c: (c[1], c[0]))
    src = np.array([[x, y] for x, y in tokens])
    dst = np.array([full[c] for c in tokens])
    col = _color_columns(src[:, 1], dst[:, 1], src[:, 0], h, w)
    pos = {tuple(s): tuple(s) for s in src}  # token id (source cell) -> current cell

    gates = []

    def run(lines, key_of):
        # lines: list of lists of cells along a row or column, in order
        rounds_all = []
        for line in lines:
            occupant = {pos_cell: tok for tok, pos_cell in pos.items()}
            toks = [occupant[cell] for cell in line]
            rounds_all.append((line, toks, _transposition_sort([key_of(t) for t in toks])))
        depth_ = max((len(r) for _, _, r in rounds_all), default=0)
        for r in range(depth_):
            for line, toks, rounds in rounds_all:
                if r >= len(rounds):
                    continue
                for i in rounds[r]:
                    a, b = line[i], line[i + 1]
                    gates.append(Swap(at[a], at[b]))
                    toks[i], toks[i + 1] = toks[i + 1], toks[i]
                    pos[toks[i]], pos[toks[i + 1]] = a, b

    index = {tuple(s): i for i, s in enumerate(src)}
    rows = [[(x, y) for x in range(w)] for y in range(h)]
    columns = [[(x, y) for y in range(h)] for x in range(w)]
    run(rows, lambda t: col[index[t]])
    run(columns, lambda t: int(dst[index[t]][1]))
    run(rows, lambda t: int(dst[index[t]][0]))
    return Circuit(len(grid.placement), gates, connectivity=grid)


def track_labels(c: Circuit) -> dict:
    """Symbolic label propagation: cell of origin -> cell where its state ends."""
    grid = c.connectivity
    holder = {q: q for q in range(c.num_qubits)}  # physical qubit -> label (origin qubit)
    for g in c.gates:
        if not isinstance(g, Swap):
            raise BadSpec("label tracking only follows Swap gates")
        holder[g.q_a], holder[g.q_b] = holder[g.q_b], holder[g.q_a]
    return {grid.placement[label]: grid.placement[q] for q, label in holder.items()}


# --- Hilbert placement -------------------------------------------------------

def hilbert_d2xy(order: int, d: int) -> tuple[int, int]:
    """Cell of index d on the Hilbert curve of a 2^order square, from (0, 0) to (2^order - 1, 0)."""
    x = y = 0
    t = d
    s = 1
    while s < (1 << order):
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x, y = s - 1 - x, s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t //= 4
        s *= 2
    return x, y


def hilbert_cells(count: int) -> tuple[int, int, list[tuple[int, int]]]:
    """Smallest 2^a x 2^a or 2^(a+1) x 2^a grid whose Hilbert path has >= count cells."""
    a = 0
    while True:
        side = 1 << a
        if side * side >= count:
            cells = [hilbert_d2xy(a, d) for d in range(side * side)]
            return side, side, cells
        if 2 * side * side >= count:
            first = [hilbert_d2xy(a, d) for d in range(side * side)]
            second = [(x + side, y) for x, y in first]
            return 2 * side, side, first + second
        a += 1


# --- staircase compiler ------------------------------------------------------

class _Router:
    """Tracks which physical qubit holds each logical state while emitting swaps."""

    def __init__(self, grid: Grid2D, curve: list[int]):
        self.grid = grid
        self.at = grid.qubit_at()
        self.curve = curve  # curve position -> physical qubit
        self.curve_pos = {q: i for i, q in enumerate(curve)}
        self.where = {q: q for q in range(len(grid.placement))}
        self.holder = dict(self.where)

    def _path(self, a: int, goal_cells: set, region: set, avoid: set) -> list[int]:
        prev = {a: None}
        queue = deque([a])
        while queue:
            q = queue.popleft()
            if q in goal_cells:
                path = [q]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            x, y = self.grid.placement[q]
            for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                nq = self.at.get(nb)
                if nq is None or nq in prev or nq not in region or nq in avoid:
                    continue
                prev[nq] = q
                queue.append(nq)
        raise NonAdjacent(f"no path from qubit {a} inside its region")

    def _swap(self, a: int, b: int, out: list) -> None:
        out.append(Swap(a, b))
        la, lb = self.holder[a], self.holder[b]
        self.holder[a], self.holder[b] = lb, la
        self.where[la], self.where[lb] = b, a

    def neighbours(self, q: int) -> set:
        x, y = self.grid.placement[q]
        return {self.at[nb] for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)) if nb in self.at}

    def gather(self, logical: tuple[int, ...]) -> tuple[list, dict]:
        """Swap the states of ``logical`` next to the last one, inside their curve segment."""
        positions = [self.curve_pos[q] for q in logical]
        lo, hi = min(positions), max(positions)
        region = set(self.curve[lo:hi + 1])
        anchor = self.where[logical[-1]]
        swaps: list = []
        placed = {anchor}
        for q in logical[:-1]:
            start = self.where[q]
            goal = set().union(*(self.neighbours(p) for p in placed)) - placed
            if start in goal:
                placed.add(start)
                continue
            path = self._path(start, goal, region, placed)
            for a, b in zip(path[:-1], path[1:]):
                self._swap(a, b, swaps)
            placed.add(self.where[q])
        return swaps, {q: self.where[q] for q in logical}

    def release(self, swaps: list) -> list:
        back = []
        for s in reversed(swaps):
            self._swap(s.q_a, s.q_b, back)
        return back


def _relabel(g, mapping: dict):
    if isinstance(g, OneQubit):
        return OneQubit(mapping[g.qubit], g.matrix)
    if isinstance(g, TwoQubit):
        return TwoQubit(mapping[g.q0], mapping[g.q1], g.matrix)
    if isinstance(g, Controlled):
        return Controlled(tuple((mapping[q], p) for q, p in g.controls), tuple(mapping[q] for q in g.targets), g.body)
    if isinstance(g, Multiplexer):
        return Multiplexer(tuple(mapping[q] for q in g.controls), tuple(mapping[q] for q in g.targets), g.cases)
    if isinstance(g, Diagonal):
        return Diagonal(tuple(mapping[q] for q in g.targets), g.phases)
    raise TypeError(f"cannot relabel {g!r}")


def lightcone_bound(c: Circuit, a: int, b: int) -> int:
    """Depth below which qubits a and b cannot have interacted: half their grid distance."""
    return c.connectivity.distance(a, b) // 2


def compile_mn_2d(c: MNCascade, b: int = 2) -> tuple[Circuit, CompilationReport]:
    """Log-depth staircase compilation with every two-qubit gate between grid neighbours.

    Wire j of the staircase is placed at Hilbert-curve index j; unused cells
    of the grid are ancillae that stay in |0>.
    """
    if b < 2:
        raise InvalidBlockSize(f"block size must be at least 2, got {b}")
    if c.m < 1:
        raise GuardExceeded("staircase has no gates")
    n = c.num_qubits
    width, height, cells = hilbert_cells(n)
    # physical qubit j = curve index j, so data qubits keep their indices
    grid = Grid2D(width, height, tuple(cells))
    router = _Router(grid, list(range(len(cells))))
    gates = []
    for stage in mn_schedule(tuple(range(n)), c.gates, b):
        g = stage.gate
        qs = g.qubits
        order = tuple(q for q in qs if q != qs[-1]) + (qs[-1],)
        swaps, mapping = router.gather(order)
        gates += swaps
        gates.append(_relabel(g, mapping))
        gates += router.release(swaps)
    circ = Circuit(n, gates, len(cells) - n, grid)
    circ = fuse(lower_to_basis(circ))
    assert_adjacent(circ)
    d = depth(circ)
    bound = lightcone_bound(circ, 0, n - 1)
    if d < bound:
        raise NonAdjacent(f"depth {d} is below the lightcone bound {bound}")
    report = CompilationReport(d, gate_count(circ), len(cells) - n,
                               extra={"m": c.m, "grid": [width, height], "lightcone_bound": bound})
    return circ, report


def split_shared_controls(c: Circuit) -> Circuit:
    """Give every gate its own copy of control wires shared with earlier gates.

    Valid for a layer of multiplexers and diagonals in which each shared qubit
    is only ever read (a control, or a diagonal wire): a CNOT copy onto a fresh
    ancilla carries the same basis value, and a second CNOT cleans it up. The
    result runs the gates in one layer instead of several.
    """
    written = set()
    for g in c.gates:
        if isinstance(g, Multiplexer):
            written |= set(g.targets)
        elif not isinstance(g, Diagonal):
            raise BadSpec(f"cannot split controls of {type(g).__name__}")
    seen: set = set()
    fresh = c.num_qubits
    before, body, after = [], [], []
    for g in c.gates:
        read = g.controls if isinstance(g, Multiplexer) else g.targets
        mapping = {}
        for q in read:
            if q in seen:
                if q in written:
                    raise BadSpec(f"qubit {q} is both read and written")
                mapping[q] = fresh
                copy = Controlled(((q, True),), (fresh,), X)
                before.append(copy)
                after.append(copy)
                fresh += 1
            seen.add(q)
        if isinstance(g, Multiplexer):
            body.append(Multiplexer(tuple(mapping.get(q, q) for q in g.controls), g.targets, g.cases))
        else:
            body.append(Diagonal(tuple(mapping.get(q, q) for q in g.targets), g.phases))
    return Circuit(c.num_data_qubits, before + body + after, c.num_ancilla + fresh - c.num_qubits)
