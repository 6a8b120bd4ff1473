"""Lowering of block gates to one- and two-qubit basis gates."""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.linalg import schur

from .circuit import (
    BASIS_KINDS, Circuit, Controlled, Diagonal, GlobalPhase, Grid2D, Multiplexer,
    OneQubit, Swap, TwoQubit, unitary_gate,
)
from .errors import NonAdjacent
from .numerics import PHI, Z, cs_decompose

CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
_TRIVIAL = 1e-14


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def multiplexed_rz(controls, target: int, angles) -> list:
    """Gray-code chain realizing Rz(angles[x]) on target when controls read x."""
    controls = tuple(controls)
    angles = np.asarray(angles, dtype=float)
    r = len(controls)
    if r == 0:
        return [] if abs(angles[0]) < _TRIVIAL else [OneQubit(target, rz(angles[0]))]
    size = 1 << r
    xs = np.arange(size)
    gates = []
    for i in range(size):
        g = _gray(i)
        signs = np.array([(-1) ** bin(g & x).count("1") for x in xs])
        theta = float(signs @ angles) / size
        if abs(theta) > _TRIVIAL:
            gates.append(OneQubit(target, rz(theta)))
        changed = g ^ _gray((i + 1) % size)
        bit = changed.bit_length() - 1
        gates.append(TwoQubit(controls[r - 1 - bit], target, CNOT))
    return gates


def synth_diagonal(qubits, phases) -> list:
    qubits = tuple(qubits)
    phases = np.asarray(phases, dtype=complex)
    if len(qubits) <= 2:
        if np.max(np.abs(phases - 1)) < _TRIVIAL:
            return []
        return [unitary_gate(qubits, np.diag(phases))]
    alpha = np.angle(phases).reshape(-1, 2)
    common = alpha.mean(axis=1)
    diff = alpha[:, 1] - alpha[:, 0]
    return multiplexed_rz(qubits[:-1], qubits[-1], diff) + synth_diagonal(qubits[:-1], np.exp(1j * common))


def synth_unitary(qubits, u) -> list:
    qubits = tuple(qubits)
    u = np.asarray(u, dtype=complex)
    if len(qubits) == 0:
        return [GlobalPhase(float(np.angle(u[0, 0])))]
    if len(qubits) <= 2:
        return [unitary_gate(qubits, u)]
    if _is_diagonal(u):
        return synth_diagonal(qubits, np.diag(u))
    cs = cs_decompose(u, tol=1e-8)
    top, rest = qubits[0], qubits[1:]
    dm = np.concatenate([cs.sigma1 - 1j * cs.sigma2, cs.sigma1 + 1j * cs.sigma2])
    out = synth_multiplexer((top,), rest, (cs.t0, cs.t1))
    out.append(OneQubit(top, PHI.conj().T @ Z))
    out += synth_diagonal(qubits, dm)
    out.append(OneQubit(top, Z @ PHI))
    out += synth_multiplexer((top,), rest, (cs.s0, cs.s1))
    return out


def _is_diagonal(m: np.ndarray) -> bool:
    return np.max(np.abs(m - np.diag(np.diag(m)))) < _TRIVIAL


def demultiplex(a: np.ndarray, b: np.ndarray):
    """Split diag(a, b) = (I x v) diag(d, d*) (I x w)."""
    t, v = schur(a @ b.conj().T, output="complex")
    d = np.sqrt(np.diag(t))
    w = np.diag(d) @ v.conj().T @ b
    return v, d, w


def synth_multiplexer(controls, targets, cases) -> list:
    controls, targets = tuple(controls), tuple(targets)
    cases = [np.asarray(m, dtype=complex) for m in cases]
    if not controls:
        return synth_unitary(targets, cases[0])
    if all(_is_diagonal(m) for m in cases):
        return synth_diagonal(controls + targets, np.concatenate([np.diag(m) for m in cases]))
    if len(controls) + len(targets) <= 2:
        return [unitary_gate(controls + targets, Multiplexer(controls, targets, tuple(cases)).local_matrix())]
    half = len(cases) // 2
    vs, ds, ws = [], [], []
    for a, b in zip(cases[:half], cases[half:]):
        v, d, w = demultiplex(a, b)
        vs.append(v)
        ds.append(d)
        ws.append(w)
    phases = np.concatenate([np.concatenate(ds), np.conj(np.concatenate(ds))])
    rest = controls[1:]
    return (
        synth_multiplexer(rest, targets, ws)
        + synth_diagonal(controls + targets, phases)
        + synth_multiplexer(rest, targets, vs)
    )


def lower_gate(g) -> list:
    if isinstance(g, Swap):
        return [g]
    if isinstance(g, BASIS_KINDS):
        return [g]
    if isinstance(g, Diagonal):
        return synth_diagonal(g.targets, g.phases)
    if isinstance(g, Controlled):
        g = g.as_multiplexer()
    if isinstance(g, Multiplexer):
        return synth_multiplexer(g.controls, g.targets, g.cases)
    raise TypeError(f"cannot lower {g!r}")


def _grid_path(conn: Grid2D, a: int, b: int, prefer) -> list[int]:
    at = conn.qubit_at()
    for allowed in (set(prefer) | {a, b}, None):
        prev = {a: None}
        queue = deque([a])
        while queue:
            q = queue.popleft()
            if q == b:
                path = [b]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            x, y = conn.placement[q]
            for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                nq = at.get(nb)
                if nq is None or nq in prev or (allowed is not None and nq not in allowed):
                    continue
                prev[nq] = q
                queue.append(nq)
    raise NonAdjacent(f"no grid path between qubits {a} and {b}")


def _route_local(conn: Grid2D, gates: list, block_qubits) -> list:
    out = []
    for g in gates:
        if isinstance(g, TwoQubit) and not conn.adjacent(g.q0, g.q1):
            path = _grid_path(conn, g.q0, g.q1, block_qubits)
            swaps = [Swap(p, q) for p, q in zip(path[:-2], path[1:-1])]
            out += swaps
            out.append(TwoQubit(path[-2], g.q1, g.matrix))
            out += swaps[::-1]
        else:
            out.append(g)
    return out


def lower_to_basis(c: Circuit) -> Circuit:
    gates = []
    grid = c.connectivity if isinstance(c.connectivity, Grid2D) else None
    for g in c.gates:
        low = lower_gate(g)
        if grid is not None:
            low = _route_local(grid, low, g.qubits)
        gates += low
    return c.with_gates(gates)


def fuse(c: Circuit) -> Circuit:
    """Peephole merge of neighbouring 1- and 2-qubit gates sharing qubits."""
    out: list = []
    last: dict[int, int] = {}
    for g in c.gates:
        if not isinstance(g, (OneQubit, TwoQubit, Swap)):
            out.append(g)
            for q in g.qubits:
                last[q] = len(out) - 1
            continue
        qs = g.qubits
        j = max(last.get(q, -1) for q in qs)
        prev = out[j] if j >= 0 else None
        if prev is not None and isinstance(prev, (OneQubit, TwoQubit, Swap)):
            merged = _merge(prev, g)
            if merged is not None:
                out[j] = merged
                for q in qs:
                    last[q] = j
                continue
        out.append(g)
        for q in qs:
            last[q] = len(out) - 1
    return c.with_gates(out)


def _merge(first, second):
    """Return a single gate equal to `second` after `first`, or None."""
    a, b = set(first.qubits), set(second.qubits)
    if not (a <= b or b <= a):
        return None
    host = first if len(first.qubits) >= len(second.qubits) else second
    qs = host.qubits
    m1 = _on(first, qs)
    m2 = _on(second, qs)
    return unitary_gate(qs, m2 @ m1)


def _on(g, qs) -> np.ndarray:
    m = g.local_matrix()
    if g.qubits == qs:
        return m
    if len(qs) == 2 and len(g.qubits) == 2:
        return Swap(0, 1).local_matrix() @ m @ Swap(0, 1).local_matrix()
    if qs[0] == g.qubits[0]:
        return np.kron(m, np.eye(2))
    return np.kron(np.eye(2), m)
