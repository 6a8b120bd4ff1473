"""Input programs: control cascades, Moore-Nilsson staircases and valleys."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Controlled, Multiplexer, unitary_gate, unitary_of
from .errors import InvalidBlockSize
from .numerics import num_qubits, random_unitary, require_unitary


@dataclass(frozen=True, eq=False)
class ControlCascade:
    """Blocks (U0, U1); block j is controlled by the last target of block j-1.

    Block sizes may differ (a ragged final group is allowed); ``k`` is the
    size of the first block.
    """

    blocks: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        blocks = []
        for u0, u1 in self.blocks:
            u0 = require_unitary(u0, what="cascade body")
            u1 = require_unitary(u1, what="cascade body")
            if u0.shape != u1.shape:
                raise InvalidBlockSize("U0 and U1 of a block differ in size")
            blocks.append((u0, u1))
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> list[int]:
        return [num_qubits(u0.shape[0]) for u0, _ in self.blocks]

    @property
    def k(self) -> int:
        return self.sizes[0] if self.blocks else 0

    @property
    def num_qubits(self) -> int:
        return 1 + sum(self.sizes)

    def layout(self) -> list[tuple[int, tuple[int, ...]]]:
        """(control qubit, target qubits) of every block."""
        out = []
        ctrl, start = 0, 1
        for size in self.sizes:
            targets = tuple(range(start, start + size))
            out.append((ctrl, targets))
            ctrl, start = targets[-1], start + size
        return out


@dataclass(frozen=True, eq=False)
class MNCascade:
    """Gate j (0-based) acts on qubit j+1, closed-controlled by qubit j."""

    gates: tuple[np.ndarray, ...]

    def __post_init__(self):
        gates = tuple(require_unitary(g, what="staircase gate") for g in self.gates)
        for g in gates:
            if g.shape != (2, 2):
                raise InvalidBlockSize("staircase gates must be 2x2")
        object.__setattr__(self, "gates", gates)

    @property
    def m(self) -> int:
        return len(self.gates)

    @property
    def num_qubits(self) -> int:
        return self.m + 1


@dataclass(frozen=True, eq=False)
class ValleySpec:
    """Layers U^(1..l), innermost first."""

    layers: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(require_unitary(u, what="valley layer") for u in self.layers))

    @property
    def sizes(self) -> list[int]:
        return [num_qubits(u.shape[0]) for u in self.layers]


def lower_naive(c: ControlCascade | MNCascade) -> Circuit:
    if isinstance(c, MNCascade):
        gates = [Controlled(((j, True),), (j + 1,), u) for j, u in enumerate(c.gates)]
        return Circuit(c.num_qubits, gates)
    gates = [Multiplexer((ctrl,), targets, (u0, u1))
             for (ctrl, targets), (u0, u1) in zip(c.layout(), c.blocks)]
    return Circuit(c.num_qubits, gates)


def staircase_pair(gates) -> tuple[np.ndarray, np.ndarray]:
    """(V0, V1) of a run of staircase gates on their own wires.

    V1 applies the first gate unconditionally followed by the remaining
    controlled gates; V0 is the same with the first gate omitted.
    """
    n = len(gates)
    tail = [Controlled(((i - 1, True),), (i,), u) for i, u in enumerate(gates) if i > 0]
    v0 = unitary_of(Circuit(n, tail))
    v1 = unitary_of(Circuit(n, [unitary_gate((0,), gates[0])] + tail))
    return v0, v1


def group(c: MNCascade, size: int) -> ControlCascade:
    if size < 1:
        raise InvalidBlockSize(f"block size must be at least 1, got {size}")
    blocks = [staircase_pair(c.gates[i:i + size]) for i in range(0, c.m, size)]
    return ControlCascade(tuple(blocks))


def ungroup(c: ControlCascade) -> list[np.ndarray]:
    """Recover the staircase gates from blocks produced by ``group``."""
    gates = []
    for v0, v1 in c.blocks:
        gates.extend(_unpair(v0, v1))
    return gates


def _unpair(v0: np.ndarray, v1: np.ndarray) -> list[np.ndarray]:
    # V0^dagger V1 = U_first (x) I, and V0 = diag(V0', V1') for the remaining run
    h = v0.shape[0] // 2
    first = (v0.conj().T @ v1)[::h, ::h]
    if h == 1:
        return [first]
    return [first] + _unpair(v0[:h, :h], v0[h:, h:])


def valley_registers(sizes) -> list[tuple[int, ...]]:
    """Qubit ranges of each layer; layer l sits on top, layer 1 at the bottom."""
    regs = [()] * len(sizes)
    at = 0
    for j in reversed(range(len(sizes))):
        regs[j] = tuple(range(at, at + sizes[j]))
        at += sizes[j]
    return regs


def build_valley(v: ValleySpec) -> Circuit:
    sizes = v.sizes
    regs = valley_registers(sizes)
    ell = len(sizes)

    def layer(j, u):
        if j == 0:
            return unitary_gate(regs[0], u)
        return Controlled(((regs[j - 1][0], True),), regs[j], u)

    gates = [layer(j, v.layers[j].conj().T) for j in reversed(range(1, ell))]
    gates.append(layer(0, v.layers[0]))
    gates += [layer(j, v.layers[j]) for j in range(1, ell)]
    return Circuit(sum(sizes), gates)


def random_mn(m: int, rng) -> MNCascade:
    rng = np.random.default_rng(rng)
    return MNCascade(tuple(random_unitary(2, rng) for _ in range(m)))


def random_cascade(k: int, m: int, rng) -> ControlCascade:
    rng = np.random.default_rng(rng)
    d = 1 << k
    return ControlCascade(tuple((random_unitary(d, rng), random_unitary(d, rng)) for _ in range(m)))


def hadamard_mn(m: int) -> MNCascade:
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    return MNCascade(tuple(h for _ in range(m)))
