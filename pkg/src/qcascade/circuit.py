"""Gate-level circuit representation, dense semantics and depth accounting."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import DimensionMismatch, NonAdjacent, NotLowered, TooManyQubits
from .numerics import as_matrix

DENSE_LIMIT = 13
STATE_LIMIT = 26


@dataclass(frozen=True, eq=False)
class OneQubit:
    qubit: int
    matrix: np.ndarray

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)

    def local_matrix(self) -> np.ndarray:
        return self.matrix


@dataclass(frozen=True, eq=False)
class TwoQubit:
    q0: int
    q1: int
    matrix: np.ndarray

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q0, self.q1)

    def local_matrix(self) -> np.ndarray:
        return self.matrix


@dataclass(frozen=True, eq=False)
class Controlled:
    """Body applied to targets when every control reads its polarity (True = closed)."""

    controls: tuple[tuple[int, bool], ...]
    targets: tuple[int, ...]
    body: np.ndarray

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.controls) + tuple(self.targets)

    def as_multiplexer(self) -> "Multiplexer":
        pattern = 0
        for q, closed in self.controls:
            pattern = (pattern << 1) | int(closed)
        ident = np.eye(self.body.shape[0], dtype=complex)
        cases = tuple(self.body if i == pattern else ident for i in range(1 << len(self.controls)))
        return Multiplexer(tuple(q for q, _ in self.controls), tuple(self.targets), cases)

    def local_matrix(self) -> np.ndarray:
        return self.as_multiplexer().local_matrix()


@dataclass(frozen=True, eq=False)
class Multiplexer:
    """Applies cases[x] to the targets when the controls read the bit pattern x."""

    controls: tuple[int, ...]
    targets: tuple[int, ...]
    cases: tuple[np.ndarray, ...]

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(self.controls) + tuple(self.targets)

    def local_matrix(self) -> np.ndarray:
        d = self.cases[0].shape[0]
        out = np.zeros((d * len(self.cases),) * 2, dtype=complex)
        for i, m in enumerate(self.cases):
            out[i * d:(i + 1) * d, i * d:(i + 1) * d] = m
        return out


@dataclass(frozen=True, eq=False)
class Diagonal:
    targets: tuple[int, ...]
    phases: np.ndarray

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(self.targets)

    def local_matrix(self) -> np.ndarray:
        return np.diag(self.phases).astype(complex)


SWAP_MATRIX = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


@dataclass(frozen=True, eq=False)
class Swap:
    q_a: int
    q_b: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q_a, self.q_b)

    def local_matrix(self) -> np.ndarray:
        return SWAP_MATRIX


@dataclass(frozen=True, eq=False)
class GlobalPhase:
    angle: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return ()

    def local_matrix(self) -> np.ndarray:
        return np.array([[np.exp(1j * self.angle)]])


Gate = Union[OneQubit, TwoQubit, Controlled, Multiplexer, Diagonal, Swap, GlobalPhase]
BASIS_KINDS = (OneQubit, TwoQubit, Swap, GlobalPhase)


@dataclass(frozen=True)
class AllToAll:
    def adjacent(self, a: int, b: int) -> bool:
        return True


@dataclass(frozen=True)
class Grid2D:
    """Qubit i lives at cell placement[i] = (x, y) of a width x height grid."""

    width: int
    height: int
    placement: tuple[tuple[int, int], ...]

    def adjacent(self, a: int, b: int) -> bool:
        (xa, ya), (xb, yb) = self.placement[a], self.placement[b]
        return abs(xa - xb) + abs(ya - yb) == 1

    def distance(self, a: int, b: int) -> int:
        (xa, ya), (xb, yb) = self.placement[a], self.placement[b]
        return abs(xa - xb) + abs(ya - yb)

    def qubit_at(self) -> dict[tuple[int, int], int]:
        return {cell: q for q, cell in enumerate(self.placement)}


Connectivity = Union[AllToAll, Grid2D]


@dataclass(frozen=True)
class Circuit:
    num_data_qubits: int
    gates: tuple = ()
    num_ancilla: int = 0
    connectivity: Connectivity = field(default_factory=AllToAll)

    @property
    def num_qubits(self) -> int:
        return self.num_data_qubits + self.num_ancilla

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        n = self.num_qubits
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < n:
                    raise DimensionMismatch(f"gate touches qubit {q} outside register of {n}")

    def with_gates(self, gates) -> "Circuit":
        return replace(self, gates=tuple(gates))

    def then(self, other: "Circuit") -> "Circuit":
        return replace(self, gates=self.gates + tuple(other.gates))

    def inverse(self) -> "Circuit":
        return replace(self, gates=tuple(inverse_gate(g) for g in reversed(self.gates)))


def inverse_gate(g: Gate) -> Gate:
    if isinstance(g, OneQubit):
        return OneQubit(g.qubit, g.matrix.conj().T)
    if isinstance(g, TwoQubit):
        return TwoQubit(g.q0, g.q1, g.matrix.conj().T)
    if isinstance(g, Controlled):
        return Controlled(g.controls, g.targets, g.body.conj().T)
    if isinstance(g, Multiplexer):
        return Multiplexer(g.controls, g.targets, tuple(m.conj().T for m in g.cases))
    if isinstance(g, Diagonal):
        return Diagonal(g.targets, np.conj(g.phases))
    if isinstance(g, Swap):
        return g
    if isinstance(g, GlobalPhase):
        return GlobalPhase(-g.angle)
    raise TypeError(f"unknown gate {g!r}")


def _apply(tensor: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply one gate to an array of shape (2,)*n + (batch,)."""
    if isinstance(g, GlobalPhase):
        return tensor * np.exp(1j * g.angle)
    qs = list(g.qubits)
    k = len(qs)
    if isinstance(g, Diagonal):
        shape = [1] * (n + 1)
        for q in qs:
            shape[q] = 2
        ph = np.asarray(g.phases).reshape([2] * k)
        order = np.argsort(qs)
        ph = np.transpose(ph, order).reshape(shape)
        return tensor * ph
    if isinstance(g, Swap):
        return np.swapaxes(tensor, g.q_a, g.q_b)
    m = g.local_matrix()
    moved = np.moveaxis(tensor, qs, list(range(k)))
    shp = moved.shape
    out = (m @ moved.reshape(1 << k, -1)).reshape(shp)
    return np.moveaxis(out, list(range(k)), qs)


def apply_state(c: Circuit, psi) -> np.ndarray:
    n = c.num_qubits
    psi = np.asarray(psi, dtype=complex)
    if n > STATE_LIMIT:
        raise TooManyQubits(f"{n} qubits exceeds the statevector limit {STATE_LIMIT}")
    if psi.shape[0] != 1 << n:
        raise DimensionMismatch(f"state of length {psi.shape[0]} for {n} qubits")
    batch = psi.reshape(psi.shape[0], -1)
    t = batch.reshape([2] * n + [batch.shape[1]])
    for g in c.gates:
        t = _apply(t, g, n)
    return t.reshape(psi.shape)


def unitary_of(c: Circuit) -> np.ndarray:
    n = c.num_qubits
    if n > DENSE_LIMIT:
        raise TooManyQubits(f"{n} qubits exceeds the dense limit {DENSE_LIMIT}")
    return apply_state(c, np.eye(1 << n, dtype=complex))


def embed(m: np.ndarray, qubits, n: int) -> np.ndarray:
    """Full 2^n matrix of a local matrix acting on the listed qubits."""
    m = as_matrix(m)
    if not qubits:
        return m[0, 0] * np.eye(1 << n, dtype=complex)
    return unitary_of(Circuit(n, [unitary_gate(qubits, m)]))


def unitary_gate(qubits, m) -> Gate:
    """A block gate applying the dense matrix m to the listed qubits."""
    qubits = tuple(qubits)
    m = as_matrix(m)
    if len(qubits) == 1:
        return OneQubit(qubits[0], m)
    if len(qubits) == 2:
        return TwoQubit(qubits[0], qubits[1], m)
    return Multiplexer((), qubits, (m,))


def is_lowered(c: Circuit) -> bool:
    return all(isinstance(g, BASIS_KINDS) for g in c.gates)


def depth(c: Circuit) -> int:
    """Greedy layering depth over 1- and 2-qubit gates."""
    level: dict[int, int] = {}
    total = 0
    for g in c.gates:
        if not isinstance(g, BASIS_KINDS):
            raise NotLowered(f"{type(g).__name__} must be lowered before depth is measured")
        qs = g.qubits
        if not qs:
            continue
        layer = 1 + max(level.get(q, 0) for q in qs)
        for q in qs:
            level[q] = layer
        total = max(total, layer)
    return total


def gate_count(c: Circuit) -> int:
    return sum(1 for g in c.gates if g.qubits)


def adjacency_violations(c: Circuit) -> list[int]:
    conn = c.connectivity
    bad = []
    for i, g in enumerate(c.gates):
        qs = g.qubits
        if len(qs) == 2 and not conn.adjacent(*qs):
            bad.append(i)
        elif len(qs) > 2 and isinstance(conn, Grid2D):
            bad.append(i)
    return bad


def assert_adjacent(c: Circuit) -> None:
    bad = adjacency_violations(c)
    if bad:
        raise NonAdjacent(f"{len(bad)} gates act on non-adjacent cells (first at index {bad[0]})")


@dataclass
class CompilationReport:
    depth_basis: int
    gate_count: int
    ancilla_count: int
    apriori_error: float = 0.0
    measured_error: float | str = "not-checked"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "depth_basis": self.depth_basis,
            "gate_count": self.gate_count,
            "ancilla_count": self.ancilla_count,
            "apriori_error": self.apriori_error,
            "measured_error": self.measured_error,
        }
        out.update(self.extra)
        return out
