"""Equivalence checks on the data subspace (ancillae start and must end in |0>)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import (
    DENSE_LIMIT, STATE_LIMIT, Circuit, Diagonal, GlobalPhase, Swap, _apply, unitary_of,
)
from .errors import DimensionMismatch, GuardExceeded
from .numerics import op_norm_distance

SPARSE_SUPPORT_LIMIT = 1 << 20
_PRUNE = 1e-15
_BATCH_ENTRIES = 1 << 22


@dataclass
class EquivalenceResult:
    mode: str
    distance: float
    trials: int
    ancilla_residual: float
    seed: int | None = None

    def ok(self, tol: float, residual_tol: float = 1e-9) -> bool:
        return self.distance <= tol and self.ancilla_residual <= residual_tol

    def to_dict(self) -> dict:
        return {"mode": self.mode, "distance": self.distance, "trials": self.trials,
                "ancilla_residual": self.ancilla_residual, "seed": self.seed}


def _dense_columns(c: Circuit, inputs: np.ndarray) -> np.ndarray:
    """Apply c to data states (columns of inputs) tensored with |0> ancillae.

    Returns an array (2^data, 2^anc, batch).
    """
    n, na = c.num_qubits, c.num_ancilla
    nd = c.num_data_qubits
    batch = inputs.shape[1]
    chunk = max(1, _BATCH_ENTRIES >> n)
    out = np.empty((1 << nd, 1 << na, batch), dtype=complex)
    for s in range(0, batch, chunk):
        part = inputs[:, s:s + chunk]
        t = np.zeros((1 << nd, 1 << na, part.shape[1]), dtype=complex)
        t[:, 0, :] = part
        t = t.reshape([2] * n + [part.shape[1]])
        for g in c.gates:
            t = _apply(t, g, n)
        out[:, :, s:s + chunk] = t.reshape(1 << nd, 1 << na, -1)
    return out


class SparseState:
    """Basis states as rows of a bit matrix with complex amplitudes."""

    def __init__(self, n: int, bits: np.ndarray, amps: np.ndarray):
        self.n, self.bits, self.amps = n, bits, amps

    @classmethod
    def basis(cls, n: int, data_bits) -> "SparseState":
        bits = np.zeros((1, n), dtype=np.uint8)
        bits[0, :len(data_bits)] = data_bits
        return cls(n, bits, np.ones(1, dtype=complex))

    def apply(self, g) -> None:
        if isinstance(g, GlobalPhase):
            self.amps = self.amps * np.exp(1j * g.angle)
            return
        qs = list(g.qubits)
        if isinstance(g, Swap):
            self.bits[:, [g.q_a, g.q_b]] = self.bits[:, [g.q_b, g.q_a]]
            return
        weights = 1 << np.arange(len(qs) - 1, -1, -1)
        local = self.bits[:, qs].astype(np.int64) @ weights
        if isinstance(g, Diagonal):
            self.amps = self.amps * np.asarray(g.phases)[local]
            return
        m = g.local_matrix()
        rest = self.bits.copy()
        rest[:, qs] = 0
        keys, inv = np.unique(rest, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        table = np.zeros((len(keys), 1 << len(qs)), dtype=complex)
        np.add.at(table, (inv, local), self.amps)
        new = table @ m.T
        gi, li = np.nonzero(np.abs(new) > _PRUNE)
        if len(gi) > SPARSE_SUPPORT_LIMIT:
            raise GuardExceeded(f"sparse support {len(gi)} exceeds {SPARSE_SUPPORT_LIMIT}")
        bits = keys[gi]
        for j, q in enumerate(qs):
            bits[:, q] = (li >> (len(qs) - 1 - j)) & 1
        self.bits, self.amps = bits, new[gi, li]


def _sparse_columns(c: Circuit) -> tuple[np.ndarray, float]:
    nd, n = c.num_data_qubits, c.num_qubits
    dim = 1 << nd
    u = np.zeros((dim, dim), dtype=complex)
    residual = 0.0
    for col in range(dim):
        st = SparseState.basis(n, [(col >> (nd - 1 - i)) & 1 for i in range(nd)])
        for g in c.gates:
            st.apply(g)
        clean = ~st.bits[:, nd:].any(axis=1)
        data = st.bits[clean, :nd].astype(np.int64) @ (1 << np.arange(nd - 1, -1, -1))
        np.add.at(u[:, col], data, st.amps[clean])
        if (~clean).any():
            residual = max(residual, float(np.linalg.norm(st.amps[~clean])))
    return u, residual


def data_unitary(c: Circuit) -> tuple[np.ndarray, float]:
    """Data-subspace block of c and the largest out-of-|0> ancilla amplitude norm."""
    nd = c.num_data_qubits
    if nd > DENSE_LIMIT:
        raise GuardExceeded(f"{nd} data qubits exceeds the dense limit {DENSE_LIMIT}")
    if c.num_ancilla == 0:
        return unitary_of(c), 0.0
    if c.num_qubits > STATE_LIMIT:
        return _sparse_columns(c)
    out = _dense_columns(c, np.eye(1 << nd, dtype=complex))
    residual = float(np.max(np.linalg.norm(out[:, 1:, :], axis=(0, 1)))) if out.shape[1] > 1 else 0.0
    return out[:, 0, :], residual


def _same_width(c1: Circuit, c2: Circuit) -> None:
    if c1.num_data_qubits != c2.num_data_qubits:
        raise DimensionMismatch(f"data widths differ: {c1.num_data_qubits} vs {c2.num_data_qubits}")


def _phase_align(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    inner = np.vdot(b.reshape(-1), a.reshape(-1))
    return b * (inner / abs(inner)) if abs(inner) > 0 else b


def check_exact(c1: Circuit, c2: Circuit, ignore_global_phase: bool = False) -> EquivalenceResult:
    _same_width(c1, c2)
    u1, r1 = data_unitary(c1)
    u2, r2 = data_unitary(c2)
    if ignore_global_phase:
        u2 = _phase_align(u1, u2)
    return EquivalenceResult("exact", op_norm_distance(u1, u2), 0, max(r1, r2))


def haar_states(dim: int, trials: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(dim, trials)) + 1j * rng.normal(size=(dim, trials))
    return z / np.linalg.norm(z, axis=0)


def _run_states(c: Circuit, states: np.ndarray) -> tuple[np.ndarray, float]:
    if c.num_qubits <= STATE_LIMIT:
        out = _dense_columns(c, states)
        residual = float(np.max(np.linalg.norm(out[:, 1:, :], axis=(0, 1)))) if out.shape[1] > 1 else 0.0
        return out[:, 0, :], residual
    u, residual = _sparse_columns(c)
    return u @ states, residual


def check_sampled(c1: Circuit, c2: Circuit, trials: int = 16, seed: int = 0) -> EquivalenceResult:
    """Max deviation over seeded Haar-random data states.

    Circuits wider than the statevector limit are simulated sparsely, column
    by column; that needs the data width to be within the dense limit.
    """
    _same_width(c1, c2)
    for c in (c1, c2):
        if c.num_qubits > STATE_LIMIT and c.num_data_qubits > DENSE_LIMIT:
            raise GuardExceeded(f"{c.num_qubits} qubits exceeds the statevector limit {STATE_LIMIT}")
    states = haar_states(1 << c1.num_data_qubits, trials, seed)
    o1, r1 = _run_states(c1, states)
    o2, r2 = _run_states(c2, states)
    dist = float(np.max(np.linalg.norm(o1 - o2, axis=0))) if trials else 0.0
    return EquivalenceResult("sampled", dist, trials, max(r1, r2), seed)
