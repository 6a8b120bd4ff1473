"""Compiler passes turning cascades into shallow circuits.

* ``compile_exact_diagonal``: ancilla-free, one precomputation identity per
  block, P layer in parallel, a chain of controlled diagonals, R in two layers.
* ``compile_select_exact`` / ``compile_load_approx``: the controlled diagonals
  become multiplexer phase gates realized by phase kickback onto ancillae.
* ``compile_mn_log_depth``: recursive grouping of a staircase of 2x2 gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cascade import ControlCascade, MNCascade
from .circuit import (
    Circuit, CompilationReport, Controlled, Diagonal, Multiplexer, OneQubit, depth, gate_count, unitary_gate,
)
from .errors import GuardExceeded, InvalidBlockSize, InvalidEpsilon, NonUnitModulus
from .numerics import PHI, X
from .precompute import mn_precompute, precompute_identity
from .synthesis import fuse, lower_to_basis

EXACT_K_LIMIT = 6
ANCILLA_K_LIMIT = 4


@dataclass(frozen=True)
class PhaseTable:
    """diag over x of (e^{2 pi i phi_x}, e^{2 pi i theta_x}); angles in turns."""

    theta: np.ndarray
    phi: np.ndarray

    def diagonal(self) -> np.ndarray:
        out = np.empty(2 * len(self.theta), dtype=complex)
        out[0::2] = np.exp(2j * np.pi * self.phi)
        out[1::2] = np.exp(2j * np.pi * self.theta)
        return out


@dataclass(frozen=True)
class ApproxBudget:
    epsilon: float
    r: int

    @classmethod
    def for_cascade(cls, m: int, epsilon: float) -> "ApproxBudget":
        if not 0 < epsilon < 1:
            raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
        return cls(float(epsilon), max(1, math.ceil(math.log2(m / epsilon))))

    def nominal_bound(self, m: int) -> float:
        return m * 2.0 ** (1 - self.r)


def _turns(z: np.ndarray) -> np.ndarray:
    t = np.mod(np.angle(z) / (2 * np.pi), 1.0)
    t[np.isclose(t, 1.0, atol=1e-15)] = 0.0
    return t


def phase_tables_of(d) -> PhaseTable:
    d = np.asarray(d, dtype=complex).reshape(-1)
    if np.max(np.abs(np.abs(d) - 1)) > 1e-10:
        raise NonUnitModulus("diagonal entries must have unit modulus")
    return PhaseTable(_turns(d[1::2]), _turns(d[0::2]))


def _z_turns(t: float) -> np.ndarray:
    return np.diag([1.0, np.exp(2j * np.pi * t)])


def _finish(gates, n_data, n_anc, **extra) -> tuple[Circuit, CompilationReport]:
    circ = fuse(lower_to_basis(Circuit(n_data, gates, n_anc)))
    report = CompilationReport(depth(circ), gate_count(circ), n_anc, extra=extra)
    return circ, report


def _r_gate(ctrl: int, targets: tuple[int, ...], cases):
    b = targets[-1]
    if len(targets) == 1:
        return Diagonal((ctrl, b), np.array([m[0, 0] for m in cases]))
    return Multiplexer((ctrl, b), targets[:-1], tuple(cases))


def _check_cascade(c: ControlCascade, limit: int) -> None:
    if c.m < 1:
        raise GuardExceeded("cascade has no blocks")
    if max(c.sizes) > limit:
        raise GuardExceeded(f"block size {max(c.sizes)} exceeds the synthesis guard {limit}")


def exact_diagonal_gates(c: ControlCascade) -> list:
    """Block-level gates of the ancilla-free pass, in time order."""
    _check_cascade(c, EXACT_K_LIMIT)
    layout = c.layout()
    parts = [precompute_identity(u0, u1) for u0, u1 in c.blocks]
    gates = [unitary_gate(t, p.p) for (_, t), p in zip(layout, parts)]
    for (ctrl, t), p in zip(layout, parts):
        gates.append(Diagonal((ctrl,) + t, np.concatenate([np.ones(len(p.d)), p.d])))
        gates.append(OneQubit(t[-1], PHI))
    gates += r_layers(layout, parts)
    return gates


def r_layers(layout, parts) -> list:
    """R multiplexers: blocks 0, 2, 4, ... then 1, 3, 5, ... (disjoint qubits inside a layer)."""
    out = []
    for start in (0, 1):
        for i in range(start, len(parts), 2):
            ctrl, t = layout[i]
            out.append(_r_gate(ctrl, t, parts[i].r_cases))
    return out


def compile_exact_diagonal(c: ControlCascade) -> tuple[Circuit, CompilationReport]:
    gates = exact_diagonal_gates(c)
    return _finish(gates, c.num_qubits, 0, m=c.m, k=c.k)


class _Ancillas:
    def __init__(self, start: int):
        self.next = start

    def take(self, n: int) -> tuple[int, ...]:
        out = tuple(range(self.next, self.next + n))
        self.next += n
        return out


def _cnot(a: int, b: int):
    return Controlled(((a, True),), (b,), X)


def fanout_tree(reg: tuple[int, ...]) -> list:
    """Copy reg[0] onto the rest of reg with a balanced binary tree of CNOTs."""
    gates, have = [], 1
    while have < len(reg):
        for i in range(min(have, len(reg) - have)):
            gates.append(_cnot(reg[i], reg[have + i]))
        have *= 2
    return gates


def _kickback(ctrl: int, b: int, fan: tuple[int, ...], phases: list) -> list:
    """Toffoli(ctrl, b -> fan[0]), fanout, phases, then the uncompute."""
    toffoli = Controlled(((ctrl, True), (b, True)), (fan[0],), X)
    tree = fanout_tree(fan)
    return [toffoli] + tree + phases + tree[::-1] + [toffoli]


def select_gates(x: tuple[int, ...], onehot: tuple[int, ...]) -> list:
    """Write a 1 on onehot[j] iff the qubits x read the pattern j (self-inverse)."""
    gates = []
    for j, a in enumerate(onehot):
        if not x:
            gates.append(OneQubit(a, X))
            continue
        bits = [(j >> (len(x) - 1 - i)) & 1 for i in range(len(x))]
        gates.append(Controlled(tuple((q, bool(bit)) for q, bit in zip(x, bits)), (a,), X))
    return gates


def _ancilla_pass(c: ControlCascade, phase_block) -> tuple[list, list, list, int]:
    """Shared skeleton: returns (front, middle, back) gate lists and the ancilla count.

    phase_block(ctrl, x, b, table, anc) returns (front, middle, back) for
    the controlled diagonal of block i.
    """
    _check_cascade(c, ANCILLA_K_LIMIT)
    layout = c.layout()
    parts = [precompute_identity(u0, u1) for u0, u1 in c.blocks]
    anc = _Ancillas(c.num_qubits)
    front = [unitary_gate(t, p.p) for (_, t), p in zip(layout, parts)]
    middle, back = [], []
    for i, ((ctrl, t), p) in enumerate(zip(layout, parts)):
        table = phase_tables_of(p.d)
        f, mid, bk = phase_block(ctrl, t[:-1], t[-1], table, anc)
        front += f
        middle += mid
        middle.append(OneQubit(t[-1], PHI))
        back = bk + back
    back += r_layers(layout, parts)
    return front, middle, back, anc.next - c.num_qubits


def _select_block(ctrl, x, b, table: PhaseTable, anc: _Ancillas):
    half = len(table.theta)
    front, back, middle = [], [], []
    regs = {}
    for name in ("phi", "theta"):
        onehot, fan = anc.take(half), anc.take(half)
        regs[name] = (onehot, fan)
        sel = select_gates(x, onehot)
        front += sel
        back = sel[::-1] + back
    for name, angles in (("phi", table.phi), ("theta", table.theta)):
        onehot, fan = regs[name]
        kicks = [Controlled(((a, True),), (f,), _z_turns(t)) for a, f, t in zip(onehot, fan, angles)]
        block = _kickback(ctrl, b, fan, kicks)
        if name == "phi":
            block = [OneQubit(b, X)] + block + [OneQubit(b, X)]
        middle += block
    return front, middle, back


def compile_select_exact(c: ControlCascade) -> tuple[Circuit, CompilationReport]:
    front, middle, back, n_anc = _ancilla_pass(c, _select_block)
    return _finish(front + middle + back, c.num_qubits, n_anc, m=c.m, k=c.k)


def truncate_turns(t: np.ndarray, r: int) -> np.ndarray:
    """Integer numerators of the r-bit binary expansion, rounded toward zero."""
    return np.floor(np.asarray(t) * (1 << r) + 1e-12).astype(np.int64) % (1 << r)


def load_gates(x: tuple[int, ...], reg: tuple[int, ...], numerators: np.ndarray, r: int) -> list:
    """reg[j] holds bit j+1 (weight 2^-(j+1)) of the truncated angle selected by x."""
    gates = []
    for j, q in enumerate(reg):
        bits = (numerators >> (r - 1 - j)) & 1
        if not x:
            if bits[0]:
                gates.append(OneQubit(q, X))
        elif bits.any():
            cases = tuple(X if bit else np.eye(2, dtype=complex) for bit in bits)
            gates.append(Multiplexer(x, (q,), cases))
    return gates


def compile_load_approx(c: ControlCascade, epsilon: float) -> tuple[Circuit, CompilationReport]:
    budget = ApproxBudget.for_cascade(c.m, epsilon)
    r = budget.r
    errors = []

    def load_block(ctrl, x, b, table: PhaseTable, anc: _Ancillas):
        front, middle, back = [], [], []
        worst = 0.0
        for name, angles in (("phi", table.phi), ("theta", table.theta)):
            reg, fan = anc.take(r), anc.take(r)
            nums = truncate_turns(angles, r)
            delta = angles - nums / (1 << r)
            worst = max(worst, float(np.max(np.abs(1 - np.exp(2j * np.pi * delta)))))
            ld = load_gates(x, reg, nums, r)
            front += ld
            back = ld[::-1] + back
            kicks = [Controlled(((q, True),), (f,), _z_turns(2.0 ** -(j + 1)))
                     for j, (q, f) in enumerate(zip(reg, fan))]
            block = _kickback(ctrl, b, fan, kicks)
            if name == "phi":
                block = [OneQubit(b, X)] + block + [OneQubit(b, X)]
            middle += block
        errors.append(worst)
        return front, middle, back

    front, middle, back, n_anc = _ancilla_pass(c, load_block)
    circ, report = _finish(front + middle + back, c.num_qubits, n_anc, m=c.m, k=c.k, r=r, epsilon=epsilon,
                           nominal_bound=budget.nominal_bound(c.m))
    # blocks are separated by exact unitaries, so per-block errors add
    report.apriori_error = float(sum(errors))
    return circ, report


def phase_gate_circuit(theta, r: int | None = None) -> Circuit:
    """One multiplexer phase gate Z(theta_x) on (c, x..., b), active when c = b = 1.

    With r given, the angles are truncated to r bits and loaded in binary;
    otherwise they are applied exactly through a one-hot SELECT register.
    """
    theta = np.mod(np.asarray(theta, dtype=float).reshape(-1), 1.0)
    kx = int(math.log2(len(theta)))
    x = tuple(range(1, 1 + kx))
    b = 1 + kx
    anc = _Ancillas(b + 1)
    if r is None:
        reg, fan = anc.take(len(theta)), anc.take(len(theta))
        outer = select_gates(x, reg)
        kicks = [Controlled(((a, True),), (f,), _z_turns(t)) for a, f, t in zip(reg, fan, theta)]
    else:
        reg, fan = anc.take(r), anc.take(r)
        outer = load_gates(x, reg, truncate_turns(theta, r), r)
        kicks = [Controlled(((q, True),), (f,), _z_turns(2.0 ** -(j + 1))) for j, (q, f) in enumerate(zip(reg, fan))]
    gates = outer + _kickback(0, b, fan, kicks) + outer[::-1]
    return Circuit(b + 1, gates, anc.next - b - 1)


# --- staircase recursion ---------------------------------------------------

@dataclass(frozen=True)
class Stage:
    """A block-level gate tagged with its place in the recursion."""

    level: int
    kind: str  # "P", "R" or "base"
    group: int
    gate: object


def mn_schedule(wires: tuple[int, ...], gates, b: int = 2, level: int = 0) -> list[Stage]:
    """Stages for the staircase with gate j acting on wires[j+1] controlled by wires[j]."""
    m = len(gates)
    if m <= b:
        return [Stage(level, "base", j, Controlled(((wires[j], True),), (wires[j + 1],), u))
                for j, u in enumerate(gates)]
    groups = [list(range(s, min(s + b, m))) for s in range(0, m, b)]
    parts, layout = [], []
    for g in groups:
        ctrl = wires[g[0]]
        targets = tuple(wires[j + 1] for j in g)
        layout.append((ctrl, targets))
        parts.append(mn_precompute([gates[j] for j in g]))
    out = [Stage(level, "P", i, unitary_gate(t, p.p)) for i, ((_, t), p) in enumerate(zip(layout, parts))]
    inner_wires = (wires[0],) + tuple(t[-1] for _, t in layout)
    out += mn_schedule(inner_wires, [p.q for p in parts], b, level + 1)
    for start in (0, 1):
        for i in range(start, len(parts), 2):
            ctrl, t = layout[i]
            out.append(Stage(level, "R", i, _r_gate(ctrl, t, parts[i].r_cases)))
    return out


def compile_mn_log_depth(c: MNCascade, b: int = 2) -> tuple[Circuit, CompilationReport]:
    if b < 2:
        raise InvalidBlockSize(f"block size must be at least 2, got {b}")
    if c.m < 1:
        raise GuardExceeded("staircase has no gates")
    stages = mn_schedule(tuple(range(c.num_qubits)), c.gates, b)
    levels = max(s.level for s in stages)
    return _finish([s.gate for s in stages], c.num_qubits, 0, m=c.m, block_size=b, levels=levels + 1)
