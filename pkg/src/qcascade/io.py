"""JSON interchange for matrices, circuits and cascades, plus a text exporter."""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .cascade import ControlCascade, MNCascade
from .circuit import (
    AllToAll, Circuit, Controlled, Diagonal, GlobalPhase, Grid2D, Multiplexer, OneQubit, Swap, TwoQubit,
    is_lowered,
)
from .errors import BadSpec

VERSION = 1


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in m.reshape(-1)]


def matrix_from_json(data) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in data])
    n = math.isqrt(len(flat))
    if n * n != len(flat):
        raise BadSpec(f"matrix with {len(flat)} entries is not square")
    return flat.reshape(n, n)


def _vector_to_json(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _vector_from_json(data) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data])


def gate_to_json(g) -> dict:
    out = {"kind": type(g).__name__, "qubits": list(g.qubits)}
    if isinstance(g, (OneQubit, TwoQubit)):
        out["matrix"] = matrix_to_json(g.matrix)
    elif isinstance(g, Controlled):
        out["controls"] = [[q, bool(p)] for q, p in g.controls]
        out["targets"] = list(g.targets)
        out["matrix"] = matrix_to_json(g.body)
    elif isinstance(g, Multiplexer):
        out["controls"] = list(g.controls)
        out["targets"] = list(g.targets)
        out["cases"] = [matrix_to_json(m) for m in g.cases]
    elif isinstance(g, Diagonal):
        out["phases"] = _vector_to_json(g.phases)
    elif isinstance(g, GlobalPhase):
        out["angle"] = float(g.angle)
    elif not isinstance(g, Swap):
        raise BadSpec(f"cannot serialize {g!r}")
    return out


def gate_from_json(d: dict):
    kind, qs = d.get("kind"), d.get("qubits", [])
    if kind == "OneQubit":
        return OneQubit(qs[0], matrix_from_json(d["matrix"]))
    if kind == "TwoQubit":
        return TwoQubit(qs[0], qs[1], matrix_from_json(d["matrix"]))
    if kind == "Controlled":
        return Controlled(tuple((q, bool(p)) for q, p in d["controls"]), tuple(d["targets"]),
                          matrix_from_json(d["matrix"]))
    if kind == "Multiplexer":
        return Multiplexer(tuple(d["controls"]), tuple(d["targets"]),
                           tuple(matrix_from_json(m) for m in d["cases"]))
    if kind == "Diagonal":
        return Diagonal(tuple(qs), _vector_from_json(d["phases"]))
    if kind == "Swap":
        return Swap(qs[0], qs[1])
    if kind == "GlobalPhase":
        return GlobalPhase(float(d["angle"]))
    raise BadSpec(f"unknown gate kind {kind!r}")


def circuit_to_json(c: Circuit) -> dict:
    if isinstance(c.connectivity, Grid2D):
        g = c.connectivity
        conn = {"type": "grid2d", "width": g.width, "height": g.height,
                "placement": [list(cell) for cell in g.placement]}
    else:
        conn = {"type": "all-to-all"}
    return {"version": VERSION, "num_data_qubits": c.num_data_qubits, "num_ancilla": c.num_ancilla,
            "connectivity": conn, "gates": [gate_to_json(g) for g in c.gates]}


def circuit_from_json(d: dict) -> Circuit:
    try:
        conn = d.get("connectivity", {"type": "all-to-all"})
        if conn["type"] == "grid2d":
            connectivity = Grid2D(conn["width"], conn["height"], tuple(tuple(p) for p in conn["placement"]))
        elif conn["type"] == "all-to-all":
            connectivity = AllToAll()
        else:
            raise BadSpec(f"unknown connectivity {conn['type']!r}")
        gates = [gate_from_json(g) for g in d["gates"]]
        return Circuit(d["num_data_qubits"], gates, d.get("num_ancilla", 0), connectivity)
    except (KeyError, IndexError, TypeError) as exc:
        raise BadSpec(f"malformed circuit: {exc}") from exc


def cascade_to_json(c: ControlCascade | MNCascade) -> dict:
    if isinstance(c, MNCascade):
        return {"version": VERSION, "kind": "mn", "m": c.m, "k": 1, "gates": [matrix_to_json(g) for g in c.gates]}
    return {"version": VERSION, "kind": "cascade", "m": c.m, "k": c.k,
            "blocks": [[matrix_to_json(u0), matrix_to_json(u1)] for u0, u1 in c.blocks]}


def cascade_from_json(d: dict) -> ControlCascade | MNCascade:
    try:
        if d["kind"] == "mn":
            return MNCascade(tuple(matrix_from_json(g) for g in d["gates"]))
        if d["kind"] == "cascade":
            return ControlCascade(tuple((matrix_from_json(a), matrix_from_json(b)) for a, b in d["blocks"]))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        if isinstance(exc, BadSpec) or type(exc).__module__.startswith("qcascade"):
            raise
        raise BadSpec(f"malformed cascade: {exc}") from exc
    raise BadSpec(f"unknown cascade kind {d.get('kind')!r}")


def dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadSpec(f"cannot read {path}: {exc}") from exc


def load_any(path: str) -> Circuit | ControlCascade | MNCascade:
    d = load_json(path)
    if "gates" in d and "num_data_qubits" in d:
        return circuit_from_json(d)
    return cascade_from_json(d)


def to_qasm(c: Circuit) -> str:
    """Best-effort OpenQASM 2 text for a lowered circuit.

    Only lowered circuits are accepted. Arbitrary two-qubit gates have no
    QASM 2 primitive, so they are written as opaque ``unitary2q`` calls that
    carry their matrix in a preceding comment.
    """
    if not is_lowered(c):
        raise BadSpec("QASM export needs a lowered circuit")
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', "opaque unitary2q a, b;", f"qreg q[{c.num_qubits}];"]
    for g in c.gates:
        if isinstance(g, OneQubit):
            theta, phi, lam, _ = zyz_angles(g.matrix)
            lines.append(f"u3({theta!r},{phi!r},{lam!r}) q[{g.qubit}];")
        elif isinstance(g, Swap):
            lines.append(f"swap q[{g.q_a}],q[{g.q_b}];")
        elif isinstance(g, TwoQubit):
            if np.allclose(g.matrix, np.eye(4)[[0, 1, 3, 2]]):
                lines.append(f"cx q[{g.q0}],q[{g.q1}];")
            else:
                lines.append("// matrix " + json.dumps(matrix_to_json(g.matrix)))
                lines.append(f"unitary2q q[{g.q0}],q[{g.q1}];")
        elif isinstance(g, GlobalPhase):
            lines.append(f"// global phase {g.angle!r}")
    return "\n".join(lines) + "\n"


def zyz_angles(u) -> tuple[float, float, float, float]:
    """(theta, phi, lam, alpha) with u = e^{i alpha} U3(theta, phi, lam)."""
    u = np.asarray(u, dtype=complex)
    alpha = np.angle(np.linalg.det(u)) / 2
    v = u * np.exp(-1j * alpha)
    theta = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    s = np.angle(v[1, 1]) if abs(v[1, 1]) > 1e-12 else 0.0
    d = np.angle(v[1, 0]) if abs(v[1, 0]) > 1e-12 else 0.0
    phi, lam = float(s + d), float(s - d)
    # U3 carries a phase e^{i (phi + lam) / 2} relative to the SU(2) form
    return float(theta), phi, lam, float(alpha - (phi + lam) / 2)
