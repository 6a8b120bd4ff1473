"""Precomputation identities and the CS decomposition of valley circuits.

The identity rewrites a multiplexer diag(u0, u1) controlled by one qubit c
over k target qubits as (time order)

    P on the targets, D on the targets controlled by c, Phi on the bottom
    target b, then a multiplexer R on the upper targets controlled by (c, b).

With M = rev(u1 u0^dagger) = diag(S0, S1) [[C, S], [-S, C]] diag(T0, T1), the
parts are P = Phi_b^dagger rev(diag(T0, -T1)) u0, D = rev(diag(C - iS, C + iS))
and R cases (c, b) = (0, 0): rev(T0)^dagger, (0, 1): -rev(T1)^dagger,
(1, 0): rev(S0), (1, 1): -rev(S1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cascade import ControlCascade, ValleySpec, build_valley, staircase_pair
from .circuit import Circuit, Controlled, Diagonal, Multiplexer, OneQubit, unitary_gate, unitary_of
from .errors import DimensionMismatch, InconsistentDimensions, NonSingleQubitLayer, ShapeMismatch
from .numerics import (
    PHI, X, Z, CSDecomposition, block_diag, cs_decompose, kron, num_qubits, require_unitary, rev,
)


@dataclass(frozen=True, eq=False)
class PrecomputeParts:
    """Parts of a precomputation identity on a register (c, t_1 .. t_k).

    ``d_wires`` lists the targets (1-based register positions) the diagonal
    acts on; ``r_cases`` are indexed by the pattern of (c, b).
    """

    k: int
    p: np.ndarray
    d: np.ndarray
    r_cases: tuple[np.ndarray, ...]
    q: np.ndarray | None = None
    d_wires: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    def circuit(self) -> Circuit:
        """The right-hand side circuit on k + 1 qubits, qubit 0 being the control."""
        k = self.k
        targets = tuple(range(1, k + 1))
        b = k
        gates = [unitary_gate(targets, self.p)]
        if self.q is not None:
            gates.append(Controlled(((0, True),), (b,), self.q))
        else:
            gates.append(Diagonal((0,) + self.d_wires, np.concatenate([np.ones(len(self.d)), self.d])))
            gates.append(OneQubit(b, PHI))
        upper = targets[:-1]
        if upper:
            gates.append(Multiplexer((0, b), upper, self.r_cases))
        else:
            gates.append(Diagonal((0, b), np.array([m[0, 0] for m in self.r_cases])))
        return Circuit(k + 1, gates)


def multiplexer_matrix(u0, u1) -> np.ndarray:
    return block_diag(np.asarray(u0, dtype=complex), np.asarray(u1, dtype=complex))


def _bottom(k: int, m: np.ndarray) -> np.ndarray:
    """Embed a 2x2 matrix on the last of k qubits."""
    return kron(np.eye(1 << (k - 1)), m)


def _parts_from_cs(u0: np.ndarray, cs: CSDecomposition, k: int, **meta) -> PrecomputeParts:
    b_tilde = rev(block_diag(cs.t0, -cs.t1))
    p = _bottom(k, PHI.conj().T) @ b_tilde @ u0
    d = np.diag(rev(np.diag(np.concatenate([cs.sigma1 - 1j * cs.sigma2, cs.sigma1 + 1j * cs.sigma2]))))
    r_cases = (rev(cs.t0).conj().T, -rev(cs.t1).conj().T, rev(cs.s0), -rev(cs.s1))
    return PrecomputeParts(k, p, d, r_cases, None, tuple(range(1, k + 1)), dict(meta))


def precompute_identity(u0, u1) -> PrecomputeParts:
    u0 = require_unitary(u0, what="u0")
    u1 = require_unitary(u1, what="u1")
    if u0.shape != u1.shape:
        raise DimensionMismatch(f"u0 is {u0.shape}, u1 is {u1.shape}")
    k = num_qubits(u0.shape[0])
    if k == 0:
        raise DimensionMismatch("bodies must act on at least one qubit")
    w = rev(u1 @ u0.conj().T)
    cs = cs_decompose(w)
    return _parts_from_cs(u0, cs, k, sigma1=cs.sigma1, sigma2=cs.sigma2)


def _rotation_frames(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """L_j with [[b, a], [a, -b]] = L_j^dagger (c_j Z) L_j, stacked on the last two axes."""
    half = 0.5 * np.arctan2(a, b)
    cos, sin = np.cos(half), np.sin(half)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = cos
    out[..., 0, 1] = sin
    out[..., 1, 0] = -sin
    out[..., 1, 1] = cos
    return out


def _frame_operator(frames: np.ndarray) -> np.ndarray:
    """Operator on (u, m, v) applying frames[u, v] to the middle qubit m."""
    nu, nv = frames.shape[:2]
    t = np.zeros((nu, 2, nv, nu, 2, nv), dtype=complex)
    for i in range(nu):
        for j in range(nv):
            t[i, :, j, i, :, j] = frames[i, j]
    n = 2 * nu * nv
    return t.reshape(n, n)


def valley_cs(u_parts: CSDecomposition, v_parts: CSDecomposition) -> CSDecomposition:
    """CS decomposition of W = ctrl(U) V ctrl(U)^dagger, U on top controlled by V's top qubit.

    The half space of W is ordered (rest of U, top of V, rest of V) and the
    stubs come out as sigma2^U (x) 1 (x) sigma2^V, not sorted.
    """
    nu, nv = u_parts.half, v_parts.half
    for parts in (u_parts, v_parts):
        if parts.s0.shape != (parts.half, parts.half) or parts.t1.shape != (parts.half, parts.half):
            raise InconsistentDimensions("component sizes disagree with the stub length")
    s1u, s2u = u_parts.sigma1, u_parts.sigma2
    s1v, s2v = v_parts.sigma1, v_parts.sigma2

    a = np.broadcast_to(s1v[None, :], (nu, nv))
    b = np.outer(s1u, s2v)
    c = np.hypot(a, b)
    frames = _frame_operator(_rotation_frames(a, b))
    iu, iv = np.eye(nu), np.eye(nv)
    zm, xm = kron(iu, Z, iv), kron(iu, X, iv)
    ld = frames.conj().T
    s_sigma = (ld, -ld @ zm)
    t_sigma = (zm @ frames @ xm, -frames @ xm)

    proj = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    su, tu = (u_parts.s0, u_parts.s1), (u_parts.t0, u_parts.t1)
    sv, tv = (v_parts.s0, v_parts.s1), (v_parts.t0, v_parts.t1)
    s_out, t_out = [], []
    for side in (0, 1):
        outer = (tu[side].conj().T, su[side])  # indexed by the middle qubit
        left = sum(kron(outer[mm], proj[mm], sv[mm]) for mm in (0, 1))
        right = sum(kron(outer[mm].conj().T, proj[mm], tv[mm]) for mm in (0, 1))
        s_out.append(left @ s_sigma[side])
        t_out.append(t_sigma[side] @ right)

    sigma1 = np.repeat(c[:, None, :], 2, axis=1).reshape(-1)
    sigma2 = kron(s2u.reshape(-1, 1), np.ones((2, 1)), s2v.reshape(-1, 1)).real.reshape(-1)
    return CSDecomposition(s_out[0], s_out[1], sigma1, sigma2, t_out[0], t_out[1])


def valley_chain_cs(layers) -> CSDecomposition:
    """CS decomposition of the valley of ``layers`` (innermost first) by recursion."""
    cs = cs_decompose(layers[0])
    for u in layers[1:]:
        cs = valley_cs(cs_decompose(u), cs)
    return cs


def valley_stub_product(v: ValleySpec) -> np.ndarray:
    if any(u.shape != (2, 2) for u in v.layers):
        raise NonSingleQubitLayer("all valley layers must be 2x2")
    value = float(np.prod([abs(u[0, 1]) for u in v.layers]))
    return np.full(1 << (len(v.layers) - 1), value)


def valley_matrix(layers) -> np.ndarray:
    return unitary_of(build_valley(ValleySpec(tuple(layers))))


def mn_precompute(gates) -> PrecomputeParts:
    """Staircase-specialised identity: P, controlled single-qubit Q on the bottom wire, R."""
    gates = tuple(require_unitary(g, what="staircase gate") for g in gates)
    if any(g.shape != (2, 2) for g in gates):
        raise NonSingleQubitLayer("staircase gates must be 2x2")
    ell = len(gates)
    v0, _ = staircase_pair(gates)
    cs = valley_chain_cs(gates)
    stub = valley_stub_product(ValleySpec(gates))[0]
    if np.max(np.abs(cs.sigma2 - stub)) > 1e-9:
        raise ShapeMismatch("valley stubs do not collapse to a scalar")
    c, s = float(cs.sigma1[0]), float(cs.sigma2[0])
    # single-qubit collapse: D acts only on the bottom wire, and Phi absorbs into P and Q
    b_tilde = rev(block_diag(cs.t0, -cs.t1))
    p = b_tilde @ v0
    q = np.array([[c, -s], [s, c]], dtype=complex)
    r_cases = (rev(cs.t0).conj().T, -rev(cs.t1).conj().T, rev(cs.s0), -rev(cs.s1))
    d = np.array([c - 1j * s, c + 1j * s])
    return PrecomputeParts(ell, p, d, r_cases, q, (ell,), {"stub": s})


def _cascade_layers(c: ControlCascade) -> list[np.ndarray]:
    return [rev(u1 @ u0.conj().T) for u0, u1 in c.blocks]


def _cascade_as_pair(c: ControlCascade) -> tuple[np.ndarray, np.ndarray]:
    """(V0, V1) of the whole cascade seen as one multiplexer on qubit 0."""
    layout = c.layout()
    n = c.num_qubits - 1
    tail = [Multiplexer((ctrl - 1,), tuple(t - 1 for t in targets), (u0, u1))
            for (ctrl, targets), (u0, u1) in zip(layout[1:], c.blocks[1:])]
    first = tuple(t - 1 for t in layout[0][1])
    u0, u1 = c.blocks[0]
    v0 = unitary_of(Circuit(n, [unitary_gate(first, u0)] + tail))
    v1 = unitary_of(Circuit(n, [unitary_gate(first, u1)] + tail))
    return v0, v1


def refined_stub_factor(c: ControlCascade) -> tuple[np.ndarray, PrecomputeParts]:
    """Precomputation identity for a whole cascade with D = 1 on the inner control wires.

    Returns D' (phases on the d - l targets that are not inner control wires,
    listed in ``parts.d_wires``) and parts whose diagonal acts only there.
    """
    if c.m < 1:
        raise ShapeMismatch("cascade has no blocks")
    v0, v1 = _cascade_as_pair(c)
    k = c.num_qubits - 1
    cs = valley_chain_cs(_cascade_layers(c))
    full = _parts_from_cs(v0, cs, k)
    inner = {targets[-1] for _, targets in c.layout()[:-1]}
    keep = tuple(q for q in range(1, k + 1) if q not in inner)
    phases = full.d.reshape([2] * k)
    index = tuple(0 if q in inner else slice(None) for q in range(1, k + 1))
    d_prime = phases[index].reshape(-1)
    replicated = np.broadcast_to(phases[index].reshape([1 if q in inner else 2 for q in range(1, k + 1)]),
                                 phases.shape)
    if np.max(np.abs(replicated - phases)) > 1e-9:
        raise ShapeMismatch("diagonal does not factor through the inner control wires")
    parts = PrecomputeParts(k, full.p, d_prime, full.r_cases, None, keep,
                            {"inner_wires": tuple(sorted(inner)), "full_d": full.d})
    return d_prime, parts
