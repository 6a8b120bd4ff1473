"""Dense complex linear algebra used by every other module.

Conventions: qubit 0 is the most significant bit of a basis index, and
matrices act on column vectors, so ``A @ B`` means "B first, then A".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .errors import DimensionMismatch, NonUnitary, NotPowerOfTwo, OddDimension


@dataclass(frozen=True)
class NumericPolicy:
    unitary_tol: float = 1e-10
    cluster_tol: float = 1e-8
    phase_tol: float = 1e-10


POLICY = NumericPolicy()

PHI = np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2)
Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
I2 = np.eye(2, dtype=complex)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def num_qubits(dim: int) -> int:
    if dim < 1 or dim & (dim - 1):
        raise NotPowerOfTwo(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def unitarity_error(u) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_unitary(u, tol: float | None = None) -> bool:
    tol = POLICY.unitary_tol if tol is None else tol
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_error(u) <= tol


def require_unitary(u, tol: float | None = None, what: str = "matrix") -> np.ndarray:
    u = as_matrix(u)
    if not is_unitary(u, tol):
        raise NonUnitary(f"{what} is not unitary (error {unitarity_error(u):.3e})")
    return u


def kron(*ms) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def svd(a):
    """Return (left, singulars, right) with a = left @ diag(singulars) @ right."""
    return np.linalg.svd(np.asarray(a, dtype=complex))


def op_norm_distance(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a - b, 2))


def bit_reversal(q: int) -> np.ndarray:
    idx = np.arange(1 << q)
    out = np.zeros_like(idx)
    for bit in range(q):
        out |= ((idx >> bit) & 1) << (q - 1 - bit)
    return out


def rev(u) -> np.ndarray:
    """Conjugate by the qubit-order reversal permutation."""
    u = as_matrix(u)
    perm = bit_reversal(num_qubits(u.shape[0]))
    return u[np.ix_(perm, perm)]


def nearest_unitary(a) -> np.ndarray:
    left, _, right = np.linalg.svd(a)
    return left @ right


def random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary drawn from ``rng`` (a numpy Generator or seed)."""
    if dim == 1:
        rng = np.random.default_rng(rng)
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


@dataclass(frozen=True)
class CSDecomposition:
    """U = diag(s0, s1) @ [[C, S], [-S, C]] @ diag(t0, t1) with C = diag(sigma1)."""

    s0: np.ndarray
    s1: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    t0: np.ndarray
    t1: np.ndarray

    @property
    def half(self) -> int:
        return len(self.sigma1)

    def core(self) -> np.ndarray:
        c = np.diag(self.sigma1).astype(complex)
        s = np.diag(self.sigma2).astype(complex)
        return np.block([[c, s], [-s, c]])

    def left(self) -> np.ndarray:
        return block_diag(self.s0, self.s1)

    def right(self) -> np.ndarray:
        return block_diag(self.t0, self.t1)

    def reconstruct(self) -> np.ndarray:
        return self.left() @ self.core() @ self.right()


def block_diag(*blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    at = 0
    for b in blocks:
        d = b.shape[0]
        out[at:at + d, at:at + d] = b
        at += d
    return out


def _orth_complement(cols: np.ndarray, n: int) -> np.ndarray:
    if cols.shape[1] == 0:
        return np.eye(n, dtype=complex)
    q, _ = np.linalg.qr(cols, mode="complete")
    return q[:, cols.shape[1]:]


def _polar_unitary(b: np.ndarray) -> np.ndarray:
    if b.size == 0:
        return b.astype(complex)
    left, _, right = np.linalg.svd(b)
    return left @ right


def cs_decompose(u, tol: float | None = None) -> CSDecomposition:
    """Cosine-sine decomposition of a 2N x 2N unitary with ascending cosines.

    Cosines come from an SVD of the top-left block. Sine-dominant columns of
    the bottom factors are read off directly; the cosine-dominant ones are
    fixed by a polar factor on the orthogonal complement, which keeps the
    result accurate for clustered and exactly 0/1 cosines.
    """
    u = as_matrix(u)
    if u.shape[0] % 2:
        raise OddDimension(f"dimension {u.shape[0]} is odd")
    require_unitary(u, tol, "input to cs_decompose")
    n = u.shape[0] // 2
    u00, u01, u10, u11 = u[:n, :n], u[:n, n:], u[n:, :n], u[n:, n:]

    # ascending order is imposed by a stable sort at the end, so tied cosines keep the SVD order
    left, c, right = np.linalg.svd(u00)
    c = np.clip(c, 0.0, 1.0)
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, 1.0))
    s0, t0 = left, right

    x = -u10 @ t0.conj().T
    y = s0.conj().T @ u01
    sine = s >= np.sqrt(0.5)
    ks = np.flatnonzero(sine)
    js = np.flatnonzero(~sine)

    s1 = np.zeros((n, n), dtype=complex)
    t1 = np.zeros((n, n), dtype=complex)
    s1[:, ks] = x[:, ks] / s[ks]
    t1[ks, :] = y[ks, :] / s[ks, None]
    if len(js):
        # small sines: take them from an SVD of the projected block instead of
        # sqrt(1 - c^2), rotating the paired vectors; the rotation only mixes
        # near-equal cosines, so the top-left block is preserved
        comp = _orth_complement(s1[:, ks], n)
        ub, sb, vbh = np.linalg.svd(comp.conj().T @ x[:, js])
        vb = vbh.conj().T
        s1[:, js] = comp @ ub
        s0[:, js] = s0[:, js] @ vb
        t0[js, :] = vbh @ t0[js, :]
        s[js] = np.clip(sb, 0.0, 1.0)
        c[js] = np.sqrt(1.0 - s[js] ** 2)
        s1 = nearest_unitary(s1)
        t1[js, :] = (s1[:, js].conj().T @ u11) / c[js, None]
    s1 = nearest_unitary(s1)
    t1 = nearest_unitary(t1)

    order = np.argsort(c, kind="stable")
    c, s = c[order], s[order]
    s0, s1 = s0[:, order], s1[:, order]
    t0, t1 = t0[order, :], t1[order, :]

    # sign convention: first significant entry of each column of s0 is real positive
    for i in range(n):
        col = s0[:, i]
        j = int(np.argmax(np.abs(col) > POLICY.phase_tol))
        ph = col[j] / abs(col[j])
        s0[:, i] *= np.conj(ph)
        s1[:, i] *= np.conj(ph)
        t0[i, :] *= ph
        t1[i, :] *= ph

    return CSDecomposition(s0, s1, c, s, t0, t1)


def cs_from_parts(s0, s1, sigma1, sigma2, t0, t1) -> CSDecomposition:
    return CSDecomposition(
        np.asarray(s0, dtype=complex), np.asarray(s1, dtype=complex),
        np.asarray(sigma1, dtype=float), np.asarray(sigma2, dtype=float),
        np.asarray(t0, dtype=complex), np.asarray(t1, dtype=complex),
    )
