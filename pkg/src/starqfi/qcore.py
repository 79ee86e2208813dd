"""
Dense spin-1/2 operator algebra.

Qubits are numbered from 1 (the target) to N; qubit 1 is the leftmost
tensor factor, so the computational basis index of ``|q1 q2 ... qN>`` is the
binary number ``q1 q2 ... qN``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "HERMITIAN_TOL",
    "DEFAULT_GROUPING_TOL",
    "SpectralDecomposition",
    "pauli",
    "identity",
    "spin_op",
    "collective_ancilla_op",
    "embed_target",
    "is_hermitian",
    "hermitian_eig",
    "eigenvector_decomposition",
    "rotation_unitary",
    "rotate_target",
    "dephase_target",
    "partial_trace_target",
    "partial_trace_ancilla",
]

HERMITIAN_TOL = 1e-12
DEFAULT_GROUPING_TOL = 1e-9

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis):
    """Return the 2x2 Pauli matrix for ``axis`` in ``{"x", "y", "z"}``."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def identity(dim):
    return np.eye(dim, dtype=complex)


def _check_n(n_qubits):
    if int(n_qubits) != n_qubits or n_qubits < 1:
        raise ValueError(f"n_qubits must be a positive integer, got {n_qubits!r}")
    if n_qubits > 12:
        raise ValueError("dense representation supports at most 12 qubits")


def spin_op(n_qubits, site, axis):
    """
    Spin operator ``I_{site,axis}`` (Pauli/2) embedded in an N-qubit space.

    Parameters
    ----------
    n_qubits : int
        Total number of qubits.
    site : int
        1-based qubit index; 1 is the target.
    axis : {"x", "y", "z"}
    """
    _check_n(n_qubits)
    if not 1 <= site <= n_qubits:
        raise ValueError(f"site {site} out of range 1..{n_qubits}")
    factors = [np.eye(2, dtype=complex)] * n_qubits
    factors[site - 1] = pauli(axis) / 2
    return reduce(np.kron, factors)


def collective_ancilla_op(n_qubits, axis):
    """Sum of ``I_{j,axis}`` over the ancilla qubits j = 2..N."""
    _check_n(n_qubits)
    if n_qubits < 2:
        raise ValueError("collective ancilla operator needs n_qubits >= 2")
    # identity on the target times the collective operator on N-1 qubits
    m = n_qubits - 1
    single = pauli(axis) / 2
    total = np.zeros((2**m, 2**m), dtype=complex)
    for j in range(m):
        total += np.kron(np.kron(np.eye(2**j), single), np.eye(2 ** (m - j - 1)))
    return np.kron(np.eye(2, dtype=complex), total)


def embed_target(op, n_qubits):
    """``op`` (2x2) on the target qubit, identity on the ancillas."""
    _check_n(n_qubits)
    return np.kron(np.asarray(op, dtype=complex), np.eye(2 ** (n_qubits - 1)))


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.max(np.abs(a - a.conj().T), initial=0.0) <= tol


@dataclass(frozen=True)
class SpectralDecomposition:
    """
    Eigenvalue outcomes of a Hermitian operator with their projectors.

    ``eigenvalues[k]`` is the representative (mean) eigenvalue of group k and
    ``projectors[k]`` the orthogonal projector onto its eigenspace.
    """

    eigenvalues: np.ndarray
    projectors: tuple
    grouping_tol: float

    def __len__(self):
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(zip(self.eigenvalues, self.projectors))

    @property
    def multiplicities(self):
        return np.array([int(round(np.trace(p).real)) for p in self.projectors])

    def reconstruct(self):
        return sum(m * p for m, p in self)


def _hermitian_eigh(a):
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a):
        raise ValueError("matrix is not Hermitian to 1e-12")
    # symmetrize so eigh sees an exactly Hermitian input
    return np.linalg.eigh((a + a.conj().T) / 2)


def hermitian_eig(a, grouping_tol=DEFAULT_GROUPING_TOL):
    """
    Projector-grouped spectral decomposition of a Hermitian matrix.

    Sorted eigenvalues are split into groups wherever the gap between
    neighbours exceeds ``grouping_tol * max(1, spectral range)``.
    """
    w, v = _hermitian_eigh(a)
    scale = grouping_tol * max(1.0, float(w[-1] - w[0]))
    breaks = np.flatnonzero(np.diff(w) > scale) + 1
    groups = np.split(np.arange(len(w)), breaks)
    values = []
    projectors = []
    for idx in groups:
        vecs = v[:, idx]
        values.append(float(np.mean(w[idx])))
        projectors.append(vecs @ vecs.conj().T)
    return SpectralDecomposition(np.array(values), tuple(projectors), grouping_tol)


def eigenvector_decomposition(a):
    """One rank-1 projector per eigenvector, no merging (basis set by LAPACK)."""
    w, v = _hermitian_eigh(a)
    projectors = tuple(np.outer(v[:, k], v[:, k].conj()) for k in range(len(w)))
    return SpectralDecomposition(np.asarray(w, dtype=float), projectors, 0.0)


def rotation_unitary(angle, axis_phase):
    """exp(-i angle (cos(p) sx + sin(p) sy) / 2) as a 2x2 matrix."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array(
        [[c, -1j * s * np.exp(-1j * axis_phase)], [-1j * s * np.exp(1j * axis_phase), c]],
        dtype=complex,
    )


def _n_from_dim(dim):
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def rotate_target(rho, angle, axis_phase):
    """Rotate the target qubit of ``rho`` by ``angle`` about the transverse axis at ``axis_phase``."""
    rho = np.asarray(rho, dtype=complex)
    u = embed_target(rotation_unitary(angle, axis_phase), _n_from_dim(rho.shape[0]))
    return u @ rho @ u.conj().T


def dephase_target(rho):
    """Remove coherences between the target's |0> and |1> subspaces."""
    rho = np.array(rho, dtype=complex)
    half = rho.shape[0] // 2
    rho[:half, half:] = 0
    rho[half:, :half] = 0
    return rho


def partial_trace_ancilla(rho):
    """Reduced 2x2 state of the target qubit."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    r = rho.reshape(2, d // 2, 2, d // 2)
    return np.einsum("ajbj->ab", r)


def partial_trace_target(rho):
    """Reduced state of the N-1 ancilla qubits."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    r = rho.reshape(2, d // 2, 2, d // 2)
    return np.einsum("iaib->ab", r)
