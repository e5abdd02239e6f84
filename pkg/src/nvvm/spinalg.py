"""Dense complex linear algebra for small spin systems.

Plain numpy on small dense arrays: spin operators, Hermitian
eigendecomposition with a fixed phase convention, tensor products, the
dephasing double commutator, and eigendecomposition-based matrix
exponential action. Everything at desk scale (dim 3 for one spin-1, a few
hundred for small registers), so there is no sparse or GPU machinery.

Basis convention for spin-1: (|m_s=+1>, |m_s=0>, |m_s=-1>). Every matrix
in this package uses that ordering.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

_SQRT2_INV = 1.0 / np.sqrt(2.0)

# Spin-1 operators in the (|+1>, |0>, |-1>) basis.
_S1_X = _SQRT2_INV * np.array(
    [[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex
)
_S1_Y = _SQRT2_INV * np.array(
    [[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex
)
_S1_Z = np.diag([1.0, 0.0, -1.0]).astype(complex)

# Pauli matrices; basis ordering (up, down) is whatever the caller assigns.
_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.diag([1.0, -1.0]).astype(complex)

for _m in (_S1_X, _S1_Y, _S1_Z, _PAULI_X, _PAULI_Y, _PAULI_Z):
    _m.setflags(write=False)


class NonHermitianError(ValueError):
    """Input matrix violated a Hermiticity contract."""


def spin1_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (S_x, S_y, S_z) for spin 1 in the (|+1>, |0>, |-1>) basis.

    The returned arrays are read-only module constants; copy before
    mutating.
    """
    return _S1_X, _S1_Y, _S1_Z


def pauli_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the Pauli matrices (sigma_x, sigma_y, sigma_z), read-only."""
    return _PAULI_X, _PAULI_Y, _PAULI_Z


def hermiticity_defect(m: np.ndarray) -> float:
    """max |M_ij - conj(M_ji)|, the absolute deviation from Hermiticity."""
    return float(np.max(np.abs(m - m.conj().T)))


def require_hermitian(m: np.ndarray, rtol: float = 1e-12) -> None:
    """Raise NonHermitianError unless M is Hermitian within rtol * max|M|."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {m.shape}")
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        return
    if hermiticity_defect(m) > rtol * scale:
        raise NonHermitianError(
            f"matrix is not Hermitian: defect {hermiticity_defect(m):.3e} "
            f"exceeds {rtol:.1e} * max|M| = {rtol * scale:.3e}"
        )


def fix_eigenvector_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Ties go to the lowest row index, which makes the convention
    deterministic across runs and platforms.
    """
    out = np.array(vectors, dtype=complex, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if abs(pivot) > 0.0:
            out[:, k] = col * (pivot.conjugate() / abs(pivot))
    return out


def hermitian_eigensystem(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a Hermitian matrix.

    Returns (energies, vectors) with energies ascending and vectors as
    orthonormal columns, phase-fixed so the largest-magnitude component of
    each eigenvector is real positive.

    Raises NonHermitianError if the input is not Hermitian to 1e-12
    relative.
    """
    m = np.asarray(m, dtype=complex)
    require_hermitian(m)
    energies, vectors = np.linalg.eigh(m)
    return energies, fix_eigenvector_phases(vectors)


def kron(parts: list[np.ndarray] | tuple[np.ndarray, ...]) -> np.ndarray:
    """Tensor product of a nonempty sequence of matrices, left to right."""
    if len(parts) == 0:
        raise ValueError("kron requires at least one factor")
    return reduce(np.kron, [np.asarray(p, dtype=complex) for p in parts])


def single_site_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a one-site operator at position `site` of an n-site register."""
    if not 0 <= site < n_sites:
        raise ValueError(f"site {site} outside register of {n_sites}")
    dim = op.shape[0]
    eye = np.eye(dim, dtype=complex)
    return kron([op if j == site else eye for j in range(n_sites)])


def double_commutator(lop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """[L, [L, rho]] for Hermitian L; the dephasing superoperator kernel.

    Output is Hermitian and traceless whenever rho is Hermitian.
    """
    lop = np.asarray(lop, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if lop.shape != rho.shape:
        raise ValueError(f"shape mismatch: {lop.shape} vs {rho.shape}")
    require_hermitian(lop)
    inner = lop @ rho - rho @ lop
    return lop @ inner - inner @ lop


def matrix_exponential_action(
    h: np.ndarray, t: float, v: np.ndarray
) -> np.ndarray:
    """Apply exp(-i H t) to a state vector via eigendecomposition of H.

    H must be Hermitian; the result has the same norm as v up to roundoff.
    """
    energies, vectors = hermitian_eigensystem(h)
    coeffs = vectors.conj().T @ np.asarray(v, dtype=complex)
    return vectors @ (np.exp(-1j * energies * t) * coeffs)
