"""Pauli-basis coordinates, Pauli transfer matrices and the cut-connecting tensors.

Generalized Pauli strings on n qubits are indexed by a base-4 integer whose
most significant digit belongs to qubit 0 (digit values I=0, X=1, Y=2, Z=3),
so the index order matches ``np.kron(P_q0, P_q1, ...)``.
"""

from __future__ import annotations

import enum
import functools
import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
IDENTITY_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_LABELS = "IXYZ"
AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


def pauli_label(index: int, n: int) -> str:
    digits = []
    for _ in range(n):
        index, d = divmod(index, 4)
        digits.append(PAULI_LABELS[d])
    return "".join(reversed(digits))


@functools.lru_cache(maxsize=8)
def pauli_basis(n: int) -> np.ndarray:
    """All 4^n Pauli strings as an array of shape (4^n, 2^n, 2^n)."""
    out = []
    for digits in itertools.product(range(4), repeat=n):
        m = np.ones((1, 1), dtype=complex)
        for d in digits:
            m = np.kron(m, PAULIS[d])
        out.append(m)
    basis = np.array(out)
    basis.setflags(write=False)
    return basis


def _num_qubits_of(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PauliCoords:
    num_qubits: int
    coords: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (4**self.num_qubits,):
            raise ValueError(f"expected {4**self.num_qubits} coordinates, got shape {c.shape}")
        object.__setattr__(self, "coords", c)

    def to_matrix(self) -> np.ndarray:
        return np.tensordot(self.coords, pauli_basis(self.num_qubits), axes=1)

    def __getitem__(self, label: str) -> float:
        idx = 0
        for ch in label:
            idx = 4 * idx + PAULI_LABELS.index(ch)
        return float(self.coords[idx])


def pauli_decompose(op: np.ndarray, tol: float = HERMITIAN_TOL) -> PauliCoords:
    """Coordinates (1/d) Tr[P_a op] of a Hermitian operator."""
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError("operator must be a square matrix")
    if not np.allclose(op, op.conj().T, atol=tol, rtol=0):
        raise ValueError("operator is not Hermitian")
    n = _num_qubits_of(op.shape[0])
    d = 2**n
    # Tr[P op] = sum_ij P_ij op_ji
    raw = np.einsum("aij,ji->a", pauli_basis(n), op) / d
    return PauliCoords(n, raw.real)


def scalar_product(a: PauliCoords, b: PauliCoords) -> float:
    """<<A|B>> = sum_a A_a B_a; Tr[A^dag B] equals 2^n times this value."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit-count mismatch: {a.num_qubits} vs {b.num_qubits}")
    return float(np.dot(a.coords, b.coords))


@dataclass(frozen=True)
class Ptm:
    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        dim = 4**self.num_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"PTM must be {dim}x{dim}, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def apply(self, rho: PauliCoords) -> PauliCoords:
        if rho.num_qubits != self.num_qubits:
            raise ValueError("qubit-count mismatch")
        return PauliCoords(self.num_qubits, self.matrix @ rho.coords)

    def __matmul__(self, other: Ptm) -> Ptm:
        """Composition: ``(r2 @ r1)`` is the PTM of applying r1 first, then r2."""
        return Ptm(self.num_qubits, self.matrix @ other.matrix)

    def is_trace_preserving(self, tol: float = HERMITIAN_TOL) -> bool:
        first = np.zeros(4**self.num_qubits)
        first[0] = 1.0
        return bool(np.allclose(self.matrix[0], first, atol=tol))


def check_kraus_completeness(kraus_ops: Sequence[np.ndarray], tol: float = HERMITIAN_TOL) -> int:
    """Raise unless sum K^dag K = I; returns the operator dimension."""
    if not kraus_ops:
        raise ValueError("empty Kraus set")
    ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    dim = ops[0].shape[0]
    if any(k.shape != (dim, dim) for k in ops):
        raise ValueError("Kraus operators must be square and of equal dimension")
    total = sum(k.conj().T @ k for k in ops)
    err = np.max(np.abs(total - np.eye(dim)))
    if err > tol:
        raise ValueError(f"Kraus set is not trace preserving (max deviation {err:.3g})")
    return dim


def apply_kraus(kraus_ops: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus_ops)


def ptm_of_channel(kraus_ops: Sequence[np.ndarray]) -> Ptm:
    """[R]_ab = (1/d) Tr[P_a O(P_b)] for the channel O given by ``kraus_ops``."""
    dim = check_kraus_completeness(kraus_ops)
    n = _num_qubits_of(dim)
    basis = pauli_basis(n)
    images = np.array([apply_kraus(kraus_ops, p) for p in basis])
    r = np.einsum("aij,bji->ab", basis, images) / dim
    return Ptm(n, r.real)


# --------------------------------------------------------------- eigenstates


@dataclass(frozen=True)
class PauliEigenstate:
    axis: str
    eigenindex: int
    vector: np.ndarray
    density_matrix: np.ndarray
    pauli_coords: PauliCoords


_EIGENVECTORS = {
    ("X", 0): np.array([1, 1]) / np.sqrt(2),
    ("X", 1): np.array([1, -1]) / np.sqrt(2),
    ("Y", 0): np.array([1, 1j]) / np.sqrt(2),
    ("Y", 1): np.array([1, -1j]) / np.sqrt(2),
    ("Z", 0): np.array([1, 0]),
    ("Z", 1): np.array([0, 1]),
}


@functools.lru_cache(maxsize=None)
def eigenstate(axis: str, eigenindex: int) -> PauliEigenstate:
    """b-th eigenvector of sigma_axis; b=0 is the +1 eigenvector."""
    try:
        vec = np.asarray(_EIGENVECTORS[(axis, eigenindex)], dtype=complex)
    except KeyError:
        raise ValueError(f"no eigenstate for axis={axis!r}, eigenindex={eigenindex!r}") from None
    rho = np.outer(vec, vec.conj())
    return PauliEigenstate(axis, eigenindex, vec, rho, pauli_decompose(rho))


# ------------------------------------------------------------ gamma tensors


class GammaVariant(str, enum.Enum):
    TILDE = "tilde"  # eigenstate-preparation variant
    BELL = "bell"  # Bell-pair gadget variant


@dataclass(frozen=True)
class GammaTensor:
    """Weights indexed by (axis in X,Y,Z; b; b')."""

    values: np.ndarray
    variant: GammaVariant

    def __getitem__(self, key) -> float:
        axis, b, bp = key
        if isinstance(axis, str):
            axis = AXIS_INDEX[axis]
        return float(self.values[axis, b, bp])


def gamma_tensor(variant: GammaVariant | str) -> GammaTensor:
    variant = GammaVariant(variant)
    delta = np.eye(2)
    g = np.empty((3, 2, 2))
    g[AXIS_INDEX["X"]] = 2 * delta - 1
    g[AXIS_INDEX["Y"]] = 2 * delta - 1
    g[AXIS_INDEX["Z"]] = 2 * delta
    if variant is GammaVariant.BELL:
        g[AXIS_INDEX["Y"]] *= -1
    g.setflags(write=False)
    return GammaTensor(g, variant)


def identity_decomposition(gamma: GammaTensor | np.ndarray) -> np.ndarray:
    """sum_{a,b,b'} g_a^{bb'} |sigma_a^b>><<sigma_a^b'| as a 4x4 matrix."""
    values = gamma.values if isinstance(gamma, GammaTensor) else np.asarray(gamma)
    out = np.zeros((4, 4))
    for axis, ai in AXIS_INDEX.items():
        for b in (0, 1):
            for bp in (0, 1):
                ket = eigenstate(axis, b).pauli_coords.coords
                bra = eigenstate(axis, bp).pauli_coords.coords
                out += values[ai, b, bp] * np.outer(ket, bra)
    return out


def identity_decomposition_check(gamma: GammaTensor | np.ndarray | None = None, tol: float = IDENTITY_TOL) -> bool:
    """True when ``gamma`` (default: the eigenstate variant) resolves the one-qubit identity PTM."""
    if gamma is None:
        gamma = gamma_tensor(GammaVariant.TILDE)
    identity_ptm = ptm_of_channel([I2]).matrix
    return bool(np.max(np.abs(identity_decomposition(gamma) - identity_ptm)) < tol)
