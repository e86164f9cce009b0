"""Dense state and operator algebra over small multi-qubit spaces.

Qubit 0 is the most significant bit of a basis index, so ``tensor(a, b)``
places ``a`` on the leading qubits exactly like ``numpy.kron``. A basis
label such as ``"01"`` therefore denotes index 1 of a 4-dimensional space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .config import TOL

SQRT_HALF = 1.0 / np.sqrt(2.0)


def num_qubits(dim: int) -> int:
    """Return log2(dim), rejecting dimensions that are not powers of two."""
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


def _check_dim(dim: int) -> None:
    num_qubits(dim)
    if dim > TOL.max_dim:
        raise MemoryError(f"dimension {dim} exceeds the dense cap {TOL.max_dim}")


def ket(amplitudes: Iterable[complex]) -> np.ndarray:
    """Build a normalized state vector from raw amplitudes."""
    psi = np.asarray(list(amplitudes), dtype=complex)
    _check_dim(psi.size)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("zero vector cannot be normalized")
    return psi / norm


def basis_ket(label: str) -> np.ndarray:
    """Computational basis state for a bit label, first character = qubit 0."""
    dim = 2 ** len(label)
    _check_dim(dim)
    psi = np.zeros(dim, dtype=complex)
    psi[int(label, 2)] = 1.0
    return psi


def density(psi: np.ndarray) -> np.ndarray:
    """Projector |psi><psi| for a state vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor on the most significant qubits."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    dim = 1
    for f in factors:
        dim *= np.shape(f)[0]
    _check_dim(dim)
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def is_hermitian(op: np.ndarray, tol: float = TOL.physical) -> bool:
    return bool(np.allclose(op, op.conj().T, rtol=0.0, atol=tol))


def min_eigenvalue(op: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian operator (LAPACK heevd, deterministic)."""
    return float(np.linalg.eigvalsh(op)[0])


def check_density(rho: np.ndarray, normalized: bool = True) -> np.ndarray:
    """Validate a density operator and return it as a complex array.

    Args:
        rho: Candidate operator.
        normalized: Require unit trace. Pass False for weighted operators.

    Raises:
        ValueError: If Hermiticity, trace or positivity fails.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density operator must be square")
    _check_dim(rho.shape[0])
    if not is_hermitian(rho):
        raise ValueError("operator is not Hermitian")
    if normalized and abs(np.trace(rho) - 1.0) > TOL.physical:
        raise ValueError(f"trace {np.trace(rho).real} differs from 1")
    if min_eigenvalue(rho) < -TOL.eigen:
        raise ValueError("operator has a negative eigenvalue")
    return rho


def check_unitary(u: np.ndarray, tol: float = TOL.algebraic) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    _check_dim(u.shape[0])
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0.0, atol=tol):
        raise ValueError("operator is not unitary")
    return u


def check_povm(elements: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Validate positivity of each element and completeness of the set."""
    els = [np.asarray(e, dtype=complex) for e in elements]
    if not els:
        raise ValueError("empty POVM")
    dim = els[0].shape[0]
    for e in els:
        if e.shape != (dim, dim) or not is_hermitian(e):
            raise ValueError("POVM element is not a Hermitian operator of matching size")
        if min_eigenvalue(e) < -TOL.physical:
            raise ValueError("POVM element is not positive")
    if not np.allclose(sum(els), np.eye(dim), rtol=0.0, atol=TOL.physical):
        raise ValueError("POVM elements do not sum to the identity")
    return els


def _split(rho: np.ndarray, keep: Sequence[int]) -> tuple[np.ndarray, int, int]:
    """Reshape rho to (kept, traced, kept, traced) with kept qubits in order."""
    dim = rho.shape[0]
    n = num_qubits(dim)
    keep = sorted(set(int(k) for k in keep))
    if not keep or len(keep) == n:
        raise ValueError("keep must be a nonempty proper subset of the qubits")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError("qubit index out of range")
    traced = [q for q in range(n) if q not in keep]
    order = keep + traced + [n + q for q in keep] + [n + q for q in traced]
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = rho.reshape([2] * (2 * n)).transpose(order).reshape(dk, dt, dk, dt)
    return t, dk, dt


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced operator on the qubits listed in ``keep``."""
    rho = np.asarray(rho, dtype=complex)
    t, _, _ = _split(rho, keep)
    return np.einsum("ajbj->ab", t)


def conditioned_trace(
    rho: np.ndarray, a: np.ndarray, keep: Sequence[int]
) -> tuple[np.ndarray, float]:
    """Trace out the complement of ``keep`` weighted by a positive operator.

    Computes Tr_traced[rho (I ⊗ a)], where ``a`` acts on the traced qubits in
    ascending index order. With ``a`` the identity this is the partial trace.

    Returns:
        The unnormalized reduced operator and its trace (the weight).
    """
    rho = np.asarray(rho, dtype=complex)
    a = np.asarray(a, dtype=complex)
    t, dk, dt = _split(rho, keep)
    if a.shape != (dt, dt):
        raise ValueError("conditioning operator does not match the traced subsystem")
    if not is_hermitian(a) or min_eigenvalue(a) < -TOL.physical:
        raise ValueError("conditioning operator must be positive")
    out = np.einsum("ajbm,mj->ab", t, a)
    return out, float(np.trace(out).real)


@dataclass(frozen=True)
class BlochVector:
    """Bloch-ball coordinates ρ = (I + x X + y Y + z Z) / 2."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if self.radius > 1.0 + TOL.physical:
            raise ValueError("Bloch vector lies outside the unit ball")

    @property
    def radius(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def to_bloch(rho: np.ndarray) -> BlochVector:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("Bloch coordinates need a single-qubit operator")
    return BlochVector(
        x=float(2.0 * rho[1, 0].real),
        y=float(2.0 * rho[1, 0].imag),
        z=float((rho[0, 0] - rho[1, 1]).real),
    )


def from_bloch(v: BlochVector) -> np.ndarray:
    return 0.5 * np.array(
        [[1.0 + v.z, v.x - 1j * v.y], [v.x + 1j * v.y, 1.0 - v.z]], dtype=complex
    )


def povm_probabilities(rho: np.ndarray, elements: Sequence[np.ndarray]) -> np.ndarray:
    probs = np.array([np.trace(rho @ e).real for e in elements])
    return np.clip(probs, 0.0, None)


def measure_povm(
    rho: np.ndarray, elements: Sequence[np.ndarray], rng: np.random.Generator
) -> tuple[int, float]:
    """Sample a POVM outcome.

    Returns:
        The outcome index and its Born probability.
    """
    rho = check_density(rho)
    els = check_povm(elements)
    probs = povm_probabilities(rho, els)
    idx = int(rng.choice(len(els), p=probs / probs.sum()))
    return idx, float(probs[idx])


def projector_povm(basis: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Rank-one projectors onto an orthonormal list of vectors."""
    return [density(np.asarray(b, dtype=complex)) for b in basis]


BELL_LABELS = ("psi-", "psi+", "phi+", "phi-")
BELL = {
    "psi-": np.array([0, 1, -1, 0], dtype=complex) * SQRT_HALF,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) * SQRT_HALF,
    "phi+": np.array([1, 0, 0, 1], dtype=complex) * SQRT_HALF,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) * SQRT_HALF,
}
BELL_MATRIX = np.array([BELL[k] for k in BELL_LABELS])


def bell_probabilities(pair: np.ndarray) -> np.ndarray:
    """Outcome probabilities in BELL_LABELS order for a pure or mixed pair."""
    pair = np.asarray(pair, dtype=complex)
    if pair.ndim == 1:
        return np.abs(BELL_MATRIX.conj() @ pair) ** 2
    return np.einsum("ki,ij,kj->k", BELL_MATRIX.conj(), pair, BELL_MATRIX).real


def bell_project(pair: np.ndarray, rng: np.random.Generator) -> tuple[str, float]:
    """Sample a Bell-basis measurement of a two-qubit state."""
    pair = np.asarray(pair, dtype=complex)
    if pair.shape not in ((4,), (4, 4)):
        raise ValueError("Bell measurement needs a two-qubit state")
    probs = bell_probabilities(pair)
    idx = int(rng.choice(4, p=probs / probs.sum()))
    return BELL_LABELS[idx], float(probs[idx])
