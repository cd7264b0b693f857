"""Two-spin operator algebra on the Zeeman product basis.

Basis order is |uu>, |ud>, |du>, |dd> with spin a leftmost; "u" is the +1
eigenstate of sigma_z. Rotations follow R_n(alpha) = exp(-i alpha n.sigma/2),
which turns Bloch vectors right-handedly by alpha about n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .policy import POLICY

pauli_x = np.array([[0, 1], [1, 0]], dtype=complex)
pauli_y = np.array([[0, -1j], [1j, 0]], dtype=complex)
pauli_z = np.array([[1, 0], [0, -1]], dtype=complex)
identity2 = np.eye(2, dtype=complex)
identity4 = np.eye(4, dtype=complex)
for _m in (pauli_x, pauli_y, pauli_z, identity2, identity4):
    _m.setflags(write=False)

paulis = (pauli_x, pauli_y, pauli_z)


def principal_angle(x: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(x, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


def _as_square(matrix: np.ndarray) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise DomainError(f"expected a 2x2 or 4x4 matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian state container; deviation operators use normalized=False.

    Normalized states are validated for unit trace and positivity on
    construction; deviation (traceless difference) operators are only required
    to be Hermitian.
    """

    matrix: np.ndarray
    normalized: bool = True

    def __post_init__(self) -> None:
        m = _as_square(self.matrix)
        if np.max(np.abs(m - m.conj().T)) > POLICY.hermiticity_tol:
            raise DomainError("density matrix is not Hermitian within tolerance")
        m = 0.5 * (m + m.conj().T)
        if self.normalized:
            if abs(m.trace() - 1.0) > POLICY.trace_tol:
                raise DomainError("normalized state must have unit trace")
            if np.linalg.eigvalsh(m).min() < POLICY.eigenvalue_floor:
                raise DomainError("normalized state has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class QubitEigensystem:
    """Spectral data of a qubit state: weights, Bloch axis, degeneracy flag."""

    p_plus: float
    p_minus: float
    axis: np.ndarray
    degenerate: bool


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with spin a leftmost."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DomainError("tensor expects two single-spin (2x2) operators")
    return np.kron(a, b)


def partial_trace(rho: DensityOperator, keep: str) -> DensityOperator:
    """Trace out one spin of a two-spin state; keep is 'a' or 'b'."""
    if rho.dim != 4:
        raise DomainError("partial_trace expects a two-spin state")
    if keep not in ("a", "b"):
        raise DomainError("keep must be 'a' or 'b'")
    blocks = rho.matrix.reshape(2, 2, 2, 2)
    reduced = blocks.trace(axis1=1, axis2=3) if keep == "a" else blocks.trace(axis1=0, axis2=2)
    return DensityOperator(reduced, normalized=rho.normalized)


def bloch_to_density(r: np.ndarray) -> DensityOperator:
    """State (1 + r.sigma)/2 from a Bloch vector with |r| <= 1."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise DomainError("Bloch vector must have three components")
    if np.linalg.norm(r) > 1.0 + POLICY.bloch_norm_tol:
        raise DomainError("Bloch vector lies outside the unit ball")
    m = 0.5 * (identity2 + r[0] * pauli_x + r[1] * pauli_y + r[2] * pauli_z)
    return DensityOperator(m)


def density_to_bloch(rho: DensityOperator) -> np.ndarray:
    """Bloch components tr(rho sigma_k) of a single-spin state."""
    if rho.dim != 2:
        raise DomainError("density_to_bloch expects a single-spin state")
    return np.array([np.real(np.trace(rho.matrix @ s)) for s in paulis])


def eigendecompose_qubit(rho: DensityOperator) -> QubitEigensystem:
    """Weights and Bloch axis of a qubit state.

    A state within the degeneracy tolerance of maximally mixed reports the
    conventional +z axis with the degenerate flag set.
    """
    r = density_to_bloch(rho)
    norm = float(np.linalg.norm(r))
    if norm < POLICY.degeneracy_tol:
        return QubitEigensystem(0.5, 0.5, np.array([0.0, 0.0, 1.0]), True)
    return QubitEigensystem(0.5 * (1 + norm), 0.5 * (1 - norm), r / norm, False)


def spinor_pair(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigenstates (plus, minus) of axis.sigma.

    Phase convention: the first component is real and non-negative; when it
    vanishes the second component is made real and positive.
    """
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise DomainError("axis must be a nonzero vector")
    n = n / norm
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    plus = np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])
    minus = np.array([math.sin(theta / 2), -math.cos(theta / 2) * np.exp(1j * phi)])

    def fix(v: np.ndarray) -> np.ndarray:
        lead = v[0] if abs(v[0]) > 1e-12 else v[1]
        return v * (abs(lead) / lead)

    return fix(plus), fix(minus)


def rotation_unitary(axis: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i angle axis.sigma / 2) for a unit axis."""
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > POLICY.axis_unit_tol:
        raise DomainError("rotation axis must be a unit vector")
    n = n / norm
    half = 0.5 * angle
    ns = n[0] * pauli_x + n[1] * pauli_y + n[2] * pauli_z
    return math.cos(half) * identity2 - 1j * math.sin(half) * ns


def is_unitary(u: np.ndarray, tol: float | None = None) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    tol = POLICY.unitarity_tol if tol is None else tol
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def evolve(rho: DensityOperator, u: np.ndarray) -> DensityOperator:
    """Unitary conjugation u rho u^dagger with a unitarity guard."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (rho.dim, rho.dim):
        raise DomainError("propagator dimension does not match the state")
    if not is_unitary(u):
        raise DomainError("propagator is not unitary within tolerance")
    return DensityOperator(u @ rho.matrix @ u.conj().T, normalized=rho.normalized)
