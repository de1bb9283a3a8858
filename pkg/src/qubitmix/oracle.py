"""Dense 4x4 reference implementation of the coherent dynamics.

Slow and straightforward on purpose: it is the independent check for the
hand-written right-hand side in :mod:`qubitmix.model` and for the fixed-step
integrators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    COMPONENTS,
    PAULI,
    PAULI_PRODUCTS,
    BiHarmonicDrive,
    BlochTensor,
    SystemParams,
    drive_values,
    reconstruct_density_matrix,
)

IMAG_DISCARD = 1e-12
IMAG_ERROR = 1e-9


class NonHermitianInput(ValueError):
    """A Pauli coefficient came out with a significant imaginary part."""


@dataclass(frozen=True, eq=False)
class DenseState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex).reshape(4, 4)
        if not np.allclose(rho, rho.conj().T, atol=1e-12, rtol=0):
            raise NonHermitianInput("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError(f"density matrix trace is {np.trace(rho)}, expected 1")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_tensor(cls, state) -> DenseState:
        return cls(reconstruct_density_matrix(state))

    def to_tensor(self) -> BlochTensor:
        return pauli_decompose(self.rho)[1]

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def _kron_1(op):
    return np.kron(op, PAULI["0"])


def _kron_2(op):
    return np.kron(PAULI["0"], op)


def hamiltonian_matrix(t: float, params: SystemParams, drive: BiHarmonicDrive) -> np.ndarray:
    e1, e2 = drive_values(t, drive)
    h = -0.5 * (
        params.delta1 * _kron_1(PAULI["z"])
        + e1 * _kron_1(PAULI["x"])
        + params.delta2 * _kron_2(PAULI["z"])
        + e2 * _kron_2(PAULI["x"])
    )
    return h + params.g * PAULI_PRODUCTS["xx"]


def commutator_rhs(t: float, state, params: SystemParams, drive: BiHarmonicDrive) -> np.ndarray:
    """-i [H(t), rho]; ``state`` may be a DenseState or a raw 4x4 matrix."""
    rho = state.rho if isinstance(state, DenseState) else np.asarray(state, dtype=complex)
    h = hamiltonian_matrix(t, params, drive)
    return -1j * (h @ rho - rho @ h)


def pauli_decompose(rho: np.ndarray) -> tuple[float, BlochTensor]:
    """Pi_ab = tr(rho sigma^1_a (x) sigma^2_b).

    Returns ``(pi00, tensor)``. Imaginary parts up to 1e-9 are discarded;
    anything larger raises :class:`NonHermitianInput`.
    """
    rho = np.asarray(rho, dtype=complex)
    coeffs = {}
    for label, op in PAULI_PRODUCTS.items():
        c = np.trace(rho @ op)
        if abs(c.imag) > IMAG_ERROR:
            raise NonHermitianInput(f"Pi_{label} has imaginary part {c.imag:.3e}")
        coeffs[label] = c.real
    return coeffs["00"], BlochTensor(np.array([coeffs[k] for k in COMPONENTS]))


def coherent_tensor_rhs(t: float, state, params: SystemParams, drive: BiHarmonicDrive) -> np.ndarray:
    """Pauli components of -i[H, rho(Pi)]: what model.rhs must equal at zero damping."""
    rho = reconstruct_density_matrix(state)
    _, d = pauli_decompose(commutator_rhs(t, rho, params, drive))
    return d.as_array()


def _unitary(h: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def propagate_piecewise_constant(
    state: DenseState, params: SystemParams, drive: BiHarmonicDrive, t0: float, dt: float
) -> DenseState:
    """One step of exact unitary evolution with H frozen at the midpoint t0 + dt/2."""
    if dt == 0:
        return state
    u = _unitary(hamiltonian_matrix(t0 + 0.5 * dt, params, drive), dt)
    rho = u @ state.rho @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DenseState(rho / np.trace(rho).real)


def propagate(
    state: DenseState, params: SystemParams, drive: BiHarmonicDrive, t_end: float, dt: float
) -> DenseState:
    """Chain midpoint propagators from t = 0 to t_end."""
    n = int(round(t_end / dt))
    for k in range(n):
        state = propagate_piecewise_constant(state, params, drive, k * dt, dt)
    return state
