"""Two coupled, independently driven, dissipative qubits in Bloch-tensor form.

The two-qubit density matrix is written as

    rho = 1/4 * sum_{a,b in {0,x,y,z}} Pi_ab  sigma^1_a (x) sigma^2_b

with Pi_00 == 1. The remaining 15 real components are the simulation state.
They are stored in row-major order over (a, b), skipping (0, 0), see
:data:`COMPONENTS`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ._kernels import rhs_into

PAULI_LABELS = "0xyz"

COMPONENTS: tuple[str, ...] = tuple(
    a + b for a in PAULI_LABELS for b in PAULI_LABELS if a + b != "00"
)
INDEX: dict[str, int] = {label: i for i, label in enumerate(COMPONENTS)}

# Pi_ab -> Pi_ba, used for the qubit-swap symmetry.
TRANSPOSE_PERM = np.array([INDEX[label[::-1]] for label in COMPONENTS])

PAULI = {
    "0": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# sigma^1_a (x) sigma^2_b for all 16 index pairs, keyed by "ab".
PAULI_PRODUCTS = {
    a + b: np.kron(PAULI[a], PAULI[b]) for a in PAULI_LABELS for b in PAULI_LABELS
}

PHYSICALITY_SLACK = 1e-3


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class SystemParams:
    """Static qubit parameters (hbar = 1, energies in units of the splitting)."""

    delta1: float = 1.0
    delta2: float = 1.0
    g: float = 1.0
    gamma_phi1: float = 0.0
    gamma_phi2: float = 0.0
    gamma_r1: float = 0.0
    gamma_r2: float = 0.0
    z_t1: float = 1.0
    z_t2: float = 1.0

    def __post_init__(self):
        values = [float(getattr(self, f)) for f in self.__dataclass_fields__]
        if not _finite(*values):
            raise ValueError(f"non-finite system parameter in {self!r}")
        for name in ("gamma_phi1", "gamma_phi2", "gamma_r1", "gamma_r2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("z_t1", "z_t2"):
            if not -1.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {getattr(self, name)}")

    @classmethod
    def identical(cls, delta=1.0, g=1.0, gamma_phi=0.0, gamma_r=0.0, z_t=1.0):
        """Two identical qubits sharing every rate."""
        return cls(delta, delta, g, gamma_phi, gamma_phi, gamma_r, gamma_r, z_t, z_t)

    def swapped(self) -> SystemParams:
        return SystemParams(
            self.delta2, self.delta1, self.g,
            self.gamma_phi2, self.gamma_phi1,
            self.gamma_r2, self.gamma_r1,
            self.z_t2, self.z_t1,
        )

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.delta1, self.delta2, self.g,
             self.gamma_phi1, self.gamma_phi2,
             self.gamma_r1, self.gamma_r2,
             self.z_t1, self.z_t2],
            dtype=np.float64,
        )

    @property
    def level_spacing(self) -> float:
        """Inter-level transition frequency sqrt(Delta^2 + g^2) - g (uses delta1)."""
        return math.hypot(self.delta1, self.g) - self.g


@dataclass(frozen=True)
class BiHarmonicDrive:
    """eps1(t) = a1 sin(omega1 t), eps2(t) = a2 sin(omega2 t + phi).

    ``phase_on=1`` moves the relative phase onto the first signal instead:
    eps1(t) = a1 sin(omega1 t + phi), eps2(t) = a2 sin(omega2 t). Under that
    placement the long-time averages are periodic in phi with period
    2 pi omega1 / omega2 for integer omega2 / omega1.
    """

    a1: float = 0.0
    a2: float = 0.0
    omega1: float = 1.0
    omega2: float = 1.0
    phi: float = 0.0
    phase_on: int = 2

    def __post_init__(self):
        if not _finite(self.a1, self.a2, self.omega1, self.omega2, self.phi):
            raise ValueError(f"non-finite drive parameter in {self!r}")
        if self.omega1 <= 0 or self.omega2 <= 0:
            raise ValueError("drive frequencies must be > 0")
        if self.phase_on not in (1, 2):
            raise ValueError(f"phase_on must be 1 or 2, got {self.phase_on!r}")

    @property
    def ratio(self) -> float:
        return self.omega2 / self.omega1

    @property
    def phases(self) -> tuple[float, float]:
        return (self.phi, 0.0) if self.phase_on == 1 else (0.0, self.phi)

    def with_ratio(self, ratio: float) -> BiHarmonicDrive:
        return replace(self, omega2=ratio * self.omega1)

    def swapped(self) -> BiHarmonicDrive:
        """Exchange the two signals (and the signal carrying the phase)."""
        return BiHarmonicDrive(self.a2, self.a1, self.omega2, self.omega1, self.phi,
                               3 - self.phase_on)

    def as_array(self) -> np.ndarray:
        p1, p2 = self.phases
        return np.array([self.a1, self.a2, self.omega1, self.omega2, p1, p2])


class BlochVector(NamedTuple):
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def density_matrix(self) -> np.ndarray:
        return 0.5 * (PAULI["0"] + self.x * PAULI["x"] + self.y * PAULI["y"] + self.z * PAULI["z"])


@dataclass(frozen=True, eq=False)
class BlochTensor:
    """The 15 stored components Pi_ab of a two-qubit state.

    Index with two-character labels, e.g. ``state["0z"]``. Pi_00 is always 1
    and is not stored.
    """

    values: np.ndarray = field(default_factory=lambda: np.zeros(15))

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).reshape(15)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls) -> BlochTensor:
        return cls(np.zeros(15))

    @classmethod
    def from_components(cls, **components: float) -> BlochTensor:
        arr = np.zeros(15)
        for label, value in components.items():
            label = label.removeprefix("pi_").replace("o", "0")
            arr[INDEX[label]] = value
        return cls(arr)

    @classmethod
    def thermal(cls, z_t1: float = 1.0, z_t2: float = 1.0) -> BlochTensor:
        """Uncoupled equilibrium: Pi_z0 = Z_T1, Pi_0z = Z_T2, Pi_zz = Z_T1 Z_T2."""
        return tensor_from_product(BlochVector(0, 0, z_t1), BlochVector(0, 0, z_t2))

    def __getitem__(self, label: str) -> float:
        return float(self.values[INDEX[label]])

    def __eq__(self, other):
        if not isinstance(other, BlochTensor):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self):
        inner = ", ".join(f"{k}={v:.6g}" for k, v in zip(COMPONENTS, self.values) if v)
        return f"BlochTensor({inner})"

    def as_array(self) -> np.ndarray:
        return self.values.copy()

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in zip(COMPONENTS, self.values)}

    def transpose(self) -> BlochTensor:
        """Pi_ab -> Pi_ba (exchange of the two qubits)."""
        return BlochTensor(self.values[TRANSPOSE_PERM])

    def qubit(self, which: int) -> BlochVector:
        """Reduced Bloch vector: which=1 -> (Pi_x0, Pi_y0, Pi_z0), which=2 -> (Pi_0x, ...)."""
        if which == 1:
            return BlochVector(self["x0"], self["y0"], self["z0"])
        if which == 2:
            return BlochVector(self["0x"], self["0y"], self["0z"])
        raise ValueError("which must be 1 or 2")

    def physicality_violation(self) -> float:
        """How far the largest |Pi_ab| exceeds 1 (0 when within bounds)."""
        return max(0.0, float(np.max(np.abs(self.values))) - 1.0)

    def is_physical(self, slack: float = PHYSICALITY_SLACK) -> bool:
        return self.physicality_violation() <= slack


def as_state_array(state) -> np.ndarray:
    if isinstance(state, BlochTensor):
        return state.values
    arr = np.asarray(state, dtype=np.float64)
    if arr.shape != (15,):
        raise ValueError(f"expected 15 Bloch-tensor components, got shape {arr.shape}")
    return arr


def drive_values(t: float, drive: BiHarmonicDrive) -> tuple[float, float]:
    """Instantaneous bias values (eps1, eps2) of the two drives at time ``t``."""
    p1, p2 = drive.phases
    return (
        drive.a1 * math.sin(drive.omega1 * t + p1),
        drive.a2 * math.sin(drive.omega2 * t + p2),
    )


def rhs(t: float, state, params: SystemParams, drive: BiHarmonicDrive) -> np.ndarray:
    """Time derivative of the 15 Bloch-tensor components at time ``t``.

    ``state`` may be a :class:`BlochTensor` or a length-15 array. Returns a
    fresh float64 array in :data:`COMPONENTS` order.
    """
    p = as_state_array(state)
    e1, e2 = drive_values(t, drive)
    out = np.empty(15)
    rhs_into(out, np.ascontiguousarray(p), e1, e2, params.as_array())
    return out


def reconstruct_density_matrix(state) -> np.ndarray:
    """4x4 density matrix (basis |++>, |+->, |-+>, |--> in sigma_z eigenstates)."""
    p = as_state_array(state)
    rho = PAULI_PRODUCTS["00"].copy()
    for label, value in zip(COMPONENTS, p):
        rho = rho + value * PAULI_PRODUCTS[label]
    return rho / 4.0


def tensor_from_product(q1: BlochVector, q2: BlochVector) -> BlochTensor:
    """Bloch tensor of the uncorrelated state rho_1 (x) rho_2.

    ``q1`` fills the first index (Pi_a0), ``q2`` the second (Pi_0b), and
    Pi_ab = q1[a] * q2[b].
    """
    v1 = (1.0,) + tuple(q1)
    v2 = (1.0,) + tuple(q2)
    arr = np.array([v1[PAULI_LABELS.index(k[0])] * v2[PAULI_LABELS.index(k[1])] for k in COMPONENTS])
    return BlochTensor(arr)


def occupation_probability(z: float, level: str = "upper", *, clamp: bool = True) -> float:
    """Occupation of the upper ((1 - z)/2) or lower ((1 + z)/2) level.

    With ``clamp`` the result is clipped into [0, 1]; use
    :func:`is_clamped` to flag values that needed it.
    """
    if level == "upper":
        p = 0.5 * (1.0 - z)
    elif level == "lower":
        p = 0.5 * (1.0 + z)
    else:
        raise ValueError(f"level must be 'upper' or 'lower', got {level!r}")
    if clamp:
        p = min(1.0, max(0.0, p))
    return p


def is_clamped(z: float) -> bool:
    return not -1.0 <= z <= 1.0
