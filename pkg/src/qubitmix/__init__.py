"""Two ac-driven, coupled, dissipative qubits: Bloch-tensor dynamics and harmonic mixing."""
from .integrate import (
    IntegratorKind,
    NonFiniteState,
    RunSummary,
    SimulationConfig,
    TimeAverager,
    euler_step,
    heun_step,
    run,
)
from .model import (
    COMPONENTS,
    BiHarmonicDrive,
    BlochTensor,
    BlochVector,
    SystemParams,
    drive_values,
    occupation_probability,
    reconstruct_density_matrix,
    rhs,
    tensor_from_product,
)
from .oracle import NonHermitianInput, pauli_decompose
from .sweep import SweepKind, SweepRecord, SweepSpec, sweep_detuning, sweep_phase, sweep_ratio

__version__ = "0.1.0"

__all__ = [
    "COMPONENTS",
    "BiHarmonicDrive",
    "BlochTensor",
    "BlochVector",
    "IntegratorKind",
    "NonFiniteState",
    "NonHermitianInput",
    "RunSummary",
    "SimulationConfig",
    "SweepKind",
    "SweepRecord",
    "SweepSpec",
    "SystemParams",
    "TimeAverager",
    "drive_values",
    "euler_step",
    "heun_step",
    "occupation_probability",
    "pauli_decompose",
    "reconstruct_density_matrix",
    "rhs",
    "run",
    "sweep_detuning",
    "sweep_phase",
    "sweep_ratio",
    "tensor_from_product",
]
