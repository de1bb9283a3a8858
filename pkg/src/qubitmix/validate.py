"""Self-checks run by ``qubitmix validate``.

Each check returns a :class:`CheckResult` with the measured worst-case
residual next to its tolerance, so a tightened tolerance still reports
useful numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracle
from .integrate import IntegratorKind, integrate_fixed, trajectory
from .model import (
    COMPONENTS,
    BiHarmonicDrive,
    BlochTensor,
    BlochVector,
    SystemParams,
    reconstruct_density_matrix,
    rhs,
    tensor_from_product,
)

RhsFn = Callable[[float, np.ndarray, SystemParams, BiHarmonicDrive], np.ndarray]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        text = f"{flag}  {self.name:<28} measured={self.measured:.3e}  tol={self.tolerance:.1e}"
        return f"{text}  {self.detail}" if self.detail else text


def random_state(rng: np.random.Generator) -> BlochTensor:
    """Bloch tensor of a random physical (full-rank, unit-trace) density matrix."""
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    return oracle.pauli_decompose(rho)[1]


def random_params(rng: np.random.Generator, damping: bool = False) -> SystemParams:
    rates = rng.uniform(0, 0.5, size=4) if damping else np.zeros(4)
    return SystemParams(
        delta1=rng.uniform(0.1, 3), delta2=rng.uniform(0.1, 3), g=rng.uniform(-2, 2),
        gamma_phi1=rates[0], gamma_phi2=rates[1], gamma_r1=rates[2], gamma_r2=rates[3],
        z_t1=rng.uniform(-1, 1), z_t2=rng.uniform(-1, 1),
    )


def random_drive(rng: np.random.Generator) -> BiHarmonicDrive:
    return BiHarmonicDrive(
        a1=rng.uniform(-15, 15), a2=rng.uniform(-15, 15),
        omega1=rng.uniform(0.1, 10), omega2=rng.uniform(0.1, 10),
        phi=rng.uniform(0, 2 * math.pi), phase_on=int(rng.integers(1, 3)),
    )


def oracle_residual(t, state, params, drive, rhs_fn: RhsFn = rhs) -> float:
    """Largest component-wise relative deviation of rhs_fn from -i[H, rho]."""
    ours = np.asarray(rhs_fn(t, state, params, drive))
    ref = oracle.coherent_tensor_rhs(t, state, params, drive)
    scale = max(1.0, float(np.max(np.abs(ref))))
    return float(np.max(np.abs(ours - ref))) / scale


def check_oracle(samples: int = 1000, tol: float = 1e-12, seed: int = 1,
                 rhs_fn: RhsFn = rhs) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        t = rng.uniform(-100, 100)
        worst = max(worst, oracle_residual(t, random_state(rng), random_params(rng),
                                           random_drive(rng), rhs_fn))
    return CheckResult("oracle equivalence", worst <= tol, worst, tol, f"{samples} samples")


def check_round_trip(samples: int = 200, tol: float = 1e-14, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        pi = rng.uniform(-1, 1, size=15)
        pi00, back = oracle.pauli_decompose(reconstruct_density_matrix(pi))
        worst = max(worst, float(np.max(np.abs(back.values - pi))), abs(pi00 - 1.0))
    return CheckResult("pauli round trip", worst <= tol, worst, tol)


def check_swap_symmetry(samples: int = 200, tol: float = 1e-13, seed: int = 3,
                        rhs_fn: RhsFn = rhs) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        state = BlochTensor(rng.uniform(-1, 1, size=15))
        params = random_params(rng, damping=True)
        drive = random_drive(rng)
        t = rng.uniform(0, 50)
        direct = BlochTensor(rhs_fn(t, state, params, drive)).transpose().values
        swapped = np.asarray(rhs_fn(t, state.transpose(), params.swapped(), drive.swapped()))
        worst = max(worst, float(np.max(np.abs(direct - swapped))))
    return CheckResult("qubit swap symmetry", worst <= tol, worst, tol)


PRECESSION = SystemParams(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0)
UNDRIVEN = BiHarmonicDrive(0.0, 0.0, 1.0, 1.0, 0.0)


def precession_error(dt: float, integrator, t_end: float = 10.0) -> float:
    """Global error at t_end for a lone qubit precessing from X = 1 (X = cos t, Y = -sin t)."""
    start = BlochTensor.from_components(x0=1.0)
    final = integrate_fixed(start, PRECESSION, UNDRIVEN, t_end, dt, integrator)
    t = round(t_end / dt) * dt
    return max(abs(final["x0"] - math.cos(t)), abs(final["y0"] + math.sin(t)))


def convergence_slope(integrator, dts=(0.01, 0.005, 0.0025, 0.00125)) -> tuple[float, list[float]]:
    errors = [precession_error(dt, integrator) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    return float(slope), errors


def check_order(integrator, expected: float, tol: float) -> CheckResult:
    slope, errors = convergence_slope(integrator)
    kind = IntegratorKind.parse(integrator).value
    return CheckResult(f"{kind} convergence order", abs(slope - expected) <= tol,
                       abs(slope - expected), tol, f"slope={slope:.3f} errors={errors[0]:.2e}..{errors[-1]:.2e}")


def factorization_residual(params: SystemParams, drive: BiHarmonicDrive, q1: BlochVector,
                           q2: BlochVector, t_end: float = 100.0, dt: float = 1e-4,
                           stride: int = 100) -> float:
    """max_t max_ab |Pi_ab - Pi_a0 Pi_0b| along a g = 0 trajectory (sampled every stride steps)."""
    _, states = trajectory(tensor_from_product(q1, q2), params, drive, t_end, dt, "heun", stride)
    worst = 0.0
    for s in states:
        st = BlochTensor(s)
        for a in "xyz":
            for b in "xyz":
                worst = max(worst, abs(st[a + b] - st[a + "0"] * st["0" + b]))
    return worst


def check_factorization(tol: float = 1e-8) -> CheckResult:
    # Z_T = 0: the damping terms of the z-lines keep the product form only there.
    params = SystemParams(1.0, 1.0, 0.0, 0.1, 0.1, 0.1, 0.1, 0.0, 0.0)
    drive = BiHarmonicDrive(1.0, 1.0, 1.0, 2.0, 0.4)
    worst = factorization_residual(params, drive, BlochVector(0.6, 0.0, 0.8),
                                   BlochVector(0.0, 0.6, -0.8))
    return CheckResult("g=0 factorization", worst <= tol, worst, tol)


def check_fixed_point(tol: float = 0.0) -> CheckResult:
    params = SystemParams(1.0, 1.0, 0.7, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0)
    final = integrate_fixed(BlochTensor.zeros(), params, UNDRIVEN, 10.0, 1e-3, "euler")
    worst = float(np.max(np.abs(final.values)))
    return CheckResult("fixed point", worst <= tol, worst, tol)


def check_relaxation(tol: float = 1e-6) -> CheckResult:
    params = SystemParams(1.0, 1.0, 0.0, 0.1, 0.1, 0.1, 0.1, 1.0, 1.0)
    ts, states = trajectory(BlochTensor.zeros(), params, UNDRIVEN, 200.0, 1e-3, "heun", 1000)
    i0z, iz0 = COMPONENTS.index("0z"), COMPONENTS.index("z0")
    closed = 1.0 - np.exp(-0.1 * ts)
    along = float(np.max(np.abs(states[:, [i0z, iz0]] - closed[:, None])))
    end = float(np.max(np.abs(states[-1, [i0z, iz0]] - 1.0)))
    worst = max(along, end)
    return CheckResult("relaxation to Z_T", worst <= tol, worst, tol,
                       f"final deviation {end:.2e}, path deviation {along:.2e}")


def run_all(oracle_tol: float = 1e-12, samples: int = 1000) -> list[CheckResult]:
    return [
        check_oracle(samples=samples, tol=oracle_tol),
        check_round_trip(),
        check_swap_symmetry(),
        check_order("euler", 1.0, 0.2),
        check_order("heun", 2.0, 0.3),
        check_factorization(),
        check_fixed_point(),
        check_relaxation(),
    ]
