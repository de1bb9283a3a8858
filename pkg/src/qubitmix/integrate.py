"""Fixed-step integration of the Bloch-tensor equations and long-window averaging.

The stepping loop is compiled with numba; Python only sees chunk boundaries
(every ``observer_stride`` steps when observers are attached). Time is
always computed as ``k * dt`` from the integer step index so that long runs
do not accumulate drift in the drive phase.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ._kernels import (
    accumulate_block,
    accumulate_constant,
    advance,
    euler_into,
    heun_into,
    neumaier_add,
)
from .model import (
    COMPONENTS,
    INDEX,
    PHYSICALITY_SLACK,
    BiHarmonicDrive,
    BlochTensor,
    SystemParams,
    as_state_array,
)

log = logging.getLogger(__name__)

Observer = Callable[[float, BlochTensor], None]


class NonFiniteState(FloatingPointError):
    """The state left the finite range (usually a step-size blow-up)."""

    def __init__(self, step: int, t: float | None = None):
        self.step = step
        self.t = t
        where = f"step {step}" if t is None else f"step {step} (t={t:.6g})"
        super().__init__(f"non-finite Bloch tensor at {where}")


class IntegratorKind(enum.Enum):
    EULER = "euler"
    HEUN = "heun"

    @classmethod
    def parse(cls, value) -> IntegratorKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown integrator {value!r}; choose euler or heun") from None

    @property
    def code(self) -> int:
        return 0 if self is IntegratorKind.EULER else 1


@dataclass(frozen=True)
class SimulationConfig:
    """Step size and averaging window.

    ``t_burn`` and ``t_avg`` are snapped to whole steps on construction; the
    requested values are kept in ``requested_t_burn`` / ``requested_t_avg``.
    """

    integrator: IntegratorKind = IntegratorKind.HEUN
    dt: float = 1e-4
    t_burn: float = 0.0
    t_avg: float = 1.0
    observer_stride: int = 1
    initial_state: BlochTensor = field(default_factory=BlochTensor.zeros)
    average_components: tuple[str, ...] = ("0x", "0z")
    requested_t_burn: float = field(default=float("nan"), compare=False)
    requested_t_avg: float = field(default=float("nan"), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "integrator", IntegratorKind.parse(self.integrator))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be finite and > 0, got {self.dt}")
        if not (math.isfinite(self.t_burn) and self.t_burn >= 0):
            raise ValueError(f"t_burn must be finite and >= 0, got {self.t_burn}")
        if not (math.isfinite(self.t_avg) and self.t_avg > 0):
            raise ValueError(f"t_avg must be finite and > 0, got {self.t_avg}")
        if int(self.observer_stride) < 1:
            raise ValueError("observer_stride must be >= 1")
        for label in self.average_components:
            if label not in INDEX:
                raise ValueError(f"unknown Bloch-tensor component {label!r}")
        if not isinstance(self.initial_state, BlochTensor):
            object.__setattr__(self, "initial_state", BlochTensor(as_state_array(self.initial_state)))
        if math.isnan(self.requested_t_burn):
            object.__setattr__(self, "requested_t_burn", float(self.t_burn))
        if math.isnan(self.requested_t_avg):
            object.__setattr__(self, "requested_t_avg", float(self.t_avg))
        n_avg = max(1, round(self.t_avg / self.dt))
        object.__setattr__(self, "observer_stride", int(self.observer_stride))
        object.__setattr__(self, "t_burn", self.burn_steps * self.dt)
        object.__setattr__(self, "t_avg", n_avg * self.dt)
        object.__setattr__(self, "average_components", tuple(self.average_components))

    @property
    def burn_steps(self) -> int:
        return int(round(self.t_burn / self.dt))

    @property
    def avg_steps(self) -> int:
        return max(1, int(round(self.t_avg / self.dt)))

    @property
    def total_steps(self) -> int:
        return self.burn_steps + self.avg_steps

    @property
    def t_end(self) -> float:
        return self.total_steps * self.dt


class TimeAverager:
    """Rectangle-rule time average with Neumaier-compensated summation.

    Samples are taken on a uniform grid, so the mean is sum(f_i) / n, which
    equals sum(f_i * dt) / T with T = n * dt.
    """

    def __init__(self, label: str = "", t_start: float = 0.0, t_stop: float = math.inf):
        self.label = label
        self.t_start = t_start
        self.t_stop = t_stop
        self.total = 0.0
        self.compensation = 0.0
        self.count = 0

    def add(self, value: float) -> None:
        self.total, self.compensation = neumaier_add(self.total, self.compensation, float(value))
        self.count += 1

    def add_many(self, values) -> None:
        values = np.ascontiguousarray(values, dtype=np.float64)
        self.total, self.compensation = accumulate_block(self.total, self.compensation, values)
        self.count += values.shape[0]

    def add_constant(self, value: float, count: int) -> None:
        self.total, self.compensation = accumulate_constant(
            self.total, self.compensation, float(value), int(count)
        )
        self.count += int(count)

    def __call__(self, t: float, value: float) -> None:
        if self.t_start <= t < self.t_stop:
            self.add(value)

    @property
    def sum(self) -> float:
        return self.total + self.compensation

    @property
    def mean(self) -> float:
        if self.count == 0:
            return math.nan
        return self.sum / self.count

    def __repr__(self):
        return f"<TimeAverager {self.label}: mean={self.mean:.10g} n={self.count}>"


def _check_finite(arr: np.ndarray, step: int = 1, t: float | None = None) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteState(step, t)


def euler_step(t: float, state, dt: float, params: SystemParams, drive: BiHarmonicDrive) -> BlochTensor:
    """Pi' = Pi + dt * rhs(t, Pi)."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    out = np.empty(15)
    euler_into(out, np.ascontiguousarray(as_state_array(state)), t, dt,
                params.as_array(), drive.as_array(), np.empty(15))
    _check_finite(out, t=t + dt)
    return BlochTensor(out)


def heun_step(t: float, state, dt: float, params: SystemParams, drive: BiHarmonicDrive) -> BlochTensor:
    """Explicit trapezoidal (Heun) step: Euler predictor, trapezoid corrector."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    out = np.empty(15)
    heun_into(out, np.ascontiguousarray(as_state_array(state)), t, dt,
               params.as_array(), drive.as_array(), np.empty(15), np.empty(15), np.empty(15))
    _check_finite(out, t=t + dt)
    return BlochTensor(out)


STEPPERS = {IntegratorKind.EULER: euler_step, IntegratorKind.HEUN: heun_step}


@dataclass
class RunSummary:
    final_state: BlochTensor
    means: dict[str, float]
    averagers: dict[str, TimeAverager]
    max_physicality_violation: float
    steps: int
    wall_seconds: float
    t_final: float
    config: SimulationConfig

    @property
    def mean_x1(self) -> float:
        """Time average of Pi_0x (reported as <X1>)."""
        return self.means["0x"]

    @property
    def mean_z1(self) -> float:
        """Time average of Pi_0z (reported as <Z1>)."""
        return self.means["0z"]


def run(
    config: SimulationConfig,
    params: SystemParams,
    drive: BiHarmonicDrive,
    observers: Sequence[Observer] | Iterable[Observer] = (),
) -> RunSummary:
    """Integrate from t = 0 to t_burn + t_avg and time-average the requested components.

    Every step inside [t_burn, t_burn + t_avg) is sampled by the averagers,
    independent of ``observer_stride``. Observers are called with (t, state)
    at t = 0 and then every ``observer_stride`` steps.
    """
    observers = list(observers)
    labels = tuple(dict.fromkeys(("0x", "0z") + config.average_components))
    avg_idx = np.array([INDEX[k] for k in labels], dtype=np.int64)
    sums = np.zeros(len(labels))
    comps = np.zeros(len(labels))
    c = params.as_array()
    drv = drive.as_array()
    dt = config.dt
    n_total = config.total_steps
    avg_start, avg_stop = config.burn_steps, n_total
    p = config.initial_state.as_array()
    maxabs = float(np.max(np.abs(p))) if p.size else 0.0

    chunk = config.observer_stride if observers else n_total
    start = time.perf_counter()
    k = 0
    for obs in observers:
        obs(0.0, BlochTensor(p))
    while k < n_total:
        n = min(chunk, n_total - k)
        failed, maxabs = advance(p, k, n, dt, config.integrator.code, c, drv,
                                  avg_start, avg_stop, avg_idx, sums, comps, maxabs)
        if failed >= 0:
            raise NonFiniteState(int(failed), failed * dt)
        k += n
        if observers:
            snapshot = BlochTensor(p)
            for obs in observers:
                obs(k * dt, snapshot)
    wall = time.perf_counter() - start

    averagers = {}
    n_avg = avg_stop - avg_start
    for m, label in enumerate(labels):
        a = TimeAverager(label, config.t_burn, config.t_end)
        a.total, a.compensation, a.count = float(sums[m]), float(comps[m]), n_avg
        averagers[label] = a
    violation = max(0.0, maxabs - 1.0)
    if violation > PHYSICALITY_SLACK:
        log.warning("Bloch tensor left the physical range by %.3e (slack %.1e)",
                    violation, PHYSICALITY_SLACK)
    return RunSummary(
        final_state=BlochTensor(p),
        means={k: a.mean for k, a in averagers.items()},
        averagers=averagers,
        max_physicality_violation=violation,
        steps=n_total,
        wall_seconds=wall,
        t_final=n_total * dt,
        config=config,
    )


def integrate_fixed(state, params: SystemParams, drive: BiHarmonicDrive, t_end: float, dt: float,
                    integrator=IntegratorKind.HEUN) -> BlochTensor:
    """State at ``t_end`` (rounded to whole steps) without any averaging."""
    cfg = SimulationConfig(integrator=integrator, dt=dt, t_burn=t_end, t_avg=dt,
                           initial_state=state)
    p = cfg.initial_state.as_array()
    n = int(round(t_end / dt))
    failed, _ = advance(p, 0, n, dt, cfg.integrator.code, params.as_array(), drive.as_array(),
                         0, 0, np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0), 0.0)
    if failed >= 0:
        raise NonFiniteState(int(failed), failed * dt)
    return BlochTensor(p)


def trajectory(state, params: SystemParams, drive: BiHarmonicDrive, t_end: float, dt: float,
               integrator=IntegratorKind.HEUN, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Sampled trajectory: times (n,) and states (n, 15), every ``stride`` steps."""
    p = np.array(as_state_array(state), dtype=np.float64)
    n = int(round(t_end / dt))
    kind = IntegratorKind.parse(integrator).code
    c, drv = params.as_array(), drive.as_array()
    ts, states = [0.0], [p.copy()]
    empty_i, empty_f = np.zeros(0, dtype=np.int64), np.zeros(0)
    k = 0
    while k < n:
        m = min(stride, n - k)
        failed, _ = advance(p, k, m, dt, kind, c, drv, 0, 0, empty_i, empty_f, empty_f, 0.0)
        if failed >= 0:
            raise NonFiniteState(int(failed), failed * dt)
        k += m
        ts.append(k * dt)
        states.append(p.copy())
    return np.array(ts), np.array(states)


__all__ = [
    "COMPONENTS",
    "IntegratorKind",
    "NonFiniteState",
    "RunSummary",
    "SimulationConfig",
    "TimeAverager",
    "euler_step",
    "heun_step",
    "integrate_fixed",
    "run",
    "trajectory",
]
