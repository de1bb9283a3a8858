"""Frequency-ratio, relative-phase and detuning scans over independent runs."""
from __future__ import annotations

import enum
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .integrate import NonFiniteState, SimulationConfig, run
from .model import BiHarmonicDrive, SystemParams, is_clamped, occupation_probability


class SweepKind(enum.Enum):
    RATIO = "ratio"
    PHASE = "phase"
    DETUNING = "detuning"

    @classmethod
    def parse(cls, value) -> SweepKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown sweep kind {value!r}; choose ratio, phase or detuning") from None


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    base_params: SystemParams
    base_drive: BiHarmonicDrive
    sim: SimulationConfig
    grid: tuple[float, ...]
    center_ratio: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SweepKind.parse(self.kind))
        grid = tuple(float(Fraction(v)) if isinstance(v, (Fraction, str)) else float(v) for v in self.grid)
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise ValueError("sweep grid is empty")
        if not all(math.isfinite(v) for v in grid):
            raise ValueError("sweep grid contains non-finite values")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        if self.kind is SweepKind.RATIO and grid[0] <= 0:
            raise ValueError("frequency ratios must be > 0")
        if self.kind is SweepKind.DETUNING:
            if self.center_ratio is None or not self.center_ratio > 0:
                raise ValueError("detuning scans need center_ratio > 0")
            w1 = self.base_drive.omega1
            if self.center_ratio * w1 + grid[0] <= 0:
                raise ValueError("detuning grid drives omega2 to a non-positive value")

    def drive_at(self, value: float) -> BiHarmonicDrive:
        """The drive used at one grid point."""
        d = self.base_drive
        if self.kind is SweepKind.RATIO:
            return d.with_ratio(value)
        if self.kind is SweepKind.PHASE:
            return replace(d, phi=value)
        return replace(d, omega2=self.center_ratio * d.omega1 + value)


@dataclass(frozen=True)
class SweepRecord:
    scan_value: float
    omega2_effective: float
    phi: float
    mean_x1: float
    mean_z1: float
    p_upper: float
    max_physicality_violation: float
    steps: int
    wall_seconds: float
    status: str = "ok"
    p_upper_clamped: bool = False
    means: dict = field(default_factory=dict, compare=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class PointFailure:
    """Stand-in result for a point whose job raised."""

    error_type: str
    message: str
    step: int | None = None


def _guarded(job):
    fn, point = job
    try:
        return fn(point)
    except Exception as exc:  # isolate per-point failures
        return PointFailure(type(exc).__name__, str(exc), getattr(exc, "step", None))


def parallel_map(fn: Callable, points: Sequence, worker_count: int = 1) -> list:
    """Apply ``fn`` to every point on up to ``worker_count`` processes.

    Output order equals input order. A point whose call raises yields a
    :class:`PointFailure` instead of aborting the whole map.
    """
    if worker_count < 1:
        raise ValueError("worker_count must be >= 1")
    jobs = [(fn, p) for p in points]
    if worker_count == 1 or len(jobs) <= 1:
        return [_guarded(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(worker_count, len(jobs))) as pool:
        return list(pool.map(_guarded, jobs))


def _simulate_point(args) -> SweepRecord:
    value, params, drive, sim = args
    summary = run(sim, params, drive)
    z1 = summary.mean_z1
    return SweepRecord(
        scan_value=value,
        omega2_effective=drive.omega2,
        phi=drive.phi,
        mean_x1=summary.mean_x1,
        mean_z1=z1,
        p_upper=occupation_probability(z1, "upper"),
        max_physicality_violation=summary.max_physicality_violation,
        steps=summary.steps,
        wall_seconds=summary.wall_seconds,
        p_upper_clamped=is_clamped(z1),
        means=dict(summary.means),
    )


def _failed_record(value: float, drive: BiHarmonicDrive, failure: PointFailure) -> SweepRecord:
    if failure.error_type == NonFiniteState.__name__:
        status = f"nonfinite@{failure.step}"
    else:
        status = f"error:{failure.error_type}"
    nan = math.nan
    return SweepRecord(value, drive.omega2, drive.phi, nan, nan, nan, nan, 0, 0.0, status=status)


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list[SweepRecord]
    workers: int
    wall_seconds: float

    @property
    def values(self) -> np.ndarray:
        return np.array([r.scan_value for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    drives = [spec.drive_at(v) for v in spec.grid]
    points = [(v, spec.base_params, d, spec.sim) for v, d in zip(spec.grid, drives)]
    start = time.perf_counter()
    results = parallel_map(_simulate_point, points, workers)
    wall = time.perf_counter() - start
    records = [
        _failed_record(v, d, r) if isinstance(r, PointFailure) else r
        for v, d, r in zip(spec.grid, drives, results)
    ]
    return SweepResult(spec, records, workers, wall)


def _checked(spec: SweepSpec, kind: SweepKind) -> SweepSpec:
    if spec.kind is not kind:
        raise ValueError(f"expected a {kind.value} sweep, got {spec.kind.value}")
    return spec


def sweep_ratio(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """One run per omega2/omega1 in the grid, all else from the base drive."""
    return run_sweep(_checked(spec, SweepKind.RATIO), workers).records


def sweep_phase(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    return run_sweep(_checked(spec, SweepKind.PHASE), workers).records


def sweep_detuning(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """omega2 = center_ratio * omega1 + d_omega for each d_omega in the grid."""
    return run_sweep(_checked(spec, SweepKind.DETUNING), workers).records


def phase_grid(n: int, *, endpoint: bool = False) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(0.0, 2.0 * math.pi, n, endpoint=endpoint))


def peak_contrast(grid: Sequence[float], values: Sequence[float], peaks: Sequence[float],
                  atol: float = 1e-9) -> dict[float, float]:
    """|value| at each peak divided by the median |value| over non-peak points."""
    grid = np.asarray(grid, dtype=float)
    mags = np.abs(np.asarray(values, dtype=float))
    is_peak = np.zeros(grid.shape, dtype=bool)
    for p in peaks:
        is_peak |= np.isclose(grid, p, atol=atol, rtol=0)
    background = float(np.median(mags[~is_peak]))
    out = {}
    for p in peaks:
        (idx,) = np.nonzero(np.isclose(grid, p, atol=atol, rtol=0))
        if idx.size == 0:
            raise ValueError(f"peak location {p} not on the grid")
        out[float(p)] = float(mags[idx[0]]) / background if background > 0 else math.inf
    return out


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
