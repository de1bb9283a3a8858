"""Named parameter sets (``fig1``, ``fig3b`` and friends) and flat key=value configs.

Resolution order for a key: explicit ``--set`` beats the config file, which
beats the preset, which beats the built-in defaults.
"""
from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from .integrate import IntegratorKind, SimulationConfig
from .model import BiHarmonicDrive, BlochTensor, BlochVector, SystemParams, tensor_from_product
from .sweep import SweepKind, SweepSpec

SQRT2 = math.sqrt(2.0)

# Delta = 1, g = 1 in the fig1 family, so sqrt(Delta^2 + g^2) = sqrt(2).
OMEGA_FIG1 = 2.0 * SQRT2
OMEGA_LEVEL = SQRT2 - 1.0
OMEGA_OFF_LEVEL = 2.113 * (SQRT2 - 1.0)

DESK_SCALE = {"integrator": "heun", "dt": 1e-4, "t_burn": 2e3, "t_avg": 2e4}

# Euler with dt = 1.13e-5 over the window 5.6e4 < omega1 t < 1.4e5.
FULL_SCALE_DT = 1.13e-5
FULL_SCALE_WINDOW = (5.6e4, 1.4e5)

DEFAULTS: dict[str, str] = {
    "delta": "1",
    "g": "1",
    "gamma_phi": "0",
    "gamma_r": "0",
    "z_t": "1",
    "a1": "0",
    "a2": "0",
    "omega1": "1",
    "omega2": "1",
    "phi": "0",
    "phase_on": "2",
    "integrator": "heun",
    "dt": "1e-4",
    "t_burn": "0",
    "t_avg": "10",
    "stride": "1",
    "initial_state": "thermal",
}

_FIG1 = {
    "delta": "1", "g": "1", "gamma_phi": "1e-3", "gamma_r": "1e-3", "z_t": "1",
    "a1": "10", "a2": "10", "omega1": repr(OMEGA_FIG1), "phi": "0", "stride": "10000",
    "integrator": "heun", "dt": "1e-4", "t_burn": "2e3", "t_avg": "2e4",
}

# The phase rides on the omega1 signal here: only then is the phi-period 2 pi omega1/omega2.
_FIG3 = {"kind": "phase", "phase_on": "1", "grid": "0:6.283185307179586:33"}

FIG1_RATIO_GRID = tuple(sorted(
    {round(0.01 * k, 10) for k in range(1, 101)} | {round(0.1 * k, 10) for k in range(1, 51)}
))
ACCEPTANCE_RATIO_GRID = (0.4, 0.6, 0.8, 0.9, 1.0, 1.3, 1.7, 2.0, 2.6, 3.0, 3.4, 4.0, 4.6, 5.0)

PRESETS: dict[str, dict[str, str]] = {
    "fig1": {**_FIG1, "omega2": repr(2 * OMEGA_FIG1)},
    "fig1-ratio": {**_FIG1, "kind": "ratio", "grid": ",".join(repr(v) for v in FIG1_RATIO_GRID)},
    "fig1-coarse": {**_FIG1, "kind": "ratio", "grid": ",".join(repr(v) for v in ACCEPTANCE_RATIO_GRID)},
    "fig1c": {**_FIG1, "kind": "detuning", "center_ratio": "3", "grid": "-2e-3:2e-3:41"},
    "fig1d": {**_FIG1, "kind": "detuning", "center_ratio": "2", "grid": "-2e-3:2e-3:41"},
    "fig2a": {**_FIG1, "omega1": repr(OMEGA_LEVEL), "kind": "ratio",
              "grid": ",".join(repr(v) for v in FIG1_RATIO_GRID)},
    "fig2b": {**_FIG1, "omega1": repr(OMEGA_OFF_LEVEL), "kind": "ratio",
              "grid": ",".join(repr(v) for v in FIG1_RATIO_GRID)},
    "fig3a": {**_FIG1, **_FIG3, "ratio": "2"},
    "fig3b": {**_FIG1, **_FIG3, "ratio": "3"},
    "fig3c": {**_FIG1, **_FIG3, "ratio": "4"},
    # single undriven, undamped qubits precessing from +x: Pi_x0 = cos(delta1 t)
    "precession": {"g": "0", "gamma_phi": "0", "gamma_r": "0", "a1": "0", "a2": "0",
                   "initial_state": "plus_x", "dt": "1e-3", "t_burn": "0", "t_avg": "10",
                   "stride": "100"},
    "relaxation": {"g": "0", "gamma_phi": "0.1", "gamma_r": "0.1", "z_t": "1", "a1": "0",
                   "a2": "0", "initial_state": "mixed", "dt": "1e-3", "t_burn": "0",
                   "t_avg": "200", "stride": "1000"},
}

KNOWN_KEYS = frozenset(DEFAULTS) | {
    "delta1", "delta2", "gamma_phi1", "gamma_phi2", "gamma_r1", "gamma_r2", "z_t1", "z_t2",
    "kind", "grid", "center_ratio", "ratio", "preset",
}


class ConfigError(ValueError):
    """Bad configuration key, value or preset name."""


def parse_number(text: str) -> float:
    text = str(text).strip()
    try:
        if "/" in text:
            return float(Fraction(text))
        if text.endswith("pi"):
            head = text[:-2].rstrip("*").strip()
            return (float(Fraction(head)) if head else 1.0) * math.pi
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse number {text!r}") from None


def parse_grid(text: str) -> tuple[float, ...]:
    """Comma-separated numbers, fractions ("2/5") or inclusive ranges "start:stop:count"."""
    values: list[float] = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range {item!r} must be start:stop:count")
            start, stop = parse_number(parts[0]), parse_number(parts[1])
            try:
                count = int(parts[2])
            except ValueError:
                raise ConfigError(f"range count in {item!r} is not an integer") from None
            values.extend(np.linspace(start, stop, count).tolist())
        else:
            values.append(parse_number(item))
    if not values:
        raise ConfigError("empty grid")
    return tuple(values)


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` text; ``#`` starts a comment."""
    out: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def parse_assignments(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        out[key] = value
    return out


def resolve(preset: str | None = None, file_values: Mapping[str, str] | None = None,
            overrides: Mapping[str, str] | None = None, full_scale: bool = False) -> dict[str, str]:
    """Merge defaults < preset < config file < explicit overrides."""
    file_values = dict(file_values or {})
    overrides = dict(overrides or {})
    name = overrides.pop("preset", None) or preset or file_values.pop("preset", None)
    file_values.pop("preset", None)
    merged = dict(DEFAULTS)
    if name:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}")
        merged.update(PRESETS[name])
        merged["preset"] = name
    if full_scale:
        merged.update(_full_scale(merged))
    merged.update(file_values)
    merged.update(overrides)
    unknown = sorted(set(merged) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return merged


def _full_scale(values: Mapping[str, str]) -> dict[str, str]:
    omega1 = parse_number(values["omega1"])
    lo, hi = FULL_SCALE_WINDOW
    return {
        "integrator": "euler",
        "dt": repr(FULL_SCALE_DT),
        "t_burn": repr(lo / omega1),
        "t_avg": repr((hi - lo) / omega1),
    }


def _pair(values, key) -> tuple[float, float]:
    both = parse_number(values[key])
    return (
        parse_number(values.get(key + "1", both)),
        parse_number(values.get(key + "2", both)),
    )


def build_params(values: Mapping[str, str]) -> SystemParams:
    d1, d2 = _pair(values, "delta")
    gp1, gp2 = _pair(values, "gamma_phi")
    gr1, gr2 = _pair(values, "gamma_r")
    z1, z2 = _pair(values, "z_t")
    try:
        return SystemParams(d1, d2, parse_number(values["g"]), gp1, gp2, gr1, gr2, z1, z2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_drive(values: Mapping[str, str]) -> BiHarmonicDrive:
    omega1 = parse_number(values["omega1"])
    omega2 = parse_number(values["omega2"])
    if "ratio" in values:
        omega2 = parse_number(values["ratio"]) * omega1
    try:
        phase_on = int(values.get("phase_on", "2"))
        return BiHarmonicDrive(parse_number(values["a1"]), parse_number(values["a2"]),
                               omega1, omega2, parse_number(values["phi"]), phase_on)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def initial_state(name: str, params: SystemParams) -> BlochTensor:
    if name == "thermal":
        return BlochTensor.thermal(params.z_t1, params.z_t2)
    if name in ("mixed", "zero"):
        return BlochTensor.zeros()
    if name == "plus_x":
        return tensor_from_product(BlochVector(1, 0, 0), BlochVector(1, 0, 0))
    raise ConfigError(f"unknown initial_state {name!r}; choose thermal, mixed or plus_x")


def build_sim(values: Mapping[str, str], params: SystemParams) -> SimulationConfig:
    try:
        stride = int(values["stride"])
        return SimulationConfig(
            integrator=IntegratorKind.parse(values["integrator"]),
            dt=parse_number(values["dt"]),
            t_burn=parse_number(values["t_burn"]),
            t_avg=parse_number(values["t_avg"]),
            observer_stride=stride,
            initial_state=initial_state(values["initial_state"], params),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_sweep(values: Mapping[str, str]) -> SweepSpec:
    if "kind" not in values or "grid" not in values:
        raise ConfigError("sweeps need 'kind' and 'grid' (or a sweep preset)")
    params = build_params(values)
    center = parse_number(values["center_ratio"]) if "center_ratio" in values else None
    try:
        return SweepSpec(
            kind=SweepKind.parse(values["kind"]),
            base_params=params,
            base_drive=build_drive(values),
            sim=build_sim(values, params),
            grid=parse_grid(values["grid"]),
            center_ratio=center,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def fig1_setup(ratio: float = 2.0, phi: float = 0.0, phase_on: int = 2, **sim_overrides):
    """(params, drive, sim) for the ``fig1`` preset at desk scale."""
    values = resolve("fig1", overrides={"phi": repr(float(phi)), "phase_on": str(phase_on)})
    params = build_params(values)
    drive = build_drive(values).with_ratio(ratio)
    sim = build_sim(values, params)
    if sim_overrides:
        sim = replace(sim, **sim_overrides)
    return params, drive, sim
