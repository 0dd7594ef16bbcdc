"""Run configuration: TOML files, scenario presets, dotted-key overrides.

A configuration maps 1:1 onto (SystemSpec, RampSchedule, RunProtocol,
sweep grid).  Scenario presets shipped under `presets/` are complete
configurations of this schema; user files and `--set key=value` overrides
are deep-merged on top.
"""

from __future__ import annotations

import copy
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .ensemble import RunProtocol
from .errors import ConfigError
from .model import (
    Dispersion,
    DispersionKind,
    ModeGrid,
    RampSchedule,
    RampShape,
    SystemSpec,
    WrapPolicy,
    validate_spec,
)
from .sweep import Scenario

DEFAULT_CONFIG = {
    "scenario": {"name": "custom"},
    "grid": {"half_width": 5, "wrap_policy": "wrap"},
    "cavity": {"kind": "flat", "omega0": 0.5, "bandwidth": 0.0},
    "raman": {"kind": "flat", "omega0": 1.0, "bandwidth": 0.0},
    "coupling": {"g": 0.04, "g4": 0.01},
    "bath": {"kappa": 0.02, "gamma": 0.02, "temperature": 0.0},
    "ramp": {
        "shape": "smooth_tanh",
        "t_ramp": 600.0,
        "t_settle": 200.0,
        "t_window": 200.0,
        "sample_stride": 1.0,
    },
    "run": {"trajectories": 3500, "dt": 0.005, "seed": 20240911, "time_blocks": 8},
    "sweep": {"bandgap_min": 0.2, "bandgap_max": 1.4, "bandgap_points": 31},
}

# bare --set keys mapped onto their config sections
OVERRIDE_ALIASES = {
    "bandgap": ("cavity", "omega0"),
    "half_width": ("grid", "half_width"),
    "wrap_policy": ("grid", "wrap_policy"),
    "g": ("coupling", "g"),
    "g4": ("coupling", "g4"),
    "kappa": ("bath", "kappa"),
    "gamma": ("bath", "gamma"),
    "temperature": ("bath", "temperature"),
    "t_ramp": ("ramp", "t_ramp"),
    "t_settle": ("ramp", "t_settle"),
    "t_window": ("ramp", "t_window"),
    "sample_stride": ("ramp", "sample_stride"),
    "trajectories": ("run", "trajectories"),
    "dt": ("run", "dt"),
    "seed": ("run", "seed"),
    "time_blocks": ("run", "time_blocks"),
}

PRESET_FILES = {
    "flatflat": "flatflat.toml",
    "quadraman": "quadraman.toml",
    "quadcavity": "quadcavity.toml",
    "thermalflatflat": "thermal.toml",
    "thermal": "thermal.toml",
    "singlemode_ref": "singlemode_ref.toml",
    "singlemode_eff": "singlemode_eff.toml",
}

PROFILES = {"paper": 3500, "ci": 500}


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"malformed config {path}: {err}") from err


def load_preset(name: str) -> dict:
    if name not in PRESET_FILES:
        raise ConfigError(
            f"unknown scenario '{name}'; available: {', '.join(sorted(set(PRESET_FILES)))}")
    ref = resources.files("ramantwa").joinpath("presets", PRESET_FILES[name])
    with ref.open("rb") as fh:
        return tomllib.load(fh)


def parse_value(text: str):
    low = text.strip()
    if low.lower() in ("true", "false"):
        return low.lower() == "true"
    try:
        return int(low)
    except ValueError:
        pass
    try:
        return float(low)
    except ValueError:
        pass
    return low


def apply_overrides(cfg: dict, pairs) -> dict:
    """Apply repeatable `key=value` settings (dotted paths or aliases)."""
    out = copy.deepcopy(cfg)
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override '{pair}' is not of the form key=value")
        key, _, raw = pair.partition("=")
        key = key.strip()
        value = parse_value(raw)
        if "." in key:
            parts = key.split(".")
        elif key in OVERRIDE_ALIASES:
            parts = list(OVERRIDE_ALIASES[key])
        else:
            raise ConfigError(f"unknown override key '{key}'")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path '{key}' crosses a scalar")
        node[parts[-1]] = value
    return out


def assemble_config(config_path=None, scenario=None, overrides=None) -> dict:
    """defaults < scenario preset < config file < --set overrides."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if scenario:
        cfg = deep_merge(cfg, load_preset(scenario))
    if config_path:
        cfg = deep_merge(cfg, load_config_file(config_path))
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg


def _enum_value(enum_cls, raw, field_name):
    try:
        return enum_cls(str(raw).lower())
    except ValueError as err:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{field_name} must be one of: {allowed}") from err


def _dispersion(section: dict, field_name: str) -> Dispersion:
    return Dispersion(
        kind=_enum_value(DispersionKind, section.get("kind", "flat"), f"{field_name}.kind"),
        omega0=float(section.get("omega0", 1.0)),
        bandwidth=float(section.get("bandwidth", 0.0)),
    )


def build_spec(cfg: dict) -> SystemSpec:
    grid_cfg = cfg.get("grid", {})
    coupling = cfg.get("coupling", {})
    bath = cfg.get("bath", {})
    spec = SystemSpec(
        grid=ModeGrid(
            half_width=grid_cfg.get("half_width", 5),
            wrap_policy=_enum_value(WrapPolicy, grid_cfg.get("wrap_policy", "wrap"),
                                    "grid.wrap_policy"),
        ),
        cavity_disp=_dispersion(cfg.get("cavity", {}), "cavity"),
        raman_disp=_dispersion(cfg.get("raman", {}), "raman"),
        g=float(coupling.get("g", 0.0)),
        g4=float(coupling.get("g4", 0.0)),
        kappa=float(bath.get("kappa", 0.02)),
        gamma=float(bath.get("gamma", 0.02)),
        temperature=float(bath.get("temperature", 0.0)),
    )
    return validate_spec(spec)


def build_ramp(cfg: dict) -> RampSchedule:
    ramp = cfg.get("ramp", {})
    return RampSchedule(
        shape=_enum_value(RampShape, ramp.get("shape", "smooth_tanh"), "ramp.shape"),
        t_ramp=float(ramp.get("t_ramp", 600.0)),
        t_settle=float(ramp.get("t_settle", 200.0)),
        t_window=float(ramp.get("t_window", 200.0)),
        sample_stride=float(ramp.get("sample_stride", 1.0)),
    )


def build_protocol(cfg: dict, trajectories=None, seed=None, profile=None) -> RunProtocol:
    run = cfg.get("run", {})
    n_traj = run.get("trajectories", 3500)
    if profile:
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile '{profile}'; use paper or ci")
        n_traj = PROFILES[profile]
    if trajectories is not None:
        n_traj = trajectories
    return RunProtocol(
        n_trajectories=int(n_traj),
        master_seed=int(seed if seed is not None else run.get("seed", 20240911)),
        ramp=build_ramp(cfg),
        dt=float(run.get("dt", 0.005)),
        time_blocks=int(run.get("time_blocks", 8)),
    )


def build_scenario(cfg: dict) -> Scenario:
    return Scenario(name=str(cfg.get("scenario", {}).get("name", "custom")),
                    template=build_spec(cfg))


def bandgap_grid(cfg: dict) -> np.ndarray:
    sweep = cfg.get("sweep", {})
    lo = float(sweep.get("bandgap_min", 0.2))
    hi = float(sweep.get("bandgap_max", 1.4))
    n = int(sweep.get("bandgap_points", 31))
    if not (hi > lo > 0) or n < 1:
        raise ConfigError("sweep grid requires 0 < bandgap_min < bandgap_max and points >= 1")
    return np.linspace(lo, hi, n)
