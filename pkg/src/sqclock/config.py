"""Run-configuration loading.

A run is described by a single YAML file of sections that mirror the
parameter types one to one ([ramsey] -> RamseyGeometry, [detection] ->
DetectionConfig, ...), plus per-command sections for grids and sweeps.
Unknown sections or keys are rejected outright so a typo in a physics
parameter cannot pass silently.
"""

from __future__ import annotations

import math
import types
import typing
from dataclasses import dataclass

import yaml

from .atoms import RamseyGeometry, SqueezedReservoir, TwoLevelAtom
from .clock import ClockConfig, LocalOscillatorModel
from .detection import AtomicResponse, DetectionConfig, PhotonBudget
from .errors import ConfigError, ModelError
from .stability import ClockLine


@dataclass(frozen=True)
class FringeGrid:
    """Detuning grid for the fringe command; None bounds span 2.5 fringes."""

    delta_min: float | None = None
    delta_max: float | None = None
    points: int = 501
    vacuum_decay: bool = False

    def __post_init__(self) -> None:
        if self.points < 2:
            raise ModelError(f"points must be >= 2, got {self.points}")


@dataclass(frozen=True)
class SpectrumGrid:
    """Analysis-frequency and phase grids for the spectrum command."""

    omega_min: float = 0.0
    omega_max: float | None = None  # None resolves to 5 * f_width
    omega_points: int = 201
    phi_min: float = 0.0
    phi_max: float = math.pi
    phi_points: int = 5
    atom_flux: float = 1e6

    def __post_init__(self) -> None:
        if self.omega_points < 1 or self.phi_points < 1:
            raise ModelError("grids need at least one point per axis")
        if self.atom_flux < 0.0:
            raise ModelError(f"atom_flux must be >= 0, got {self.atom_flux}")


@dataclass(frozen=True)
class SnrSweep:
    """Parameter sweep for the snr command: vary xi or phi_minus."""

    sweep: str = "xi"
    start: float = 0.0
    stop: float = 2.0
    points: int = 21
    atom_flux: float = 1e6

    def __post_init__(self) -> None:
        if self.sweep not in ("xi", "phi_minus"):
            raise ModelError(f"sweep must be 'xi' or 'phi_minus', got {self.sweep!r}")
        if self.points < 1:
            raise ModelError(f"points must be >= 1, got {self.points}")
        if self.atom_flux < 0.0:
            raise ModelError(f"atom_flux must be >= 0, got {self.atom_flux}")


@dataclass(frozen=True)
class AllanSpec:
    """Averaging times (integer multipliers of tau0, or "octave") and fit range."""

    taus: object = "octave"
    fit_min_tau: float | None = None
    fit_max_tau: float | None = None

    def __post_init__(self) -> None:
        if isinstance(self.taus, str):
            if self.taus != "octave":
                raise ModelError(f"taus must be 'octave' or a list of multipliers, got {self.taus!r}")
        else:
            if not isinstance(self.taus, (list, tuple)) or not self.taus:
                raise ModelError("taus must be 'octave' or a non-empty list of multipliers")
            for m in self.taus:
                if not isinstance(m, int) or isinstance(m, bool) or m < 1:
                    raise ModelError(f"tau multipliers must be positive integers, got {m!r}")
            object.__setattr__(self, "taus", tuple(self.taus))


SECTION_TYPES: dict[str, type] = {
    "atom": TwoLevelAtom,
    "reservoir": SqueezedReservoir,
    "ramsey": RamseyGeometry,
    "detection": DetectionConfig,
    "response": AtomicResponse,
    "budget": PhotonBudget,
    "lo_noise": LocalOscillatorModel,
    "line": ClockLine,
    "fringe": FringeGrid,
    "spectrum": SpectrumGrid,
    "snr": SnrSweep,
    "allan": AllanSpec,
}

_CLOCK_KEYS = {
    "geometry",
    "atoms_per_cycle",
    "atom_flux",
    "cycle_time",
    "detection_mode",
    "servo_gain",
    "modulation_depth",
    "seed",
    "n_cycles",
    "compare",
}


def load_config(path: str) -> dict:
    """Read and fully validate a YAML config file; returns the raw mapping."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"malformed YAML in {path}{where}: {exc}") from None
    if raw is None:
        raise ConfigError(f"config file is empty: {path}")
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping of sections, got {type(raw).__name__}")
    for name in raw:
        if name != "clock" and name not in SECTION_TYPES:
            raise ConfigError(f"unknown section '{name}'")
    for name in raw:
        if name != "clock":
            build_section(raw, name)
    if "clock" in raw:
        build_clock_run(raw)
    return raw


def _type_names(target) -> str:
    origin = typing.get_origin(target)
    if origin in (typing.Union, types.UnionType):
        return " or ".join(
            "null" if a is type(None) else a.__name__ for a in typing.get_args(target)
        )
    return target.__name__


def _coerce(section: str, key: str, value, target):
    origin = typing.get_origin(target)
    if origin in (typing.Union, types.UnionType):
        allowed = typing.get_args(target)
    else:
        allowed = (target,)
    if value is None and type(None) in allowed:
        return None
    if float in allowed:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{section}] '{key}' expects a number, got {value!r}")
        return float(value)
    if int in allowed:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"[{section}] '{key}' expects an integer, got {value!r}")
        return value
    if bool in allowed:
        if not isinstance(value, bool):
            raise ConfigError(f"[{section}] '{key}' expects true/false, got {value!r}")
        return value
    if str in allowed:
        if not isinstance(value, str):
            raise ConfigError(f"[{section}] '{key}' expects a string, got {value!r}")
        return value
    return value  # unconstrained (object) fields validate themselves


def build_section(cfg: dict, name: str, required: bool = False, default=None):
    """Construct the typed value behind one config section.

    Missing optional sections give ``default`` when provided, otherwise the
    type's own defaults; unknown keys and invalid values raise ConfigError
    naming the section and field.
    """
    cls = SECTION_TYPES[name]
    data = cfg.get(name)
    if data is None:
        if required:
            raise ConfigError(f"missing required section '{name}'")
        if default is not None:
            return default
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"section '{name}' must be a mapping of keys")
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for key, value in data.items():
        if key not in hints:
            raise ConfigError(f"[{name}] unknown key '{key}'")
        kwargs[key] = _coerce(name, key, value, hints[key])
    try:
        return cls(**kwargs)
    except ModelError as exc:
        raise ConfigError(f"[{name}] {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"[{name}] {exc}") from None


@dataclass(frozen=True)
class ClockRun:
    """A fully resolved clock run: configuration, length and comparison flag."""

    config: ClockConfig
    n_cycles: int
    compare: bool


def build_clock_run(cfg: dict, seed_override: int | None = None) -> ClockRun:
    """Assemble the ClockConfig and run parameters from the [clock] section."""
    raw = cfg.get("clock")
    if raw is None:
        raise ConfigError("missing required section 'clock'")
    if not isinstance(raw, dict):
        raise ConfigError("section 'clock' must be a mapping of keys")
    unknown = set(raw) - _CLOCK_KEYS
    if unknown:
        raise ConfigError(f"[clock] unknown key(s): {', '.join(sorted(unknown))}")

    n_cycles = raw.get("n_cycles", 2000)
    if isinstance(n_cycles, bool) or not isinstance(n_cycles, int) or n_cycles < 2:
        raise ConfigError(f"[clock] 'n_cycles' expects an integer >= 2, got {n_cycles!r}")
    compare = raw.get("compare", False)
    if not isinstance(compare, bool):
        raise ConfigError(f"[clock] 'compare' expects true/false, got {compare!r}")

    modulation = raw.get("modulation_depth", "auto")
    if isinstance(modulation, str):
        if modulation != "auto":
            raise ConfigError(
                f"[clock] 'modulation_depth' expects a rate in rad/s or 'auto', "
                f"got {modulation!r}"
            )
        modulation = None
    elif isinstance(modulation, bool) or not isinstance(modulation, (int, float)):
        raise ConfigError(f"[clock] 'modulation_depth' expects a number or 'auto'")
    else:
        modulation = float(modulation)

    seed = raw.get("seed", 0)
    if seed_override is not None:
        seed = seed_override
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"[clock] 'seed' expects an integer, got {seed!r}")

    def number_or_none(key):
        value = raw.get(key)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[clock] '{key}' expects a number, got {value!r}")
        return float(value)

    cycle_time = number_or_none("cycle_time")
    if cycle_time is None:
        raise ConfigError("[clock] missing required key 'cycle_time'")

    try:
        config = ClockConfig(
            ramsey=build_section(cfg, "ramsey", required=True),
            cycle_time=cycle_time,
            detection=build_section(cfg, "detection"),
            response=build_section(cfg, "response", default=AtomicResponse(1.0)),
            budget=build_section(
                cfg, "budget", default=PhotonBudget(1.0, 1.0, 1.0, 1.0, 1.0)
            ),
            lo_noise=build_section(cfg, "lo_noise"),
            line=build_section(cfg, "line"),
            geometry=raw.get("geometry", "fountain"),
            atoms_per_cycle=number_or_none("atoms_per_cycle"),
            atom_flux=number_or_none("atom_flux"),
            detection_mode=raw.get("detection_mode", "coherent"),
            servo_gain=float(raw.get("servo_gain", 1.0)),
            modulation_depth=modulation,
            seed=seed,
        )
    except ModelError as exc:
        raise ConfigError(f"[clock] {exc}") from None
    return ClockRun(config=config, n_cycles=n_cycles, compare=compare)
