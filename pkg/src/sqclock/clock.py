"""Closed-loop clock simulation: a noisy local oscillator is steered onto the
atomic resonance through two-point Ramsey interrogation and noisy detection,
producing a fractional-frequency record for stability analysis.

The servo probes the fringe at +/- modulation_depth about the steered
frequency on alternating cycles, forms the count asymmetry
(c+ - c-) / (c+ + c-), maps it through the fringe discriminant slope and
applies the correction; one fractional-frequency sample is recorded per
modulation pair.  Every run is a pure function of (config, seed, n_cycles).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .atoms import (
    VACUUM,
    RamseyGeometry,
    TwoLevelAtom,
    ramsey_probability_averaged,
)
from .detection import (
    AtomicResponse,
    DetectionConfig,
    PhotonBudget,
    effective_noise_scale,
)
from .errors import ModelError
from .stability import ClockLine
from .streams import DETECTION, LO_NOISE, cycle_stream

#: default carrier, the Cs ground-state hyperfine transition (Hz)
CS_TRANSITION_HZ = 9192631770.0

# Flicker FM is approximated by a bank of five first-order filtered white
# sources with decade-spaced corner periods cycle_time * 10**i: stage i has
# AR(1) decay exp(-10**-i) and unit stationary variance.  The bank sum is
# scaled by _FLICKER_GAIN (measured against the overlapping Allan estimator)
# so a model with flicker_fm = L shows a flat Allan deviation of L within
# about +/-10% over four decades of tau.
_FLICKER_STAGES = 5
_FLICKER_DECAY = tuple(math.exp(-(10.0 ** -i)) for i in range(_FLICKER_STAGES))
_FLICKER_SIGMA = tuple(math.sqrt(1.0 - a * a) for a in _FLICKER_DECAY)
_FLICKER_GAIN = 1.292

#: error-signal magnitude treated as saturated (working point nearly lost)
_SATURATION = 0.95


@dataclass(frozen=True)
class LocalOscillatorModel:
    """Free-running local-oscillator noise model.

    white_fm is the one-sided PSD of fractional frequency (1/Hz), flicker_fm
    the approximate flat Allan-deviation level of the flicker component, and
    initial_offset a static detuning from resonance (rad/s).
    """

    white_fm: float = 0.0
    flicker_fm: float = 0.0
    initial_offset: float = 0.0

    def __post_init__(self) -> None:
        if self.white_fm < 0.0 or self.flicker_fm < 0.0:
            raise ModelError("noise levels must be >= 0")

    @property
    def is_quiet(self) -> bool:
        return self.white_fm == 0.0 and self.flicker_fm == 0.0


@dataclass(frozen=True)
class OscillatorState:
    """Filter-bank state of the flicker approximation."""

    bank: tuple[float, ...] = (0.0,) * _FLICKER_STAGES


def lo_step(
    model: LocalOscillatorModel,
    prev_state: OscillatorState | None,
    dt: float,
    rng_stream: np.random.Generator,
    carrier_hz: float = CS_TRANSITION_HZ,
) -> tuple[OscillatorState, float]:
    """Advance the oscillator by one cycle of length dt.

    Returns the new state and the free-running fractional-frequency offset
    for the cycle: initial_offset / (2 pi carrier_hz) plus an independent
    white sample of variance white_fm / (2 dt) plus the flicker bank output.
    Deterministic given the stream, i.e. given (seed, step index).
    """
    if not dt > 0.0:
        raise ModelError(f"time step must be positive, got {dt}")
    state = prev_state if prev_state is not None else OscillatorState()
    y = model.initial_offset / (2.0 * math.pi * carrier_hz)
    if model.white_fm > 0.0:
        y += math.sqrt(model.white_fm / (2.0 * dt)) * rng_stream.standard_normal()
    if model.flicker_fm > 0.0:
        z = rng_stream.standard_normal(_FLICKER_STAGES)
        bank = tuple(
            a * b + s * zi
            for a, b, s, zi in zip(_FLICKER_DECAY, state.bank, _FLICKER_SIGMA, z)
        )
        state = OscillatorState(bank)
        y += model.flicker_fm * _FLICKER_GAIN * sum(bank)
    return state, y


def sample_detected_atoms(
    p: float,
    n_atoms: float,
    mode: str,
    noise_scale: float,
    rng_stream: np.random.Generator,
) -> float:
    """Detected-atom count for one cycle, real-valued.

    Coherent mode draws the exact binomial(n_atoms, p).  Squeezed mode uses
    the Gaussian approximation n p + noise_scale sqrt(n p (1-p)) z clamped
    to [0, n], where noise_scale = sqrt(1 + xi S) rescales the
    projection-noise standard deviation; noise_scale < 1 is the reduced
    quadrature, and 0 gives the noiseless mean.
    """
    if not -1e-12 <= p <= 1.0 + 1e-12:
        raise ModelError(f"probability out of range: {p}")
    p = min(1.0, max(0.0, p))
    if n_atoms < 1:
        raise ModelError(f"need at least one atom, got {n_atoms}")
    if noise_scale < 0.0:
        raise ModelError(f"noise scale must be >= 0, got {noise_scale}")
    if mode == "coherent":
        return float(rng_stream.binomial(int(round(n_atoms)), p))
    if mode == "squeezed":
        mean = n_atoms * p
        sd = noise_scale * math.sqrt(n_atoms * p * (1.0 - p))
        value = mean + sd * rng_stream.standard_normal()
        return min(float(n_atoms), max(0.0, value))
    raise ModelError(f"unknown sampler mode {mode!r}")


@dataclass(frozen=True)
class ClockConfig:
    """Full description of one closed-loop clock.

    Fountain geometry launches atoms_per_cycle atoms each cycle; beam
    geometry carries atom_flux (atoms/s) through the detection region, so a
    cycle detects atom_flux * cycle_time atoms.  modulation_depth = None
    resolves to the fringe half-maximum working point pi / (2 free_time).
    detection_mode selects the count statistics: "coherent" (binomial),
    "squeezed" (Gaussian, scaled by sqrt(1 + xi S)) or "ideal" (noiseless
    mean, for loop diagnostics).
    """

    ramsey: RamseyGeometry
    cycle_time: float
    detection: DetectionConfig = DetectionConfig()
    response: AtomicResponse = AtomicResponse(1.0)
    budget: PhotonBudget = PhotonBudget(1.0, 1.0, 1.0, 1.0, 1.0)
    lo_noise: LocalOscillatorModel = LocalOscillatorModel()
    line: ClockLine = ClockLine()
    geometry: str = "fountain"
    atoms_per_cycle: float | None = None
    atom_flux: float | None = None
    detection_mode: str = "coherent"
    servo_gain: float = 1.0
    modulation_depth: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.geometry not in ("beam", "fountain"):
            raise ModelError(f"geometry must be 'beam' or 'fountain', got {self.geometry!r}")
        if self.detection_mode not in ("coherent", "squeezed", "ideal"):
            raise ModelError(
                f"detection_mode must be 'coherent', 'squeezed' or 'ideal', "
                f"got {self.detection_mode!r}"
            )
        if self.geometry == "fountain":
            if self.atoms_per_cycle is None:
                raise ModelError("fountain geometry requires atoms_per_cycle")
        else:
            if self.atom_flux is None:
                raise ModelError("beam geometry requires atom_flux")
        if self.n_atoms < 1:
            raise ModelError(f"need at least one atom per cycle, got {self.n_atoms}")
        if not self.cycle_time >= self.ramsey.free_time:
            raise ModelError(
                f"cycle_time {self.cycle_time} must cover the free time "
                f"{self.ramsey.free_time}"
            )
        if not 0.0 < self.servo_gain < 2.0:
            raise ModelError(
                f"servo gain must lie in (0, 2) for loop stability, got {self.servo_gain}"
            )
        if self.modulation_depth is None:
            object.__setattr__(
                self, "modulation_depth", math.pi / (2.0 * self.ramsey.free_time)
            )
        if not self.modulation_depth > 0.0:
            raise ModelError(
                f"modulation depth must be positive, got {self.modulation_depth}"
            )
        if not 0 <= self.seed < 1 << 64:
            raise ModelError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def n_atoms(self) -> float:
        """Atoms detected per cycle."""
        if self.geometry == "fountain":
            return float(self.atoms_per_cycle)
        return float(self.atom_flux) * self.cycle_time

    @property
    def atom_rate(self) -> float:
        """Atoms per second through the detection region."""
        if self.geometry == "beam":
            return float(self.atom_flux)
        return float(self.atoms_per_cycle) / self.cycle_time

    def noise_scale(self) -> float:
        """Detection-noise scale factor implied by the detection mode."""
        if self.detection_mode == "coherent":
            return 1.0
        if self.detection_mode == "ideal":
            return 0.0
        return effective_noise_scale(self.detection, self.atom_rate)


@dataclass(frozen=True)
class FrequencyRecord:
    """Evenly spaced fractional-frequency samples from a closed-loop run."""

    tau0: float
    samples: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if not self.tau0 > 0.0:
            raise ModelError(f"sample spacing must be positive, got {self.tau0}")
        if samples.ndim != 1:
            raise ModelError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ModelError("samples must be finite")
        object.__setattr__(self, "samples", samples)


def config_digest(config: ClockConfig) -> str:
    """Stable SHA-256 of the configuration contents."""
    blob = json.dumps(dataclasses.asdict(config), sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


_PROBE_ATOM = TwoLevelAtom(gamma=1.0, detuning=0.0)


def _fringe_probe(geom: RamseyGeometry):
    """Deterministic fringe probability versus detuning for the servo.

    Interrogation happens in the microwave region, before the detection
    light is applied, so the fringe itself is the loss-free Ramsey shape;
    squeezing enters the loop only through the detection-noise scale.
    """

    def probe(delta: float) -> float:
        return ramsey_probability_averaged(geom, _PROBE_ATOM, delta, VACUUM)

    return probe


def _discriminant_slope(probe, modulation: float, free_time: float) -> float:
    """d/d delta of the two-point error signal at the working point."""

    def err(delta: float) -> float:
        p_up = probe(delta + modulation)
        p_dn = probe(delta - modulation)
        total = p_up + p_dn
        if total <= 0.0:
            raise ModelError("fringe has no response at the working point")
        return (p_up - p_dn) / total

    h = 1e-6 / free_time
    slope = (err(h) - err(-h)) / (2.0 * h)
    if not math.isfinite(slope) or slope == 0.0:
        raise ModelError(
            "zero fringe discriminant at the working point; check modulation_depth"
        )
    return slope


def _run_loop(
    config: ClockConfig,
    n_cycles: int,
    sampler: str,
    noise_scale: float,
    mode_label: str,
) -> FrequencyRecord:
    if n_cycles < 2:
        raise ModelError(f"need at least one modulation pair, got n_cycles={n_cycles}")
    geom = config.ramsey
    omega_atom = 2.0 * math.pi * config.line.nu
    dm = config.modulation_depth
    gain = config.servo_gain
    n_at = config.n_atoms
    lo = config.lo_noise
    seed = config.seed
    dt = config.cycle_time
    probe = _fringe_probe(geom)
    slope = _discriminant_slope(probe, dm, geom.free_time)

    quiet = lo.is_quiet
    y_static = lo.initial_offset / omega_atom
    noiseless = sampler == "squeezed" and noise_scale == 0.0

    state: OscillatorState | None = None
    correction = 0.0  # accumulated servo correction, rad/s
    n_pairs = n_cycles // 2
    samples = np.empty(n_pairs)
    recorded = 0
    skipped = 0
    lock_lost = 0

    for pair in range(n_pairs):
        up, dn = 2 * pair, 2 * pair + 1
        if quiet:
            y_up = y_dn = y_static
        else:
            state, y_up = lo_step(lo, state, dt, cycle_stream(seed, up, LO_NOISE), config.line.nu)
            state, y_dn = lo_step(lo, state, dt, cycle_stream(seed, dn, LO_NOISE), config.line.nu)

        p_up = probe(y_up * omega_atom + correction + dm)
        p_dn = probe(y_dn * omega_atom + correction - dm)
        if noiseless:
            c_up = n_at * p_up
            c_dn = n_at * p_dn
        else:
            c_up = sample_detected_atoms(
                p_up, n_at, sampler, noise_scale, cycle_stream(seed, up, DETECTION)
            )
            c_dn = sample_detected_atoms(
                p_dn, n_at, sampler, noise_scale, cycle_stream(seed, dn, DETECTION)
            )
        total = c_up + c_dn
        if total <= 0.0:
            skipped += 1
            continue
        error = (c_up - c_dn) / total
        if abs(error) >= _SATURATION:
            lock_lost += 1
        correction -= gain * error / slope
        samples[recorded] = y_dn + correction / omega_atom
        recorded += 1

    metadata = {
        "config_sha256": config_digest(config),
        "seed": seed,
        "n_cycles": n_cycles,
        "detection_mode": mode_label,
        "sampler": "binomial" if sampler == "coherent" else "gaussian",
        "noise_scale": noise_scale,
        "geometry": config.geometry,
        "n_atoms": n_at,
        "skipped_pairs": skipped,
        "lock_lost_pairs": lock_lost,
    }
    return FrequencyRecord(2.0 * dt, samples[:recorded], metadata)


def run_clock(config: ClockConfig, n_cycles: int) -> FrequencyRecord:
    """Run the closed servo loop for n_cycles interrogation cycles.

    Cycles pair up for two-point modulation, so the record holds
    n_cycles // 2 samples spaced 2 * cycle_time apart.  Pairs with zero
    total counts are skipped and counted in the metadata, as are pairs whose
    error signal saturates (working point nearly lost).
    """
    sampler = "coherent" if config.detection_mode == "coherent" else "squeezed"
    return _run_loop(config, n_cycles, sampler, config.noise_scale(), config.detection_mode)


def run_comparison(
    config: ClockConfig, n_cycles: int
) -> tuple[FrequencyRecord, FrequencyRecord]:
    """Paired coherent/squeezed runs under common random numbers.

    Both arms share the seed, hence every noise draw, and both use the
    Gaussian count sampler (the documented binomial-to-Gaussian toggle), so
    the arms differ only in the projection-noise scale: 1 for the coherent
    arm, sqrt(1 + xi S) for the squeezed arm.  With xi S = 0 the records are
    identical.
    """
    squeezed_scale = effective_noise_scale(config.detection, config.atom_rate)
    coherent = _run_loop(config, n_cycles, "squeezed", 1.0, "coherent")
    squeezed = _run_loop(config, n_cycles, "squeezed", squeezed_scale, "squeezed")
    return coherent, squeezed


def projection_noise_snr(n_atoms: float, noise_scale: float = 1.0) -> float:
    """Per-pair amplitude signal-to-noise at the half-maximum working point.

    One modulation pair interrogates 2 n atoms whose projection noise at
    p = 1/2 carries standard deviation noise_scale * sqrt(n / 2) per cycle;
    the fringe amplitude against that noise gives S/N = sqrt(2 n) /
    noise_scale.  This is the dimensionless bridge fed to the sigma(tau)
    prediction of the stability module.
    """
    if n_atoms < 1:
        raise ModelError(f"need at least one atom, got {n_atoms}")
    if not noise_scale > 0.0:
        raise ModelError(f"noise scale must be positive, got {noise_scale}")
    return math.sqrt(2.0 * n_atoms) / noise_scale
