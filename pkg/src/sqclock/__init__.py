"""Stochastic simulation and stability analysis of squeezed-light detection
in optically pumped Cs beam and fountain frequency standards."""

from .atoms import (
    GROUND,
    VACUUM,
    BlochVector,
    RamseyGeometry,
    SqueezedReservoir,
    TwoLevelAtom,
    evolve_bloch,
    quadrature_decay_rates,
    rabi_pulse,
    ramsey_probability,
    ramsey_probability_averaged,
    slow_decay_margin,
)
from .clock import (
    ClockConfig,
    FrequencyRecord,
    LocalOscillatorModel,
    OscillatorState,
    lo_step,
    projection_noise_snr,
    run_clock,
    run_comparison,
    sample_detected_atoms,
)
from .detection import (
    AtomicResponse,
    DetectionConfig,
    PhotonBudget,
    effective_noise_scale,
    photon_number,
    projection_noise_term,
    register_c_form,
    register_f_form,
    snr_coherent,
    snr_squeezed,
    squeezing_spectrum,
)
from .errors import ConfigError, ModelError
from .stability import (
    ClockLine,
    StabilityCurve,
    allan_deviation,
    fit_slope,
    octave_taus,
    predicted_sigma,
)
from .streams import cycle_stream

__version__ = "0.1.0"

__all__ = [
    "AtomicResponse",
    "BlochVector",
    "ClockConfig",
    "ClockLine",
    "ConfigError",
    "DetectionConfig",
    "FrequencyRecord",
    "GROUND",
    "LocalOscillatorModel",
    "ModelError",
    "OscillatorState",
    "PhotonBudget",
    "RamseyGeometry",
    "SqueezedReservoir",
    "StabilityCurve",
    "TwoLevelAtom",
    "VACUUM",
    "allan_deviation",
    "cycle_stream",
    "effective_noise_scale",
    "evolve_bloch",
    "fit_slope",
    "lo_step",
    "octave_taus",
    "photon_number",
    "predicted_sigma",
    "projection_noise_snr",
    "projection_noise_term",
    "quadrature_decay_rates",
    "rabi_pulse",
    "ramsey_probability",
    "ramsey_probability_averaged",
    "register_c_form",
    "register_f_form",
    "run_clock",
    "run_comparison",
    "sample_detected_atoms",
    "slow_decay_margin",
    "snr_coherent",
    "snr_squeezed",
    "squeezing_spectrum",
]
