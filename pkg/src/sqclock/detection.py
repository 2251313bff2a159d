"""Detection-stage quantities: photon budget, homodyne squeezing spectrum, and
signal-to-noise for coherent versus squeezed probe light.

Sign convention: the squeezing spectrum S is negative at relative phase
phi_minus = 0 (the reduced-noise quadrature) and positive at pi/2, so
squeezed detection improves the signal-to-noise whenever xi * S < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import ModelError


@dataclass(frozen=True)
class PhotonBudget:
    """Detected-photon budget N = alpha * t_meas * (beta * a_amp)**2 / bandwidth.

    alpha is a detector scale, t_meas the measurement interval (s), beta the
    field coupling, a_amp the driving-field amplitude (sqrt photon flux) and
    bandwidth the detection bandwidth (Hz).
    """

    alpha: float
    t_meas: float
    beta: float
    a_amp: float
    bandwidth: float

    def __post_init__(self) -> None:
        if not self.t_meas > 0.0:
            raise ModelError(f"t_meas must be positive, got {self.t_meas}")
        if not self.bandwidth > 0.0:
            raise ModelError(f"bandwidth must be positive, got {self.bandwidth}")
        for name in ("alpha", "beta", "a_amp"):
            if getattr(self, name) < 0.0:
                raise ModelError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class AtomicResponse:
    """Atomic response amplitudes for the coherent and squeezed probes.

    delta_sq carries no phase dependence by construction and defaults to
    delta_vac.
    """

    delta_vac: float
    delta_sq: float | None = None

    def __post_init__(self) -> None:
        if self.delta_sq is None:
            object.__setattr__(self, "delta_sq", self.delta_vac)
        if self.delta_vac < 0.0 or self.delta_sq < 0.0:
            raise ModelError("response amplitudes must be >= 0")


@dataclass(frozen=True)
class DetectionConfig:
    """Homodyne detection parameters of the squeezed probe.

    eta_s and eta_0 are efficiencies in [0, 1]; p_lo and p_x the local
    oscillator and squeezed driving-field powers (W); phi_minus the relative
    phase between local oscillator and driving field (rad); omega_0 the
    analysis frequency (rad/s); xi the dimensionless coupling of the
    spectrum into the noise denominator; f_width and c_scale parametrize the
    adopted spectral forms.  ``c_form`` and ``f_form`` select entries of the
    form registries below.  ``projection_wiring`` chooses whether the atomic
    projection-noise term is already folded into F ("folded", default) or
    added explicitly with the same calibration prefactor ("additive", using
    ``bloch_angle`` as the rotation angle of the driven dipole).
    """

    eta_s: float = 1.0
    eta_0: float = 1.0
    p_lo: float = 1.0
    p_x: float = 1.0
    phi_minus: float = 0.0
    omega_0: float = 0.0
    xi: float = 1.0
    f_width: float = 1.0
    c_scale: float = 1.0
    c_form: str = "separable"
    f_form: str = "lorentzian"
    projection_wiring: str = "folded"
    bloch_angle: float = math.pi / 2

    def __post_init__(self) -> None:
        for name in ("eta_s", "eta_0"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ModelError(f"{name} must lie in [0, 1], got {value}")
        for name in ("p_lo", "p_x", "xi", "c_scale"):
            if getattr(self, name) < 0.0:
                raise ModelError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.f_width > 0.0:
            raise ModelError(f"f_width must be positive, got {self.f_width}")
        if self.projection_wiring not in ("folded", "additive"):
            raise ModelError(
                f"projection_wiring must be 'folded' or 'additive', "
                f"got {self.projection_wiring!r}"
            )


# Replaceable spectral forms.  A C form maps (config, atom flux) to the
# overall spectrum scale; an F form maps the config to F(omega_0).
CForm = Callable[[DetectionConfig, float], float]
FForm = Callable[[DetectionConfig], float]

C_FORMS: dict[str, CForm] = {}
F_FORMS: dict[str, FForm] = {}


def register_c_form(name: str, form: CForm) -> None:
    C_FORMS[name] = form


def register_f_form(name: str, form: FForm) -> None:
    F_FORMS[name] = form


def _separable_c(cfg: DetectionConfig, atom_flux: float) -> float:
    return cfg.c_scale * cfg.eta_s * cfg.eta_0 * math.sqrt(cfg.p_lo * cfg.p_x) * atom_flux


def _lorentzian_f(cfg: DetectionConfig) -> float:
    w2 = cfg.f_width * cfg.f_width
    return -w2 / (w2 + cfg.omega_0 * cfg.omega_0)


register_c_form("separable", _separable_c)
register_f_form("lorentzian", _lorentzian_f)


def photon_number(budget: PhotonBudget) -> float:
    """Dimensionless detected-photon number of the budget."""
    amp = budget.beta * budget.a_amp
    return budget.alpha * budget.t_meas * amp * amp / budget.bandwidth


def projection_noise_term(atom_flux: float, theta: float, phi: float) -> float:
    """Projection-noise contribution atom_flux * (cos(theta)**2 - 1) * cos(2 phi).

    theta is the rotation angle of the atomic dipole produced by the driving
    field and phi the relative phase between local oscillator and driving
    field.  The term is <= 0 wherever cos(2 phi) >= 0 and vanishes at
    theta in {0, pi} or cos(2 phi) = 0.  Units: atoms/s.
    """
    if atom_flux < 0.0:
        raise ModelError(f"atom flux must be >= 0, got {atom_flux}")
    c = math.cos(theta)
    return atom_flux * (c * c - 1.0) * math.cos(2.0 * phi)


def squeezing_spectrum(cfg: DetectionConfig, atom_flux: float) -> float:
    """Phase-dependent squeezing spectrum S = C * F(omega_0) * cos(2 phi_minus).

    With the default forms C is separable in efficiencies and powers and F a
    negative Lorentzian of width f_width, so S < 0 at phi_minus = 0 and
    S > 0 at pi/2, vanishing at pi/4.  The "additive" wiring adds the
    projection-noise term scaled by the unit-flux calibration prefactor.
    """
    if atom_flux < 0.0:
        raise ModelError(f"atom flux must be >= 0, got {atom_flux}")
    try:
        c_form = C_FORMS[cfg.c_form]
        f_form = F_FORMS[cfg.f_form]
    except KeyError as exc:
        raise ModelError(f"unknown spectral form {exc.args[0]!r}") from None
    s = c_form(cfg, atom_flux) * f_form(cfg) * math.cos(2.0 * cfg.phi_minus)
    if cfg.projection_wiring == "additive":
        prefactor = c_form(cfg, 1.0)
        s += prefactor * projection_noise_term(atom_flux, cfg.bloch_angle, cfg.phi_minus)
    return s


def snr_coherent(budget: PhotonBudget, resp: AtomicResponse) -> float:
    """Signal-to-noise with a coherent (vacuum-limited) probe: N * delta**2 / 2."""
    return 0.5 * photon_number(budget) * resp.delta_vac * resp.delta_vac


def _noise_denominator(cfg: DetectionConfig, atom_flux: float) -> float:
    denom = 1.0 + cfg.xi * squeezing_spectrum(cfg, atom_flux)
    if denom <= 0.0:
        raise ModelError(
            f"unphysical noise denominator 1 + xi*S = {denom:.6g}; "
            "parameters lie outside the model's validity"
        )
    return denom


def snr_squeezed(
    budget: PhotonBudget,
    resp: AtomicResponse,
    cfg: DetectionConfig,
    atom_flux: float,
) -> float:
    """Signal-to-noise with a squeezed probe: N * delta_sq**2 / (2 (1 + xi S)).

    Exceeds the coherent value whenever xi * S < 0 and delta_sq = delta_vac;
    raises once 1 + xi * S reaches zero.
    """
    denom = _noise_denominator(cfg, atom_flux)
    return 0.5 * photon_number(budget) * resp.delta_sq * resp.delta_sq / denom


def effective_noise_scale(cfg: DetectionConfig, atom_flux: float) -> float:
    """sqrt(1 + xi S): multiplier on the detection-noise standard deviation.

    This is the bridge between the squeezed signal-to-noise denominator and
    the per-cycle count sampler of the clock simulation; it equals 1 when
    xi = 0 and drops below 1 in the reduced-noise quadrature.
    """
    return math.sqrt(_noise_denominator(cfg, atom_flux))
