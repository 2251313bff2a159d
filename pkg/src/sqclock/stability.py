"""Frequency-stability analysis: overlapping Allan deviation, the sigma(tau)
prediction from the clock signal-to-noise, and log-log slope fitting."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ModelError

if TYPE_CHECKING:  # pragma: no cover
    from .clock import FrequencyRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClockLine:
    """Clock transition: carrier frequency nu and resonance linewidth delta_nu, Hz."""

    nu: float = 9192631770.0
    delta_nu: float = 1.0

    def __post_init__(self) -> None:
        if not self.nu > 0.0:
            raise ModelError(f"carrier frequency must be positive, got {self.nu}")
        if not 0.0 < self.delta_nu < 0.01 * self.nu:
            raise ModelError(
                f"linewidth must satisfy 0 < delta_nu << nu, got {self.delta_nu}"
            )


@dataclass(frozen=True)
class StabilityCurve:
    """Allan deviation sigma(tau) with the pair count behind each point."""

    taus: np.ndarray
    sigmas: np.ndarray
    n_pairs: np.ndarray

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=float)
        sigmas = np.asarray(self.sigmas, dtype=float)
        pairs = np.asarray(self.n_pairs, dtype=int)
        if not (taus.shape == sigmas.shape == pairs.shape):
            raise ModelError("taus, sigmas and n_pairs must have matching shapes")
        if taus.size and np.any(np.diff(taus) <= 0.0):
            raise ModelError("taus must be strictly increasing")
        if np.any(sigmas < 0.0) or not np.all(np.isfinite(sigmas)):
            raise ModelError("sigmas must be finite and >= 0")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "sigmas", sigmas)
        object.__setattr__(self, "n_pairs", pairs)


def allan_deviation(record: "FrequencyRecord", taus: Sequence[float]) -> StabilityCurve:
    """Overlapping Allan deviation of a fractional-frequency record.

    Each requested tau must be an integer multiple m * tau0 with
    m <= len(samples) // 3; points that do not fit are omitted with a logged
    reason rather than failing the whole curve.  The estimator is

        sigma^2(m tau0) = mean over overlapping pairs of
                          (ybar_{k+m} - ybar_k)^2 / 2

    with ybar the m-sample block means.
    """
    y = np.asarray(record.samples, dtype=float)
    tau0 = float(record.tau0)
    n = y.size
    # subtracting the mean improves cumsum conditioning; block-mean
    # differences are unchanged by any constant offset
    centered = y - (y.mean() if n else 0.0)
    csum = np.concatenate(([0.0], np.cumsum(centered)))

    out_taus: list[float] = []
    out_sigmas: list[float] = []
    out_pairs: list[int] = []
    for tau in taus:
        m = int(round(tau / tau0))
        if m < 1 or abs(tau - m * tau0) > 1e-9 * max(tau, tau0):
            log.warning("omitting tau=%g: not a positive multiple of tau0=%g", tau, tau0)
            continue
        if m > n // 3:
            log.warning(
                "omitting tau=%g: record of %d samples supports m <= %d", tau, n, n // 3
            )
            continue
        block = (csum[m:] - csum[:-m]) / m
        diff = block[m:] - block[:-m]
        out_taus.append(m * tau0)
        out_sigmas.append(math.sqrt(0.5 * float(np.mean(diff * diff))))
        out_pairs.append(diff.size)
    return StabilityCurve(np.array(out_taus), np.array(out_sigmas), np.array(out_pairs))


def octave_taus(record: "FrequencyRecord") -> list[float]:
    """Octave-spaced averaging times supported by the record length."""
    n = np.asarray(record.samples).size
    out = []
    m = 1
    while m <= n // 3:
        out.append(m * float(record.tau0))
        m *= 2
    return out


def predicted_sigma(line: ClockLine, snr: float, tau: float) -> float:
    """Predicted Allan deviation delta_nu * tau**-0.5 / (nu * snr)."""
    if not snr > 0.0:
        raise ModelError(f"signal-to-noise must be positive, got {snr}")
    if not tau > 0.0:
        raise ModelError(f"averaging time must be positive, got {tau}")
    return line.delta_nu / (line.nu * snr * math.sqrt(tau))


def fit_slope(
    curve: StabilityCurve, tau_range: tuple[float, float] | None = None
) -> tuple[float, float]:
    """Least-squares slope of log sigma versus log tau.

    Returns (exponent, level) where level is the fitted sigma at tau = 1 s.
    White frequency noise gives an exponent of -1/2.
    """
    taus = curve.taus
    sigmas = curve.sigmas
    if tau_range is not None:
        lo, hi = tau_range
        mask = (taus >= lo) & (taus <= hi)
        taus = taus[mask]
        sigmas = sigmas[mask]
    keep = sigmas > 0.0
    taus = taus[keep]
    sigmas = sigmas[keep]
    if taus.size < 3:
        raise ModelError(
            f"slope fit needs at least 3 positive points in range, got {taus.size}"
        )
    exponent, intercept = np.polyfit(np.log(taus), np.log(sigmas), 1)
    return float(exponent), float(math.exp(intercept))
