"""Two-level-atom Bloch dynamics damped by a broadband squeezed reservoir.

The atomic state is the Bloch vector (u, v, w): u and v are the in-phase and
out-of-phase dipole quadratures, w the population inversion (w = -1 ground,
+1 excited).  Pulses rotate the vector right-handedly about an equatorial
axis at azimuth ``phase``; free precession advances the equatorial angle by
detuning * time.

A reservoir with photon number N and correlation magnitude |M| damps the two
dipole quadratures at unequal rates

    gamma_slow = gamma * (N + 1/2 - |M|)
    gamma_fast = gamma * (N + 1/2 + |M|)
    gamma_z    = gamma * (2N + 1)

and drives the inversion toward w_ss = -1 / (2N + 1).  For ``m_phase = 0``
the slowly decaying quadrature lies along u; a general ``m_phase`` rotates
the slow axis to azimuth ``m_phase / 2`` in the equatorial plane.  N = M = 0
recovers ordinary vacuum decay (gamma/2, gamma/2, gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ModelError

TWO_PI = 2.0 * math.pi

#: norm tolerance for unitary operations on the Bloch vector
NORM_TOL = 1e-9

#: evolve_bloch refuses a step once dt * max(rates, drives) reaches this
STEP_BOUND = 0.1


@dataclass(frozen=True)
class BlochVector:
    """Pseudo-spin state (u, v, w) on or inside the Bloch sphere."""

    u: float
    v: float
    w: float

    def norm(self) -> float:
        return math.sqrt(self.u * self.u + self.v * self.v + self.w * self.w)


#: ground state, the usual starting point of an interrogation sequence
GROUND = BlochVector(0.0, 0.0, -1.0)


@dataclass(frozen=True)
class SqueezedReservoir:
    """Broadband squeezed reservoir seen by the atom.

    n_photon is the photon number N >= 0, m_mag the correlation magnitude
    |M| <= sqrt(N (N + 1)) (equality is ideal squeezing), m_phase the phase
    of the correlation relative to the atomic dipole axis, radians.
    """

    n_photon: float = 0.0
    m_mag: float = 0.0
    m_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.n_photon < 0.0:
            raise ModelError(f"photon number must be >= 0, got {self.n_photon}")
        if self.m_mag < 0.0:
            raise ModelError(f"correlation magnitude must be >= 0, got {self.m_mag}")
        limit = math.sqrt(self.n_photon * (self.n_photon + 1.0))
        if self.m_mag > limit * (1.0 + 1e-12) + 1e-300:
            raise ModelError(
                f"correlation magnitude {self.m_mag} exceeds the physical bound "
                f"sqrt(N(N+1)) = {limit}"
            )

    @property
    def is_vacuum(self) -> bool:
        return self.n_photon == 0.0 and self.m_mag == 0.0


#: ordinary vacuum, i.e. no squeezing
VACUUM = SqueezedReservoir()


@dataclass(frozen=True)
class TwoLevelAtom:
    """Effective two-level atom: natural decay rate and static detuning, rad/s."""

    gamma: float
    detuning: float = 0.0

    def __post_init__(self) -> None:
        if not self.gamma > 0.0:
            raise ModelError(f"decay rate must be positive, got {self.gamma}")


@dataclass(frozen=True)
class RamseyGeometry:
    """Two-pulse interrogation geometry.

    pulse_area is the rotation angle per interaction zone (radians),
    free_time the evolution interval between zones (s) and pulse_duration
    the physical pulse length (s); zero means idealized instantaneous
    rotations.  Beam mode can carry a relative spread of free times
    (``time_spread``, the sigma/mean of a truncated normal transit-time
    distribution); fountain mode always uses the fixed free_time.
    """

    pulse_area: float
    free_time: float
    pulse_duration: float = 0.0
    mode: str = "fountain"
    time_spread: float = 0.0

    def __post_init__(self) -> None:
        if not self.free_time > 0.0:
            raise ModelError(f"free_time must be positive, got {self.free_time}")
        if self.pulse_duration < 0.0:
            raise ModelError(f"pulse_duration must be >= 0, got {self.pulse_duration}")
        if not 0.0 <= self.pulse_area <= TWO_PI * (1.0 + 1e-12):
            raise ModelError(f"pulse_area must lie in [0, 2*pi], got {self.pulse_area}")
        if self.mode not in ("beam", "fountain"):
            raise ModelError(f"mode must be 'beam' or 'fountain', got {self.mode!r}")
        if self.time_spread < 0.0:
            raise ModelError(f"time_spread must be >= 0, got {self.time_spread}")


def quadrature_decay_rates(
    res: SqueezedReservoir, gamma: float
) -> tuple[float, float, float]:
    """Decay rates (gamma_slow, gamma_fast, gamma_z) in the reservoir.

    The slow transverse rate drops below the vacuum value gamma/2 exactly
    when |M| > N, which is the regime where the protected quadrature
    outlives natural decay.
    """
    if not gamma > 0.0:
        raise ModelError(f"decay rate must be positive, got {gamma}")
    base = gamma * (res.n_photon + 0.5)
    split = gamma * res.m_mag
    return base - split, base + split, gamma * (2.0 * res.n_photon + 1.0)


def _rotated(state: BlochVector, nx: float, ny: float, nz: float, angle: float) -> BlochVector:
    # Rodrigues rotation about the unit axis (nx, ny, nz)
    c = math.cos(angle)
    s = math.sin(angle)
    k = 1.0 - c
    u, v, w = state.u, state.v, state.w
    dot = nx * u + ny * v + nz * w
    cx = ny * w - nz * v
    cy = nz * u - nx * w
    cz = nx * v - ny * u
    return BlochVector(
        u * c + cx * s + nx * dot * k,
        v * c + cy * s + ny * dot * k,
        w * c + cz * s + nz * dot * k,
    )


def rabi_pulse(state: BlochVector, area: float, phase: float = 0.0) -> BlochVector:
    """Instantaneous rotation by ``area`` about the equatorial axis at ``phase``.

    A pi/2 pulse at phase 0 maps the ground state (0, 0, -1) to (0, 1, 0);
    area 2*pi is the identity.  The norm is preserved to NORM_TOL.
    """
    if not 0.0 <= area <= TWO_PI * (1.0 + 1e-12):
        raise ModelError(f"pulse area must lie in [0, 2*pi], got {area}")
    return _rotated(state, math.cos(phase), math.sin(phase), 0.0, area)


def _damping(res: SqueezedReservoir, gamma: float) -> tuple[float, float, float, float, float]:
    """Damping matrix entries (gu, gv, guv, gz, wss) for the given reservoir.

    The transverse rates act along axes rotated by m_phase / 2; the returned
    entries are the resulting symmetric 2x2 damping matrix in (u, v).
    """
    gs, gf, gz = quadrature_decay_rates(res, gamma)
    half = 0.5 * res.m_phase
    cp = math.cos(half)
    sp = math.sin(half)
    gu = gs * cp * cp + gf * sp * sp
    gv = gs * sp * sp + gf * cp * cp
    guv = (gs - gf) * sp * cp
    wss = -1.0 / (2.0 * res.n_photon + 1.0)
    return gu, gv, guv, gz, wss


def evolve_bloch(
    state: BlochVector,
    atom: TwoLevelAtom,
    res: SqueezedReservoir,
    rabi: float,
    dt: float,
) -> BlochVector:
    """Advance the damped, driven Bloch vector by a single fixed RK4 step.

    The drive of Rabi frequency ``rabi`` rotates about the phase-0
    equatorial axis while ``atom.detuning`` precesses the vector about z;
    damping follows the reservoir quadrature rates.  The step must satisfy
    dt * max(rates, |rabi|, |detuning|) < 0.1; subdivide longer intervals.
    dt = 0 returns the state unchanged.
    """
    if dt == 0.0:
        return state
    if dt < 0.0:
        raise ModelError(f"time step must be >= 0, got {dt}")
    gu, gv, guv, gz, wss = _damping(res, atom.gamma)
    delta = atom.detuning
    scale = max(gu, gv, gz, abs(rabi), abs(delta))
    if dt * scale >= STEP_BOUND:
        raise ModelError(
            f"integration step too large: dt * max rate = {dt * scale:.3g} "
            f">= {STEP_BOUND}"
        )

    def deriv(u: float, v: float, w: float) -> tuple[float, float, float]:
        fu = -delta * v - gu * u - guv * v
        fv = delta * u - rabi * w - guv * u - gv * v
        fw = rabi * v - gz * (w - wss)
        return fu, fv, fw

    u, v, w = state.u, state.v, state.w
    k1 = deriv(u, v, w)
    h2 = 0.5 * dt
    k2 = deriv(u + h2 * k1[0], v + h2 * k1[1], w + h2 * k1[2])
    k3 = deriv(u + h2 * k2[0], v + h2 * k2[1], w + h2 * k2[2])
    k4 = deriv(u + dt * k3[0], v + dt * k3[1], w + dt * k3[2])
    sixth = dt / 6.0
    return BlochVector(
        u + sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
        v + sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]),
        w + sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]),
    )


def _substeps(duration: float, scale: float) -> int:
    if scale == 0.0:
        return 1
    return max(1, math.ceil(duration * scale / (0.5 * STEP_BOUND)))


def _evolve_interval(
    state: BlochVector,
    atom: TwoLevelAtom,
    res: SqueezedReservoir,
    rabi: float,
    duration: float,
) -> BlochVector:
    """Integrate over ``duration`` with automatically subdivided RK4 steps."""
    if duration == 0.0:
        return state
    gu, gv, guv, gz, _ = _damping(res, atom.gamma)
    scale = max(gu, gv, gz, abs(rabi), abs(atom.detuning))
    n = _substeps(duration, scale)
    h = duration / n
    for _ in range(n):
        state = evolve_bloch(state, atom, res, rabi, h)
    return state


def _precess(state: BlochVector, angle: float) -> BlochVector:
    c = math.cos(angle)
    s = math.sin(angle)
    return BlochVector(state.u * c - state.v * s, state.u * s + state.v * c, state.w)


def ramsey_probability(
    geom: RamseyGeometry,
    atom: TwoLevelAtom,
    lo_detuning: float,
    res: SqueezedReservoir = VACUUM,
    *,
    vacuum_decay: bool = False,
) -> float:
    """Transition probability after a pulse - free evolution - pulse sequence.

    The total detuning is ``atom.detuning + lo_detuning``.  Damping during
    the sequence uses the reservoir quadrature rates whenever ``res`` is not
    vacuum; with a vacuum reservoir the sequence is the loss-free
    idealization unless ``vacuum_decay`` is set.  For ideal pi/2 pulses and
    no damping, p = (1 + cos(detuning * free_time)) / 2.
    """
    delta = atom.detuning + lo_detuning
    decay = vacuum_decay or not res.is_vacuum
    state = GROUND

    if geom.pulse_duration > 0.0:
        omega = geom.pulse_area / geom.pulse_duration
        state = _pulse_interval(state, atom, res, delta, omega, geom.pulse_duration, decay)
    else:
        state = rabi_pulse(state, geom.pulse_area)

    if decay:
        shifted = replace(atom, detuning=delta)
        state = _evolve_interval(state, shifted, res, 0.0, geom.free_time)
    else:
        state = _precess(state, delta * geom.free_time)

    if geom.pulse_duration > 0.0:
        omega = geom.pulse_area / geom.pulse_duration
        state = _pulse_interval(state, atom, res, delta, omega, geom.pulse_duration, decay)
    else:
        state = rabi_pulse(state, geom.pulse_area)

    p = 0.5 * (1.0 + state.w)
    return min(1.0, max(0.0, p))


def _pulse_interval(
    state: BlochVector,
    atom: TwoLevelAtom,
    res: SqueezedReservoir,
    delta: float,
    omega: float,
    duration: float,
    decay: bool,
) -> BlochVector:
    if decay:
        shifted = replace(atom, detuning=delta)
        return _evolve_interval(state, shifted, res, omega, duration)
    # loss-free finite pulse: exact rotation about the tilted drive axis
    mag = math.hypot(omega, delta)
    if mag == 0.0:
        return state
    return _rotated(state, omega / mag, 0.0, delta / mag, mag * duration)


_QUAD_NODES, _QUAD_WEIGHTS = np.polynomial.legendre.leggauss(33)


def ramsey_probability_averaged(
    geom: RamseyGeometry,
    atom: TwoLevelAtom,
    lo_detuning: float,
    res: SqueezedReservoir = VACUUM,
    *,
    vacuum_decay: bool = False,
) -> float:
    """Fringe probability averaged over the beam transit-time distribution.

    Fountain geometry (or zero spread) evaluates the single fixed free time.
    Beam geometry with ``time_spread > 0`` averages the fringe over a normal
    distribution of free times, truncated at 4 sigma and at zero, by
    Gauss-Legendre quadrature; averaging over transit times is what washes
    out fringe contrast for a thermal beam.
    """
    if geom.mode != "beam" or geom.time_spread == 0.0:
        return ramsey_probability(geom, atom, lo_detuning, res, vacuum_decay=vacuum_decay)

    t0 = geom.free_time
    sig = geom.time_spread * t0
    lo = max(t0 - 4.0 * sig, 1e-12 * t0)
    hi = t0 + 4.0 * sig
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    num = 0.0
    den = 0.0
    for node, wq in zip(_QUAD_NODES, _QUAD_WEIGHTS):
        t = mid + half * node
        pdf = math.exp(-0.5 * ((t - t0) / sig) ** 2)
        p = ramsey_probability(
            replace(geom, free_time=t), atom, lo_detuning, res, vacuum_decay=vacuum_decay
        )
        num += wq * pdf * p
        den += wq * pdf
    return num / den


def slow_decay_margin(res: SqueezedReservoir, gamma: float, interaction_time: float) -> float:
    """Ratio of the slow-quadrature decay time to the detection interaction time.

    Values > 1 mean the protected quadrature outlives the measurement, the
    regime squeezed detection relies on.  A non-positive slow rate (possible
    at ideal squeezing) returns infinity.
    """
    if not interaction_time > 0.0:
        raise ModelError(f"interaction time must be positive, got {interaction_time}")
    gamma_slow, _, _ = quadrature_decay_rates(res, gamma)
    if gamma_slow <= 0.0:
        return math.inf
    return 1.0 / (gamma_slow * interaction_time)
