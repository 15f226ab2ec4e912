"""Time-bin qubit preparation for weak coherent pulses.

Each round a party picks a basis, a bit, an intensity class and a fresh
uniform global phase, and emits an attenuated pulse pair occupying an
early and a late temporal mode.  Amplitude conventions (phi = global
phase, mu = mean photon number of the intensity class):

    Z, bit 0:  (sqrt(mu) e^{i phi}, 0)                  "early"
    Z, bit 1:  (0, sqrt(mu) e^{i phi})                  "late"
    X, bit 0:  sqrt(mu/2) e^{i phi} (1, +1)             "plus"
    X, bit 1:  sqrt(mu/2) e^{i phi} (1, -1)             "minus"

Bit 0 maps to early/plus and bit 1 to late/minus.  A finite intensity
modulator extinction ratio leaks light of relative intensity
10^(-ER_dB/10) into nominally empty bins; the leakage rides on the same
laser pulse and therefore carries the same global phase.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .rng import CounterRng


class Basis(IntEnum):
    Z = 0
    X = 1


class IntensityClass(IntEnum):
    VACUUM = 0
    DECOY = 1
    SIGNAL = 2


@dataclass(frozen=True)
class SourceParams:
    """Per-party source configuration.

    ``p_signal``/``p_decoy`` are the intensity-class probabilities (the
    vacuum probability is the remainder); ``p_bit0`` allows forcing a
    deterministic bit for diagnostics.
    """

    mu_signal: float = 0.03
    mu_decoy: float = 0.01
    p_basis_z: float = 0.5
    p_signal: float = 0.7
    p_decoy: float = 0.2
    p_bit0: float = 0.5
    extinction_ratio_db: float = 60.0
    clock_rate_hz: float = 20e6

    def __post_init__(self):
        if not (0.0 <= self.mu_decoy < self.mu_signal):
            raise ValueError("require 0 <= mu_decoy < mu_signal")
        for name in ("p_basis_z", "p_signal", "p_decoy", "p_bit0"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        if self.p_signal + self.p_decoy > 1.0 + 1e-12:
            raise ValueError("p_signal + p_decoy must not exceed 1")
        if self.extinction_ratio_db <= 0.0:
            raise ValueError("extinction_ratio_db must be positive")
        if self.clock_rate_hz <= 0.0:
            raise ValueError("clock_rate_hz must be positive")

    @property
    def p_vacuum(self) -> float:
        return max(0.0, 1.0 - self.p_signal - self.p_decoy)

    def mean_photon(self, cls: IntensityClass) -> float:
        if cls == IntensityClass.VACUUM:
            return 0.0
        return self.mu_decoy if cls == IntensityClass.DECOY else self.mu_signal

    @property
    def intensities(self) -> tuple[float, float, float]:
        """(vacuum, decoy, signal) mean photon numbers."""
        return (0.0, self.mu_decoy, self.mu_signal)

    @property
    def leakage_intensity_ratio(self) -> float:
        return 10.0 ** (-self.extinction_ratio_db / 10.0)


@dataclass(frozen=True)
class QubitSpec:
    """One party's random choices for a single round."""

    basis: Basis
    bit: int
    intensity_class: IntensityClass
    global_phase: float

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        if not (0.0 <= self.global_phase < 2.0 * np.pi):
            raise ValueError("global_phase must lie in [0, 2*pi)")


@dataclass(frozen=True)
class PulsePair:
    """Coherent amplitudes (units photons^1/2) of the two temporal modes."""

    amp_early: complex
    amp_late: complex
    polarization: np.ndarray = field(
        default_factory=lambda: np.array([1.0 + 0j, 0.0 + 0j])
    )
    emission_slot: int = 0

    def __post_init__(self):
        pol = np.asarray(self.polarization, dtype=complex)
        if pol.shape != (2,):
            raise ValueError("polarization must be a 2-component Jones vector")
        nrm = np.linalg.norm(pol)
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError("polarization must be a unit vector")
        object.__setattr__(self, "polarization", pol)

    @property
    def mean_photon_number(self) -> float:
        return abs(self.amp_early) ** 2 + abs(self.amp_late) ** 2


def encode(spec: QubitSpec, params: SourceParams) -> PulsePair:
    """Map a round's choices to pulse-pair amplitudes.

    The nominal pattern carries the class's full mean photon number; any
    nominally empty bin additionally receives modulator-leakage light of
    relative intensity 10^(-ER/10), in phase with the pulse.
    """
    amps = encode_batch(
        np.array([int(spec.basis)]),
        np.array([spec.bit]),
        np.array([int(spec.intensity_class)]),
        np.array([spec.global_phase]),
        params,
    )
    return PulsePair(amp_early=complex(amps[0, 0]), amp_late=complex(amps[0, 1]))


def sample_spec(rng: CounterRng, round_index: int, params: SourceParams) -> QubitSpec:
    """Draw one round's (basis, bit, intensity, phase) from a counter stream."""
    b, t, c, p = sample_spec_batch(rng, round_index, 1, params)
    return QubitSpec(
        basis=Basis(int(b[0])),
        bit=int(t[0]),
        intensity_class=IntensityClass(int(c[0])),
        global_phase=float(p[0]),
    )


def sample_spec_batch(rng: CounterRng, start: int, n: int, params: SourceParams):
    """Vectorized spec sampling for rounds start..start+n-1.

    Returns (basis, bit, intensity_class, global_phase) as arrays.  Draw
    slots 0..3 of each round index are consumed, in that order.
    """
    u_basis = rng.uniforms(start, n, slot=0)
    u_bit = rng.uniforms(start, n, slot=1)
    u_cls = rng.uniforms(start, n, slot=2)
    u_phase = rng.uniforms(start, n, slot=3)
    basis = np.where(u_basis < params.p_basis_z, Basis.Z, Basis.X).astype(np.int8)
    bit = np.where(u_bit < params.p_bit0, 0, 1).astype(np.int8)
    cls = np.full(n, IntensityClass.VACUUM, dtype=np.int8)
    cls[u_cls < params.p_signal + params.p_decoy] = IntensityClass.DECOY
    cls[u_cls < params.p_signal] = IntensityClass.SIGNAL
    phase = u_phase * (2.0 * np.pi)
    return basis, bit, cls, phase


def encode_batch(basis, bit, cls, phase, params: SourceParams):
    """Vectorized encode; returns complex amplitudes of shape (n, 2)."""
    basis = np.asarray(basis)
    bit = np.asarray(bit)
    mu = np.choose(np.asarray(cls, dtype=np.int64), params.intensities)
    leak_amp = np.sqrt(mu * params.leakage_intensity_ratio)
    amp = np.sqrt(mu)
    half = np.sqrt(mu / 2.0)
    e = np.empty(len(mu))
    l = np.empty(len(mu))
    z0 = (basis == Basis.Z) & (bit == 0)
    z1 = (basis == Basis.Z) & (bit == 1)
    x = basis == Basis.X
    e[z0] = amp[z0]
    l[z0] = leak_amp[z0]
    e[z1] = leak_amp[z1]
    l[z1] = amp[z1]
    e[x] = half[x]
    l[x] = np.where(bit[x] == 0, half[x], -half[x])
    ph = np.exp(1j * np.asarray(phase))
    return np.stack([e * ph, l * ph], axis=1)
