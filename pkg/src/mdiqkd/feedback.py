"""Channel drift processes and the three stabilization loops.

The loops mirror the station's control architecture:

* a PID lock on the lasers' beat frequency, actuated in 11.25 MHz
  quanta;
* per-arm polarization compensators driven by a derivative-free
  perturb-and-compare climb on the detector singles rates (polarization
  error maps to loss in front of the interference beamsplitter, so no
  extra detectors are needed);
* arrival-time control that dithers one arm's emission time in
  27.8 ps quanta and walks toward the minimum of the same-bin
  coincidence rate (the HOM dip).

Controllers are sequential state machines stepped between simulation
batches; every actuation they emit is an exact integer multiple of the
loop's resolution.  Controller laws and drift magnitudes are
configuration: the hardware only fixes the resolutions and the
objectives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .optics import ChannelState

FREQUENCY_RESOLUTION_HZ = 11.25e6
TIMING_RESOLUTION_PS = 27.8


@dataclass(frozen=True)
class DriftProcess:
    """Random-walk disturbance applied to a channel between batches."""

    kind: str  # 'polarization_walk' | 'delay_walk' | 'frequency_walk'
    step_sigma: float = 0.0  # rad | ps | Hz per update
    update_every: int = 1    # apply once per this many batches

    def __post_init__(self):
        if self.kind not in ("polarization_walk", "delay_walk", "frequency_walk"):
            raise ValueError(f"unknown drift kind {self.kind!r}")
        if self.step_sigma < 0 or self.update_every < 1:
            raise ValueError("invalid drift parameters")


def _su2(ax: float, ay: float, az: float = 0.0) -> np.ndarray:
    """exp(-i (ax sx + ay sy + az sz) / 1) in closed form."""
    theta = math.sqrt(ax * ax + ay * ay + az * az)
    if theta == 0.0:
        return np.eye(2, dtype=complex)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    n = (ax * sx + ay * sy + az * sz) / theta
    return math.cos(theta) * np.eye(2, dtype=complex) - 1j * math.sin(theta) * n


def _reunitarize(u: np.ndarray) -> np.ndarray:
    """Project back to the closest unitary (polar factor)."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def drift_step(
    channel: ChannelState, process: DriftProcess, rng: np.random.Generator
) -> ChannelState:
    """Advance one random-walk step; returns a new channel state."""
    if process.step_sigma == 0.0:
        return channel
    if process.kind == "delay_walk":
        return replace(channel, delay_ps=channel.delay_ps + rng.normal(0.0, process.step_sigma))
    if process.kind == "frequency_walk":
        return replace(channel, detuning_hz=channel.detuning_hz + rng.normal(0.0, process.step_sigma))
    kick = _su2(*rng.normal(0.0, process.step_sigma, size=3))
    u = _reunitarize(kick @ channel.polarization_unitary)
    return replace(channel, polarization_unitary=u)


def quantize(value: float, resolution: float) -> float:
    return resolution * round(value / resolution)


@dataclass
class FrequencyLockController:
    """PID lock on the measured beat frequency, quantized actuation.

    Incremental (velocity) form acting on a laser whose frequency
    integrates the applied corrections: each ``step`` consumes one beat
    measurement and returns the frequency increment to apply, rounded to
    the actuation resolution.  The setpoint is zero beat.
    """

    kp: float = 0.4
    ki: float = 0.4
    kd: float = 0.0
    resolution_hz: float = FREQUENCY_RESOLUTION_HZ
    _e1: float = 0.0
    _e2: float = 0.0
    _primed: int = 0

    def step(self, measured_beat_hz: float) -> float:
        if not math.isfinite(measured_beat_hz):
            raise ValueError("beat frequency must be finite")
        e = -measured_beat_hz
        if self._primed == 0:
            de, d2e = 0.0, 0.0
        elif self._primed == 1:
            de, d2e = e - self._e1, 0.0
        else:
            de = e - self._e1
            d2e = e - 2.0 * self._e1 + self._e2
        raw = self.kp * de + self.ki * e + self.kd * d2e
        self._e2, self._e1 = self._e1, e
        self._primed = min(2, self._primed + 1)
        return quantize(raw, self.resolution_hz)


@dataclass
class PolarizationController:
    """Perturb-and-compare maximization of singles rates.

    Holds a compensating rotation parameterized by two equatorial-axis
    angles (enough to steer any input polarization onto the analyzer
    axis).  Cycle: measure at the centre, then at +delta and -delta
    along one axis; commit the best and alternate axes, shrinking the
    probe when the centre wins.
    """

    probe_delta: float = 0.08
    min_delta: float = 0.02
    shrink: float = 0.6
    a: float = 0.0
    b: float = 0.0
    _axis: int = 0
    _phase: int = 0  # 0 centre, 1 +probe, 2 -probe
    _rates: list = field(default_factory=list)

    def rotation(self) -> np.ndarray:
        """Rotation the compensator applies during the next batch."""
        da, db = self._offset()
        return _su2(self.a + da, self.b + db)

    def _offset(self):
        d = self.probe_delta if self._phase == 1 else (-self.probe_delta if self._phase == 2 else 0.0)
        return (d, 0.0) if self._axis == 0 else (0.0, d)

    def step(self, singles_rate: float) -> np.ndarray:
        """Consume the rate measured under the current rotation.

        Returns the rotation to apply for the next batch.
        """
        self._rates.append(float(singles_rate))
        self._phase += 1
        if self._phase == 3:
            r_c, r_p, r_m = self._rates
            best = int(np.argmax(self._rates))
            if best != 0:
                d = self.probe_delta if best == 1 else -self.probe_delta
                if self._axis == 0:
                    self.a += d
                else:
                    self.b += d
            else:
                self.probe_delta = max(self.min_delta, self.probe_delta * self.shrink)
            self._rates = []
            self._phase = 0
            self._axis ^= 1
        return self.rotation()


@dataclass
class TimingController:
    """Dithered minimum-seeking on the same-bin coincidence rate.

    The commanded emission-time offset lives on the 27.8 ps actuation
    grid.  Every ``probe_every`` batches the controller spends two
    batches at +/- ``probe_quanta`` around the centre, estimates the
    dip asymmetry and moves the centre by a proportional, quantized
    amount.  In between it holds the centre position.
    """

    probe_quanta: int = 4
    probe_every: int = 1       # cycles between probe pairs (1 = always probing)
    gain: float = 7.0          # quanta moved per unit relative asymmetry
    max_move_quanta: int = 8
    resolution_ps: float = TIMING_RESOLUTION_PS
    center_quanta: int = 0
    _phase: int = 0
    _hold: int = 0
    _rate_plus: float = 0.0

    def offset_ps(self) -> float:
        """Emission-time offset commanded for the next batch."""
        probe = 0
        if self._phase == 1:
            probe = self.probe_quanta
        elif self._phase == 2:
            probe = -self.probe_quanta
        return (self.center_quanta + probe) * self.resolution_ps

    def step(self, samebin_rate: float) -> float:
        """Consume the rate measured at the current commanded offset."""
        if not math.isfinite(samebin_rate):
            raise ValueError("rate estimate must be finite")
        if self._phase == 0:
            self._hold += 1
            if self._hold >= self.probe_every:
                self._hold = 0
                self._phase = 1
        elif self._phase == 1:
            self._rate_plus = samebin_rate
            self._phase = 2
        else:
            r_plus, r_minus = self._rate_plus, samebin_rate
            mean = 0.5 * (r_plus + r_minus)
            if mean > 0.0:
                asym = (r_plus - r_minus) / mean
                move = -self.gain * asym
                move = int(round(max(-self.max_move_quanta, min(self.max_move_quanta, move))))
                self.center_quanta += move
            self._phase = 0
        return self.offset_ps()


@dataclass
class FeedbackConfig:
    """Switches, drifts and controller settings for a closed-loop run."""

    enable_frequency: bool = True
    enable_polarization: bool = True
    enable_timing: bool = True
    drift_delay_sigma_ps: float = 0.0
    drift_frequency_sigma_hz: float = 0.0
    drift_polarization_sigma_rad: float = 0.0
    beat_noise_sigma_hz: float = 2e6
    freq_kp: float = 0.8
    freq_ki: float = 0.2
    freq_kd: float = 0.0
    pol_probe_delta: float = 0.08
    timing_probe_quanta: int = 4
    timing_probe_every: int = 8
    timing_gain: float = 7.0
