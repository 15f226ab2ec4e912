"""Closed-form (quadrature) gain and error-rate oracle.

For phase-randomized weak coherent pulses only the relative global phase
between the two arms matters, so every per-round observable is an
average over a single angle.  The integrands are entire trigonometric
functions, so a uniform grid (trapezoid on a periodic function) is
accurate to machine precision; 1024 points is ample.

These expressions provide the no-Monte-Carlo route to gains, error
rates, Bell-state announcement rates and HOM coincidence levels.  They
are used as the theory curve for key-rate sweeps and as the independent
oracle that the sampling engines are checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoding import Basis, IntensityClass, QubitSpec, SourceParams, encode
from .fock import PATTERN_PSI_MINUS, PATTERN_PSI_PLUS, click_pattern_probs
from .optics import (
    DetectorModel,
    InterferenceContext,
    effective_overlap,
    slot_intensities,
)

PHASE_GRID_POINTS = 1024


def _state_amplitudes(basis: Basis, bit: int, mu: float, params: SourceParams):
    """(early, late) amplitudes at zero global phase, leakage included."""
    cls = IntensityClass.SIGNAL
    # build through encode() so leakage conventions stay in one place
    scaled = SourceParams(
        mu_signal=mu if mu > 0 else 1.0,
        mu_decoy=(mu if mu > 0 else 1.0) / 2.0,
        extinction_ratio_db=params.extinction_ratio_db,
    )
    if mu <= 0.0:
        return np.zeros(2, dtype=complex)
    pp = encode(QubitSpec(basis, bit, cls, 0.0), scaled)
    return np.array([pp.amp_early, pp.amp_late])


def _pattern_probs_grid(amps_a, amps_b, kappa, det: DetectorModel):
    """Click probabilities of all 16 patterns, phase-averaged.

    Returns a (16,) array; pattern bit k set = slot k clicked, slot
    order (D1e, D1l, D2e, D2l).
    """
    theta = np.linspace(0.0, 2.0 * np.pi, PHASE_GRID_POINTS, endpoint=False)
    phase = np.exp(1j * theta)[:, None]
    n = slot_intensities(
        np.asarray(amps_a, dtype=complex)[None, :],
        phase * np.asarray(amps_b, dtype=complex)[None, :],
        np.full(PHASE_GRID_POINTS, kappa, dtype=complex),
    )
    p = det.click_prob(n)
    q = 1.0 - p
    out = np.empty(16)
    for pattern in range(16):
        f = np.ones(PHASE_GRID_POINTS)
        for s in range(4):
            f = f * (p[:, s] if (pattern >> s) & 1 else q[:, s])
        out[pattern] = f.mean()
    return out


@dataclass(frozen=True)
class CellRates:
    """Phase-averaged per-round probabilities for one tally cell."""

    q_minus: float
    t_minus: float  # announced-and-erroneous probability (psi-minus)
    q_plus: float
    t_plus: float

    @property
    def e_minus(self) -> float:
        return self.t_minus / self.q_minus if self.q_minus > 0 else 0.0


def _bit_weights(params: SourceParams):
    return {0: params.p_bit0, 1: 1.0 - params.p_bit0}


def cell_rates(
    basis: Basis,
    mu_a: float,
    mu_b: float,
    det: DetectorModel,
    kappa: float,
    params_a: SourceParams,
    params_b: SourceParams,
) -> CellRates:
    """Announcement and error probabilities for one (basis, mu_a, mu_b) cell.

    ``mu_a``/``mu_b`` are the mean photon numbers arriving at the
    measurement beamsplitter (source intensity times arm transmittance).
    Error attribution follows the sifting rule: for psi-minus the
    receiving party flips in both bases, for psi-plus only in Z.
    """
    pw = det.window_pass_prob()
    qm = tm = qp = tp = 0.0
    for bit_a, w_a in _bit_weights(params_a).items():
        for bit_b, w_b in _bit_weights(params_b).items():
            w = w_a * w_b
            if w == 0.0:
                continue
            amps_a = _state_amplitudes(basis, bit_a, mu_a, params_a)
            amps_b = _state_amplitudes(basis, bit_b, mu_b, params_b)
            probs = _pattern_probs_grid(amps_a, amps_b, kappa, det)
            p_minus = sum(probs[p] for p in PATTERN_PSI_MINUS) * pw
            p_plus = sum(probs[p] for p in PATTERN_PSI_PLUS) * pw
            err_minus = bit_a == bit_b
            err_plus = (bit_a == bit_b) if basis == Basis.Z else (bit_a != bit_b)
            qm += w * p_minus
            tm += w * p_minus * err_minus
            qp += w * p_plus
            tp += w * p_plus * err_plus
    return CellRates(qm, tm, qp, tp)


def gains_table(
    params_a: SourceParams,
    params_b: SourceParams,
    det: DetectorModel,
    kappa: float,
    transmittance_a: float,
    transmittance_b: float,
):
    """Exact Q and error-gain for every (basis, class_a, class_b) cell.

    Returns dict (basis, ia, ib) -> CellRates with intensity classes
    indexed (0 vacuum, 1 decoy, 2 signal).
    """
    out = {}
    for basis in (Basis.Z, Basis.X):
        for ia, int_a in enumerate(params_a.intensities):
            for ib, int_b in enumerate(params_b.intensities):
                out[(basis, ia, ib)] = cell_rates(
                    basis,
                    int_a * transmittance_a,
                    int_b * transmittance_b,
                    det,
                    kappa,
                    params_a,
                    params_b,
                )
    return out


def single_photon_rates(
    basis: Basis,
    det: DetectorModel,
    kappa: float,
    transmittance_a: float,
    transmittance_b: float,
    params_a: SourceParams,
    params_b: SourceParams,
) -> tuple[float, float]:
    """Exact yield and error rate for one source photon per arm.

    Channel loss thins each photon independently before the
    beamsplitter; dark counts and efficiency act at the detectors.
    Gives the "tagged truth" a decoy-state bound must stay on the safe
    side of.  Returns (Y11, e11).
    """
    pw = det.window_pass_prob()
    y = t = 0.0
    for bit_a, w_a in _bit_weights(params_a).items():
        for bit_b, w_b in _bit_weights(params_b).items():
            w = w_a * w_b
            if w == 0.0:
                continue
            # leakage is an intensity effect; at the single-photon level the
            # qubit states are ideal
            amps_a = _state_amplitudes(basis, bit_a, 1.0, SourceParams(mu_signal=1.0, mu_decoy=0.5, extinction_ratio_db=1e9))
            amps_b = _state_amplitudes(basis, bit_b, 1.0, SourceParams(mu_signal=1.0, mu_decoy=0.5, extinction_ratio_db=1e9))
            for s_a in (0, 1):
                for s_b in (0, 1):
                    ws = (
                        (transmittance_a if s_a else 1.0 - transmittance_a)
                        * (transmittance_b if s_b else 1.0 - transmittance_b)
                    )
                    if ws == 0.0:
                        continue
                    probs = click_pattern_probs(
                        amps_a, amps_b, s_a, s_b, kappa,
                        efficiency=det.efficiency,
                        dark_click_prob=det.dark_click_prob,
                    )
                    p_minus = sum(probs[p] for p in PATTERN_PSI_MINUS) * pw
                    y += w * ws * p_minus
                    t += w * ws * p_minus * (bit_a == bit_b)
    return y, (t / y if y > 0 else 0.0)


def dark_coincidence_prob(det: DetectorModel) -> float:
    """Announcement probability with no light at all.

    Four opposite-bin two-click patterns, each requiring two dark clicks
    and two silent slots, times the jitter window acceptance.
    """
    d = det.dark_click_prob
    return 4.0 * d * d * (1.0 - d) ** 2 * det.window_pass_prob()


def hom_coincidence_expected(
    mu: float, ctx: InterferenceContext, det: DetectorModel,
    grid: int = PHASE_GRID_POINTS,
) -> float:
    """Phase-averaged same-bin coincidence probability (both bins summed).

    Matches the estimator of optics.hom_coincidence_prob for two
    equal-superposition inputs of mean photon number mu.
    """
    kappa = effective_overlap(ctx)
    theta = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    c = kappa * np.cos(theta)
    p1 = det.click_prob((mu / 2.0) * (1.0 + c))
    p2 = det.click_prob((mu / 2.0) * (1.0 - c))
    return float(np.mean(2.0 * p1 * p2)) * det.window_pass_prob()


def hom_visibility_expected(
    mu: float, ctx: InterferenceContext, det: DetectorModel
) -> float:
    from dataclasses import replace

    c0 = hom_coincidence_expected(mu, ctx, det)
    cf = hom_coincidence_expected(mu, replace(ctx, mode_overlap=0.0), det)
    return 1.0 - c0 / cf if cf > 0 else 0.0
