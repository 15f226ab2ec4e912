"""Exact Fock-space statistics of the two-pulse measurement station.

The measurement interferes two input ports on a 50:50 beamsplitter, with
each port carrying an early and a late temporal bin.  To describe
partially distinguishable arms, arm B's wavepacket is split into the
component parallel to arm A's mode (amplitude overlap ``kappa``) and an
orthogonal residue; photons in the residue traverse the beamsplitter but
never interfere with arm A.  That gives 8 output modes:

    (detector 0/1) x (early/late bin) x (matched/orthogonal)

States are expanded by brute force as polynomials of creation operators
over these modes, so any photon-number pair (n_a, n_b) can be handled
exactly.  This is the validation side of the model: the fast coherent
engine's phase-randomized pulses are exactly Poisson mixtures of these
Fock inputs, so both descriptions must produce identical statistics.

Click patterns are encoded as 4-bit integers over slots ordered
(D1 early, D1 late, D2 early, D2 late); bit k set means slot k clicked.
"""
from __future__ import annotations

import math

import numpy as np

PATTERN_PSI_MINUS = (0b1001, 0b0110)  # clicks (D1e, D2l) or (D1l, D2e)
PATTERN_PSI_PLUS = (0b0011, 0b1100)   # clicks (D1e, D1l) or (D2e, D2l)

_SQRT2 = math.sqrt(2.0)


def _expand(amp_a, amp_b, n_a: int, n_b: int, kappa: float):
    """Amplitudes of all 8-mode occupation states for (n_a, n_b) inputs.

    ``amp_a``/``amp_b`` are the (early, late) wavepacket amplitudes of
    each arm's qubit state; only their direction matters, they are
    normalized internally.  Returns a dict occupation-tuple -> amplitude.
    """
    amp_a = np.asarray(amp_a, dtype=complex)
    amp_b = np.asarray(amp_b, dtype=complex)
    lam = math.sqrt(max(0.0, 1.0 - kappa * kappa))

    def normalized(v):
        n = np.linalg.norm(v)
        return v / n if n > 0 else v

    a = normalized(amp_a)
    b = normalized(amp_b)

    # mode index: 4*detector + 2*bin + (0 matched | 1 orthogonal)
    op_a = {}
    op_b = {}
    for t in (0, 1):
        op_a[0 + 2 * t + 0] = a[t] / _SQRT2
        op_a[4 + 2 * t + 0] = a[t] / _SQRT2
        op_b[0 + 2 * t + 0] = kappa * b[t] / _SQRT2
        op_b[4 + 2 * t + 0] = -kappa * b[t] / _SQRT2
        op_b[0 + 2 * t + 1] = lam * b[t] / _SQRT2
        op_b[4 + 2 * t + 1] = -lam * b[t] / _SQRT2

    states = {(0,) * 8: 1.0 + 0j}

    def apply(states, op):
        out = {}
        for occ, amp in states.items():
            for mode, coef in op.items():
                if coef == 0:
                    continue
                new = list(occ)
                new[mode] += 1
                key = tuple(new)
                out[key] = out.get(key, 0.0 + 0j) + amp * coef * math.sqrt(new[mode])
        return out

    for _ in range(n_a):
        states = apply(states, op_a)
    for _ in range(n_b):
        states = apply(states, op_b)

    norm = math.factorial(n_a) * math.factorial(n_b)
    return {occ: amp / math.sqrt(norm) for occ, amp in states.items()}


def slot_count_distribution(amp_a, amp_b, n_a: int, n_b: int, kappa: float):
    """Joint photon-count distribution over the 4 detector slots."""
    dist = {}
    for occ, amp in _expand(amp_a, amp_b, n_a, n_b, kappa).items():
        p = abs(amp) ** 2
        if p < 1e-300:
            continue
        counts = tuple(occ[4 * d + 2 * t] + occ[4 * d + 2 * t + 1]
                       for d in (0, 1) for t in (0, 1))
        dist[counts] = dist.get(counts, 0.0) + p
    return dist


def click_pattern_probs(
    amp_a, amp_b, n_a: int, n_b: int, kappa: float,
    efficiency: float = 1.0, dark_click_prob: float = 0.0,
) -> np.ndarray:
    """Probabilities of the 16 click patterns for Fock inputs.

    Each photon in a slot is detected independently with ``efficiency``;
    a slot clicks when at least one photon is detected or a dark count
    fires.
    """
    out = np.zeros(16)
    for counts, p in slot_count_distribution(amp_a, amp_b, n_a, n_b, kappa).items():
        pc = [1.0 - (1.0 - dark_click_prob) * (1.0 - efficiency) ** c
              for c in counts]
        for pattern in range(16):
            pr = p
            for s in range(4):
                pr *= pc[s] if (pattern >> s) & 1 else 1.0 - pc[s]
            out[pattern] += pr
    return out


def bsm_pattern_probs(state_a, state_b) -> dict:
    """Exact ideal-detection BSM statistics for one photon per arm.

    ``state_a``/``state_b`` are unit-norm single-photon time-bin qubit
    amplitude pairs (early, late).  Detection is lossless and dark-free
    with perfect mode overlap.  Returns a dict with the probability of
    every click pattern plus the identified-Bell-state totals.
    """
    for name, st in (("state_a", state_a), ("state_b", state_b)):
        v = np.asarray(st, dtype=complex)
        if v.shape != (2,):
            raise ValueError(f"{name} must have two components")
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValueError(f"{name} must be unit norm")
    probs = click_pattern_probs(state_a, state_b, 1, 1, kappa=1.0)
    return {
        "pattern_probs": probs,
        "p_psi_minus": float(sum(probs[p] for p in PATTERN_PSI_MINUS)),
        "p_psi_plus": float(sum(probs[p] for p in PATTERN_PSI_PLUS)),
    }


def fock_bsm_oracle(state_a, state_b) -> tuple[float, float]:
    """(P(psi-minus pattern), P(psi-plus pattern)) for single-photon inputs."""
    r = bsm_pattern_probs(state_a, state_b)
    return r["p_psi_minus"], r["p_psi_plus"]
