"""Monte-Carlo oracles for the closed-form observables.

Event-level simulation of the relay measurement, used to validate the
closed-form gains and error rates rather than trusting their algebra.

Weak-coherent pairs: per trial, random bits and per-party misalignment
flips fix which time bins carry light; the relative laser phase is
drawn uniformly, the four detection-window intensities follow from the
beam-splitter amplitudes, and each window clicks independently with
probability 1 - (1-pd) exp(-I). The anti-symmetric outcome is a click
in each detector in different bins with the other two windows silent.
Phase randomization is sampled, not integrated, so the Bessel-function
averages in the closed forms are exercised independently.

Single-photon pairs: photons survive their arms with the arm
efficiencies; surviving pairs land on detection windows according to
two-boson interference (amplitude table with symmetrized two-photon
amplitudes, which reproduces bunching), then dark counts and threshold
detection are applied.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from .physics import SystemModel

__all__ = [
    "mc_wcp_observables",
    "mc_single_photon_truth",
]

_CHUNK = 1_000_000

# window order: (C early, D early, C late, D late)
_W_CE, _W_DE, _W_CL, _W_DL = 0, 1, 2, 3


def _click_patterns(intensity: np.ndarray, dark: float, rng) -> np.ndarray:
    """Anti-symmetric-outcome mask for an (n, 4) window-intensity array."""
    p_click = 1.0 - (1.0 - dark) * np.exp(-intensity)
    clicks = rng.random(intensity.shape) < p_click
    ce, de, cl, dl = clicks.T
    return (ce & dl & ~de & ~cl) | (cl & de & ~ce & ~dl)


def mc_wcp_observables(
    model: SystemModel,
    intensity_a: float,
    intensity_b: float,
    basis: str,
    trials: int,
    seed: int = 0,
) -> Tuple[float, float]:
    """Estimate (gain, qber) for a coherent pulse pair by event sampling."""
    if basis not in ("z", "x"):
        raise ValueError("basis must be 'z' or 'x'")
    if trials < 1:
        raise ValueError("trials must be positive")
    a = model.efficiency_a * intensity_a
    b = model.efficiency_b * intensity_b
    dark = model.dark_count_rate
    e_d = model.misalignment_z if basis == "z" else model.misalignment_x
    rng = np.random.default_rng(seed)

    n_pattern = 0
    n_error = 0
    remaining = trials
    while remaining > 0:
        n = min(_CHUNK, remaining)
        remaining -= n
        bit_a = rng.random(n) < 0.5
        bit_b = rng.random(n) < 0.5
        flip_a = rng.random(n) < e_d
        flip_b = rng.random(n) < e_d
        phys_a = bit_a ^ flip_a
        phys_b = bit_b ^ flip_b
        phase = rng.random(n) * 2.0 * math.pi
        cos_phase = np.cos(phase)
        intensity = np.empty((n, 4))

        if basis == "z":
            equal = phys_a == phys_b
            # different bins: no interference, each pulse splits in half
            intensity[:, _W_CE] = np.where(equal, 0.0, 0.5 * a)
            intensity[:, _W_DE] = np.where(equal, 0.0, 0.5 * a)
            intensity[:, _W_CL] = np.where(equal, 0.0, 0.5 * b)
            intensity[:, _W_DL] = np.where(equal, 0.0, 0.5 * b)
            # same bin (take early): fields interfere with the random phase
            i_sum = 0.5 * (a + b)
            i_cross = math.sqrt(a * b) * cos_phase
            intensity[:, _W_CE] = np.where(equal, i_sum + i_cross, intensity[:, _W_CE])
            intensity[:, _W_DE] = np.where(equal, i_sum - i_cross, intensity[:, _W_DE])
        else:
            # both pulses occupy both bins at half intensity; the late-bin
            # relative phase carries the encoded bit difference
            sign = np.where(phys_a == phys_b, 1.0, -1.0)
            i_sum = 0.25 * (a + b)
            i_cross = 0.5 * math.sqrt(a * b) * cos_phase
            intensity[:, _W_CE] = i_sum + i_cross
            intensity[:, _W_DE] = i_sum - i_cross
            intensity[:, _W_CL] = i_sum + sign * i_cross
            intensity[:, _W_DL] = i_sum - sign * i_cross

        pattern = _click_patterns(intensity, dark, rng)
        # the anti-symmetric outcome implies anti-correlated bits
        error = pattern & (bit_a == bit_b)
        n_pattern += int(pattern.sum())
        n_error += int(error.sum())

    gain = n_pattern / trials
    qber = n_error / n_pattern if n_pattern else 0.0
    return gain, qber


# two-boson outcome tables -----------------------------------------------
#
# Amplitude of one photon over the four windows after the beam splitter:
#   from party A with late-bin sign sa: (1, 1, sa, sa) / 2
#   from party B with late-bin sign sb: (1, -1, sb, -sb) / 2
# (key basis: the photon sits in one bin, amplitude (1, ±1)/sqrt(2) over
# that bin's two detectors). Joint outcomes follow the symmetrized
# two-photon amplitude a1(w1) a2(w2) + a1(w2) a2(w1).


def _two_boson_distribution(amp1: np.ndarray, amp2: np.ndarray) -> np.ndarray:
    """Outcome probabilities over ordered window pairs (w1 <= w2)."""
    probs = []
    for w1 in range(4):
        for w2 in range(w1, 4):
            if w1 == w2:
                amp = math.sqrt(2.0) * amp1[w1] * amp2[w1]
            else:
                amp = amp1[w1] * amp2[w2] + amp1[w2] * amp2[w1]
            probs.append(amp * amp)
    out = np.array(probs)
    if abs(out.sum() - 1.0) > 1e-12:
        raise AssertionError("two-boson distribution must be normalized")
    return out


_PAIR_INDEX = [(w1, w2) for w1 in range(4) for w2 in range(w1, 4)]


def _amp_a(basis: str, phys_bit: np.ndarray | bool, sign: float) -> np.ndarray:
    if basis == "x":
        return np.array([0.5, 0.5, 0.5 * sign, 0.5 * sign])
    early = not phys_bit
    s = 1.0 / math.sqrt(2.0)
    return np.array([s, s, 0, 0]) if early else np.array([0, 0, s, s])


def _amp_b(basis: str, phys_bit, sign: float) -> np.ndarray:
    if basis == "x":
        return np.array([0.5, -0.5, 0.5 * sign, -0.5 * sign])
    early = not phys_bit
    s = 1.0 / math.sqrt(2.0)
    return np.array([s, -s, 0, 0]) if early else np.array([0, 0, s, -s])


def mc_single_photon_truth(
    model: SystemModel, basis: str = "x", trials: int = 1_000_000, seed: int = 0
) -> Tuple[float, float]:
    """Estimate (yield, error rate) of a single-photon pair by sampling."""
    if basis not in ("z", "x"):
        raise ValueError("basis must be 'z' or 'x'")
    if trials < 1:
        raise ValueError("trials must be positive")
    eta_a, eta_b = model.efficiency_a, model.efficiency_b
    dark = model.dark_count_rate
    e_d = model.misalignment_z if basis == "z" else model.misalignment_x
    rng = np.random.default_rng(seed)

    # outcome tables for both-photon events, indexed by (phys_a, phys_b)
    tables = {}
    for pa in (False, True):
        for pb in (False, True):
            if basis == "x":
                a1 = _amp_a("x", pa, -1.0 if pa else 1.0)
                a2 = _amp_b("x", pb, -1.0 if pb else 1.0)
            else:
                a1 = _amp_a("z", pa, 1.0)
                a2 = _amp_b("z", pb, 1.0)
            tables[(pa, pb)] = np.cumsum(_two_boson_distribution(a1, a2))

    n_pattern = 0
    n_error = 0
    remaining = trials
    while remaining > 0:
        n = min(_CHUNK, remaining)
        remaining -= n
        bit_a = rng.random(n) < 0.5
        bit_b = rng.random(n) < 0.5
        phys_a = bit_a ^ (rng.random(n) < e_d)
        phys_b = bit_b ^ (rng.random(n) < e_d)
        arrive_a = rng.random(n) < eta_a
        arrive_b = rng.random(n) < eta_b

        occupancy = np.zeros((n, 4), dtype=bool)

        both = arrive_a & arrive_b
        if both.any():
            u = rng.random(n)
            for pa in (False, True):
                for pb in (False, True):
                    mask = both & (phys_a == pa) & (phys_b == pb)
                    if not mask.any():
                        continue
                    idx = np.minimum(
                        np.searchsorted(tables[(pa, pb)], u[mask]), len(_PAIR_INDEX) - 1
                    )
                    for k, (w1, w2) in enumerate(_PAIR_INDEX):
                        hit = mask.copy()
                        hit[mask] = idx == k
                        occupancy[hit, w1] = True
                        occupancy[hit, w2] = True

        for arrive, other, phys in (
            (arrive_a, arrive_b, phys_a),
            (arrive_b, arrive_a, phys_b),
        ):
            solo = arrive & ~other
            if not solo.any():
                continue
            if basis == "x":
                w = rng.integers(0, 4, size=int(solo.sum()))
            else:
                # bit 0 occupies the early bin on both sides
                det = rng.integers(0, 2, size=int(solo.sum()))
                w = det + 2 * phys[solo].astype(int)
            rows = np.nonzero(solo)[0]
            occupancy[rows, w] = True

        p_click = np.where(occupancy, 1.0, 0.0)
        p_click = 1.0 - (1.0 - dark) * (1.0 - p_click)
        clicks = rng.random((n, 4)) < p_click
        ce, de, cl, dl = clicks.T
        pattern = (ce & dl & ~de & ~cl) | (cl & de & ~ce & ~dl)
        error = pattern & (bit_a == bit_b)
        n_pattern += int(pattern.sum())
        n_error += int(error.sum())

    yield_est = n_pattern / trials
    err_est = n_error / n_pattern if n_pattern else 0.0
    return yield_est, err_est
