"""Channel and detector model for weak-coherent-pulse MDI-QKD.

Closed-form observables for a time-bin MDI system: two parties send
phase-randomized coherent pulses through lossy fiber to an untrusted
relay that interferes them on a 50/50 beam splitter and announces the
anti-symmetric Bell outcome (clicks in different detectors in different
time bins, remaining detection windows silent). Threshold detectors
carry an independent dark-count probability per detection window.

Conventions:
  * Intensities are mean photon numbers at the source; channel loss and
    detector efficiency are folded into per-arm efficiencies before the
    beam splitter.
  * Gains are probabilities per pulse pair with uniformly random bit
    choices on both sides (this matches how raw coincidence counts are
    normally tallied against the number of emitted pairs).
  * Misalignment acts as an independent bit-flip on each transmitter,
    so the net flip probability for a pair is 2*e_d*(1 - e_d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "SystemModel",
    "IntensityPairObservables",
    "InterferenceConfig",
    "SinglePhotonTruth",
    "transmittance",
    "binary_entropy",
    "bessel_i0",
    "z_basis_observables",
    "x_basis_observables",
    "single_photon_truth",
    "detector_intensities",
    "visibility_single_photon",
    "visibility_two_photon",
]


@dataclass(frozen=True)
class SystemModel:
    """Device and channel parameters of one two-user MDI link.

    Attributes:
        dark_count_rate: dark-count probability per detector per gate.
        detector_efficiency: detection efficiency of the relay detectors,
            including insertion loss and window overlap.
        misalignment_z: optical misalignment (bit-flip probability per
            transmitter) in the key basis.
        misalignment_x: same for the decoy/test basis.
        fiber_loss_db_per_km: fiber attenuation coefficient.
        error_correction_efficiency: error-correction inefficiency f >= 1.
        security_parameter: total failure probability budget epsilon.
        pulse_count: total number of pulse pairs N sent per session.
        length_a_km / length_b_km: fiber lengths of the two arms.
        clock_rate_hz: source repetition rate.
    """

    dark_count_rate: float
    detector_efficiency: float
    misalignment_z: float
    misalignment_x: float
    fiber_loss_db_per_km: float
    error_correction_efficiency: float
    security_parameter: float
    pulse_count: float
    length_a_km: float
    length_b_km: float
    clock_rate_hz: float

    def __post_init__(self):
        if not 0.0 <= self.dark_count_rate < 1.0:
            raise ValueError("dark_count_rate must lie in [0, 1)")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ValueError("detector_efficiency must lie in (0, 1]")
        for name in ("misalignment_z", "misalignment_x"):
            if not 0.0 <= getattr(self, name) <= 0.5:
                raise ValueError(f"{name} must lie in [0, 0.5]")
        if self.fiber_loss_db_per_km <= 0.0:
            raise ValueError("fiber_loss_db_per_km must be positive")
        if self.error_correction_efficiency < 1.0:
            raise ValueError("error_correction_efficiency must be >= 1")
        if not 0.0 < self.security_parameter < 1.0:
            raise ValueError("security_parameter must lie in (0, 1)")
        if self.pulse_count < 1:
            raise ValueError("pulse_count must be >= 1")
        if self.length_a_km < 0.0 or self.length_b_km < 0.0:
            raise ValueError("fiber lengths must be non-negative")
        if self.clock_rate_hz <= 0.0:
            raise ValueError("clock_rate_hz must be positive")

    @property
    def efficiency_a(self) -> float:
        """Total arm-A efficiency: channel transmittance times detector."""
        return self.detector_efficiency * transmittance(
            self.fiber_loss_db_per_km, self.length_a_km
        )

    @property
    def efficiency_b(self) -> float:
        """Total arm-B efficiency."""
        return self.detector_efficiency * transmittance(
            self.fiber_loss_db_per_km, self.length_b_km
        )


@dataclass(frozen=True)
class IntensityPairObservables:
    """Gain and QBER for one intensity pair."""

    gain: float
    qber: float

    def __post_init__(self):
        if not 0.0 <= self.gain <= 1.0:
            raise ValueError("gain must lie in [0, 1]")
        if not 0.0 <= self.qber <= 1.0:
            raise ValueError("qber must lie in [0, 1]")


@dataclass(frozen=True)
class InterferenceConfig:
    """Square-root arriving amplitudes and relative phase at a beam splitter."""

    gamma_a: float
    gamma_b: float
    phase: float

    def __post_init__(self):
        if self.gamma_a < 0.0 or self.gamma_b < 0.0:
            raise ValueError("amplitudes must be non-negative")


class SinglePhotonTruth(NamedTuple):
    yield_11: float
    phase_error_11: float


def transmittance(loss_coeff_db_per_km: float, length_km: float) -> float:
    """Fiber transmittance 10^(-alpha*L/10) for attenuation alpha in dB/km."""
    if loss_coeff_db_per_km <= 0.0:
        raise ValueError("loss coefficient must be positive")
    if length_km < 0.0:
        raise ValueError("length must be non-negative")
    return 10.0 ** (-loss_coeff_db_per_km * length_km / 10.0)


def binary_entropy(p: float) -> float:
    """Binary Shannon entropy h(p) in bits, with h(0) = h(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def bessel_i0(x: float) -> float:
    """Modified Bessel function I0 by power series.

    Converges rapidly for the small arguments arising here (products of
    arriving intensities, |x| well below 5); absolute error < 1e-15 in
    that range.
    """
    t = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 1
    while term > 1e-18 * total and k < 200:
        term *= t / (k * k)
        total += term
        k += 1
    return total


def _net_flip(e_d: float) -> float:
    # independent flip on each transmitter; either single flip errs the pair
    return 2.0 * e_d * (1.0 - e_d)


def z_basis_observables(model: SystemModel, s_a: float, s_b: float) -> IntensityPairObservables:
    """Gain and QBER of a key-basis pulse pair.

    With arriving intensities a, b and dark-count probability pd, the
    correct-bit coincidence term and the accidental (equal-bit,
    dark-assisted) term are

        Q_C = 2 (1-pd)^2 e^{-(a+b)/2} [1-(1-pd)e^{-a/2}] [1-(1-pd)e^{-b/2}]
        Q_E = 2 pd (1-pd)^2 e^{-(a+b)/2} [I0(sqrt(ab)) - (1-pd)e^{-(a+b)/2}]

    conditioned on the bit configuration; averaging over uniform random
    bits gives gain (Q_C + Q_E)/2. Misalignment flips convert correct
    coincidences to errors and vice versa.
    """
    if s_a < 0.0 or s_b < 0.0:
        raise ValueError("intensities must be non-negative")
    a = model.efficiency_a * s_a
    b = model.efficiency_b * s_b
    pd = model.dark_count_rate
    qd = 1.0 - pd
    damp = math.exp(-0.5 * (a + b))
    q_correct = 2.0 * qd * qd * damp * (1.0 - qd * math.exp(-0.5 * a)) * (
        1.0 - qd * math.exp(-0.5 * b)
    )
    q_accidental = 2.0 * pd * qd * qd * damp * (bessel_i0(math.sqrt(a * b)) - qd * damp)
    gain = 0.5 * (q_correct + q_accidental)
    if gain <= 0.0:
        return IntensityPairObservables(0.0, 0.0)
    m = _net_flip(model.misalignment_z)
    err_gain = 0.5 * (m * q_correct + (1.0 - m) * q_accidental)
    return IntensityPairObservables(gain, min(1.0, err_gain / gain))


def x_basis_observables(model: SystemModel, mu_a: float, mu_b: float) -> IntensityPairObservables:
    """Gain and QBER of a test-basis pulse pair (vacuum intensities allowed).

    Both pulses occupy both time bins; interference of the arriving
    fields (intensities a, b) yields, after averaging the random global
    phase, the same-bit and different-bit anti-symmetric coincidence
    terms

        T_same = 1 - 2 y I0(x) + y^2
        T_diff = I0(2x) - 2 y I0(x) + y^2

    with x = sqrt(ab)/2 and y = (1-pd) e^{-(a+b)/4}. Same-bit events
    are errors for the anti-symmetric outcome; accidental events carry
    background error 1/2, which the T split already encodes.
    """
    if mu_a < 0.0 or mu_b < 0.0:
        raise ValueError("intensities must be non-negative")
    a = model.efficiency_a * mu_a
    b = model.efficiency_b * mu_b
    pd = model.dark_count_rate
    x = 0.5 * math.sqrt(a * b)
    y = (1.0 - pd) * math.exp(-0.25 * (a + b))
    i0x = bessel_i0(x)
    t_same = 1.0 - 2.0 * y * i0x + y * y
    t_diff = bessel_i0(2.0 * x) - 2.0 * y * i0x + y * y
    t_same = max(t_same, 0.0)
    t_diff = max(t_diff, 0.0)
    gain = y * y * (t_same + t_diff)
    if gain <= 0.0:
        return IntensityPairObservables(0.0, 0.0)
    m = _net_flip(model.misalignment_x)
    err_gain = y * y * ((1.0 - m) * t_same + m * t_diff)
    return IntensityPairObservables(gain, min(1.0, err_gain / gain))


def _single_photon_terms(model: SystemModel) -> tuple[float, float, float]:
    """Anti-symmetric-outcome probabilities for a single-photon pair.

    Returns (p_diff, p_equal_z, p_equal_x): the outcome probability when
    the two physical bits differ (basis-independent) and when they are
    equal, in each basis. Equal-bit events only succeed with dark-count
    assistance; in the test basis a bunched pair spreads over both time
    bins half the time, which blocks the required silent windows.
    """
    ea = model.efficiency_a
    eb = model.efficiency_b
    pd = model.dark_count_rate
    qd2 = (1.0 - pd) ** 2
    one_arm = pd * qd2 * (ea * (1.0 - eb) + (1.0 - ea) * eb)
    no_arm = 2.0 * pd * pd * qd2 * (1.0 - ea) * (1.0 - eb)
    p_diff = 0.5 * ea * eb * qd2 + one_arm + no_arm
    p_equal_z = ea * eb * pd * qd2 + one_arm + no_arm
    p_equal_x = 0.5 * ea * eb * pd * qd2 + one_arm + no_arm
    return p_diff, p_equal_z, p_equal_x


def single_photon_truth(model: SystemModel) -> SinglePhotonTruth:
    """Exact single-photon-pair yield and test-basis phase error rate.

    These are the (1,1) Fock components of the closed-form model and
    serve as the ground truth that decoy-state estimates must bracket.
    The yield is quoted for the key basis; the test-basis yield differs
    only at order dark_count_rate.
    """
    p_diff, p_equal_z, p_equal_x = _single_photon_terms(model)
    yield_z = 0.5 * (p_diff + p_equal_z)
    m_x = _net_flip(model.misalignment_x)
    denom_x = p_diff + p_equal_x
    if denom_x <= 0.0:
        return SinglePhotonTruth(yield_z, 0.0)
    e11 = ((1.0 - m_x) * p_equal_x + m_x * p_diff) / denom_x
    return SinglePhotonTruth(yield_z, min(1.0, e11))


def detector_intensities(cfg: InterferenceConfig) -> tuple[float, float]:
    """Mean intensities at the two beam-splitter outputs.

    D_C = (g_a^2 + g_b^2 - 2 g_a g_b cos(phase)) / 2 and D_D its
    constructive counterpart; the two always sum to g_a^2 + g_b^2.
    """
    cross = 2.0 * cfg.gamma_a * cfg.gamma_b * math.cos(cfg.phase)
    total = cfg.gamma_a**2 + cfg.gamma_b**2
    d_c = 0.5 * (total - cross)
    d_d = 0.5 * (total + cross)
    return d_c, d_d


def visibility_single_photon(k: float) -> float:
    """Single-photon interference visibility 2/(k + 1/k) for intensity ratio k."""
    if k <= 0.0:
        raise ValueError("intensity ratio must be positive")
    return 2.0 / (k + 1.0 / k)


def visibility_two_photon(k: float) -> float:
    """Two-photon (coincidence) visibility 2/(2 + k^2 + 1/k^2); at most 1/2."""
    if k <= 0.0:
        raise ValueError("intensity ratio must be positive")
    return 2.0 / (2.0 + k * k + 1.0 / (k * k))
