"""Secret-key-rate formulas for MDI-QKD and related protocols."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .physics import binary_entropy

__all__ = [
    "RateInputs",
    "QdsInputs",
    "TfQkdInputs",
    "QdsResult",
    "secret_key_rate",
    "rate_per_second",
    "qds_feasible",
    "tf_qkd_rate",
]


@dataclass(frozen=True)
class RateInputs:
    """Quantities entering the key-basis secret-key-rate formula."""

    s_a: float
    s_b: float
    p_sa: float
    p_sb: float
    y11: float
    e11: float
    q_ss: float
    e_ss: float
    f: float

    def __post_init__(self):
        if self.s_a <= 0.0 or self.s_b <= 0.0:
            raise ValueError("signal intensities must be positive")
        for name in ("p_sa", "p_sb", "y11", "e11", "q_ss", "e_ss"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.f < 1.0:
            raise ValueError("error-correction efficiency must be >= 1")


@dataclass(frozen=True)
class QdsInputs:
    """Count-rate bounds and error rates for the signature feasibility test."""

    q_z00: float
    q_z11: float
    e_x11: float
    e_z: float

    def __post_init__(self):
        for name in ("q_z00", "q_z11", "e_x11", "e_z"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class TfQkdInputs:
    """Inputs of the phase-sliced single-photon-interference rate formula."""

    m: int
    d: float
    q1: float
    e1: float
    q_mu: float
    e_mu: float
    f: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("phase slice count must be >= 1")
        if not 0.0 < self.d <= self.m:
            raise ValueError("post-selection factor must lie in (0, m]")
        for name in ("q1", "e1", "q_mu", "e_mu"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.f < 1.0:
            raise ValueError("error-correction efficiency must be >= 1")


class QdsResult(NamedTuple):
    feasible: bool
    margin: float


def _entropy_cost(e: float) -> float:
    # error rates beyond 1/2 carry no less cost than 1/2: privacy terms
    # vanish there and leakage saturates, keeping rates monotone in e
    return binary_entropy(min(e, 0.5))


def secret_key_rate(inputs: RateInputs) -> float:
    """Secret bits per pulse pair from the key basis.

    R = p_sa p_sb [ s_a s_b e^{-s_a-s_b} y11 (1 - h(e11)) - f q_ss h(e_ss) ],
    clamped at zero: the single-photon fraction of the signal pair
    earns privacy, while error correction leaks f h(e_ss) per sifted bit.
    A phase error rate of 1/2 or more yields no privacy at all.
    """
    single = (
        inputs.s_a
        * inputs.s_b
        * math.exp(-(inputs.s_a + inputs.s_b))
        * inputs.y11
        * (1.0 - _entropy_cost(inputs.e11))
    )
    leak = inputs.f * inputs.q_ss * _entropy_cost(inputs.e_ss)
    return max(0.0, inputs.p_sa * inputs.p_sb * (single - leak))


def rate_per_second(rate_per_pulse: float, clock_rate_hz: float) -> float:
    """Convert a per-pulse rate to bits per second."""
    if rate_per_pulse < 0.0:
        raise ValueError("rate must be non-negative")
    if clock_rate_hz <= 0.0:
        raise ValueError("clock rate must be positive")
    return rate_per_pulse * clock_rate_hz


def qds_feasible(inputs: QdsInputs) -> QdsResult:
    """Feasibility margin of measurement-device-independent signatures.

    The scheme admits a secure signature length if

        Q_Z00 + Q_Z11 [1 - h(e_X11)] - h(E_Z) > 0,

    the same structure as the key-rate formula without the
    error-correction inefficiency.
    """
    margin = (
        inputs.q_z00
        + inputs.q_z11 * (1.0 - _entropy_cost(inputs.e_x11))
        - _entropy_cost(inputs.e_z)
    )
    return QdsResult(margin > 0.0, margin)


def tf_qkd_rate(inputs: TfQkdInputs) -> float:
    """Phase-sliced twin-field rate (d/M)[Q1(1 - h(e1)) - f Q_mu h(E_mu)], clamped at 0."""
    bracket = inputs.q1 * (1.0 - _entropy_cost(inputs.e1)) - inputs.f * inputs.q_mu * _entropy_cost(
        inputs.e_mu
    )
    return max(0.0, (inputs.d / inputs.m) * bracket)
