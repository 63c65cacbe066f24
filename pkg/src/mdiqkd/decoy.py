"""Decoy-state bounds on the single-photon-pair yield and phase error.

Each party sends, besides the key-basis signal, two test-basis decoy
intensities (mu > nu > 0) and vacuum. The ten observable intensity
pairs (key signal pair plus nine test pairs) feed analytical two-decoy
bounds:

  * a lower bound on the single-photon-pair yield Y11 from the mu-mu and
    nu-nu pairs with their vacuum rows/columns subtracted, and
  * an upper bound on the single-photon phase error e11 from the nu-nu
    error gain with vacuum contributions removed, divided by the
    single-photon weight.

Writing G(a,b) = e^{a+b} Q(a,b) and H(a,b) for G with the vacuum shells
removed, H is a series over photon pairs (n>=1, m>=1). With the decoy
ratios lam_a = mu_a/nu_a, lam_b = mu_b/nu_b and c = lam_a*lam_b*min(lam),

    c*H(nu) - H(mu) <= (min(lam) - 1) * mu_a*mu_b * Y11

because every coefficient with n+m >= 3 is non-positive, which yields
the Y11 lower bound. When the two ratios are equal (the optimizer's
ratio lock) this reduces to the familiar lam^3 combination; unequal
ratios from rounded experimental settings are handled by the same
inequality.

Finite-statistics mode widens every consulted observable with a
two-sided count-scale concentration interval before the bounds are
formed, with a uniform share of the total failure probability per
observable quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

__all__ = [
    "X_PAIR_LABELS",
    "ALL_PAIR_LABELS",
    "DecoySettings",
    "PairCounts",
    "ObservedStatistics",
    "FiniteKeyConfig",
    "DecoyBounds",
    "fluctuation_interval",
    "estimate_bounds",
    "read_count_table",
    "ingest_count_table",
]

# pair labels: s = signal, m = bright decoy (mu), v = weak decoy (nu), o = vacuum
X_PAIR_LABELS = ("mm", "mv", "vm", "vv", "mo", "om", "vo", "ov", "oo")
ALL_PAIR_LABELS = ("ss",) + X_PAIR_LABELS

# ten pairs, two tallies each (totals and errors)
_BUDGET_SPLITS = 20


@dataclass(frozen=True)
class DecoySettings:
    """Decoy intensities for both parties; vacuum is exactly zero."""

    mu_a: float
    nu_a: float
    mu_b: float
    nu_b: float
    omega: float = 0.0

    def __post_init__(self):
        if self.omega != 0.0:
            raise ValueError("vacuum intensity must be exactly 0")
        if not self.mu_a > self.nu_a > 0.0:
            raise ValueError("need mu_a > nu_a > 0")
        if not self.mu_b > self.nu_b > 0.0:
            raise ValueError("need mu_b > nu_b > 0")


@dataclass(frozen=True)
class PairCounts:
    """Tally for one intensity pair. Counts may be expected values (floats)."""

    total_count: float
    error_count: float
    trials: float

    def __post_init__(self):
        if not 0.0 <= self.error_count <= self.total_count:
            raise ValueError("need 0 <= error_count <= total_count")
        if self.total_count > self.trials:
            raise ValueError("total_count cannot exceed trials")


@dataclass(frozen=True)
class ObservedStatistics:
    """Per-pair tallies for the signal pair and all nine test pairs."""

    pairs: Mapping[str, PairCounts]

    def __post_init__(self):
        missing = [lab for lab in ALL_PAIR_LABELS if lab not in self.pairs]
        if missing:
            raise ValueError(f"missing intensity pairs: {missing}")

    def gain(self, label: str) -> float:
        rec = self.pairs[label]
        return rec.total_count / rec.trials if rec.trials > 0 else 0.0

    def error_gain(self, label: str) -> float:
        rec = self.pairs[label]
        return rec.error_count / rec.trials if rec.trials > 0 else 0.0


@dataclass(frozen=True)
class FiniteKeyConfig:
    """Statistical treatment: total failure budget and mode."""

    total_failure_prob: float
    mode: str = "finite"

    def __post_init__(self):
        if not 0.0 < self.total_failure_prob < 1.0:
            raise ValueError("total_failure_prob must lie in (0, 1)")
        if self.mode not in ("finite", "asymptotic"):
            raise ValueError("mode must be 'finite' or 'asymptotic'")


@dataclass(frozen=True)
class DecoyBounds:
    """Single-photon bounds; degraded marks conservative fallback values."""

    y11_lower: float
    e11_upper: float
    degraded: bool = False

    def __post_init__(self):
        if not 0.0 <= self.y11_lower <= 1.0:
            raise ValueError("y11_lower must lie in [0, 1]")
        if not 0.0 <= self.e11_upper <= 1.0:
            raise ValueError("e11_upper must lie in [0, 1]")


def fluctuation_interval(
    count: float,
    trials: float,
    failure_prob: float,
    mode: str = "finite",
    method: str = "hoeffding",
) -> Tuple[float, float]:
    """Two-sided confidence interval for an observed frequency.

    Returns (low, high) containing the true probability except with
    probability at most failure_prob, clamped to [0, 1]. Asymptotic
    mode passes the point estimate through. Methods:

      * "hoeffding": deviation sqrt(ln(2/eps) / (2*trials)) on the rate;
        simple and distribution-free, but very loose for rare events.
      * "chernoff": count-scale bounds k - sqrt(2*beta*k) and
        k + beta + sqrt(2*beta*k + beta**2) with beta = ln(2/eps),
        which stay informative when counts are small relative to trials.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0.0 <= count <= trials:
        raise ValueError("need 0 <= count <= trials")
    if not 0.0 < failure_prob < 1.0:
        raise ValueError("failure_prob must lie in (0, 1)")
    q = count / trials
    if mode == "asymptotic":
        return q, q
    if mode != "finite":
        raise ValueError("mode must be 'finite' or 'asymptotic'")
    if method == "hoeffding":
        dev = math.sqrt(math.log(2.0 / failure_prob) / (2.0 * trials))
        return max(0.0, q - dev), min(1.0, q + dev)
    if method == "chernoff":
        beta = math.log(2.0 / failure_prob)
        low = max(0.0, count - math.sqrt(2.0 * beta * count))
        high = count + beta + math.sqrt(2.0 * beta * count + beta * beta)
        return low / trials, min(1.0, high / trials)
    raise ValueError("method must be 'hoeffding' or 'chernoff'")


def _vacuum_reduced(
    g_ab: float, g_ao: float, g_ob: float, g_oo: float, a: float, b: float
) -> float:
    """H(a,b): exponential-weighted gain with vacuum shells removed."""
    return (
        math.exp(a + b) * g_ab
        - math.exp(a) * g_ao
        - math.exp(b) * g_ob
        + g_oo
    )


def estimate_bounds(
    settings: DecoySettings, stats: ObservedStatistics, fk: FiniteKeyConfig
) -> DecoyBounds:
    """Lower-bound Y11 and upper-bound e11 from the nine test pairs.

    Infeasible statistics degrade to the conservative pair (0, 1) with
    the degraded flag set instead of raising, so optimizer sweeps never
    abort on a hopeless parameter point.
    """
    lam_a = settings.mu_a / settings.nu_a
    lam_b = settings.mu_b / settings.nu_b
    lam_min = min(lam_a, lam_b)
    if lam_min <= 1.0:
        return DecoyBounds(0.0, 1.0, degraded=True)

    eps = fk.total_failure_prob / _BUDGET_SPLITS

    def gain_iv(label):
        rec = stats.pairs[label]
        return fluctuation_interval(
            rec.total_count, rec.trials, eps, mode=fk.mode, method="chernoff"
        )

    def err_iv(label):
        rec = stats.pairs[label]
        return fluctuation_interval(
            rec.error_count, rec.trials, eps, mode=fk.mode, method="chernoff"
        )

    q_vv, q_vo, q_ov, q_oo = gain_iv("vv"), gain_iv("vo"), gain_iv("ov"), gain_iv("oo")
    q_mm, q_mo, q_om = gain_iv("mm"), gain_iv("mo"), gain_iv("om")

    h_vv_low = _vacuum_reduced(
        q_vv[0], q_vo[1], q_ov[1], q_oo[0], settings.nu_a, settings.nu_b
    )
    h_mm_high = _vacuum_reduced(
        q_mm[1], q_mo[0], q_om[0], q_oo[1], settings.mu_a, settings.mu_b
    )

    c = lam_a * lam_b * lam_min
    denom = settings.mu_a * settings.mu_b * (lam_min - 1.0)
    y11 = (c * h_vv_low - h_mm_high) / denom

    degraded = False
    if y11 <= 0.0:
        y11 = 0.0
        degraded = True
    y11 = min(y11, 1.0)

    e_vv, e_vo, e_ov, e_oo = err_iv("vv"), err_iv("vo"), err_iv("ov"), err_iv("oo")
    numerator = _vacuum_reduced(
        e_vv[1], e_vo[0], e_ov[0], e_oo[1], settings.nu_a, settings.nu_b
    )
    if numerator <= 0.0:
        e11 = 0.0
    elif y11 <= 0.0:
        e11 = 1.0
    else:
        e11 = numerator / (settings.nu_a * settings.nu_b * y11)
        if e11 > 1.0:
            e11 = 1.0
            degraded = True
    return DecoyBounds(y11, e11, degraded)


def read_count_table(path) -> Dict[str, Tuple[int, int]]:
    """Parse a delimited count table: rows of `label total_count error_count`.

    Blank lines and lines starting with '#' are ignored.
    """
    records: Dict[str, Tuple[int, int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'label total error'")
            label, total_s, error_s = parts
            try:
                total, error = int(total_s), int(error_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: counts must be integers") from exc
            if label in records:
                raise ValueError(f"{path}:{lineno}: duplicate pair label {label!r}")
            records[label] = (total, error)
    if not records:
        raise ValueError(f"{path}: empty count table")
    return records


def ingest_count_table(
    records: Mapping[str, Tuple[float, float]],
    pulse_count: float,
    probabilities_a: Tuple[float, float, float],
    probabilities_b: Tuple[float, float, float],
) -> ObservedStatistics:
    """Convert raw per-pair counts into ObservedStatistics.

    probabilities_* are the per-side send probabilities (p_signal, p_mu,
    p_nu); the vacuum probability is the remainder. Trials per pair are
    N * p_alpha * p_beta, rounded to the nearest integer.
    """
    missing = [lab for lab in ALL_PAIR_LABELS if lab not in records]
    if missing:
        raise ValueError(f"count table is missing pairs: {missing}")
    if pulse_count < 1:
        raise ValueError("pulse_count must be >= 1")

    def side_probs(p):
        p_s, p_m, p_v = p
        if min(p_s, p_m, p_v) < 0.0:
            raise ValueError("send probabilities must be non-negative")
        p_o = 1.0 - p_s - p_m - p_v
        if p_o < -1e-12:
            raise ValueError("send probabilities exceed 1")
        return {"s": p_s, "m": p_m, "v": p_v, "o": max(p_o, 0.0)}

    pa = side_probs(probabilities_a)
    pb = side_probs(probabilities_b)
    pairs = {}
    for label in ALL_PAIR_LABELS:
        total, error = records[label]
        if error > total:
            raise ValueError(f"pair {label}: error_count exceeds total_count")
        trials = round(pulse_count * pa[label[0]] * pb[label[1]])
        if total > trials:
            raise ValueError(f"pair {label}: total_count exceeds trials")
        pairs[label] = PairCounts(float(total), float(error), float(trials))
    return ObservedStatistics(pairs)
