"""Implementation-parameter optimization for asymmetric MDI-QKD.

Twelve parameters per link (three intensities and three send
probabilities per party) are searched by coordinate descent. The
intensities are converted to polar coordinates

    r_s = sqrt(s_a^2 + s_b^2),  theta_s = arctan(s_a / s_b)

(and likewise for the decoys, which share one angle theta_mu_nu so the
decoy ratios of the two parties stay locked, mu_a/nu_a = mu_b/nu_b).
The rate surface is smooth along these 11 coordinates, whereas it is
not along the raw intensities, which is what makes a simple local
search reliable here.

Three strategies are supported: the full asymmetric search
(seven_intensity), a symmetric-parameter search (four_intensity), and
the symmetric search after padding the shorter fiber to equalize the
losses (four_intensity_plus_fiber).
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

from .decoy import (
    DecoySettings,
    DecoyBounds,
    FiniteKeyConfig,
    ObservedStatistics,
    PairCounts,
    X_PAIR_LABELS,
    estimate_bounds,
)
from .keyrate import RateInputs, rate_per_second, secret_key_rate
from .physics import (
    IntensityPairObservables,
    SystemModel,
    x_basis_observables,
    z_basis_observables,
)

__all__ = [
    "ParameterVector",
    "PolarVector",
    "Strategy",
    "OptimizationResult",
    "to_polar",
    "from_polar",
    "evaluate",
    "coordinate_descent",
    "fiber_padding",
]

RATIO_LOCK_TOL = 1e-9

# search bounds for the polar coordinates
_THETA_LO, _THETA_HI = 0.01, math.pi / 2 - 0.01
_RS_LO, _RS_HI = 1e-4, math.sqrt(2.0)
_RMU_LO, _RMU_HI = 1e-4, math.sqrt(2.0)
_RNU_LO = 1e-5
_P_LO = 1e-4
_SIMPLEX_CAP = 1.0 - 1e-4

_SWEEP_TOL = 1e-4
_MAX_SWEEPS = 50
_LINE_TOL = 1e-4
_N_RESTARTS = 3


class Strategy(str, Enum):
    SEVEN_INTENSITY = "seven_intensity"
    FOUR_INTENSITY = "four_intensity"
    FOUR_INTENSITY_PLUS_FIBER = "four_intensity_plus_fiber"


@dataclass(frozen=True)
class ParameterVector:
    """The twelve implementation parameters of one link."""

    s_a: float
    mu_a: float
    nu_a: float
    p_sa: float
    p_mua: float
    p_nua: float
    s_b: float
    mu_b: float
    nu_b: float
    p_sb: float
    p_mub: float
    p_nub: float

    def side_a(self) -> Tuple[float, float, float]:
        return self.s_a, self.mu_a, self.nu_a

    def side_b(self) -> Tuple[float, float, float]:
        return self.s_b, self.mu_b, self.nu_b

    def vacuum_prob_a(self) -> float:
        return 1.0 - self.p_sa - self.p_mua - self.p_nua

    def vacuum_prob_b(self) -> float:
        return 1.0 - self.p_sb - self.p_mub - self.p_nub

    def is_feasible(self) -> bool:
        """Ordering s > mu > nu > 0 per side, probability simplex per side."""
        for s, mu, nu in (self.side_a(), self.side_b()):
            if not s > mu > nu > 0.0:
                return False
        for probs, vac in (
            ((self.p_sa, self.p_mua, self.p_nua), self.vacuum_prob_a()),
            ((self.p_sb, self.p_mub, self.p_nub), self.vacuum_prob_b()),
        ):
            if min(probs) < 0.0 or vac < 0.0:
                return False
        return True


@dataclass(frozen=True)
class PolarVector:
    """Polar form of the 11 search coordinates plus shared probabilities."""

    r_s: float
    theta_s: float
    r_mu: float
    r_nu: float
    theta_mu_nu: float
    p_sa: float
    p_mua: float
    p_nua: float
    p_sb: float
    p_mub: float
    p_nub: float


@dataclass(frozen=True)
class OptimizationResult:
    params: ParameterVector
    rate_per_pulse: float
    rate_per_second: float
    bounds: DecoyBounds
    observables: IntensityPairObservables
    iterations: int
    wall_time_s: float


def to_polar(p: ParameterVector) -> PolarVector:
    """Convert intensities to polar coordinates; probabilities pass through.

    Requires the decoy ratio lock nu_a/mu_a == nu_b/mu_b (within 1e-9),
    without which the shared decoy angle does not exist.
    """
    if min(p.mu_a, p.mu_b, p.nu_a, p.nu_b, p.s_a, p.s_b) <= 0.0:
        raise ValueError("intensities must be positive")
    if abs(p.nu_a / p.mu_a - p.nu_b / p.mu_b) > RATIO_LOCK_TOL:
        raise ValueError("decoy ratio lock violated: nu_a/mu_a != nu_b/mu_b")
    return PolarVector(
        r_s=math.hypot(p.s_a, p.s_b),
        theta_s=math.atan2(p.s_a, p.s_b),
        r_mu=math.hypot(p.mu_a, p.mu_b),
        r_nu=math.hypot(p.nu_a, p.nu_b),
        theta_mu_nu=math.atan2(p.mu_a, p.mu_b),
        p_sa=p.p_sa,
        p_mua=p.p_mua,
        p_nua=p.p_nua,
        p_sb=p.p_sb,
        p_mub=p.p_mub,
        p_nub=p.p_nub,
    )


def from_polar(q: PolarVector) -> ParameterVector:
    """Inverse conversion; satisfies the decoy ratio lock by construction."""
    sin_s, cos_s = math.sin(q.theta_s), math.cos(q.theta_s)
    sin_d, cos_d = math.sin(q.theta_mu_nu), math.cos(q.theta_mu_nu)
    return ParameterVector(
        s_a=q.r_s * sin_s,
        mu_a=q.r_mu * sin_d,
        nu_a=q.r_nu * sin_d,
        p_sa=q.p_sa,
        p_mua=q.p_mua,
        p_nua=q.p_nua,
        s_b=q.r_s * cos_s,
        mu_b=q.r_mu * cos_d,
        nu_b=q.r_nu * cos_d,
        p_sb=q.p_sb,
        p_mub=q.p_mub,
        p_nub=q.p_nub,
    )


def fiber_padding(model: SystemModel) -> SystemModel:
    """Pad the lower-loss arm so both arms carry equal attenuation."""
    longest = max(model.length_a_km, model.length_b_km)
    return replace(model, length_a_km=longest, length_b_km=longest)


def _statistics(model: SystemModel, p: ParameterVector) -> Tuple[
    ObservedStatistics, IntensityPairObservables
]:
    """Model-generated tallies for all ten pairs at the current parameters."""
    intensity_a = {"m": p.mu_a, "v": p.nu_a, "o": 0.0}
    intensity_b = {"m": p.mu_b, "v": p.nu_b, "o": 0.0}
    prob_a = {"s": p.p_sa, "m": p.p_mua, "v": p.p_nua, "o": p.vacuum_prob_a()}
    prob_b = {"s": p.p_sb, "m": p.p_mub, "v": p.p_nub, "o": p.vacuum_prob_b()}
    if min(prob_a.values()) < 0.0 or min(prob_b.values()) < 0.0:
        raise ValueError("send probabilities violate the per-side simplex")
    n = model.pulse_count
    pairs = {}
    z_obs = z_basis_observables(model, p.s_a, p.s_b)
    trials = n * prob_a["s"] * prob_b["s"]
    pairs["ss"] = PairCounts(
        z_obs.gain * trials, z_obs.gain * z_obs.qber * trials, trials
    )
    for label in X_PAIR_LABELS:
        obs = x_basis_observables(model, intensity_a[label[0]], intensity_b[label[1]])
        trials = n * prob_a[label[0]] * prob_b[label[1]]
        pairs[label] = PairCounts(
            obs.gain * trials, obs.gain * obs.qber * trials, trials
        )
    return ObservedStatistics(pairs), z_obs


def evaluate(
    model: SystemModel, p: ParameterVector, fk: FiniteKeyConfig
) -> OptimizationResult:
    """Full pipeline at fixed parameters: observables, decoy bounds, rate.

    Statistics are the model expectations; in finite mode the decoy
    bounds widen them by the concentration intervals implied by the
    pulse count and per-pair send probabilities. Deterministic.
    """
    start = time.perf_counter()
    stats, z_obs = _statistics(model, p)
    settings = DecoySettings(p.mu_a, p.nu_a, p.mu_b, p.nu_b)
    bounds = estimate_bounds(settings, stats, fk)
    rate = secret_key_rate(
        RateInputs(
            s_a=p.s_a,
            s_b=p.s_b,
            p_sa=p.p_sa,
            p_sb=p.p_sb,
            y11=bounds.y11_lower,
            e11=bounds.e11_upper,
            q_ss=z_obs.gain,
            e_ss=z_obs.qber,
            f=model.error_correction_efficiency,
        )
    )
    return OptimizationResult(
        params=p,
        rate_per_pulse=rate,
        rate_per_second=rate_per_second(rate, model.clock_rate_hz),
        bounds=bounds,
        observables=z_obs,
        iterations=0,
        wall_time_s=time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# coordinate descent machinery

# coordinate order within the search vector
_COORDS = (
    "r_s",
    "theta_s",
    "r_mu",
    "r_nu",
    "theta_mu_nu",
    "p_sa",
    "p_mua",
    "p_nua",
    "p_sb",
    "p_mub",
    "p_nub",
)
_IDX = {name: i for i, name in enumerate(_COORDS)}

_SYMMETRIC_FREE = ("r_s", "r_mu", "r_nu", "p_sa", "p_mua", "p_nua")


def _vector_to_params(vec: Sequence[float], symmetric: bool) -> ParameterVector:
    v = list(vec)
    if symmetric:
        v[_IDX["theta_s"]] = math.pi / 4
        v[_IDX["theta_mu_nu"]] = math.pi / 4
        v[_IDX["p_sb"]] = v[_IDX["p_sa"]]
        v[_IDX["p_mub"]] = v[_IDX["p_mua"]]
        v[_IDX["p_nub"]] = v[_IDX["p_nua"]]
    return from_polar(PolarVector(*v))


def _objective(
    model: SystemModel, fk: FiniteKeyConfig, symmetric: bool
) -> Callable[[Sequence[float]], float]:
    def rate_of(vec: Sequence[float]) -> float:
        params = _vector_to_params(vec, symmetric)
        if not params.is_feasible():
            return 0.0
        if min(params.vacuum_prob_a(), params.vacuum_prob_b()) < 1.0 - _SIMPLEX_CAP:
            return 0.0
        return evaluate(model, params, fk).rate_per_pulse

    return rate_of


def _coordinate_bounds(vec: Sequence[float], name: str) -> Tuple[float, float]:
    """Search interval for one coordinate given the current point."""
    if name == "r_s":
        return _RS_LO, _RS_HI
    if name == "r_mu":
        return max(_RMU_LO, vec[_IDX["r_nu"]] * (1.0 + 1e-6)), _RMU_HI
    if name == "r_nu":
        return _RNU_LO, vec[_IDX["r_mu"]] * (1.0 - 1e-6)
    if name in ("theta_s", "theta_mu_nu"):
        return _THETA_LO, _THETA_HI
    # probability coordinate: cap by the per-side simplex
    side = name[-1]
    others = [f"p_s{side}", f"p_mu{side}", f"p_nu{side}"]
    others.remove(name)
    cap = _SIMPLEX_CAP - sum(vec[_IDX[o]] for o in others)
    return _P_LO, max(_P_LO, cap)


def _golden_max(
    f: Callable[[float], float], lo: float, hi: float, rel_tol: float
) -> Tuple[float, float]:
    """Golden-section maximization on [lo, hi]; returns (x, f(x))."""
    if hi <= lo:
        return lo, f(lo)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    tol = rel_tol * (hi - lo)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
            if fc > best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
            if fd > best_f:
                best_x, best_f = d, fd
    return best_x, best_f


def _descend(
    rate_of: Callable[[Sequence[float]], float],
    start: List[float],
    free: Sequence[str],
) -> Tuple[List[float], float, int]:
    """Sweep the free coordinates until the rate stops improving."""
    vec = list(start)
    best = rate_of(vec)
    sweeps = 0
    for _ in range(_MAX_SWEEPS):
        sweeps += 1
        previous = best
        for name in free:
            idx = _IDX[name]
            lo, hi = _coordinate_bounds(vec, name)
            if hi <= lo:
                continue
            incumbent = vec[idx]

            def line(x, idx=idx):
                vec[idx] = x
                return rate_of(vec)

            x, fx = _golden_max(line, lo, hi, _LINE_TOL)
            if fx > best:
                vec[idx] = x
                best = fx
            else:
                vec[idx] = incumbent
        if best <= 0.0:
            break
        if best - previous <= _SWEEP_TOL * best:
            break
    return vec, best, sweeps


_DEFAULT_START = {
    "r_s": 0.5,
    "theta_s": math.pi / 4,
    "r_mu": 0.2,
    "r_nu": 0.04,
    "theta_mu_nu": math.pi / 4,
    "p_sa": 0.5,
    "p_mua": 0.1,
    "p_nua": 0.2,
    "p_sb": 0.5,
    "p_mub": 0.1,
    "p_nub": 0.2,
}


def _random_start(rng: random.Random) -> List[float]:
    p_s = rng.uniform(0.2, 0.7)
    p_mu = rng.uniform(0.02, 0.15)
    p_nu = rng.uniform(0.05, min(0.4, _SIMPLEX_CAP - p_s - p_mu - 0.01))
    r_mu = rng.uniform(0.05, 0.5)
    vals = {
        "r_s": rng.uniform(0.1, 1.0),
        "theta_s": rng.uniform(0.15, math.pi / 2 - 0.15),
        "r_mu": r_mu,
        "r_nu": r_mu * rng.uniform(0.1, 0.5),
        "theta_mu_nu": rng.uniform(0.15, math.pi / 2 - 0.15),
        "p_sa": p_s,
        "p_mua": p_mu,
        "p_nua": p_nu,
        "p_sb": p_s,
        "p_mub": p_mu,
        "p_nub": p_nu,
    }
    return [vals[name] for name in _COORDS]


def coordinate_descent(
    model: SystemModel,
    strategy: Strategy,
    fk: FiniteKeyConfig,
    seed: int = 0,
    restarts: int = _N_RESTARTS,
) -> OptimizationResult:
    """Optimize the implementation parameters for one strategy.

    Runs coordinate descent from a fixed mid-range start plus seeded
    random restarts and keeps the best result. Deterministic for a
    given seed. If the rate is zero everywhere visited, the best-found
    parameters are returned with rate 0.
    """
    strategy = Strategy(strategy)
    search_model = model
    if strategy is Strategy.FOUR_INTENSITY_PLUS_FIBER:
        search_model = fiber_padding(model)
    symmetric = strategy is not Strategy.SEVEN_INTENSITY
    free = _SYMMETRIC_FREE if symmetric else _COORDS

    start_time = time.perf_counter()
    rate_of = _objective(search_model, fk, symmetric)
    rng = random.Random(seed)
    default_start = [_DEFAULT_START[name] for name in _COORDS]
    starts = [default_start]
    starts += [_random_start(rng) for _ in range(restarts)]

    best_vec: Optional[List[float]] = None
    best_rate = -1.0
    total_sweeps = 0
    if not symmetric:
        # converge within the symmetric subspace first and use that point
        # as an extra start, so the full search never loses to the
        # symmetric strategy on the same channel
        sym_rate_of = _objective(search_model, fk, True)
        sym_vec, _, sweeps = _descend(sym_rate_of, default_start, _SYMMETRIC_FREE)
        total_sweeps += sweeps
        staged = list(sym_vec)
        staged[_IDX["theta_s"]] = math.pi / 4
        staged[_IDX["theta_mu_nu"]] = math.pi / 4
        for name in ("p_sa", "p_mua", "p_nua"):
            staged[_IDX[name.replace("a", "b")]] = staged[_IDX[name]]
        starts.append(staged)
    for start in starts:
        vec, rate, sweeps = _descend(rate_of, start, free)
        total_sweeps += sweeps
        if rate > best_rate:
            best_rate = rate
            best_vec = vec

    params = _vector_to_params(best_vec, symmetric)
    result = evaluate(search_model, params, fk)
    return OptimizationResult(
        params=result.params,
        rate_per_pulse=result.rate_per_pulse,
        rate_per_second=result.rate_per_second,
        bounds=result.bounds,
        observables=result.observables,
        iterations=total_sweeps,
        wall_time_s=time.perf_counter() - start_time,
    )
