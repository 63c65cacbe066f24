"""Command-line front end: optimize, scan, visibility, analyze.

Configuration is a flat key=value text file (see data/default.cfg for
the bundled reference values). All commands emit deterministic output
for a fixed config and seed; scan points may be evaluated across worker
processes, with rows written in sorted order regardless of completion
order.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .datasets import default_config_path
from .decoy import DecoySettings, FiniteKeyConfig, estimate_bounds, ingest_count_table, read_count_table
from .keyrate import RateInputs, rate_per_second, secret_key_rate
from .optimizer import OptimizationResult, ParameterVector, Strategy, coordinate_descent
from .physics import SystemModel, visibility_single_photon, visibility_two_photon

__all__ = ["RunConfig", "load_config", "main"]


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


CSV_COLUMNS = [
    "L_A_km", "L_B_km", "strategy",
    "s_a", "mu_a", "nu_a", "p_sa", "p_mua", "p_nua",
    "s_b", "mu_b", "nu_b", "p_sb", "p_mub", "p_nub",
    "y11_lower", "e11_upper", "q_ss", "e_ss",
    "rate_per_pulse", "rate_per_second", "iterations", "wall_time_ms",
    "config_hash",
]

_MODEL_KEYS = ("Y0", "eta_d", "e_d_Z", "e_d_X", "alpha", "f", "epsilon", "N", "clock")


@dataclass
class RunConfig:
    """Parsed run configuration: model fields, geometry, strategies, mode."""

    model_values: Dict[str, float]
    length_a_km: float
    lb_values: List[float]
    strategies: List[Strategy]
    mode: str
    seed: int
    workers: int = 1
    out_path: Optional[str] = None
    raw_items: List[Tuple[str, str]] = field(default_factory=list)

    def model(self, length_a_km=None, length_b_km=None) -> SystemModel:
        v = self.model_values
        return SystemModel(
            dark_count_rate=v["Y0"],
            detector_efficiency=v["eta_d"],
            misalignment_z=v["e_d_Z"],
            misalignment_x=v["e_d_X"],
            fiber_loss_db_per_km=v["alpha"],
            error_correction_efficiency=v["f"],
            security_parameter=v["epsilon"],
            pulse_count=v["N"],
            length_a_km=self.length_a_km if length_a_km is None else length_a_km,
            length_b_km=self.lb_values[0] if length_b_km is None else length_b_km,
            clock_rate_hz=v["clock"],
        )

    def finite_key(self) -> FiniteKeyConfig:
        return FiniteKeyConfig(self.model_values["epsilon"], self.mode)

    def config_hash(self) -> str:
        canon = "\n".join(
            f"{k}={v}" for k, v in sorted(self.raw_items)
        ) + f"\nmode={self.mode}\nseed={self.seed}"
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _parse_kv_file(path) -> Dict[str, str]:
    items: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                if key in items:
                    raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
                items[key] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return items


def load_config(path=None) -> RunConfig:
    """Load a run configuration; omitted keys fall back to the bundled defaults."""
    defaults = _parse_kv_file(default_config_path())
    items = dict(defaults)
    if path is not None:
        items.update(_parse_kv_file(path))

    def get_float(key):
        try:
            return float(items[key])
        except KeyError:
            raise ConfigError(f"missing config key {key!r}")
        except ValueError:
            raise ConfigError(f"config key {key!r} is not a number: {items[key]!r}")

    model_values = {k: get_float(k) for k in _MODEL_KEYS}
    length_a = get_float("L_A")

    if "L_B_start" in items or "L_B_stop" in items or "L_B_step" in items:
        start, stop, step = (get_float(k) for k in ("L_B_start", "L_B_stop", "L_B_step"))
        if step <= 0:
            raise ConfigError("L_B_step must be positive")
        if stop < start:
            raise ConfigError("L_B_stop must be >= L_B_start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        lb_values = [start + i * step for i in range(count)]
    else:
        lb_values = [get_float("L_B")]
    if not lb_values:
        raise ConfigError("empty L_B range")

    strategies_raw = [s.strip() for s in items.get("strategies", "").split(",") if s.strip()]
    if not strategies_raw:
        raise ConfigError("at least one strategy is required")
    try:
        strategies = [Strategy(s) for s in strategies_raw]
    except ValueError:
        valid = ", ".join(s.value for s in Strategy)
        raise ConfigError(f"unknown strategy in {strategies_raw}; valid: {valid}")

    mode = items.get("mode", "finite")
    if mode not in ("finite", "asymptotic"):
        raise ConfigError("mode must be 'finite' or 'asymptotic'")
    try:
        seed = int(float(items.get("seed", "0")))
    except ValueError:
        raise ConfigError("seed must be an integer")

    try:
        cfg = RunConfig(
            model_values=model_values,
            length_a_km=length_a,
            lb_values=lb_values,
            strategies=strategies,
            mode=mode,
            seed=seed,
            raw_items=sorted(items.items()),
        )
        cfg.model()  # validate model field ranges early
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def _csv_row(cfg: RunConfig, lb: float, strategy: Strategy, res: OptimizationResult) -> List[str]:
    p = res.params
    values = [
        cfg.length_a_km, lb, strategy.value,
        p.s_a, p.mu_a, p.nu_a, p.p_sa, p.p_mua, p.p_nua,
        p.s_b, p.mu_b, p.nu_b, p.p_sb, p.p_mub, p.p_nub,
        res.bounds.y11_lower, res.bounds.e11_upper,
        res.observables.gain, res.observables.qber,
        res.rate_per_pulse, res.rate_per_second,
        res.iterations,
        0,  # wall-clock is non-reproducible; kept at 0 so output is bit-stable
        cfg.config_hash(),
    ]
    return [_fmt(v) for v in values]


def _write_csv(path, rows: Sequence[Sequence[str]]):
    text = ",".join(CSV_COLUMNS) + "\n" + "".join(",".join(r) + "\n" for r in rows)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _print_result_block(strategy: Strategy, res: OptimizationResult):
    p = res.params
    print(f"strategy: {strategy.value}")
    rows = [
        ("s_a", p.s_a), ("s_b", p.s_b),
        ("mu_a", p.mu_a), ("mu_b", p.mu_b),
        ("nu_a", p.nu_a), ("nu_b", p.nu_b),
        ("p_sa", p.p_sa), ("p_sb", p.p_sb),
        ("p_mua", p.p_mua), ("p_mub", p.p_mub),
        ("p_nua", p.p_nua), ("p_nub", p.p_nub),
        ("y11_lower", res.bounds.y11_lower),
        ("e11_upper", res.bounds.e11_upper),
        ("q_ss", res.observables.gain),
        ("e_ss", res.observables.qber),
        ("rate_per_pulse", res.rate_per_pulse),
        ("rate_per_second", res.rate_per_second),
    ]
    for name, value in rows:
        print(f"  {name:<16} {_fmt(value)}")
    print(f"  sweeps           {res.iterations}")
    print(f"  wall_time_s      {res.wall_time_s:.3f}")


def _scan_point(args):
    model_values, length_a, lb, strategy_value, epsilon, mode, seed = args
    cfg_model = SystemModel(
        dark_count_rate=model_values["Y0"],
        detector_efficiency=model_values["eta_d"],
        misalignment_z=model_values["e_d_Z"],
        misalignment_x=model_values["e_d_X"],
        fiber_loss_db_per_km=model_values["alpha"],
        error_correction_efficiency=model_values["f"],
        security_parameter=model_values["epsilon"],
        pulse_count=model_values["N"],
        length_a_km=length_a,
        length_b_km=lb,
        clock_rate_hz=model_values["clock"],
    )
    fk = FiniteKeyConfig(epsilon, mode)
    res = coordinate_descent(cfg_model, Strategy(strategy_value), fk, seed=seed)
    return lb, strategy_value, res


def cmd_optimize(cfg: RunConfig) -> int:
    if len(cfg.lb_values) != 1:
        raise ConfigError("optimize expects a single L_B (use scan for ranges)")
    lb = cfg.lb_values[0]
    model = cfg.model(length_b_km=lb)
    fk = cfg.finite_key()
    rows = []
    for strategy in cfg.strategies:
        res = coordinate_descent(model, strategy, fk, seed=cfg.seed)
        _print_result_block(strategy, res)
        rows.append(_csv_row(cfg, lb, strategy, res))
    if cfg.out_path is not None:
        _write_csv(cfg.out_path, rows)
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    tasks = [
        (cfg.model_values, cfg.length_a_km, lb, strategy.value,
         cfg.model_values["epsilon"], cfg.mode, cfg.seed)
        for lb in cfg.lb_values
        for strategy in cfg.strategies
    ]
    if cfg.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_scan_point, tasks))
    else:
        results = [_scan_point(t) for t in tasks]
    # deterministic row order regardless of completion order
    order = {s.value: i for i, s in enumerate(cfg.strategies)}
    results.sort(key=lambda r: (r[0], order[r[1]]))
    rows = [_csv_row(cfg, lb, Strategy(sv), res) for lb, sv, res in results]
    _write_csv(cfg.out_path, rows)
    return 0


def cmd_visibility(cfg: RunConfig, k_min: float, k_max: float, points: int) -> int:
    if k_min <= 0 or k_max <= 0:
        raise ConfigError("intensity ratios must be positive")
    if k_max < k_min:
        raise ConfigError("k-max must be >= k-min")
    if points < 1:
        raise ConfigError("points must be >= 1")
    if points == 1:
        ks = [k_min]
    else:
        step = (math.log(k_max) - math.log(k_min)) / (points - 1)
        ks = [math.exp(math.log(k_min) + i * step) for i in range(points)]
    header = "k,v1,v2\n"
    lines = [
        f"{_fmt(k)},{_fmt(visibility_single_photon(k))},{_fmt(visibility_two_photon(k))}\n"
        for k in ks
    ]
    text = header + "".join(lines)
    if cfg.out_path is None:
        sys.stdout.write(text)
    else:
        with open(cfg.out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def _load_params_file(path) -> ParameterVector:
    items = _parse_kv_file(path)
    keys = {
        "s_A": "s_a", "s_B": "s_b", "mu_A": "mu_a", "mu_B": "mu_b",
        "nu_A": "nu_a", "nu_B": "nu_b",
        "p_s_A": "p_sa", "p_s_B": "p_sb", "p_mu_A": "p_mua", "p_mu_B": "p_mub",
        "p_nu_A": "p_nua", "p_nu_B": "p_nub",
    }
    missing = [k for k in keys if k not in items]
    if missing:
        raise ConfigError(f"parameter file {path} missing keys: {missing}")
    try:
        values = {attr: float(items[key]) for key, attr in keys.items()}
    except ValueError as exc:
        raise ConfigError(f"non-numeric value in parameter file {path}") from exc
    return ParameterVector(**values)


def cmd_analyze(cfg: RunConfig, counts_path, params_path) -> int:
    params = _load_params_file(params_path)
    model = cfg.model()
    try:
        records = read_count_table(counts_path)
        stats = ingest_count_table(
            records,
            model.pulse_count,
            (params.p_sa, params.p_mua, params.p_nua),
            (params.p_sb, params.p_mub, params.p_nub),
        )
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from exc

    settings = DecoySettings(params.mu_a, params.nu_a, params.mu_b, params.nu_b)
    bounds = estimate_bounds(settings, stats, cfg.finite_key())
    q_ss = stats.gain("ss")
    ss = stats.pairs["ss"]
    e_ss = ss.error_count / ss.total_count if ss.total_count else 0.0
    rate = secret_key_rate(
        RateInputs(
            s_a=params.s_a, s_b=params.s_b, p_sa=params.p_sa, p_sb=params.p_sb,
            y11=bounds.y11_lower, e11=bounds.e11_upper,
            q_ss=q_ss, e_ss=e_ss, f=model.error_correction_efficiency,
        )
    )
    print("count-table analysis")
    print(f"  mode             {cfg.mode}")
    print(f"  y11_lower        {_fmt(bounds.y11_lower)}")
    print(f"  e11_upper        {_fmt(bounds.e11_upper)}")
    print(f"  degraded         {bounds.degraded}")
    print(f"  q_ss             {_fmt(q_ss)}")
    print(f"  e_ss             {_fmt(e_ss)}")
    print(f"  rate_per_pulse   {_fmt(rate)}")
    print(f"  rate_per_second  {_fmt(rate_per_second(rate, model.clock_rate_hz))}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdiqkd",
        description="Asymmetric MDI-QKD simulation and parameter optimization",
    )
    parser.add_argument("--config", metavar="PATH", help="key=value config file")
    parser.add_argument("--out", metavar="PATH", help="CSV output path")
    parser.add_argument("--workers", type=int, default=1, metavar="N")
    parser.add_argument("--seed", type=int, metavar="N")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--finite", action="store_true", help="finite statistics (default)")
    mode.add_argument("--asymptotic", action="store_true", help="asymptotic statistics")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", help="optimize strategies at a single (L_A, L_B)")
    sub.add_parser("scan", help="rate-vs-distance scan over the L_B range")

    vis = sub.add_parser("visibility", help="interference-visibility curves")
    vis.add_argument("--k-min", type=float, default=0.01)
    vis.add_argument("--k-max", type=float, default=100.0)
    vis.add_argument("--points", type=int, default=201)

    ana = sub.add_parser("analyze", help="decoy analysis of a count table")
    ana.add_argument("--counts", required=True, metavar="PATH")
    ana.add_argument("--params", required=True, metavar="PATH")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.finite:
            cfg.mode = "finite"
        elif args.asymptotic:
            cfg.mode = "asymptotic"
        cfg.workers = max(1, args.workers)
        cfg.out_path = args.out

        if args.command == "optimize":
            return cmd_optimize(cfg)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "visibility":
            return cmd_visibility(cfg, args.k_min, args.k_max, args.points)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.counts, args.params)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
