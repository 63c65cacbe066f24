"""Access to the bundled reference datasets.

The package ships reference data from a fiber MDI-QKD experiment over
unequal channels: per-configuration optimized implementation parameters
with the observed single-photon estimates and key rates, and the raw
per-intensity-pair coincidence count tables for every measured
configuration.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from typing import Dict, List, Tuple

__all__ = [
    "ReferenceColumn",
    "reference_parameters",
    "count_table_path",
    "params_file_path",
    "default_config_path",
]


@dataclass(frozen=True)
class ReferenceColumn:
    """One measured configuration: parameters plus observed results."""

    length_a_km: float
    length_b_km: float
    strategy: str
    s_a: float
    s_b: float
    mu_a: float
    mu_b: float
    nu_a: float
    nu_b: float
    p_sa: float
    p_sb: float
    p_mua: float
    p_mub: float
    p_nua: float
    p_nub: float
    y11: float
    e11: float
    q_ss: float
    e_ss: float
    rate_per_pulse: float

    def probabilities_a(self) -> Tuple[float, float, float]:
        return self.p_sa, self.p_mua, self.p_nua

    def probabilities_b(self) -> Tuple[float, float, float]:
        return self.p_sb, self.p_mub, self.p_nub


_STRATEGY_SHORT = {
    "seven_intensity": "seven",
    "four_intensity": "four",
    "four_intensity_plus_fiber": "fourfiber",
}


def _data_root():
    return resources.files("mdiqkd") / "data"


def reference_parameters() -> List[ReferenceColumn]:
    """All bundled reference configurations (18 rows)."""
    rows = []
    with (_data_root() / "reference_parameters.csv").open("r", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                ReferenceColumn(
                    length_a_km=float(rec["length_a_km"]),
                    length_b_km=float(rec["length_b_km"]),
                    strategy=rec["strategy"],
                    **{
                        k: float(rec[k])
                        for k in (
                            "s_a", "s_b", "mu_a", "mu_b", "nu_a", "nu_b",
                            "p_sa", "p_sb", "p_mua", "p_mub", "p_nua", "p_nub",
                            "y11", "e11", "q_ss", "e_ss", "rate_per_pulse",
                        )
                    },
                )
            )
    return rows


def count_table_path(length_a_km: int, length_b_km: int, strategy: str):
    """Filesystem path of the bundled count table for one configuration."""
    short = _STRATEGY_SHORT.get(strategy, strategy)
    name = f"counts_la{length_a_km}_lb{length_b_km}_{short}.txt"
    path = _data_root() / "counts" / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled count table {name}")
    return path


def params_file_path(length_a_km: int, length_b_km: int, strategy: str):
    short = _STRATEGY_SHORT.get(strategy, strategy)
    name = f"params_la{length_a_km}_lb{length_b_km}_{short}.cfg"
    path = _data_root() / "params" / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled parameter file {name}")
    return path


def default_config_path():
    return _data_root() / "default.cfg"
