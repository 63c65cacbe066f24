"""Simulation and parameter optimization for asymmetric MDI-QKD.

Library layout:
  physics     closed-form channel/detector observables and visibilities
  decoy       decoy-state bounds with finite-statistics handling
  keyrate     secret-key-rate, signature-feasibility, and twin-field formulas
  optimizer   polar-coordinate coordinate descent over the 12 parameters
  montecarlo  event-level oracles validating the closed forms
  datasets    bundled reference parameters and count tables
  cli         command-line front end (optimize / scan / visibility / analyze)
"""

from .physics import (
    SystemModel,
    IntensityPairObservables,
    InterferenceConfig,
    SinglePhotonTruth,
    transmittance,
    binary_entropy,
    bessel_i0,
    z_basis_observables,
    x_basis_observables,
    single_photon_truth,
    detector_intensities,
    visibility_single_photon,
    visibility_two_photon,
)
from .decoy import (
    DecoySettings,
    PairCounts,
    ObservedStatistics,
    FiniteKeyConfig,
    DecoyBounds,
    X_PAIR_LABELS,
    ALL_PAIR_LABELS,
    fluctuation_interval,
    estimate_bounds,
    read_count_table,
    ingest_count_table,
)
from .keyrate import (
    RateInputs,
    QdsInputs,
    TfQkdInputs,
    QdsResult,
    secret_key_rate,
    rate_per_second,
    qds_feasible,
    tf_qkd_rate,
)
from .optimizer import (
    ParameterVector,
    PolarVector,
    Strategy,
    OptimizationResult,
    to_polar,
    from_polar,
    evaluate,
    coordinate_descent,
    fiber_padding,
)

__version__ = "0.1.0"

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
    "DecoySettings",
    "PairCounts",
    "ObservedStatistics",
    "FiniteKeyConfig",
    "DecoyBounds",
    "X_PAIR_LABELS",
    "ALL_PAIR_LABELS",
    "fluctuation_interval",
    "estimate_bounds",
    "read_count_table",
    "ingest_count_table",
    "RateInputs",
    "QdsInputs",
    "TfQkdInputs",
    "QdsResult",
    "secret_key_rate",
    "rate_per_second",
    "qds_feasible",
    "tf_qkd_rate",
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
