"""Four-mode bright squeezed-vacuum Bell states in truncated Fock space.

Polarization Bell states carrying macroscopic photon numbers: state
construction and transformation, Stokes-operator algebra, variance
witnesses, entanglement measures, truncation-error budgets, and a
reproducible Monte-Carlo photocounting experiment.
"""

__version__ = "0.1.0"

from .basis import FourModeBasis
from .states import (
    BellLabel,
    FourModeState,
    NumericError,
    TruncationMassError,
    TruncationMode,
    build_bell_state,
    evolve_from_vacuum,
    geometric_ratio,
    mean_photons_per_mode,
    project_total_sector,
    schmidt_spectrum,
    sector_weights,
)
from .polarization import (
    BasisTransform,
    apply_transform,
    half_wave_plate,
    identify_bell_state,
    pi_phase_on_bh,
    polarization_rotator,
    quarter_wave_plate,
)
from .stokes import (
    HermitianOperator,
    combination_matrix,
    commutator,
    expectation,
    stokes_operator,
    variance_of_combination,
)
from .witnesses import (
    WitnessKind,
    WitnessReport,
    cross_witness_matrix,
    cutoff_for_edge_mass,
    evaluate_witness,
    product_state_battery,
    separability_gap,
)
from .measures import (
    DistributionKind,
    MeasureReport,
    NegativityResult,
    PhotonNumberDistribution,
    WidthConvention,
    effective_schmidt_number,
    fedorov_ratio,
    fedorov_ratio_from_spectrum,
    four_mode_negativity,
    gain_scan,
    kbar,
    kbar_analytic,
    log_negativity,
    measure_report,
    negativity_numeric,
    pair_negativity,
    photon_number_distributions,
)
from .truncation import (
    CompressionPoint,
    alpha_from_epsilon,
    compression_scan,
    cutoff_for_epsilon,
    dimension_scan,
    epsilon_brute_force,
    epsilon_from_cutoff,
    occupancy_at_epsilon,
    subspace_dimension,
    truncated_kbar,
)
from .simulate import (
    FedorovEstimate,
    MeasurementSetting,
    PulseRecord,
    SimConfig,
    SweepPoint,
    SweepResult,
    efficiency_sweep,
    estimate_fedorov,
    estimate_witness,
    matched_witness,
    sample_pulse,
    witness_under_loss,
)

__all__ = [
    "__version__",
    "FourModeBasis",
    "BellLabel", "FourModeState", "NumericError", "TruncationMassError",
    "TruncationMode", "build_bell_state", "evolve_from_vacuum",
    "geometric_ratio", "mean_photons_per_mode", "project_total_sector",
    "schmidt_spectrum", "sector_weights",
    "BasisTransform", "apply_transform", "half_wave_plate",
    "identify_bell_state", "pi_phase_on_bh", "polarization_rotator",
    "quarter_wave_plate",
    "HermitianOperator", "combination_matrix", "commutator", "expectation",
    "stokes_operator", "variance_of_combination",
    "WitnessKind", "WitnessReport", "cross_witness_matrix",
    "cutoff_for_edge_mass", "evaluate_witness", "product_state_battery",
    "separability_gap",
    "DistributionKind", "MeasureReport", "NegativityResult",
    "PhotonNumberDistribution", "WidthConvention", "effective_schmidt_number",
    "fedorov_ratio", "fedorov_ratio_from_spectrum", "four_mode_negativity",
    "gain_scan", "kbar", "kbar_analytic", "log_negativity", "measure_report",
    "negativity_numeric", "pair_negativity", "photon_number_distributions",
    "CompressionPoint", "alpha_from_epsilon", "compression_scan",
    "cutoff_for_epsilon", "dimension_scan", "epsilon_brute_force",
    "epsilon_from_cutoff", "occupancy_at_epsilon", "subspace_dimension",
    "truncated_kbar",
    "FedorovEstimate", "MeasurementSetting", "PulseRecord", "SimConfig",
    "SweepPoint", "SweepResult", "efficiency_sweep", "estimate_fedorov",
    "estimate_witness", "matched_witness", "sample_pulse",
    "witness_under_loss",
]
