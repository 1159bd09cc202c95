"""Uplink-to-downlink channel extrapolation for FDD massive MIMO.

Uplink and downlink of an FDD link share the propagation geometry — cluster
delays and angles of departure — while the per-subpath complex gains depend
on the carrier.  This package simulates such channels, extracts the shared
geometry and the uplink gains with greedy pursuit, learns the uplink->
downlink gain map with small from-scratch neural networks, and measures the
result against classical downlink training in correlation and rate.

Modules
-------
channel     cluster channel types, steering/delay bases, OFDM responses
scenario    randomized multi-position scenario generation
linksim     pilot transmission, noise, least-squares estimation
extraction  greedy delay/AoD/gain pursuit and downlink gain fitting
nn          layers, architectures, Adam training, model files
metrics     correlation factor, spectral efficiency, effective rate
methods     the CH / tPG / fPG / DL_training pipelines
experiments named sweeps producing result CSVs
records     JSON channel/dataset interchange
cli         the ``fdd-extrap`` command
"""

from .channel import (
    CarrierConfig,
    Cluster,
    OfdmChannel,
    Subpath,
    TimeDomainChannel,
    array_response,
    cluster_coefficient,
    delay_basis,
    ofdm_from_time,
    reconstruct_dl,
)
from .exceptions import ConfigError, ShapeError, TrainingDivergedError
from .experiments import (
    CSV_COLUMNS,
    EXPERIMENT_IDS,
    ExperimentPlan,
    ResultRow,
    read_result_rows,
    run_experiment,
    split_dataset,
)
from .extraction import (
    AngleGrid,
    ClusterExtraction,
    DelayGrid,
    DlTargets,
    ExtractionResult,
    extract_clusters,
    extract_dl_targets,
    extract_from_coefficients,
    extract_subpaths,
    nullspace_project,
    select_top_q,
)
from .linksim import (
    NoisyObservation,
    PilotConfig,
    complex_noise,
    dbm_to_watt,
    dl_observe_and_estimate,
    noise_variance,
    ul_ls_estimate,
    ul_observe,
)
from .methods import (
    LEARNED_METHODS,
    METHODS,
    Features,
    LinkBudget,
    MethodPrediction,
    MethodRun,
    TrainSettings,
    apply_model,
    build_features,
    fit_model,
    perfect_gains_predictions,
    prediction_correlations,
    prediction_spectral_efficiencies,
    run_method,
)
from .metrics import (
    RateContext,
    coherence_block_length,
    coherence_time,
    correlation_factor,
    effective_rate,
    effective_rate_in_context,
    spectral_efficiency,
)
from .scenario import (
    ClusterLatent,
    MsSampleSet,
    ScenarioConfig,
    Snapshot,
    SubpathLatent,
    channel_at,
    churn_clusters,
    default_config,
    draw_cluster,
    gain_at,
    generate_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # channel
    "CarrierConfig",
    "Subpath",
    "Cluster",
    "TimeDomainChannel",
    "OfdmChannel",
    "array_response",
    "delay_basis",
    "cluster_coefficient",
    "ofdm_from_time",
    "reconstruct_dl",
    # exceptions
    "ConfigError",
    "ShapeError",
    "TrainingDivergedError",
    # scenario
    "ScenarioConfig",
    "SubpathLatent",
    "ClusterLatent",
    "Snapshot",
    "MsSampleSet",
    "default_config",
    "gain_at",
    "draw_cluster",
    "churn_clusters",
    "channel_at",
    "generate_scenario",
    # linksim
    "PilotConfig",
    "NoisyObservation",
    "dbm_to_watt",
    "noise_variance",
    "complex_noise",
    "ul_observe",
    "ul_ls_estimate",
    "dl_observe_and_estimate",
    # extraction
    "AngleGrid",
    "DelayGrid",
    "ClusterExtraction",
    "ExtractionResult",
    "DlTargets",
    "nullspace_project",
    "extract_subpaths",
    "extract_clusters",
    "extract_from_coefficients",
    "select_top_q",
    "extract_dl_targets",
    # metrics
    "RateContext",
    "correlation_factor",
    "spectral_efficiency",
    "coherence_time",
    "coherence_block_length",
    "effective_rate",
    "effective_rate_in_context",
    # methods
    "METHODS",
    "LEARNED_METHODS",
    "LinkBudget",
    "TrainSettings",
    "MethodPrediction",
    "MethodRun",
    "Features",
    "build_features",
    "fit_model",
    "apply_model",
    "run_method",
    "perfect_gains_predictions",
    "prediction_correlations",
    "prediction_spectral_efficiencies",
    # experiments
    "EXPERIMENT_IDS",
    "CSV_COLUMNS",
    "ExperimentPlan",
    "ResultRow",
    "split_dataset",
    "run_experiment",
    "read_result_rows",
]
