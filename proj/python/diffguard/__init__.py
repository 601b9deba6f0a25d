"""Microgrid differential-protection event synthesis and classification."""

from ._diffguard import (  # noqa: F401
    CtParams,
    HifModelParams,
    OperatingCondition,
    ScenarioSpec,
    SynthConfig,
    Waveform,
    WaveletParams,
    __version__,
    balanced_accuracy,
    cwt,
    default_config_json,
    default_grids_json,
    dependability,
    enumerate_all,
    enumerate_external,
    enumerate_hif,
    enumerate_internal_type1,
    extract_features,
    feature_schema,
    features,
    generate,
    hif_current,
    mexican_hat,
    mexican_hat_discrete_mean_residual,
    security,
    synthesize,
    train_eval,
)
