"""Python bindings for the FROG scheduler core."""

from ._frog import (
    AdaptiveKde,
    ConfigError,
    FrogError,
    MetricsReport,
    Policy,
    SimConfig,
    clamp_accuracy,
    delay_score,
    em_fit,
    expected_accuracy_incremental,
    expected_accuracy_majority,
    expected_accuracy_multichoice_majority,
    min_worker_set_selection,
    notification_eval,
    predict_response_time,
    rule_of_thumb_bandwidth,
    run,
    update_accuracy,
    worker_notify,
)

__all__ = [
    "AdaptiveKde",
    "ConfigError",
    "FrogError",
    "MetricsReport",
    "Policy",
    "SimConfig",
    "clamp_accuracy",
    "delay_score",
    "em_fit",
    "expected_accuracy_incremental",
    "expected_accuracy_majority",
    "expected_accuracy_multichoice_majority",
    "min_worker_set_selection",
    "notification_eval",
    "predict_response_time",
    "rule_of_thumb_bandwidth",
    "run",
    "update_accuracy",
    "worker_notify",
]
