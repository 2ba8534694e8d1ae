from ._novscope import (
    StaleCacheError,
    ValidationError,
    default_config,
    disruption,
    log_propensity,
    percentile_rank,
    run_stage,
    surprise,
    two_step_credit,
)

__all__ = [
    "StaleCacheError",
    "ValidationError",
    "default_config",
    "disruption",
    "log_propensity",
    "percentile_rank",
    "run_stage",
    "surprise",
    "two_step_credit",
]
__version__ = "0.1.0"
