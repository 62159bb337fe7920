"""Benchmark environments: oil discovery and ambulance relocation."""

from .base import EnvStepResult, Environment
from .oil import OilConfig, OilEnvironment, SurveyKind, oil_step, survey_value
from .ambulance import (
    AmbulanceConfig,
    AmbulanceEnvironment,
    ArrivalDistribution,
    ArrivalKind,
    ambulance_step,
    sample_arrival,
    shifting_uniform_preset,
)
