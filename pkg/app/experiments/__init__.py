from typing import Dict, Type

from app.experiments.base import BaseExperiment
from app.experiments.config import ExperimentConfig, ExperimentName, load_config
from app.experiments.energy_drift import EnergyDriftExperiment
from app.experiments.existence import ExistenceExperiment
from app.experiments.nls_validity import NlsValidityExperiment
from app.experiments.property_suite import PropertySuiteExperiment
from app.experiments.residual_scaling import ResidualScalingExperiment
from app.experiments.simulate import SimulateExperiment

EXPERIMENTS: Dict[str, Type[BaseExperiment]] = {
    ExperimentName.SIMULATE.value: SimulateExperiment,
    ExperimentName.EXISTENCE.value: ExistenceExperiment,
    ExperimentName.NLS_VALIDITY.value: NlsValidityExperiment,
    ExperimentName.RESIDUAL_SCALING.value: ResidualScalingExperiment,
    ExperimentName.ENERGY_DRIFT.value: EnergyDriftExperiment,
    ExperimentName.PROPERTY_SUITE.value: PropertySuiteExperiment,
}


def create_experiment(config: ExperimentConfig, **kwargs) -> BaseExperiment:
    return EXPERIMENTS[config.experiment.value](config, **kwargs)


def run_experiment(config: ExperimentConfig, **kwargs):
    return create_experiment(config, **kwargs).run()


def run_nls_validity(config: ExperimentConfig):
    return NlsValidityExperiment(config).run()


def run_long_time_existence(config: ExperimentConfig):
    return ExistenceExperiment(config).run()


def run_residual_scaling(config: ExperimentConfig):
    return ResidualScalingExperiment(config).run()


def run_energy_drift(config: ExperimentConfig):
    return EnergyDriftExperiment(config).run()


def run_property_suite(config: ExperimentConfig, **kwargs):
    return PropertySuiteExperiment(config, **kwargs).run()


__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "create_experiment",
    "load_config",
    "run_experiment",
    "run_nls_validity",
    "run_long_time_existence",
    "run_residual_scaling",
    "run_energy_drift",
    "run_property_suite",
]
