"""Helpers shared by the command handlers"""

import logging

from src.commands import EXIT_FAILED, EXIT_PASS
from src.models.sample import SampleSet
from src.models.scenario import ScenarioConfig
from src.services.geometry.sampling import sample
from src.services.reporting.report_manager import ReportManager

logger = logging.getLogger(__name__)


def draw_sample(config: ScenarioConfig) -> SampleSet:
    """Sample of the scenario subset at radius mu"""
    config.require('domain', 'subset', 'mu')
    spec = config.sample
    return sample(config.subset, config.mu, spec['strategy'], spec['n_points'], spec['n_pairs'], spec['seed'])


def report_manager(config: ScenarioConfig) -> ReportManager:
    return ReportManager(config.output['dir'], config.output['format'], config.resolved)


def exit_code(passed: bool) -> int:
    return EXIT_PASS if passed else EXIT_FAILED
