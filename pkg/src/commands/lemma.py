"""`lemma`: the iterate, quotient, derivative, chain and transfer inequality verifiers"""

import logging

from src.commands.common import draw_sample, exit_code, report_manager
from src.models.scenario import ScenarioConfig
from src.services.generator.verifiers import (lemma_chain_check, verify_corollary_quotients,
                                              verify_lemma_derivative, verify_lemma_iterates,
                                              verify_transfer_estimate)
from src.services.geometry.paths import finite_path_length_certificate

logger = logging.getLogger(__name__)

LEMMAS = ('iterates', 'corollary', 'derivative', 'chain', 'transfer')


def run_lemma(config: ScenarioConfig, which: str) -> int:
    spec = config.lemma
    sample = draw_sample(config)
    if which == 'iterates':
        config.require('phi')
        results = [verify_lemma_iterates(config.phi, config.subset, config.mu, spec['p'], sample,
                                         config.tolerance, spec['ell'])]
    elif which == 'corollary':
        config.require('family')
        results = [verify_corollary_quotients(config.family, spec['t0'], spec['p'], config.subset, config.mu,
                                              sample, config.tolerance, spec['ell'])]
    elif which == 'derivative':
        config.require('phi')
        results = [verify_lemma_derivative(config.phi, config.subset, config.mu, sample, config.tolerance)]
    elif which == 'chain':
        config.require('family')
        results = lemma_chain_check(config.family, config.subset, config.mu, spec['t0'], spec['p'], sample,
                                    config.tolerance)
    else:
        config.require('family')
        certificate = finite_path_length_certificate(config.domain, config.subset)
        results = [verify_transfer_estimate(config.family, config.subset, certificate, config.t0,
                                            config.t_grid, sample, config.tolerance, spec['anchor'])]

    reports = report_manager(config)
    for k, report in enumerate(results):
        name = f"lemma_{which}" if len(results) == 1 else f"lemma_{which}_{k + 1}"
        reports.save(name, report)
        if report.passed:
            logger.info(f"{report.statement_id}: pass (min margin {report.min_margin:.3g})")
        else:
            logger.warning(f"{report.statement_id}: FAIL at {report.worst()}")
    return exit_code(all(r.passed for r in results))
