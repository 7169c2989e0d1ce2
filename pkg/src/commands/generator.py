"""`generator`: certified generator extraction plus the Cauchy-problem residual of the result"""

import logging
import math

import numpy as np

from src.commands.common import draw_sample, exit_code, report_manager
from src.models.domain import vector_norm
from src.models.reports import TableReport
from src.models.scenario import ScenarioConfig
from src.services.generator.extraction import cauchy_problem_residual, default_schedule, estimate_generator
from src.services.semigroups.operations import trajectory

logger = logging.getLogger(__name__)

TRAJECTORY_POINTS = 51


def run_generator(config: ScenarioConfig) -> int:
    """
    Estimate f on the sample, then check it against the family

    Passes when the march converged, the certificate re-asserts from its
    parts, the residual of du/dt = f(u) stays below the certificate bound and,
    for families with a defining field, f matches that field within ten
    times the family tolerance plus the schedule floor.
    """
    config.require('family')
    spec = config.generator
    family = config.family
    sample = draw_sample(config)
    floor = spec['floor']
    if family.tolerance > 0:
        # quotients of an integrated flow lose digits like tolerance / t
        floor = max(floor, math.sqrt(family.tolerance))
    schedule = spec['schedule'] or default_schedule(spec['t_max'], floor)
    estimate = estimate_generator(family, config.subset, config.mu, spec['epsilon'], schedule, sample,
                                  spec['gap_tol'])
    reports = report_manager(config)
    reports.save('generator', estimate)

    field = family.generator or estimate.as_field(family)
    x = estimate.points[estimate.points.shape[0] // 2]
    residual = cauchy_problem_residual(family, field, x, spec['residual_times'], spec['residual_step'])
    reports.save('generator_residual', residual)
    t_end = max(spec['residual_times'])
    reports.save('generator_trajectory', trajectory(family, x, np.linspace(0.0, t_end, TRAJECTORY_POINTS)))

    bound = estimate.certificate['bound']
    rows = [['converged', float(estimate.converged), 1.0, estimate.converged],
            ['certificate', float(estimate.certificate_holds()), 1.0, estimate.certificate_holds()],
            ['cauchy_residual', residual.max_value(), bound, residual.max_value() <= bound]]
    if family.generator is not None:
        error = float(np.max(vector_norm(estimate.f_values - family.generator(estimate.points),
                                         family.domain.norm_kind)))
        allowance = max(1e-6, 10.0 * family.tolerance) + estimate.floor
        rows.append(['field_recovery', error, allowance, error <= allowance])
    summary = TableReport('generator_check', ['criterion', 'value', 'bound', 'passed'], rows,
                          all(row[3] for row in rows), {'family': family.name})
    reports.save('generator_check', summary)
    logger.info(f"Generator for {family.name}: converged={estimate.converged}, gap={estimate.cauchy_gap:.3g}, "
                f"L={estimate.certificate['L']:.6g}")
    return exit_code(summary.passed)
