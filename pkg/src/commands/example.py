"""
`example`: the two worked examples.

piecewise_corner  corners of t -> F_t(x) for the piecewise family against ln(2|x|)
ellinf_paths      path-length lower bounds in truncated staircase domains against j/2
"""

import logging
import math
from typing import Tuple

import numpy as np

from src.commands.common import exit_code, report_manager
from src.models.reports import PathBound, TableReport
from src.models.scenario import ScenarioConfig
from src.services.generator.corners import detect_corners
from src.services.geometry.domains import ell_infinity_example_domain, ell_infinity_subdomain
from src.services.geometry.paths import finite_path_length_certificate
from src.services.semigroups.catalog import piecewise_branch_family

logger = logging.getLogger(__name__)

EXAMPLES = ('piecewise_corner', 'ellinf_paths')


def piecewise_corner_table(spec) -> TableReport:
    family = piecewise_branch_family()
    step = spec['step']
    scan = np.linspace(0.0, spec['scan_t_max'], spec['scan_points'])
    rows = []
    for x in spec['x_grid']:
        corners = detect_corners(family, [x], scan, step, spec['jump_threshold'])
        expected = math.log(2.0 * abs(x)) if abs(x) > 0.5 else None
        if expected is None:
            rows.append([x, len(corners), None, None, None, None, None, None, None, not corners])
            continue
        left_expected = -x * math.exp(-expected)
        right_expected = -4.0 * x * abs(x) * math.exp(-2.0 * expected)
        if len(corners) != 1:
            rows.append([x, len(corners), None, expected, None, None, None, left_expected, right_expected, False])
            continue
        corner = corners[0]
        error = abs(corner.t_corner - expected)
        left, right = float(corner.left_slope[0]), float(corner.right_slope[0])
        rows.append([x, 1, corner.t_corner, expected, error, left, right, left_expected, right_expected,
                     error <= 2.0 * step])
    header = ['x', 'corners', 't_corner', 'ln_2x', 'error', 'left_slope', 'right_slope',
              'left_expected', 'right_expected', 'passed']
    return TableReport('piecewise_corner', header, rows, all(row[-1] for row in rows),
                       {'step': step, 'scan_points': spec['scan_points']})


def ellinf_paths_table(spec) -> Tuple[TableReport, PathBound]:
    """The bounds table and the witness curve to the farthest corner of the largest truncation"""
    rows = []
    witness = None
    for n in range(spec['n_min'], spec['n_max'] + 1):
        domain = ell_infinity_example_domain(spec['a'], n)
        refutation = finite_path_length_certificate(domain, ell_infinity_subdomain(domain, spec['a_sub']))
        for row in refutation.rows:
            dominates = row['lower_bound'] >= row['half_j'] - 1e-9
            reachable = math.isfinite(row['witness_length']) and row['witness_length'] >= row['lower_bound'] - 1e-9
            rows.append([n, row['j'], row['lower_bound'], row['witness_length'], row['half_j'],
                         row['interface_formula'], dominates and reachable])
        witness = refutation.witnesses[-1]
        bounds = [r['lower_bound'] for r in refutation.rows]
        if any(b < a - 1e-9 for a, b in zip(bounds, bounds[1:])):
            logger.warning(f"Lower bounds are not monotone in j for n={n}: {bounds}")
            rows[-1][-1] = False
    header = ['n', 'j', 'lower_bound', 'witness_length', 'half_j', 'interface_formula', 'passed']
    table = TableReport('ellinf_paths', header, rows, all(row[-1] for row in rows),
                        {'a': spec['a'], 'a_sub': spec['a_sub']})
    return table, witness


def run_example(config: ScenarioConfig, name: str) -> int:
    reports = report_manager(config)
    if name == 'piecewise_corner':
        table = piecewise_corner_table(config.example)
    else:
        table, witness = ellinf_paths_table(config.example)
        reports.save(f"example_{name}_witness", witness)
    reports.save(f"example_{name}", table)
    logger.info(f"Example {name}: {'pass' if table.passed else 'FAIL'}")
    return exit_code(table.passed)
