"""
Command-line runs: exit codes, report files and replay.
"""

import json
import math
import os

import pytest

import main
from src.services.moduli.estimators import default_t_grid


def write_scenario(tmp_path, scenario, name='scenario.json'):
    path = tmp_path / name
    path.write_text(json.dumps(scenario))
    return str(path)


def run(tmp_path, *argv, scenario=None, out='out'):
    args = list(argv) + ['--out', str(tmp_path / out)]
    if scenario is not None:
        args += ['--config', write_scenario(tmp_path, scenario)]
    return main.main(args)


def csv_body(path):
    with open(path, 'r', encoding='utf-8') as handle:
        return [line for line in handle if not line.startswith('#')]


def straddling_scenario(**extra):
    scenario = {'domain': {'kind': 'interval', 'lo': -1.0, 'hi': 1.0},
                'family': {'name': 'piecewise'},
                'subset': {'kind': 'interval', 'lo': 0.4, 'hi': 0.6},
                'mu': 0.1,
                'sample': {'n_points': 21, 'n_pairs': 840}}
    scenario.update(extra)
    return scenario


PIECEWISE_LAW = {'domain': {'kind': 'interval', 'lo': -1.0, 'hi': 1.0},
                 'family': {'name': 'piecewise'},
                 'subset': {'kind': 'interval', 'lo': -0.9, 'hi': 0.9},
                 'mu': 0.05,
                 'checks': ['semigroup_law']}


# =============================================================================
# examples
# =============================================================================


def test_piecewise_corner_example_passes(tmp_path):
    assert run(tmp_path, 'example', 'piecewise_corner') == 0
    out = tmp_path / 'out'
    assert (out / 'example_piecewise_corner.csv').exists()
    document = json.loads((out / 'example_piecewise_corner.json').read_text())
    assert document['result']['pass']
    assert len(document['result']['rows']) == 4


def test_ellinf_example_passes(tmp_path):
    scenario = {'example': {'n_min': 2, 'n_max': 5}}
    assert run(tmp_path, 'example', 'ellinf_paths', scenario=scenario) == 0
    body = csv_body(tmp_path / 'out' / 'example_ellinf_paths.csv')
    assert body[0].strip().split(',')[:2] == ['n', 'j']
    assert len(body) == 1 + sum(range(2, 6))
    curve = csv_body(tmp_path / 'out' / 'example_ellinf_paths_witness.csv')
    assert curve[0].strip().split(',') == ['node', 'x1', 'x2', 'x3', 'x4', 'x5']
    first = [float(v) for v in curve[1].strip().split(',')]
    assert first == [0.0] * 6
    assert len(curve) >= 3
    document = json.loads((tmp_path / 'out' / 'example_ellinf_paths_witness.json').read_text())
    assert document['result']['report'] == 'path_bound'
    assert document['result']['witness_length'] >= document['result']['lower_bound'] - 1e-9


def test_example_with_inverted_truncation_range_is_a_config_error(tmp_path):
    scenario = {'example': {'n_min': 6, 'n_max': 3}}
    assert run(tmp_path, 'example', 'ellinf_paths', scenario=scenario) == 2


def test_unknown_example_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        run(tmp_path, 'example', 'no_such_example')
    assert excinfo.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main.main(['--version'])
    assert excinfo.value.code == 0
    assert '1.0.0' in capsys.readouterr().out


# =============================================================================
# check
# =============================================================================


def test_semigroup_law_check_passes(tmp_path):
    assert run(tmp_path, 'check', scenario=PIECEWISE_LAW) == 0
    document = json.loads((tmp_path / 'out' / 'check_semigroup_law.json').read_text())
    assert document['config']['sample']['n_points'] == 101
    assert document['version'] == '1.0.0'


def test_t_lipschitz_check_fails_across_the_seam(tmp_path):
    scenario = straddling_scenario(checks=['t_lipschitz'], t_grid={'t_max': 0.1, 'points': 10})
    assert run(tmp_path, 'check', scenario=scenario) == 1


def test_t_continuity_check_passes_for_linear_decay(tmp_path):
    scenario = {'domain': {'kind': 'ball', 'center': [0.0], 'radius': 2.0},
                'family': {'name': 'linear', 'A': [[-1.0]]},
                'subset': {'kind': 'interval', 'lo': -0.5, 'hi': 0.5},
                'mu': 0.3,
                'checks': ['t_continuity', 't_lipschitz', 'derivative'],
                'sample': {'n_points': 21, 'n_pairs': 100}}
    assert run(tmp_path, 'check', scenario=scenario) == 0


def test_empty_t_grid_is_a_config_error(tmp_path):
    scenario = dict(PIECEWISE_LAW, t_grid=[], checks=['t_continuity'])
    assert run(tmp_path, 'check', scenario=scenario) == 2


def test_unknown_family_is_a_config_error(tmp_path):
    scenario = dict(PIECEWISE_LAW, family={'name': 'mystery'})
    assert run(tmp_path, 'check', scenario=scenario) == 2


def test_unreadable_config_is_a_config_error(tmp_path):
    assert main.main(['check', '--config', str(tmp_path / 'missing.json')]) == 2


def test_json_only_format(tmp_path):
    assert run(tmp_path, 'check', '--format', 'json', scenario=PIECEWISE_LAW) == 0
    assert os.listdir(tmp_path / 'out') == ['check_semigroup_law.json']


def test_replay_reproduces_csv_bodies(tmp_path):
    scenario = dict(PIECEWISE_LAW, sample={'strategy': 'quasi-random', 'n_points': 50, 'n_pairs': 100,
                                           'seed': 11})
    assert run(tmp_path, 'check', scenario=scenario, out='first') == 0
    assert run(tmp_path, 'check', scenario=scenario, out='second') == 0
    first = csv_body(tmp_path / 'first' / 'check_semigroup_law.csv')
    second = csv_body(tmp_path / 'second' / 'check_semigroup_law.csv')
    assert first == second


# =============================================================================
# generator
# =============================================================================


def test_generator_without_delta1_exits_with_hypothesis_failure(tmp_path):
    schedule = [t for t in default_t_grid(0.1, 20) if t >= 1e-4]
    scenario = straddling_scenario(generator={'schedule': schedule})
    assert run(tmp_path, 'generator', scenario=scenario) == 4


def test_generator_for_linear_decay(tmp_path):
    scenario = {'domain': {'kind': 'ball', 'center': [0.0], 'radius': 2.0},
                'family': {'name': 'linear', 'A': [[-1.0]]},
                'subset': {'kind': 'interval', 'lo': -0.5, 'hi': 0.5},
                'mu': 0.1,
                'sample': {'n_points': 51, 'n_pairs': 200}}
    assert run(tmp_path, 'generator', scenario=scenario) == 0
    out = tmp_path / 'out'
    for stem in ('generator', 'generator_residual', 'generator_check', 'generator_trajectory'):
        assert (out / f"{stem}.csv").exists()
    summary = json.loads((out / 'generator_check.json').read_text())
    assert summary['result']['pass']
    path = csv_body(out / 'generator_trajectory.csv')
    assert path[0].strip() == 't,x1'
    assert len(path) == 1 + 51
    t0, x0 = (float(v) for v in path[1].strip().split(','))
    t1, x1 = (float(v) for v in path[-1].strip().split(','))
    assert t0 == 0.0
    assert t1 == pytest.approx(0.5)
    assert x1 == pytest.approx(x0 * math.exp(-0.5), abs=1e-12)


# =============================================================================
# lemma
# =============================================================================


def test_lemma_iterates_command(tmp_path):
    scenario = {'domain': {'kind': 'interval', 'lo': -2.0, 'hi': 2.0},
                'subset': {'kind': 'points', 'points': [[1.0]]},
                'mu': 0.1,
                'map': ['0.9*x'],
                'lemma': {'p': 3},
                'sample': {'n_points': 1, 'n_pairs': 20}}
    assert run(tmp_path, 'lemma', 'iterates', scenario=scenario) == 0
    document = json.loads((tmp_path / 'out' / 'lemma_iterates.json').read_text())
    assert document['result']['statement_id'] == 'lemma_iterates'
    assert document['result']['per_point'][0]['lhs'] == pytest.approx(0.029)


def test_lemma_corollary_command(tmp_path):
    scenario = {'domain': {'kind': 'interval', 'lo': -2.0, 'hi': 2.0},
                'family': {'name': 'linear', 'A': [[-1.0]]},
                'subset': {'kind': 'points', 'points': [[1.0]]},
                'mu': 0.2,
                'lemma': {'t0': 0.1, 'p': 3},
                'sample': {'n_points': 1, 'n_pairs': 20}}
    assert run(tmp_path, 'lemma', 'corollary', scenario=scenario) == 0


def test_lemma_derivative_command(tmp_path):
    scenario = {'domain': {'kind': 'interval', 'lo': -1.0, 'hi': 1.0},
                'subset': {'kind': 'interval', 'lo': -0.5, 'hi': 0.5},
                'mu': 0.3,
                'map': ['x + 0.1*sin(x)'],
                'sample': {'n_points': 21, 'n_pairs': 100}}
    assert run(tmp_path, 'lemma', 'derivative', scenario=scenario) == 0


def test_lemma_displacement_failure_exits_with_hypothesis_failure(tmp_path):
    scenario = {'domain': {'kind': 'interval', 'lo': -1.0, 'hi': 1.0},
                'subset': {'kind': 'interval', 'lo': -0.5, 'hi': 0.5},
                'mu': 0.1,
                'map': ['0.5*x'],
                'sample': {'n_points': 11, 'n_pairs': 40}}
    assert run(tmp_path, 'lemma', 'iterates', scenario=scenario) == 4


def test_lemma_without_map_is_a_config_error(tmp_path):
    scenario = {'domain': {'kind': 'interval', 'lo': -1.0, 'hi': 1.0},
                'subset': {'kind': 'interval', 'lo': -0.5, 'hi': 0.5},
                'mu': 0.3,
                'sample': {'n_points': 11, 'n_pairs': 0}}
    assert run(tmp_path, 'lemma', 'iterates', scenario=scenario) == 2


def test_transfer_on_staircase_is_unsupported(tmp_path):
    scenario = {'domain': {'kind': 'ell_infinity', 'a': 0.25, 'truncation_n': 3},
                'family': {'name': 'closed_form', 'components': ['x0', 'x1', 'x2']},
                'subset': {'kind': 'ell_infinity', 'a_sub': 0.1},
                'mu': 0.05,
                't_grid': [0.1],
                'sample': {'n_points': 27, 'n_pairs': 0}}
    assert run(tmp_path, 'lemma', 'transfer', scenario=scenario) == 3
