"""
End-to-end acceptance: the semigroup law and corners of the piecewise family,
the iterate inequality on randomized maps, generator recovery for the catalog
fields, the staircase refutation table and replay.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import main
from src.commands.example import ellinf_paths_table, piecewise_corner_table
from src.errors import HypothesisNotMet
from src.models.domain import Box, DomainSpec, SubsetSpec
from src.models.family import SmoothMap
from src.services.generator.extraction import cauchy_problem_residual, default_schedule, estimate_generator
from src.services.generator.verifiers import (difference_quotient, verify_corollary_quotients, verify_lemma_iterates,
                                              verify_transfer_estimate)
from src.services.geometry.domains import inflate
from src.services.geometry.paths import finite_path_length_certificate
from src.services.geometry.sampling import sample
from src.services.moduli.estimators import map_derivative_modulus, t_continuity_modulus, t_lipschitz_modulus
from src.services.semigroups.catalog import (cubic_field, expression_family, expression_field, flow_family,
                                             rotation_field)
from src.services.semigroups.operations import compose_residual

LEMMA_DOMAIN = DomainSpec.interval(-2.0, 2.0)
LEMMA_SUBSET = SubsetSpec(LEMMA_DOMAIN, pieces=(Box([-0.5], [0.5]),))
LEMMA_SAMPLE = sample(LEMMA_SUBSET, 0.5, 'grid', n_points=11, n_pairs=44)


def perturbed_contraction(lam, eps, omega, shift=0.0):
    """x -> lam x + eps sin(omega x) + shift with its exact Jacobian"""
    return SmoothMap(lambda X: lam * X + eps * np.sin(omega * X) + shift, 1,
                     lambda X: (lam + eps * omega * np.cos(omega * X))[:, :, None],
                     name=f"{lam:g}x + {eps:g}sin({omega:g}x) + {shift:g}")


# =============================================================================
# piecewise family
# =============================================================================


def test_semigroup_law_reproduction(piecewise_family):
    subset = SubsetSpec(piecewise_family.domain, pieces=(Box([-0.9], [0.9]),))
    drawn = sample(subset, 0.05, 'grid', n_points=101, n_pairs=0)
    for s in (0.1, 0.2, 0.5):
        for t in (0.1, 0.2, 0.5):
            assert compose_residual(piecewise_family, s, t, drawn).values[0] <= 1e-12


def test_corner_reproduction():
    table = piecewise_corner_table({'x_grid': [0.6, 0.7, 0.8, 0.9], 'scan_t_max': 1.0, 'scan_points': 101,
                                    'step': 1e-5, 'jump_threshold': 1e-3})
    assert table.passed
    for row in table.rows:
        x, count, t_corner, expected, error, left, right, left_expected, right_expected, _ = row
        assert count == 1
        assert error <= 2e-5
        assert left == pytest.approx(left_expected, abs=1e-4)
        assert right == pytest.approx(right_expected, abs=1e-4)
    row = next(r for r in table.rows if r[0] == 0.8)
    assert row[5] == pytest.approx(-0.5, abs=1e-4)
    assert row[6] == pytest.approx(-1.0, abs=1e-4)


def test_piecewise_family_is_t_continuous_but_not_t_lipschitz(piecewise_family):
    subset = SubsetSpec(piecewise_family.domain, pieces=(Box([0.4], [0.6]),))
    drawn = sample(subset, 0.1, 'grid', n_points=21, n_pairs=840)
    lipschitz = t_lipschitz_modulus(piecewise_family, subset, 0.1, [1e-1, 1e-2, 1e-3, 1e-4], drawn)
    assert min(lipschitz.values) > 0.2
    continuity = t_continuity_modulus(piecewise_family, subset, 0.0, [1e-1, 1e-2, 1e-3], drawn)
    assert continuity.decays_below(1e-3)


# =============================================================================
# iterate inequality on random maps
# =============================================================================


@settings(max_examples=1000, deadline=None)
@given(st.floats(min_value=0.5, max_value=1.0), st.floats(min_value=0.0, max_value=0.05),
       st.floats(min_value=0.5, max_value=2.0), st.integers(min_value=1, max_value=8))
def test_lemma_iterates_never_fails_falsely(lam, eps, omega, p):
    phi = perturbed_contraction(lam, eps, omega)
    report = verify_lemma_iterates(phi, LEMMA_SUBSET, 0.5, p, LEMMA_SAMPLE, tolerance=1e-9)
    assert report.passed
    d_mu_points = np.linspace(-1.0, 1.0, 41)[:, None]
    assert np.all(inflate(LEMMA_SUBSET, 0.5).contains(d_mu_points))
    bound = map_derivative_modulus(phi, LEMMA_DOMAIN, d_mu_points)
    assert bound.values[0] <= (1.0 - lam) + eps * omega + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.5, max_value=1.0), st.floats(min_value=0.2, max_value=0.4),
       st.integers(min_value=1, max_value=8))
def test_displacement_violation_is_a_hypothesis_failure(lam, shift, p):
    phi = perturbed_contraction(lam, 0.0, 1.0, shift)
    drawn = sample(LEMMA_SUBSET, 0.1, 'grid', n_points=11, n_pairs=22)
    with pytest.raises(HypothesisNotMet) as excinfo:
        verify_lemma_iterates(phi, LEMMA_SUBSET, 0.1, p, drawn, tolerance=1e-9)
    assert excinfo.value.hypothesis == 'displacement'


def test_corollary_reproduction(decay_family):
    subset = SubsetSpec(decay_family.domain, points=[[1.0]])
    drawn = sample(subset, 0.2, 'grid', n_points=1, n_pairs=20)
    report = verify_corollary_quotients(decay_family, 0.1, 3, subset, 0.2, drawn)
    assert report.lhs[0] == pytest.approx(0.087687, abs=1e-6)
    assert report.rhs[0] == pytest.approx(0.164435, abs=1e-6)
    assert report.min_margin == pytest.approx(0.164435 - 0.087687, abs=1e-6)


# =============================================================================
# generator recovery
# =============================================================================


def _recovery_case(name):
    interval = DomainSpec.interval(-1.0, 1.0)
    if name == 'decay':
        field = expression_field(['-x'], interval)
    elif name == 'cubic':
        field = cubic_field(interval)
    else:
        field = rotation_field()
    family = flow_family(field, rtol=1e-13, atol=1e-13)
    if name == 'rotation':
        subset = SubsetSpec(family.domain, pieces=(Box([-0.5, -0.5], [0.5, 0.5]),))
        drawn = sample(subset, 0.1, 'grid', n_points=25, n_pairs=100)
    else:
        subset = SubsetSpec(family.domain, pieces=(Box([-0.5], [0.5]),))
        drawn = sample(subset, 0.1, 'grid', n_points=21, n_pairs=80)
    return family, field, subset, drawn


@pytest.mark.parametrize('name', ['decay', 'cubic', 'rotation'])
def test_generator_recovery_with_certificate(name):
    family, field, subset, drawn = _recovery_case(name)
    estimate = estimate_generator(family, subset, 0.1, 0.01, default_schedule(0.05, 2.5e-7), drawn)
    assert estimate.converged
    assert estimate.cauchy_gap <= estimate.certificate['bound']
    assert estimate.sup_f <= estimate.certificate['L']
    assert estimate.certificate_holds()
    error = np.max(np.linalg.norm(estimate.f_values - field(estimate.points), axis=1))
    assert error <= max(1e-6, 10.0 * family.tolerance)


def test_difference_quotients_converge_at_first_order(decay_family, centered_subset_ball):
    drawn = sample(centered_subset_ball, 0.1, 'grid', n_points=21, n_pairs=0)
    times = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    errors = [np.max(np.abs(difference_quotient(decay_family, t, drawn.points) + drawn.points)) for t in times]
    slope = np.polyfit(np.log(times), np.log(errors), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.15)


def test_cauchy_residual_slope(decay_family):
    # below 1e-4 the central difference of a double-precision trajectory is roundoff bound
    steps = np.array([1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
    residuals = [cauchy_problem_residual(decay_family, decay_family.generator, [0.5], [0.5], step=h).values[0]
                 for h in steps]
    slope = np.polyfit(np.log(steps), np.log(residuals), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


# =============================================================================
# path lengths and transfer
# =============================================================================


def test_staircase_refutation_table():
    table, curve = ellinf_paths_table({'a': 0.25, 'a_sub': 0.1, 'n_min': 2, 'n_max': 8})
    assert table.passed
    assert np.allclose(curve.witness.nodes[0], 0.0)
    assert curve.witness.nodes.shape[1] == 8
    assert curve.witness_length >= curve.lower_bound - 1e-9
    assert len(table.rows) == sum(range(2, 9))
    for n, j, lower, witness, half_j, _, passed in table.rows:
        assert lower >= half_j - 1e-9
        assert math.isfinite(witness)


def test_transfer_reproduction(unit_interval, centered_subset):
    family = expression_family(['x + t*sin(x)'], unit_interval, name='perturbed')
    certificate = finite_path_length_certificate(unit_interval, centered_subset)
    drawn = sample(centered_subset, 0.3, 'grid', n_points=41, n_pairs=0)
    report = verify_transfer_estimate(family, centered_subset, certificate, 0.0, [0.2, 0.1, 0.05, 0.01], drawn,
                                      tolerance=1e-9)
    assert report.min_margin >= 0.0


# =============================================================================
# replay
# =============================================================================


def test_replay_is_byte_identical(tmp_path):
    scenario = {'domain': {'kind': 'interval', 'lo': -2.0, 'hi': 2.0},
                'subset': {'kind': 'interval', 'lo': -0.5, 'hi': 0.5},
                'mu': 0.5,
                'map': ['0.8*x + 0.03*sin(x)'],
                'lemma': {'p': 5},
                'sample': {'strategy': 'quasi-random', 'n_points': 40, 'n_pairs': 120, 'seed': 3}}
    config = tmp_path / 'scenario.json'
    config.write_text(json.dumps(scenario))
    bodies = []
    for out in ('first', 'second'):
        assert main.main(['lemma', 'iterates', '--config', str(config), '--out', str(tmp_path / out)]) == 0
        text = (tmp_path / out / 'lemma_iterates.csv').read_text()
        bodies.append([line for line in text.splitlines() if not line.startswith('#')])
    assert bodies[0] == bodies[1]
