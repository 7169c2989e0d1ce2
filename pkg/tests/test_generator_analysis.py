"""
Iterate and quotient inequalities, generator extraction and corner detection.
"""

import dataclasses
import math

import numpy as np
import pytest

from src.errors import BadParameter, EmptySample, HypothesisNotMet, NoDelta1, Unsupported
from src.models.domain import Box, DomainSpec, SubsetSpec
from src.models.family import VectorField
from src.models.sample import SampleSet
from src.services.generator.corners import detect_corners
from src.services.generator.extraction import (cauchy_problem_residual, default_schedule, estimate_generator,
                                               remark_continuity_check, right_derivative_gap)
from src.services.generator.verifiers import (difference_quotient, lemma_chain_check, verify_corollary_quotients,
                                              verify_lemma_derivative, verify_lemma_iterates,
                                              verify_transfer_estimate)
from src.services.geometry.domains import ell_infinity_example_domain, ell_infinity_subdomain
from src.services.geometry.paths import finite_path_length_certificate
from src.services.geometry.sampling import sample
from src.services.moduli.estimators import default_t_grid
from src.services.semigroups.catalog import (cubic_field, expression_family, expression_field, expression_map,
                                             flow_family, linear_family)


@pytest.fixture
def wide_interval():
    return DomainSpec.interval(-2.0, 2.0)


def point_sample(domain, x, mu, n_pairs=20):
    return sample(SubsetSpec(domain, points=[[x]]), mu, 'grid', n_points=1, n_pairs=n_pairs)


# =============================================================================
# difference quotients
# =============================================================================


def test_difference_quotient_of_linear_decay(decay_family):
    assert difference_quotient(decay_family, 0.1, [1.0])[0] == pytest.approx(-0.951626, abs=1e-6)


def test_difference_quotient_of_rotation():
    family = linear_family([[0.0, 1.0], [-1.0, 0.0]])
    value = difference_quotient(family, 0.1, [1.0, 0.0])
    assert np.allclose(value, [(math.cos(0.1) - 1.0) / 0.1, -math.sin(0.1) / 0.1], atol=1e-12)


def test_difference_quotient_needs_positive_time(decay_family):
    with pytest.raises(BadParameter):
        difference_quotient(decay_family, 0.0, [1.0])


# =============================================================================
# iterate inequality
# =============================================================================


def test_lemma_iterates_for_a_linear_contraction(wide_interval):
    phi = expression_map(['0.9*x'], 1)
    subset = SubsetSpec(wide_interval, points=[[1.0]])
    report = verify_lemma_iterates(phi, subset, 0.1, 3, point_sample(wide_interval, 1.0, 0.1))
    assert report.lhs[0] == pytest.approx(0.029, abs=1e-12)
    assert report.rhs[0] == pytest.approx(2.0 * 0.271 * 0.1, abs=1e-12)
    assert report.inputs_echo['ell'] == pytest.approx(0.271)
    assert report.inputs_echo['ell_kind'] == 'sampled'
    assert report.passed


def test_lemma_iterates_for_a_translation(unit_interval, centered_subset):
    phi = expression_map(['x + 0.05'], 1)
    drawn = sample(centered_subset, 0.3, 'grid', n_points=21, n_pairs=100)
    report = verify_lemma_iterates(phi, centered_subset, 0.3, 4, drawn)
    assert max(report.lhs) <= 1e-12
    assert max(report.rhs) <= 1e-9
    assert report.passed


def test_lemma_iterates_single_step_is_trivial(centered_subset):
    phi = expression_map(['x + 0.1*sin(x)'], 1)
    drawn = sample(centered_subset, 0.3, 'grid', n_points=21, n_pairs=100)
    report = verify_lemma_iterates(phi, centered_subset, 0.3, 1, drawn)
    assert report.lhs == [0.0] * len(report.lhs)
    assert report.rhs == [0.0] * len(report.rhs)


def test_lemma_iterates_rejects_large_displacement(centered_subset):
    drawn = sample(centered_subset, 0.1, 'grid', n_points=11, n_pairs=40)
    with pytest.raises(HypothesisNotMet) as excinfo:
        verify_lemma_iterates(expression_map(['0.5*x'], 1), centered_subset, 0.1, 3, drawn)
    assert excinfo.value.hypothesis == 'displacement'


def test_lemma_iterates_rejects_understated_lipschitz_bound(wide_interval):
    phi = expression_map(['0.9*x'], 1)
    subset = SubsetSpec(wide_interval, points=[[1.0]])
    with pytest.raises(HypothesisNotMet) as excinfo:
        verify_lemma_iterates(phi, subset, 0.1, 3, point_sample(wide_interval, 1.0, 0.1), ell=0.01)
    assert excinfo.value.hypothesis == 'lipschitz'


def test_lemma_iterates_rejects_bad_power(centered_subset):
    drawn = sample(centered_subset, 0.3, 'grid', n_points=11, n_pairs=0)
    with pytest.raises(BadParameter):
        verify_lemma_iterates(expression_map(['x'], 1), centered_subset, 0.3, 0, drawn)


# =============================================================================
# quotient inequality
# =============================================================================


def test_corollary_quotients_for_linear_decay(decay_family):
    subset = SubsetSpec(decay_family.domain, points=[[1.0]])
    report = verify_corollary_quotients(decay_family, 0.1, 3, subset, 0.2,
                                        point_sample(decay_family.domain, 1.0, 0.2))
    assert report.lhs[0] == pytest.approx(0.087687, abs=1e-6)
    assert report.rhs[0] == pytest.approx(0.164435, abs=1e-6)
    assert report.inputs_echo['ell'] == pytest.approx(1.0 - math.exp(-0.3), rel=1e-9)
    assert report.passed


def test_corollary_at_a_fixed_point(decay_family):
    subset = SubsetSpec(decay_family.domain, points=[[0.0]])
    report = verify_corollary_quotients(decay_family, 0.1, 5, subset, 0.2,
                                        point_sample(decay_family.domain, 0.0, 0.2))
    assert report.lhs == [0.0]
    assert report.rhs == [0.0]


def test_corollary_reports_quotient_bound_failure(decay_family, centered_subset_ball):
    drawn = sample(centered_subset_ball, 0.01, 'grid', n_points=11, n_pairs=20)
    with pytest.raises(HypothesisNotMet) as excinfo:
        verify_corollary_quotients(decay_family, 1.0, 2, centered_subset_ball, 0.01, drawn)
    assert excinfo.value.hypothesis == 'quotient_bound'


# =============================================================================
# derivative inequality and the chain
# =============================================================================


def test_lemma_derivative_for_sine_perturbation(centered_subset):
    phi = expression_map(['x + 0.1*sin(x)'], 1)
    drawn = sample(centered_subset, 0.3, 'grid', n_points=41, n_pairs=400)
    report = verify_lemma_derivative(phi, centered_subset, 0.3, drawn)
    assert report.inputs_echo['ell'] == pytest.approx(0.1)
    assert report.inputs_echo['derivative_method'] == 'analytic'
    assert report.passed


def test_lemma_derivative_for_scaled_identity(centered_subset):
    drawn = sample(centered_subset, 0.3, 'grid', n_points=21, n_pairs=100)
    report = verify_lemma_derivative(expression_map(['0.9*x'], 1), centered_subset, 0.3, drawn)
    assert report.lhs == pytest.approx([0.1] * len(report.lhs))
    assert report.passed


def test_lemma_derivative_only_sees_the_inflated_subset(centered_subset):
    # the derivative blows up at the boundary but stays bounded on D_mu
    phi = expression_map(['x + 0.01*sqrt(1 - x**2)'], 1)
    drawn = sample(centered_subset, 0.3, 'grid', n_points=21, n_pairs=100)
    report = verify_lemma_derivative(phi, centered_subset, 0.3, drawn)
    assert report.inputs_echo['ell'] == pytest.approx(0.01 * 0.8 / 0.6, rel=1e-9)
    assert report.passed


def test_lemma_derivative_measures_ell_along_refined_witness(unit_interval):
    # one short pair; refinement stretches it to the full radius where the quotient is larger
    origin = SubsetSpec(unit_interval, points=[[0.0]])
    drawn = SampleSet(np.array([[0.0]]), np.array([[0.0]]), np.array([[0.05]]), 0.3, 'euclidean')
    report = verify_lemma_derivative(expression_map(['x + 0.5*x**2'], 1), origin, 0.3, drawn)
    assert report.lhs[-1] == pytest.approx(0.15)
    assert report.inputs_echo['ell'] == pytest.approx(0.3)
    assert report.passed


def test_lemma_derivative_needs_pairs(centered_subset):
    drawn = sample(centered_subset, 0.3, 'grid', n_points=11, n_pairs=0)
    with pytest.raises(EmptySample):
        verify_lemma_derivative(expression_map(['x'], 1), centered_subset, 0.3, drawn)


def test_lemma_chain_on_linear_decay(decay_family, centered_subset_ball):
    drawn = sample(centered_subset_ball, 0.3, 'grid', n_points=21, n_pairs=100)
    reports = lemma_chain_check(decay_family, centered_subset_ball, 0.3, 0.05, 3, drawn)
    assert len(reports) == 4
    assert [r.statement_id for r in reports] == ['lemma_derivative'] * 3 + ['lemma_iterates']
    assert reports[-1].inputs_echo['ell'] == pytest.approx(1.0 - math.exp(-0.15))
    assert reports[-1].inputs_echo['ell_kind'] == 'stated'
    assert all(r.passed for r in reports)


# =============================================================================
# transfer estimate
# =============================================================================


def test_transfer_estimate_on_convex_domain(unit_interval, centered_subset):
    family = expression_family(['x + t*sin(x)'], unit_interval, name='perturbed')
    certificate = finite_path_length_certificate(unit_interval, centered_subset)
    drawn = sample(centered_subset, 0.3, 'grid', n_points=41, n_pairs=0)
    grid = [0.1, 0.05, 0.01]
    report = verify_transfer_estimate(family, centered_subset, certificate, 0.0, grid, drawn)
    assert report.lhs == pytest.approx([t * math.sin(0.5) for t in grid], rel=1e-9)
    assert all(eps >= t * math.sin(0.5) for eps, t in zip(report.inputs_echo['eps'], grid))
    assert report.inputs_echo['L_bound'] == certificate.L_bound
    assert report.passed


def test_transfer_estimate_for_constant_family(unit_interval, centered_subset):
    family = expression_family(['0.5*x'], unit_interval)
    certificate = finite_path_length_certificate(unit_interval, centered_subset)
    drawn = sample(centered_subset, 0.3, 'grid', n_points=21, n_pairs=0)
    report = verify_transfer_estimate(family, centered_subset, certificate, 0.0, [0.1, 0.2], drawn)
    assert report.lhs == [0.0, 0.0]
    assert report.passed


def test_transfer_estimate_refuses_staircase(decay_family, centered_subset_ball):
    domain = ell_infinity_example_domain(0.25, 4)
    refutation = finite_path_length_certificate(domain, ell_infinity_subdomain(domain, 0.1))
    drawn = sample(centered_subset_ball, 0.3, 'grid', n_points=11, n_pairs=0)
    with pytest.raises(Unsupported):
        verify_transfer_estimate(decay_family, centered_subset_ball, refutation, 0.0, [0.1], drawn)
    with pytest.raises(Unsupported):
        verify_transfer_estimate(decay_family, centered_subset_ball, None, 0.0, [0.1], drawn)


# =============================================================================
# generator extraction
# =============================================================================


@pytest.fixture
def decay_estimate(decay_family, centered_subset_ball):
    drawn = sample(centered_subset_ball, 0.1, 'grid', n_points=101, n_pairs=400)
    return estimate_generator(decay_family, centered_subset_ball, 0.1, 0.01, None, drawn)


def test_default_schedule_halves_down_to_floor():
    schedule = default_schedule(0.1, 1e-3)
    assert schedule[0] == 0.1
    assert schedule[-1] >= 1e-3 > schedule[-1] / 2.0
    assert all(b == a / 2.0 for a, b in zip(schedule, schedule[1:]))


def test_generator_of_linear_decay(decay_estimate):
    assert decay_estimate.converged
    assert decay_estimate.certificate['delta1'] == pytest.approx(0.1)
    assert decay_estimate.certificate['L'] == pytest.approx(0.2 / (0.9 * 0.1))
    assert np.max(np.abs(decay_estimate.f_values + decay_estimate.points)) <= 1e-6
    assert decay_estimate.sup_f <= decay_estimate.certificate['L']
    assert decay_estimate.certificate_holds()


def test_generator_of_cubic_flow(unit_interval, centered_subset):
    family = flow_family(cubic_field(unit_interval), rtol=1e-13, atol=1e-13)
    drawn = sample(centered_subset, 0.1, 'grid', n_points=21, n_pairs=80)
    schedule = default_schedule(0.05, 4e-5)
    estimate = estimate_generator(family, centered_subset, 0.1, 0.01, schedule, drawn, gap_tol=1e-4)
    assert estimate.converged
    assert np.max(np.abs(estimate.f_values + estimate.points ** 3)) <= 1e-5
    assert estimate.certificate_holds()


def test_generator_rejects_bad_schedule(decay_family, centered_subset_ball):
    drawn = sample(centered_subset_ball, 0.1, 'grid', n_points=11, n_pairs=20)
    with pytest.raises(BadParameter):
        estimate_generator(decay_family, centered_subset_ball, 0.1, 0.01, [0.01, 0.1], drawn)


def test_no_delta1_when_family_is_not_t_lipschitz(piecewise_family, unit_interval):
    subset = SubsetSpec(unit_interval, pieces=(Box([0.4], [0.6]),))
    drawn = sample(subset, 0.1, 'grid', n_points=21, n_pairs=840)
    schedule = [t for t in default_t_grid(0.1, 20) if t >= 1e-4]
    with pytest.raises(NoDelta1) as excinfo:
        estimate_generator(piecewise_family, subset, 0.1, 0.01, schedule, drawn)
    assert excinfo.value.hypothesis == 'delta1'


def test_cauchy_residual_is_second_order(decay_family):
    steps = np.array([1e-2, 1e-3, 1e-4])
    residuals = [cauchy_problem_residual(decay_family, decay_family.generator, [0.5], [0.5], step=h).values[0]
                 for h in steps]
    slope = np.polyfit(np.log(steps), np.log(residuals), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_cauchy_residual_of_cubic_flow():
    family = flow_family(cubic_field(), rtol=1e-13, atol=1e-13)
    report = cauchy_problem_residual(family, family.generator, [0.9], [0.0, 0.1, 0.5], step=1e-3)
    assert report.max_value() <= 1e-5
    assert report.extras['initial_residual'] == 0.0
    assert [w['scheme'] for w in report.witnesses] == ['forward', 'central', 'central']


def test_cauchy_residual_of_estimated_cubic_generator_is_second_order(unit_interval, centered_subset):
    closed = expression_family(['x/sqrt(1 + 2*t*x**2)'], unit_interval, name='cubic')
    drawn = sample(centered_subset, 0.1, 'grid', n_points=21, n_pairs=80)
    estimate = estimate_generator(closed, centered_subset, 0.1, 0.01, default_schedule(0.05, 1e-8), drawn)
    assert estimate.converged
    field = estimate.as_field(closed)
    flow = flow_family(cubic_field(unit_interval), rtol=1e-13, atol=1e-13)
    # below 1e-3 the O(floor) error of the estimate outweighs the O(step^2) term
    steps = np.array([1e-2, 5e-3, 2e-3, 1e-3])
    residuals = [cauchy_problem_residual(flow, field, [0.9], [0.1], step=h).values[0] for h in steps]
    slope = np.polyfit(np.log(steps), np.log(residuals), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_generator_records_sampled_field_bound(decay_estimate):
    assert 0.5 <= decay_estimate.certificate['sup_field'] <= 0.6 + 1e-12


def test_generator_rejects_unbounded_field(decay_family, centered_subset_ball):
    singular = VectorField(lambda X: np.where(np.abs(X) < 0.05, np.inf, -X), decay_family.domain, name='singular')
    family = dataclasses.replace(decay_family, generator=singular)
    drawn = sample(centered_subset_ball, 0.1, 'grid', n_points=11, n_pairs=20)
    with pytest.raises(HypothesisNotMet) as excinfo:
        estimate_generator(family, centered_subset_ball, 0.1, 0.01, None, drawn)
    assert excinfo.value.hypothesis == 'bounded_field'


def test_cauchy_residual_detects_wrong_field(decay_family):
    wrong = expression_field(['-2*x'], decay_family.domain)
    report = cauchy_problem_residual(decay_family, wrong, [0.5], [0.2], step=1e-4)
    assert report.values[0] == pytest.approx(0.5 * math.exp(-0.2), abs=1e-6)


def test_right_derivative_gap_shrinks(decay_family, decay_estimate):
    s_values = [1e-2, 1e-3, 1e-4]
    report = right_derivative_gap(decay_family, decay_estimate, 0.5, s_values)
    assert report.values[0] > report.values[1] > report.values[2]
    assert report.values[-1] <= 1e-4
    assert report.extras['within_bound']


def test_right_derivative_gap_needs_positive_time(decay_family, decay_estimate):
    with pytest.raises(BadParameter):
        right_derivative_gap(decay_family, decay_estimate, 0.0, [1e-3])


def test_bounded_generator_comes_with_t_continuity(decay_family, decay_estimate, centered_subset_ball):
    report = remark_continuity_check(decay_family, decay_estimate, centered_subset_ball,
                                     default_t_grid(0.1, 10))
    assert report.extras['bounded']
    assert report.extras['decays']


# =============================================================================
# corners
# =============================================================================


@pytest.mark.parametrize('x', [0.6, 0.7, 0.8, 0.9])
def test_piecewise_family_has_one_corner(piecewise_family, x):
    corners = detect_corners(piecewise_family, [x], np.linspace(0.0, 1.0, 101), step=1e-5)
    assert len(corners) == 1
    corner = corners[0]
    assert corner.t_corner == pytest.approx(math.log(2.0 * x), abs=2e-5)
    # both branches pass through 1/2 at the seam
    assert corner.left_slope[0] == pytest.approx(-0.5, abs=1e-4)
    assert corner.right_slope[0] == pytest.approx(-1.0, abs=1e-4)


def test_smooth_trajectories_have_no_corners(piecewise_family, decay_family):
    grid = np.linspace(0.0, 1.0, 101)
    assert detect_corners(decay_family, [0.5], grid) == []
    assert detect_corners(piecewise_family, [0.3], grid) == []


def test_corner_scan_needs_a_grid(piecewise_family):
    with pytest.raises(EmptySample):
        detect_corners(piecewise_family, [0.8], [0.0, 0.5, 1.0])
