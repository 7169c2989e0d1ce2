"""
Generator extraction by marching difference quotients down a time schedule.

The certificate follows the convergence argument exactly: delta1 is the
largest schedule time below which F_t stays mu-close to the identity on D_mu
(both in sup and in the localized seminorm), L = 2 mu / ((1 - mu) delta1)
bounds every quotient, and the Cauchy gap must fall below 6 eps L.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import settings
from src.errors import BadParameter, Diverging, EmptySample, HypothesisNotMet, NoDelta1
from src.models.domain import SubsetSpec, as_points, vector_norm
from src.models.family import SemigroupFamily, VectorField
from src.models.reports import GeneratorEstimate, ModulusReport, SAMPLED_LOWER_BOUND
from src.models.sample import SampleSet
from src.services.moduli.estimators import lip_local, t_continuity_modulus
from src.services.semigroups.operations import evaluate

logger = logging.getLogger(__name__)

FieldLike = Union[VectorField, Callable[[np.ndarray], np.ndarray]]

# consecutive small gaps required before the march is declared converged
_CONVERGENCE_RUN = 3


def default_schedule(t_max: float = 0.1, floor: Optional[float] = None) -> List[float]:
    """t_k = t_max * 2^-k down to the floor"""
    floor = settings.schedule_floor if floor is None else floor
    if not 0 < floor <= t_max:
        raise BadParameter(f"Schedule floor {floor:g} must lie in (0, {t_max:g}]")
    schedule, t = [], t_max
    while t >= floor:
        schedule.append(t)
        t /= 2.0
    return schedule


def _quotients(family: SemigroupFamily, t: float, X: np.ndarray) -> np.ndarray:
    return (evaluate(family, t, X) - X) / t


def _check_schedule(t_schedule: Sequence[float]) -> List[float]:
    schedule = [float(t) for t in t_schedule]
    if len(schedule) < 2:
        raise BadParameter("The schedule needs at least two times")
    if schedule[-1] <= 0:
        raise BadParameter("Schedule times must be positive")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise BadParameter("The schedule must be strictly decreasing")
    return schedule


def _near_identity(family: SemigroupFamily, t: float, d_hat: SubsetSpec, mu: float, d_mu_points: np.ndarray,
                   pairs: SampleSet, level: float) -> Tuple[bool, float, float]:
    """Both closeness conditions at one time: sup ||F_t - Id|| on D_mu and Lip_{D,mu}(F_t - Id)"""
    norm_kind = d_hat.parent.norm_kind
    sup_move = float(np.max(vector_norm(evaluate(family, t, d_mu_points) - d_mu_points, norm_kind)))
    lip = lip_local(family.at(t).minus_identity(), d_hat, mu, pairs).values[0] if pairs.n_pairs else 0.0
    return sup_move < level and lip < level, sup_move, lip


def _largest_admissible(family: SemigroupFamily, times: List[float], d_hat: SubsetSpec, mu: float,
                        d_mu_points: np.ndarray, pairs: SampleSet, level: float) -> Tuple[Optional[float], List[dict]]:
    """
    Largest grid time such that it and every smaller grid time satisfy both
    conditions at the given level; None when the smallest time already fails
    """
    found, trace = None, []
    for t in sorted(times):
        ok, sup_move, lip = _near_identity(family, t, d_hat, mu, d_mu_points, pairs, level)
        trace.append({'t': t, 'sup_move': sup_move, 'lip': lip, 'ok': ok})
        if not ok:
            break
        found = t
    return found, trace


def _cauchy_decomposition(family: SemigroupFamily, X: np.ndarray, schedule: List[float], delta: Optional[float],
                          epsilon: float, L: float) -> Optional[Dict[str, Any]]:
    if delta is None:
        return None
    below = [t for t in schedule if t < delta]
    if len(below) < 2:
        return None
    s, t = below[0], below[1]
    m, n = math.floor(1.0 / s + 1.0), math.floor(1.0 / t + 1.0)
    norm_kind = family.domain.norm_kind
    f_s, f_t = _quotients(family, s, X), _quotients(family, t, X)
    f_m, f_n = _quotients(family, 1.0 / m, X), _quotients(family, 1.0 / n, X)
    terms = {'A1': float(np.max(vector_norm(f_n - f_m, norm_kind))),
             'A2': float(np.max(vector_norm(f_s - f_m, norm_kind))),
             'A3': float(np.max(vector_norm(f_t - f_n, norm_kind)))}
    bound = 2.0 * epsilon * L
    return dict(terms, s=s, t=t, m=m, n=n, bound_each=bound,
                within=all(v <= bound for v in terms.values()))


def estimate_generator(family: SemigroupFamily, d_hat: SubsetSpec, mu: float, epsilon: float,
                       t_schedule: Optional[Sequence[float]], sample: SampleSet,
                       gap_tol: float = 1e-6) -> GeneratorEstimate:
    """
    Estimate the generator f = lim f_t on the sample with its certificate

    Args:
        family: Semigroup family
        d_hat: Subset strictly inside the domain holding the sample
        mu: Localization radius, below min(1, margin of d_hat)
        epsilon: Accuracy level of the certificate
        t_schedule: Strictly decreasing positive times (default t_max 2^-k)
        sample: Points of d_hat and pairs within mu
        gap_tol: Absolute floor the last gaps must also meet

    Returns:
        GeneratorEstimate with f taken at the last schedule time

    Raises:
        NoDelta1: the closeness conditions fail already at the smallest time
        Diverging: the march does not converge and its gaps grow
        HypothesisNotMet: the defining field is unbounded on the sample
    """
    if not 0 < mu < min(1.0, d_hat.margin):
        raise BadParameter(f"mu = {mu:g} must lie in (0, min(1, {d_hat.margin:.6g}))")
    if not epsilon > 0:
        raise BadParameter("epsilon must be positive")
    if sample.n_points == 0:
        raise EmptySample("The sample has no points")
    schedule = _check_schedule(default_schedule() if t_schedule is None else t_schedule)
    X = sample.points
    norm_kind = d_hat.parent.norm_kind
    pairs = sample.restricted(mu)
    d_mu_points = np.vstack([X, pairs.pairs_y]) if pairs.n_pairs else X
    sup_field = _sampled_field_bound(family, d_mu_points)

    delta1, trace = _largest_admissible(family, schedule, d_hat, mu, d_mu_points, pairs, mu)
    if delta1 is None:
        first = trace[0]
        logger.error(f"No delta1 on the schedule for {family.name}: at t={first['t']:g} "
                     f"sup move {first['sup_move']:.3g}, Lip {first['lip']:.3g} against mu={mu:g}")
        raise NoDelta1(f"F_t - Id is not below mu = {mu:g} even at t = {first['t']:g} "
                       f"(sup move {first['sup_move']:.3g}, Lip {first['lip']:.3g})",
                       hypothesis='delta1', witness=first)
    L = 2.0 * mu / ((1.0 - mu) * delta1)
    bound = 6.0 * epsilon * L
    logger.info(f"delta1 measured for {family.name}: {delta1:g} (L={L:.6g}, bound={bound:.6g})")

    delta_grid = [t for t in schedule if t < min(delta1 / 2.0, epsilon)]
    delta = None
    if delta_grid:
        delta, _ = _largest_admissible(family, delta_grid, d_hat, mu, d_mu_points, pairs, epsilon)

    f_prev = _quotients(family, schedule[0], X)
    gaps: List[float] = []
    for t in schedule[1:]:
        f_t = _quotients(family, t, X)
        gaps.append(float(np.max(vector_norm(f_t - f_prev, norm_kind))))
        f_prev = f_t
    threshold = min(bound, gap_tol)
    sup_f = float(np.max(vector_norm(f_prev, norm_kind)))
    tail = gaps[-_CONVERGENCE_RUN:]
    converged = len(tail) == _CONVERGENCE_RUN and all(g <= threshold for g in tail) and sup_f <= L
    if not converged and len(gaps) >= _CONVERGENCE_RUN and gaps[-1] > gaps[-_CONVERGENCE_RUN]:
        logger.error(f"Difference quotients of {family.name} diverge: gaps {gaps[-_CONVERGENCE_RUN:]}")
        raise Diverging(f"Gaps grow along the schedule tail ({gaps[-_CONVERGENCE_RUN]:.3g} -> {gaps[-1]:.3g})")
    if not converged:
        logger.warning(f"Generator march for {family.name} did not converge: last gap {gaps[-1]:.3g}, "
                       f"threshold {threshold:.3g}, sup f {sup_f:.3g}, L {L:.3g}")

    certificate = {'mu': mu, 'delta1': delta1, 'delta': delta, 'epsilon': epsilon, 'L': L, 'bound': bound,
                   'gap_tol': gap_tol, 'sup_field': sup_field}
    return GeneratorEstimate(X.copy(), f_prev, schedule, gaps, gaps[-1], certificate, converged, sup_f,
                             schedule[-1], _cauchy_decomposition(family, X, schedule, delta, epsilon, L),
                             sample.describe())


def _sampled_field_bound(family: SemigroupFamily, points: np.ndarray) -> Optional[float]:
    if family.generator is None:
        return None
    sup_field = family.generator.sup_norm(points)
    if not math.isfinite(sup_field):
        raise HypothesisNotMet(f"The field of {family.name} is unbounded on the sample",
                               hypothesis='bounded_field', witness={'sup_field': sup_field})
    return sup_field


def _field_values(f: FieldLike, Y: np.ndarray) -> np.ndarray:
    return np.asarray(f(Y), dtype=float).reshape(Y.shape)


def cauchy_problem_residual(family: SemigroupFamily, f: FieldLike, x: Any, t_grid: Sequence[float],
                            step: float = 1e-4) -> ModulusReport:
    """
    Residual of du/dt = f(u) along u(t) = F_t(x)

    Central differences where t >= step, the one-sided second-order formula
    below that. The initial condition u(0) = x is checked separately.
    """
    if not step > 0:
        raise BadParameter("step must be positive")
    if not t_grid:
        raise EmptySample("Empty t-grid")
    X = as_points(x, family.dim)
    if X.shape[0] != 1:
        raise BadParameter("cauchy_problem_residual takes a single point")
    norm_kind = family.domain.norm_kind
    initial = float(vector_norm(evaluate(family, 0.0, X) - X, norm_kind)[0])

    values, witnesses = [], []
    for t in t_grid:
        if t < 0:
            raise BadParameter("Times must be nonnegative")
        u = evaluate(family, t, X)
        if t >= step:
            du = (evaluate(family, t + step, X) - evaluate(family, t - step, X)) / (2.0 * step)
            scheme = 'central'
        else:
            du = (-3.0 * u + 4.0 * evaluate(family, t + step, X) - evaluate(family, t + 2.0 * step, X)) / (2.0 * step)
            scheme = 'forward'
        values.append(float(vector_norm(du - _field_values(f, u), norm_kind)[0]))
        witnesses.append({'x': u[0].tolist(), 'scheme': scheme})
    return ModulusReport('cauchy_residual', list(t_grid), values, witnesses, SAMPLED_LOWER_BOUND,
                         extras={'step': step, 'initial_residual': initial, 'x0': X[0].tolist(),
                                 'family': family.name, 'field': getattr(f, 'name', 'f')})


def right_derivative_gap(family: SemigroupFamily, estimate: GeneratorEstimate, t: float,
                         s_values: Sequence[float], f: Optional[FieldLike] = None) -> ModulusReport:
    """
    sup over the estimate's points of ||(F_{t+s}(x) - F_t(x))/s - f(F_t(x))||

    f defaults to the family's defining field, then to the estimated one.
    """
    if not t > 0:
        raise BadParameter("The right derivative is checked at t > 0")
    if not s_values or any(s <= 0 for s in s_values):
        raise BadParameter("s values must be positive")
    f = f or family.generator or estimate.as_field(family)
    norm_kind = family.domain.norm_kind
    Y = evaluate(family, t, estimate.points)
    target = _field_values(f, Y)
    values, witnesses = [], []
    for s in s_values:
        gaps = vector_norm((evaluate(family, t + s, estimate.points) - Y) / s - target, norm_kind)
        i = int(np.argmax(gaps))
        values.append(float(gaps[i]))
        witnesses.append({'x': estimate.points[i].tolist()})
    bound = estimate.certificate['bound']
    return ModulusReport('right_derivative_gap', list(s_values), values, witnesses, SAMPLED_LOWER_BOUND,
                         estimate.sample_descriptor,
                         extras={'t0': 0.0, 't': t, 'bound': bound, 'within_bound': min(values) <= bound})


def remark_continuity_check(family: SemigroupFamily, estimate: GeneratorEstimate, d_hat: SubsetSpec,
                            t_grid: Sequence[float], tolerance: float = 1e-3,
                            sample: Optional[SampleSet] = None) -> ModulusReport:
    """A bounded estimated generator should come with a t-continuity modulus at 0 decaying below tolerance"""
    if sample is None:
        dim = estimate.points.shape[1]
        sample = SampleSet(estimate.points, np.zeros((0, dim)), np.zeros((0, dim)),
                           estimate.certificate['mu'], d_hat.parent.norm_kind, dict(estimate.sample_descriptor))
    report = t_continuity_modulus(family, d_hat, 0.0, t_grid, sample)
    bounded = bool(np.isfinite(estimate.sup_f) and estimate.sup_f <= estimate.certificate['L'])
    decays = report.decays_below(tolerance)
    if bounded and not decays:
        logger.warning(f"{family.name}: bounded generator estimate but the t-continuity modulus "
                       f"does not decay below {tolerance:g}")
    report.extras.update({'bounded': bounded, 'decays': decays, 'tolerance': tolerance, 'sup_f': estimate.sup_f})
    return report
