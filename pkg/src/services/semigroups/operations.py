"""
Evaluation-level operations on semigroup families and self-maps.
"""

import logging
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from src.config import settings
from src.errors import BadParameter, MarginViolation, OutsideDomain, TrajectoryEscape
from src.models.domain import DomainSpec, as_points
from src.models.family import SemigroupFamily, SmoothMap
from src.models.reports import DerivativeEstimate, ModulusReport, TableReport
from src.models.sample import SampleSet

logger = logging.getLogger(__name__)

MapLike = Union[SmoothMap, Callable[[np.ndarray], np.ndarray]]


def _single(x: Any, Y: np.ndarray) -> np.ndarray:
    return Y[0] if np.ndim(x) <= 1 and Y.shape[0] == 1 else Y


def evaluate(family: SemigroupFamily, t: float, x: Any) -> np.ndarray:
    """
    F_t(x) with domain checks on the input and the image

    Args:
        family: Semigroup family
        t: Nonnegative time
        x: Interior point or (n, d) stack of interior points

    Returns:
        Image point(s), same layout as x
    """
    if t < 0:
        raise BadParameter("Families are never evaluated at negative times")
    X = as_points(x, family.dim)
    inside = family.domain.contains(X)
    if not np.all(inside):
        bad = int(np.nonzero(~inside)[0][0])
        raise OutsideDomain(f"Point {X[bad].tolist()} is not an interior point of the domain")
    Y = family.eval(t, X)
    escaped = ~family.domain.contains(Y)
    if np.any(escaped):
        bad = int(np.nonzero(escaped)[0][0])
        raise TrajectoryEscape(f"F_{t:g}({X[bad].tolist()}) = {Y[bad].tolist()} left the domain",
                               escape_time=t)
    return _single(x, Y)


def iterate(phi: MapLike, k: int, x: Any, domain: Optional[DomainSpec] = None) -> np.ndarray:
    """phi^k(x); with a domain, every intermediate image must stay interior"""
    if int(k) != k or k < 1:
        raise BadParameter(f"k must be a positive integer, got {k}")
    dim = domain.ambient_dim if domain is not None else getattr(phi, 'dim', None)
    Y = as_points(x, dim)
    for step in range(1, int(k) + 1):
        Y = np.asarray(phi(Y), dtype=float).reshape(Y.shape)
        if domain is not None and not np.all(domain.contains(Y)):
            raise TrajectoryEscape(f"Iterate {step} left the domain", failing_k=step)
    return _single(x, Y)


def compose_residual(family: SemigroupFamily, s: float, t: float, sample: SampleSet) -> ModulusReport:
    """sup over the sample of ||F_{s+t}(x) - F_s(F_t(x))|| with its witness"""
    if s < 0 or t < 0:
        raise BadParameter("s and t must be nonnegative")
    X = sample.points
    direct = evaluate(family, s + t, X)
    composed = evaluate(family, s, evaluate(family, t, X))
    residuals = family.domain.norm(direct - composed)
    i = int(np.argmax(residuals))
    return ModulusReport('semigroup_law', [None], [float(residuals[i])],
                         [{'x': X[i].tolist(), 'lhs': direct[i].tolist(), 'rhs': composed[i].tolist()}],
                         sample_descriptor=sample.describe(),
                         extras={'s': s, 't': t, 'family': family.name})


def finite_difference_jacobian(fn: Callable[[np.ndarray], np.ndarray], X: np.ndarray,
                               step: float) -> np.ndarray:
    """Central-difference columns of the Jacobian at every row of X"""
    n, dim = X.shape
    J = np.empty((n, dim, dim))
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = step
        J[:, :, k] = (fn(X + e) - fn(X - e)) / (2.0 * step)
    return J


def derivative_matrices(phi: SmoothMap, X: np.ndarray, domain: DomainSpec,
                        step: Optional[float] = None):
    """
    Derivatives of a map on a stack of points

    Returns:
        (matrices, method, step) with method 'analytic' or 'finite_difference'
    """
    if phi.has_derivative:
        return phi.derivative(X), 'analytic', None
    step = settings.fd_step if step is None else step
    margins = domain.margin(X)
    if np.any(margins <= step):
        bad = int(np.argmin(margins))
        raise MarginViolation(f"Point {X[bad].tolist()} is within {step:g} of the boundary; "
                              f"finite differences would leave the domain")
    logger.warning(f"{phi.name} has no analytic derivative; central differences with step {step:g}")
    return finite_difference_jacobian(phi, X, step), 'finite_difference', step


def frechet_derivative(family: SemigroupFamily, t: float, x: Any,
                       step: Optional[float] = None) -> DerivativeEstimate:
    """
    Spatial derivative F_t'(x): analytic when the family has one, otherwise
    central differences with a Richardson estimate of the O(step^2) error
    """
    X = as_points(x, family.dim)
    if X.shape[0] != 1:
        raise BadParameter("frechet_derivative takes a single point")
    if family.has_derivative:
        return DerivativeEstimate(family.derivative(t, X)[0], 'analytic')

    step = settings.fd_step if step is None else step
    margin = float(family.domain.margin(X)[0])
    if margin <= step:
        raise MarginViolation(f"Margin {margin:.3g} does not exceed the step {step:g}")
    fn = lambda Y: family.eval(t, Y)
    fine = finite_difference_jacobian(fn, X, step)[0]
    error = None
    if margin > 2.0 * step:
        coarse = finite_difference_jacobian(fn, X, 2.0 * step)[0]
        error = float(np.max(np.abs(coarse - fine)) / 3.0)
    return DerivativeEstimate(fine, 'finite_difference', step, error)


def trajectory(family: SemigroupFamily, x: Any, t_grid: Sequence[float]) -> TableReport:
    """Rows (t, x1..xn) of t -> F_t(x)"""
    X = as_points(x, family.dim)
    if X.shape[0] != 1:
        raise BadParameter("trajectory takes a single point")
    header = ['t'] + [f"x{k + 1}" for k in range(family.dim)]
    rows = [[float(t)] + evaluate(family, t, X)[0].tolist() for t in t_grid]
    return TableReport('trajectory', header, rows, summary={'x': X[0].tolist(), 'family': family.name})
