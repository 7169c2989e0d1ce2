"""
Domain-level geometry: boundary distance, mu-inflation and the sup-norm
staircase domain whose path lengths blow up as more coordinates are added.
"""

import logging

import numpy as np

from src.errors import BadParameter, MarginViolation, OutsideDomain
from src.models.domain import Ball, Box, DomainSpec, SubsetSpec, as_points

logger = logging.getLogger(__name__)

ELL_INFINITY_FAMILY = 'ell_infinity'


def dist_to_boundary(domain: DomainSpec, x) -> float:
    """
    Norm distance from x to the boundary of the domain

    Args:
        domain: Domain to measure against
        x: Point with ambient_dim coordinates

    Returns:
        Nonnegative distance (a certified lower bound for unions of pieces)
    """
    point = as_points(x, domain.ambient_dim)
    if point.shape[0] != 1:
        raise BadParameter("dist_to_boundary takes a single point")
    margin = float(domain.margin(point)[0])
    if margin < -1e-12:
        raise OutsideDomain(f"Point {point[0].tolist()} lies outside the closed domain (margin {margin:.3g})")
    return max(margin, 0.0)


def inflate(subset: SubsetSpec, mu: float) -> SubsetSpec:
    """
    mu-inflation: all points within norm distance mu of the subset

    Boxes stay boxes whenever the norm makes that exact (sup norm or 1D);
    otherwise the inflation is carried symbolically on the subset.
    """
    if not mu > 0:
        raise BadParameter("mu must be positive")
    if mu >= subset.margin:
        raise MarginViolation(f"mu = {mu:.6g} is not below the subset margin {subset.margin:.6g}")

    parent = subset.parent
    known = subset.margin - mu
    if subset.points is not None:
        if subset.points.shape[0] == 1 and subset.inflation == 0:
            ball = Ball(subset.points[0], mu, parent.norm_kind)
            return SubsetSpec(parent, pieces=(ball,), known_margin=known)
        return SubsetSpec(parent, points=subset.points, inflation=subset.inflation + mu,
                          known_margin=known)

    exact_boxes = parent.norm_kind == 'sup' or parent.ambient_dim == 1
    if subset.inflation == 0 and exact_boxes and all(isinstance(p, Box) for p in subset.pieces):
        pieces = tuple(Box(p.lo - mu, p.hi + mu) for p in subset.pieces)
        return SubsetSpec(parent, pieces=pieces, known_margin=known)
    if subset.inflation == 0 and all(isinstance(p, Ball) and p.norm_kind == parent.norm_kind
                                     for p in subset.pieces):
        pieces = tuple(Ball(p.center, p.radius + mu, p.norm_kind) for p in subset.pieces)
        return SubsetSpec(parent, pieces=pieces, known_margin=known)
    return SubsetSpec(parent, pieces=subset.pieces, inflation=subset.inflation + mu,
                      known_margin=known)


def _staircase_box(j: int, a: float, n: int) -> Box:
    # coordinates before j sit near 1, coordinate j spans [0, 1], later ones sit near 0
    lo, hi = np.empty(n), np.empty(n)
    for k in range(1, n + 1):
        if k < j:
            lo[k - 1], hi[k - 1] = 1.0 - a, 1.0 + a
        elif k == j:
            lo[k - 1], hi[k - 1] = -a, 1.0 + a
        else:
            lo[k - 1], hi[k - 1] = -a, a
    return Box(lo, hi)


def _check_staircase(a: float, truncation_n: int) -> None:
    if not 0.0 < a < 0.5:
        raise BadParameter(f"a must lie in (0, 1/2), got {a}")
    if int(truncation_n) != truncation_n or truncation_n < 2:
        raise BadParameter(f"truncation_n must be an integer >= 2, got {truncation_n}")


def ell_infinity_example_domain(a: float, truncation_n: int) -> DomainSpec:
    """
    Union of the staircase boxes D_1^a .. D_n^a under the sup norm.

    Consecutive boxes overlap and non-consecutive ones are disjoint, so the
    union is a connected chain lying in the sup-norm ball of radius 1 + a.
    """
    _check_staircase(a, truncation_n)
    n = int(truncation_n)
    boxes = [_staircase_box(j, a, n) for j in range(1, n + 1)]
    domain = DomainSpec(n, 'sup', 'union_of_boxes', tuple(boxes),
                        {'family': ELL_INFINITY_FAMILY, 'a': a, 'truncation_n': n})
    logger.info(f"Staircase domain built (a={a}, n={n})")
    return domain


def ell_infinity_point(j: int, n: int) -> np.ndarray:
    """x^(j): ones in the first j coordinates, zeros after"""
    if not 0 <= j <= n:
        raise BadParameter(f"j must lie in [0, {n}], got {j}")
    point = np.zeros(n)
    point[:j] = 1.0
    return point


def ell_infinity_subdomain(domain: DomainSpec, a_sub: float) -> SubsetSpec:
    """Closed staircase boxes with a smaller a, strictly inside the given staircase domain"""
    if domain.params.get('family') != ELL_INFINITY_FAMILY:
        raise BadParameter("Domain is not a staircase domain")
    a = domain.params['a']
    if not 0.0 < a_sub < a:
        raise BadParameter(f"Subdomain parameter must lie in (0, {a}), got {a_sub}")
    n = domain.ambient_dim
    return SubsetSpec(domain, pieces=tuple(_staircase_box(j, a_sub, n) for j in range(1, n + 1)))


def staircase_lower_bound(a: float, j: int) -> float:
    """Closed-form interface-to-interface displacement from 0 to x^(j)"""
    return j - 2.0 * a * (j - 1) if j >= 1 else 0.0
