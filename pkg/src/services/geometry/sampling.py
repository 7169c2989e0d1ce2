"""
Sampling of strictly-inside subsets.

Produces the point clouds and close-pair structures every sup estimate is
taken over. Output depends only on the arguments (seeded generators).
"""

import itertools
import logging
from typing import Tuple

import numpy as np
from scipy.stats import qmc

from src.errors import BadParameter, EmptySample, MarginViolation
from src.models.domain import Box, SubsetSpec, vector_norm
from src.models.sample import SampleSet

logger = logging.getLogger(__name__)

STRATEGIES = ('grid', 'quasi-random')

# quasi-random pair magnitudes are log-uniform over this many decades below mu
_PAIR_DECADES = 6.0


def sample(subset: SubsetSpec, mu: float, strategy: str = 'grid', n_points: int = 101,
           n_pairs: int = 400, seed: int = 0) -> SampleSet:
    """
    Draw points of a subset and close pairs around them

    Args:
        subset: Subset strictly inside its parent domain
        mu: Pair radius; must not exceed the subset margin
        strategy: 'grid' (deterministic ladder of displacements) or 'quasi-random'
        n_points: Target number of points
        n_pairs: Number of pairs (x, x*) with ||x - x*|| <= mu
        seed: Seed for every random choice

    Returns:
        SampleSet with a replayable descriptor
    """
    if strategy not in STRATEGIES:
        raise BadParameter(f"Unknown sampling strategy: {strategy}")
    if not mu > 0:
        raise BadParameter("mu must be positive")
    if mu > subset.margin * (1.0 + 1e-12):
        raise MarginViolation(f"mu = {mu:.6g} exceeds the subset margin {subset.margin:.6g}")
    if n_points < 1 or n_pairs < 0:
        raise BadParameter("n_points must be positive and n_pairs nonnegative")

    rng = np.random.default_rng(seed)
    if strategy == 'grid':
        points = _grid_points(subset, n_points)
    else:
        points = _quasi_random_points(subset, n_points, seed)
    if points.shape[0] == 0:
        raise EmptySample("Subset produced no sample points")

    norm_kind = subset.parent.norm_kind
    if strategy == 'grid':
        pairs_x, pairs_y = _ladder_pairs(points, mu, n_pairs, norm_kind)
    else:
        pairs_x, pairs_y = _random_pairs(points, mu, n_pairs, norm_kind, rng)

    inside = subset.parent.contains(pairs_y) if pairs_y.shape[0] else np.zeros(0, dtype=bool)
    if not np.all(inside):
        logger.warning(f"Dropped {int(np.sum(~inside))} pairs whose partner left the domain")
        pairs_x, pairs_y = pairs_x[inside], pairs_y[inside]

    descriptor = {'strategy': strategy, 'seed': seed, 'requested_points': n_points,
                  'requested_pairs': n_pairs}
    return SampleSet(points, pairs_x, pairs_y, float(mu), norm_kind, descriptor)


def _axis_grid(lo: np.ndarray, hi: np.ndarray, n_points: int) -> np.ndarray:
    dim = lo.shape[0]
    per_axis = n_points if dim == 1 else max(2, int(round(n_points ** (1.0 / dim))))
    axes = [np.linspace(l, h, per_axis) if h > l else np.array([l]) for l, h in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)), dtype=float)


def _grid_points(subset: SubsetSpec, n_points: int) -> np.ndarray:
    if subset.points is not None and subset.inflation == 0:
        cloud = subset.points
        if cloud.shape[0] <= n_points:
            return cloud.copy()
        idx = np.unique(np.linspace(0, cloud.shape[0] - 1, n_points).round().astype(int))
        return cloud[idx]

    bases = list(subset.pieces) if subset.points is None else [Box(p, p) for p in subset.points]
    share = max(1, n_points // len(bases))
    chunks = []
    for base in bases:
        lo, hi = base.bounds()
        lo, hi = lo - subset.inflation, hi + subset.inflation
        grid = _axis_grid(lo, hi, share)
        if not isinstance(base, Box) or subset.inflation > 0:
            grid = grid[subset.contains(grid)]
        chunks.append(grid)
    return _unique_rows(np.vstack(chunks))


def _quasi_random_points(subset: SubsetSpec, n_points: int, seed: int) -> np.ndarray:
    lo, hi = subset.bounds()
    if subset.points is not None and subset.inflation == 0:
        rng = np.random.default_rng(seed)
        take = min(n_points, subset.points.shape[0])
        return subset.points[np.sort(rng.choice(subset.points.shape[0], size=take, replace=False))]
    dim = lo.shape[0]
    engine = qmc.Halton(d=dim, scramble=True, seed=seed)
    collected = []
    count = 0
    for _ in range(50):
        draw = qmc.scale(engine.random(max(n_points, 16)), lo, np.where(hi > lo, hi, lo + 1e-300))
        draw = draw[subset.contains(draw)]
        collected.append(draw)
        count += draw.shape[0]
        if count >= n_points:
            break
    points = np.vstack(collected)[:n_points]
    return points


def _unique_rows(points: np.ndarray) -> np.ndarray:
    if points.shape[0] == 0:
        return points
    return np.unique(points, axis=0)


def _unit_directions(dim: int) -> np.ndarray:
    eye = np.eye(dim)
    return np.vstack([eye, -eye])


def _ladder_pairs(points: np.ndarray, mu: float, n_pairs: int,
                  norm_kind: str) -> Tuple[np.ndarray, np.ndarray]:
    """Displacements mu * 2^-level along +/- coordinate axes, level by level"""
    dim = points.shape[1]
    directions = _unit_directions(dim)
    xs, ys = [], []
    level = 0
    while len(xs) < n_pairs:
        scale = mu * 2.0 ** (-level)
        for x in points:
            for direction in directions:
                xs.append(x)
                ys.append(x + scale * direction)
                if len(xs) == n_pairs:
                    break
            if len(xs) == n_pairs:
                break
        level += 1
        if level > 60:
            break
    if not xs:
        return np.zeros((0, dim)), np.zeros((0, dim))
    return np.array(xs), np.array(ys)


def _random_pairs(points: np.ndarray, mu: float, n_pairs: int, norm_kind: str,
                  rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    dim = points.shape[1]
    if n_pairs == 0:
        return np.zeros((0, dim)), np.zeros((0, dim))
    base = points[rng.integers(0, points.shape[0], size=n_pairs)]
    directions = rng.normal(size=(n_pairs, dim))
    norms = vector_norm(directions, norm_kind)
    norms[norms == 0] = 1.0
    directions = directions / norms[:, None]
    magnitudes = mu * 10.0 ** (-_PAIR_DECADES * rng.random(n_pairs))
    return base, base + magnitudes[:, None] * directions
