"""
Corner detection for t -> F_t(x).

Secant slopes over the scan grid are smooth away from a corner, so their
second differences spike around one. Each spike window is located by
intersecting quadratic extrapolations of the two sides, refined on shrinking
stencils, and confirmed with Richardson-extrapolated one-sided slopes.
"""

import logging
from typing import Any, List, Optional, Sequence

import numpy as np
from scipy.ndimage import median_filter
from scipy.optimize import brentq

from src.errors import BadParameter, EmptySample
from src.models.domain import as_points
from src.models.family import SemigroupFamily
from src.models.reports import Corner
from src.services.semigroups.operations import evaluate

logger = logging.getLogger(__name__)

# a spike must stand this far above the local smooth level
_SPIKE_RATIO = 10.0
_MEDIAN_WINDOW = 11
_STENCIL_SHRINK = 4.0


class _Trajectory:
    """u(t) = F_t(x) for one point"""

    def __init__(self, family: SemigroupFamily, x: np.ndarray):
        self.family = family
        self.x = x

    def __call__(self, t: float) -> np.ndarray:
        return evaluate(self.family, t, self.x)[0]

    def stack(self, times: Sequence[float]) -> np.ndarray:
        return np.array([self(t) for t in times])


def _spike_windows(times: np.ndarray, values: np.ndarray, jump_threshold: float) -> List[tuple]:
    """Runs of secant-slope indices whose second differences stand out"""
    slopes = np.diff(values, axis=0) / np.diff(times)[:, None]
    spikes = np.abs(slopes[2:] - 2.0 * slopes[1:-1] + slopes[:-2])
    size = np.max(spikes, axis=1)
    level = median_filter(size, size=_MEDIAN_WINDOW, mode='nearest')
    flagged = np.nonzero(size > np.maximum(jump_threshold, _SPIKE_RATIO * level))[0] + 1
    windows = []
    for i in flagged:
        if windows and i - windows[-1][1] <= 2:
            windows[-1] = (windows[-1][0], int(i), windows[-1][2])
        else:
            windows.append((int(i), int(i), int(np.argmax(spikes[i - 1]))))
    return windows


def _crossing(left_t, left_u, right_t, right_u, lo: float, hi: float) -> Optional[float]:
    """Root in [lo, hi] of the difference of the two quadratic extrapolations"""
    ql, qr = np.polyfit(left_t, left_u, 2), np.polyfit(right_t, right_u, 2)
    gap = lambda s: float(np.polyval(ql, s) - np.polyval(qr, s))
    if gap(lo) * gap(hi) > 0:
        return None
    return brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _refine(u: _Trajectory, t_c: float, spacing: float, step: float, component: int) -> float:
    h = spacing / _STENCIL_SHRINK
    while h > step and t_c - 3.0 * h >= 0:
        left_t = t_c - h * np.array([3.0, 2.0, 1.0])
        right_t = t_c + h * np.array([1.0, 2.0, 3.0])
        located = _crossing(left_t, u.stack(left_t)[:, component], right_t, u.stack(right_t)[:, component],
                            t_c - h, t_c + h)
        if located is None:
            break
        t_c = located
        h /= _STENCIL_SHRINK
    return t_c


def one_sided_slopes(u, t: float, step: float):
    """Left and right t-derivatives by Richardson extrapolation over step, step/2, step/4"""

    def richardson(sign: float) -> np.ndarray:
        base = u(t)
        d = [sign * (u(t + sign * h) - base) / h for h in (step, step / 2.0, step / 4.0)]
        r1 = [2.0 * d[1] - d[0], 2.0 * d[2] - d[1]]
        return (4.0 * r1[1] - r1[0]) / 3.0

    return richardson(-1.0), richardson(1.0)


def detect_corners(family: SemigroupFamily, x: Any, t_grid: Sequence[float], step: float = 1e-5,
                   jump_threshold: float = 1e-3) -> List[Corner]:
    """
    Times where t -> F_t(x) has different one-sided derivatives

    Args:
        family: Semigroup family
        x: Interior point
        t_grid: Increasing scan grid of nonnegative times
        step: Smallest stencil and Richardson step
        jump_threshold: Smallest slope jump reported

    Returns:
        Corners in increasing time
    """
    X = as_points(x, family.dim)
    if X.shape[0] != 1:
        raise BadParameter("detect_corners takes a single point")
    times = np.asarray(t_grid, dtype=float)
    if times.size < 8:
        raise EmptySample("The scan grid needs at least 8 times")
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise BadParameter("The scan grid must be increasing and nonnegative")
    if not step > 0:
        raise BadParameter("step must be positive")

    u = _Trajectory(family, X)
    values = u.stack(times)
    corners: List[Corner] = []
    for first, last, component in _spike_windows(times, values, jump_threshold):
        if first - 3 < 0 or last + 3 >= times.size:
            logger.warning(f"Slope spike near t={times[first]:g} is too close to the grid ends to locate")
            continue
        left, right = slice(first - 3, first), slice(last + 1, last + 4)
        t_c = _crossing(times[left], values[left, component], times[right], values[right, component],
                        times[first - 1], times[last + 1])
        if t_c is None:
            continue
        spacing = float(np.median(np.diff(times[first - 3:last + 4])))
        t_c = _refine(u, t_c, spacing, step, component)
        if t_c - step < 0:
            continue
        left_slope, right_slope = one_sided_slopes(u, t_c, step)
        corner = Corner(float(t_c), left_slope, right_slope)
        if corner.jump <= jump_threshold:
            continue
        if corners and abs(corners[-1].t_corner - corner.t_corner) < spacing:
            continue
        logger.info(f"Corner of {family.name} at t={t_c:.9g} for x={X[0].tolist()}: jump {corner.jump:.3g}")
        corners.append(corner)
    return corners
