"""
Sampled estimators of Lipschitz and continuity moduli.

Sups over infinite sets are estimated from below by pair sampling; the
Lipschitz estimators additionally refine around the current worst pair.
The derivative route is the only one labelled as a certified upper bound.
"""

import logging
from typing import Any, Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import settings
from src.errors import BadParameter, ContractViolation, DegeneratePair, EmptySample, MarginViolation
from src.models.domain import DomainSpec, SubsetSpec, vector_norm
from src.models.family import SemigroupFamily, SmoothMap
from src.models.reports import (DERIVATIVE_CERTIFIED_UPPER_BOUND, SAMPLED_LOWER_BOUND,
                                ModulusReport)
from src.models.sample import SampleSet
from src.services.semigroups.operations import derivative_matrices, evaluate

logger = logging.getLogger(__name__)

MapLike = Union[SmoothMap, Callable[[np.ndarray], np.ndarray]]


def default_t_grid(t_max: float = 0.1, points: Optional[int] = None) -> List[float]:
    """Geometric grid t_k = t_max * 2^-k"""
    points = settings.t_grid_points if points is None else points
    return [t_max * 2.0 ** (-k) for k in range(points)]


def operator_norm(M: np.ndarray, norm_kind: str) -> np.ndarray:
    """Induced matrix norm (spectral or max-row-sum) of a stack of matrices"""
    ord_ = 2 if norm_kind == 'euclidean' else np.inf
    M = np.asarray(M, dtype=float)
    if M.ndim == 2:
        return np.asarray(np.linalg.norm(M, ord_))
    return np.array([np.linalg.norm(m, ord_) for m in M])


def _quotients(F: MapLike, X: np.ndarray, Y: np.ndarray, norm_kind: str) -> np.ndarray:
    denominators = vector_norm(X - Y, norm_kind)
    if np.any(denominators == 0):
        i = int(np.nonzero(denominators == 0)[0][0])
        raise DegeneratePair(f"Pair {i} has x = x* = {X[i].tolist()}")
    return vector_norm(np.asarray(F(X)) - np.asarray(F(Y)), norm_kind) / denominators


def _pair_witness(x: np.ndarray, y: np.ndarray) -> dict:
    return {'x': x.tolist(), 'partner': y.tolist()}


def lip_seminorm(F: MapLike, pairs: SampleSet) -> ModulusReport:
    """
    max over pairs of ||F(x) - F(x*)|| / ||x - x*||, a lower bound of Lip(F)
    """
    if pairs.n_pairs == 0:
        raise EmptySample("No pairs to estimate a Lipschitz seminorm from")
    q = _quotients(F, pairs.pairs_x, pairs.pairs_y, pairs.norm_kind)
    i = int(np.argmax(q))
    return ModulusReport(getattr(F, 'name', 'lip'), [None], [float(q[i])],
                         [_pair_witness(pairs.pairs_x[i], pairs.pairs_y[i])],
                         SAMPLED_LOWER_BOUND, pairs.describe())


def _refine_pair(F: MapLike, x: np.ndarray, y: np.ndarray, best: float, d_hat: SubsetSpec,
                 mu: float, rounds: int) -> Tuple[float, np.ndarray, np.ndarray, int]:
    """Local search around the worst pair: nudge the base point, rescale the displacement"""
    domain = d_hat.parent
    norm_kind = domain.norm_kind
    dim = x.shape[0]
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    h = 0.25 * float(vector_norm(y - x, norm_kind))
    tried = 0
    for _ in range(rounds):
        bases = np.vstack([x[None, :], x[None, :] + h * axes])
        disp = y - x
        cand_x, cand_y = [], []
        for base in bases:
            for scale in (0.5, 1.0, 2.0):
                d = scale * disp
                size = float(vector_norm(d, norm_kind))
                if size == 0:
                    continue
                if size > mu:
                    d = d * (mu / size)
                cand_x.append(base)
                cand_y.append(base + d)
        cand_x, cand_y = np.array(cand_x), np.array(cand_y)
        keep = d_hat.contains(cand_x) & domain.contains(cand_y)
        cand_x, cand_y = cand_x[keep], cand_y[keep]
        if cand_x.shape[0]:
            q = _quotients(F, cand_x, cand_y, norm_kind)
            tried += cand_x.shape[0]
            i = int(np.argmax(q))
            if q[i] > best:
                best, x, y = float(q[i]), cand_x[i], cand_y[i]
        h /= 2.0
    return best, x, y, tried


def lip_local(F: MapLike, d_hat: SubsetSpec, mu: float, pairs: SampleSet,
              refine_rounds: Optional[int] = None) -> ModulusReport:
    """
    Sampled lower bound of the localized seminorm Lip_{D,mu}(F)

    Args:
        F: Map evaluated on (n, d) stacks
        d_hat: Subset the base points must lie in
        mu: Pair radius
        pairs: Pairs with x in d_hat and ||x - x*|| <= mu
        refine_rounds: Local refinement rounds around the witness (0 disables)

    Returns:
        Single-entry ModulusReport with the witness pair
    """
    if mu > d_hat.margin * (1.0 + 1e-12):
        raise MarginViolation(f"mu = {mu:.6g} exceeds the subset margin {d_hat.margin:.6g}")
    if pairs.n_pairs == 0:
        raise EmptySample("No pairs to estimate a localized seminorm from")
    pairs.assert_contract(mu)
    outside = ~d_hat.contains(pairs.pairs_x)
    if np.any(outside):
        i = int(np.nonzero(outside)[0][0])
        raise ContractViolation(f"Pair {i} has base point {pairs.pairs_x[i].tolist()} outside the subset")

    q = _quotients(F, pairs.pairs_x, pairs.pairs_y, pairs.norm_kind)
    i = int(np.argmax(q))
    best, x, y = float(q[i]), pairs.pairs_x[i], pairs.pairs_y[i]
    rounds = settings.refine_rounds if refine_rounds is None else refine_rounds
    tried = 0
    if rounds > 0:
        best, x, y, tried = _refine_pair(F, x, y, best, d_hat, mu, rounds)
    return ModulusReport(getattr(F, 'name', 'lip_local'), [None], [best], [_pair_witness(x, y)],
                         SAMPLED_LOWER_BOUND, pairs.describe(),
                         extras={'mu': mu, 'refine_rounds': rounds, 'refined_pairs': tried})


def _as_time_maps(family_or_maps: Union[SemigroupFamily, Callable[[float], MapLike]]):
    if isinstance(family_or_maps, SemigroupFamily):
        family = family_or_maps
        return lambda t: (lambda X: evaluate(family, t, X))
    return family_or_maps


def _stack_reports(name: str, reports: Sequence[ModulusReport], t_grid: Sequence[float],
                   estimator_kind: str, descriptor: dict, extras: dict) -> ModulusReport:
    return ModulusReport(name, list(t_grid), [r.values[0] for r in reports],
                         [r.witnesses[0] for r in reports], estimator_kind, descriptor, extras)


def t_continuity_modulus(maps: Union[SemigroupFamily, Callable[[float], MapLike]], d_hat: SubsetSpec,
                         t0: float, t_grid: Sequence[float], sample: SampleSet) -> ModulusReport:
    """
    Per-t sup over the sample of ||f_t(x) - f_{t0}(x)||

    `maps` is a SemigroupFamily (f_t = F_t) or any callable t -> map.
    Decay toward t0 is reported, not assumed.
    """
    if not t_grid:
        raise EmptySample("Empty t-grid")
    if any(t < 0 for t in t_grid) or t0 < 0:
        raise BadParameter("Times must be nonnegative")
    at = _as_time_maps(maps)
    X = sample.points
    outside = ~d_hat.contains(X)
    if np.any(outside):
        raise ContractViolation(f"Sample point {X[np.argmax(outside)].tolist()} is outside the subset")
    anchor = np.asarray(at(t0)(X))
    values, witnesses = [], []
    for t in t_grid:
        gaps = vector_norm(np.asarray(at(t)(X)) - anchor, sample.norm_kind)
        i = int(np.argmax(gaps))
        values.append(float(gaps[i]))
        witnesses.append({'x': X[i].tolist()})
    return ModulusReport('t_continuity', list(t_grid), values, witnesses, SAMPLED_LOWER_BOUND,
                         sample.describe(), extras={'t0': t0})


def t_lipschitz_modulus(family: SemigroupFamily, d_hat: SubsetSpec, mu: float, t_grid: Sequence[float],
                        pairs: SampleSet, refine_rounds: Optional[int] = None) -> ModulusReport:
    """Per-t sampled lower bound of Lip_{D,mu}(F_t - Id)"""
    if not t_grid:
        raise EmptySample("Empty t-grid")
    reports = [lip_local(family.at(t).minus_identity(), d_hat, mu, pairs, refine_rounds) for t in t_grid]
    return _stack_reports('t_lipschitz', reports, t_grid, SAMPLED_LOWER_BOUND, pairs.describe(),
                          {'mu': mu, 'family': family.name})


def uniform_lipschitz_modulus(family: SemigroupFamily, t_grid: Sequence[float],
                              pairs: SampleSet) -> ModulusReport:
    """Per-t sampled Lip(F_t); a uniformly k-Lipschitzian family keeps every value <= k"""
    if not t_grid:
        raise EmptySample("Empty t-grid")
    reports = [lip_seminorm(family.at(t), pairs) for t in t_grid]
    return _stack_reports('uniform_lipschitz', reports, t_grid, SAMPLED_LOWER_BOUND, pairs.describe(),
                          {'family': family.name})


def _derivative_points(sample: SampleSet) -> np.ndarray:
    if sample.n_pairs:
        return np.vstack([sample.points, sample.pairs_y])
    return sample.points


def map_derivative_modulus(phi: SmoothMap, domain: DomainSpec, points: np.ndarray,
                           step: Optional[float] = None) -> ModulusReport:
    """sup over points of ||Id - phi'(x)|| for a single map"""
    matrices, method, used_step = derivative_matrices(phi, points, domain, step)
    norms = operator_norm(np.eye(phi.dim)[None, :, :] - matrices, domain.norm_kind)
    i = int(np.argmax(norms))
    kind = DERIVATIVE_CERTIFIED_UPPER_BOUND if method == 'analytic' else SAMPLED_LOWER_BOUND
    return ModulusReport(f"derivative:{phi.name}", [None], [float(norms[i])], [{'x': points[i].tolist()}],
                         kind, extras={'method': method, 'step': used_step})


def derivative_modulus(family: Union[SemigroupFamily, SmoothMap], d_mu: SubsetSpec,
                       t_grid: Optional[Sequence[float]], sample: SampleSet,
                       step: Optional[float] = None) -> ModulusReport:
    """
    Per-t sup of the operator norm ||Id - F_t'(x)|| over the sample points
    and pair partners (all of which lie in d_mu)

    A SmoothMap is treated as a single map (t_grid = [None]).
    """
    points = _derivative_points(sample)
    outside = ~d_mu.contains(points)
    if np.any(outside):
        raise ContractViolation(f"Point {points[np.argmax(outside)].tolist()} is outside the inflated subset")
    domain = d_mu.parent
    if isinstance(family, SmoothMap):
        report = map_derivative_modulus(family, domain, points, step)
        report.sample_descriptor = sample.describe()
        return report
    if not t_grid:
        raise EmptySample("Empty t-grid")
    reports = [map_derivative_modulus(family.at(t), domain, points, step) for t in t_grid]
    kind = reports[0].estimator_kind
    return _stack_reports('derivative', reports, t_grid, kind, sample.describe(),
                          {'family': family.name, 'method': reports[0].extras['method'],
                           'step': reports[0].extras['step']})


def derivative_continuity_modulus(family: SemigroupFamily, d_mu: SubsetSpec, t0: float,
                                  t_grid: Sequence[float], sample: SampleSet,
                                  step: Optional[float] = None) -> ModulusReport:
    """Per-t sup over the sample of ||F_t'(x) - F_{t0}'(x)||"""
    if not t_grid:
        raise EmptySample("Empty t-grid")
    points = _derivative_points(sample)
    domain = d_mu.parent
    anchor, method, used_step = derivative_matrices(family.at(t0), points, domain, step)
    values, witnesses = [], []
    for t in t_grid:
        matrices, _, _ = derivative_matrices(family.at(t), points, domain, step)
        norms = operator_norm(matrices - anchor, domain.norm_kind)
        i = int(np.argmax(norms))
        values.append(float(norms[i]))
        witnesses.append({'x': points[i].tolist()})
    return ModulusReport('derivative_continuity', list(t_grid), values, witnesses, SAMPLED_LOWER_BOUND,
                         sample.describe(), extras={'t0': t0, 'method': method, 'step': used_step})


def witness_value(report: ModulusReport, index: int, F: MapLike, norm_kind: str) -> float:
    """Re-evaluate the quotient of a pair witness"""
    w: Any = report.witnesses[index]
    x, y = np.atleast_2d(w['x']), np.atleast_2d(w['partner'])
    return float(_quotients(F, x, y, norm_kind)[0])
