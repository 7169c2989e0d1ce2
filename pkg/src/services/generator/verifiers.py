"""
Pointwise verifiers of the iterate-telescoping inequalities.

The Lipschitz constant l is always measured on the sample and is therefore a
lower bound of the true sup. The pairs (x, phi(x)) that the telescoping
argument actually uses are added to the sample before measuring, so a
sampled failure beyond tolerance is a genuine refutation of the instance.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import BadParameter, EmptySample, HypothesisNotMet, Unsupported
from src.models.domain import SubsetSpec, as_points, vector_norm
from src.models.family import SemigroupFamily, SmoothMap
from src.models.reports import InequalityReport, PathLengthCertificate
from src.models.sample import SampleSet
from src.services.geometry.domains import inflate
from src.services.geometry.sampling import sample as draw_sample
from src.services.moduli.estimators import lip_local, map_derivative_modulus, operator_norm
from src.services.semigroups.operations import derivative_matrices, evaluate, iterate

logger = logging.getLogger(__name__)

# interior points per pair segment when measuring derivative bounds on D_mu
_SEGMENT_POINTS = 8
# extra slack for finite-difference derivative bounds
_FD_ALLOWANCE = 1e-6


def difference_quotient(family: SemigroupFamily, t: float, x) -> np.ndarray:
    """f_t(x) = (F_t(x) - x) / t"""
    if not t > 0:
        raise BadParameter("Difference quotients need t > 0")
    X = as_points(x, family.dim)
    values = (evaluate(family, t, X) - X) / t
    return values[0] if np.ndim(x) <= 1 and values.shape[0] == 1 else values


def _check_displacement(phi: SmoothMap, X: np.ndarray, mu: float, norm_kind: str) -> np.ndarray:
    moves = vector_norm(X - phi(X), norm_kind)
    i = int(np.argmax(moves)) if moves.size else 0
    if moves.size and moves[i] > mu * (1.0 + 1e-12):
        raise HypothesisNotMet(f"sup ||x - phi(x)|| = {moves[i]:.6g} exceeds mu = {mu:.6g}",
                               hypothesis='displacement', witness=X[i].tolist())
    return moves


def _iterate_pairs(phi: SmoothMap, X: np.ndarray, moves: np.ndarray, sample: SampleSet,
                   mu: float) -> SampleSet:
    pairs = sample.restricted(mu)
    keep = moves > 0
    return pairs.with_pairs(X[keep], phi(X[keep]))


def _measured_ell(phi: SmoothMap, d_hat: SubsetSpec, mu: float, p: int,
                  pairs: SampleSet) -> Tuple[float, List[float], Optional[dict]]:
    if pairs.n_pairs == 0:
        return 0.0, [0.0] * p, None
    values, witness = [], None
    for k in range(1, p + 1):
        report = lip_local(phi.power(k).minus_identity(), d_hat, mu, pairs)
        values.append(report.values[0])
        if report.values[0] >= max(values):
            witness = dict(report.witnesses[0], k=k)
    return max(values), values, witness


def _resolve_ell(measured: float, ell: Optional[float], witness: Optional[dict], tolerance: float,
                 name: str) -> float:
    if ell is None:
        return measured
    if measured > ell + tolerance:
        raise HypothesisNotMet(f"Sampled {name} = {measured:.6g} exceeds the stated l = {ell:.6g}",
                               hypothesis='lipschitz', witness=witness)
    return ell


def verify_lemma_iterates(phi: SmoothMap, d_hat: SubsetSpec, mu: float, p: int, sample: SampleSet,
                          tolerance: float = 1e-9, ell: Optional[float] = None) -> InequalityReport:
    """
    Check ||x - phi^p(x) - p (x - phi(x))|| <= (p - 1) l ||x - phi(x)|| on the sample

    Args:
        phi: Self-map of the domain
        d_hat: Subset holding the sample points
        mu: Localization radius
        p: Number of iterates (>= 1)
        sample: Points of d_hat with close pairs
        tolerance: Absolute slack on every margin
        ell: Stated Lipschitz bound; measured from the sample when omitted

    Raises:
        HypothesisNotMet: a sampled hypothesis fails (displacement above mu or
            a measured seminorm above the stated l)
    """
    if int(p) != p or p < 1:
        raise BadParameter(f"p must be a positive integer, got {p}")
    p = int(p)
    domain = d_hat.parent
    X = sample.points
    moves = _check_displacement(phi, X, mu, domain.norm_kind)
    pairs = _iterate_pairs(phi, X, moves, sample, mu)
    measured, per_k, witness = _measured_ell(phi, d_hat, mu, p, pairs)
    ell_used = _resolve_ell(measured, ell, witness, tolerance, 'Lip(phi^k - Id)')

    images = iterate(phi, p, X, domain)
    lhs = vector_norm(X - images - p * (X - phi(X)), domain.norm_kind)
    rhs = (p - 1) * ell_used * moves
    return InequalityReport('lemma_iterates', X.tolist(), lhs.tolist(), rhs.tolist(), tolerance,
                            {'map': phi.name, 'p': p, 'mu': mu, 'ell': ell_used, 'ell_measured': measured,
                             'ell_per_k': per_k, 'ell_kind': 'sampled' if ell is None else 'stated',
                             'sample': sample.describe()})


def verify_corollary_quotients(family: SemigroupFamily, t0: float, p: int, d_hat: SubsetSpec, mu: float,
                               sample: SampleSet, tolerance: float = 1e-9,
                               ell: Optional[float] = None) -> InequalityReport:
    """
    Check ||f_{p t0}(x) - f_{t0}(x)|| <= (p - 1)/p * l * ||f_{t0}(x)||

    The hypotheses are those of the iterate lemma for phi = F_{t0}, since
    F_{t0}^k = F_{k t0} and t0 k f_{t0 k} = F_{k t0} - Id.
    """
    if not t0 > 0:
        raise BadParameter("t0 must be positive")
    if int(p) != p or p < 1:
        raise BadParameter(f"p must be a positive integer, got {p}")
    p = int(p)
    domain = d_hat.parent
    X = sample.points
    phi = SmoothMap(lambda Y: evaluate(family, t0, Y), family.dim, name=f"F_{t0:g}")
    try:
        moves = _check_displacement(phi, X, mu, domain.norm_kind)
    except HypothesisNotMet as e:
        raise HypothesisNotMet(f"sup ||f_t0(x)|| exceeds mu / t0 ({e})", hypothesis='quotient_bound',
                               witness=e.witness)
    pairs = _iterate_pairs(phi, X, moves, sample, mu)
    values, witness = [], None
    for k in range(1, p + 1):
        if pairs.n_pairs == 0:
            values.append(0.0)
            continue
        Fk = SmoothMap(lambda Y, k=k: evaluate(family, k * t0, Y), family.dim, name=f"F_{k * t0:g}")
        report = lip_local(Fk.minus_identity(), d_hat, mu, pairs)
        values.append(report.values[0])
        if report.values[0] >= max(values):
            witness = dict(report.witnesses[0], k=k)
    measured = max(values)
    ell_used = _resolve_ell(measured, ell, witness, tolerance, 'Lip(t0 k f_{t0 k})')

    f_t0 = (phi(X) - X) / t0
    f_pt0 = (evaluate(family, p * t0, X) - X) / (p * t0)
    lhs = vector_norm(f_pt0 - f_t0, domain.norm_kind)
    rhs = (p - 1) / p * ell_used * vector_norm(f_t0, domain.norm_kind)
    return InequalityReport('corollary_quotients', X.tolist(), lhs.tolist(), rhs.tolist(), tolerance,
                            {'family': family.name, 't0': t0, 'p': p, 'mu': mu, 'ell': ell_used,
                             'ell_measured': measured, 'ell_per_k': values,
                             'ell_kind': 'sampled' if ell is None else 'stated',
                             'sample': sample.describe()})


def _segment_points(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    s = np.linspace(0.0, 1.0, _SEGMENT_POINTS + 2)[None, :, None]
    segments = X[:, None, :] + s * (Y - X)[:, None, :]
    return segments.reshape(-1, X.shape[1])


def verify_lemma_derivative(phi: SmoothMap, d_hat: SubsetSpec, mu: float, sample: SampleSet,
                            tolerance: float = 1e-9, step: Optional[float] = None) -> InequalityReport:
    """
    Check the sampled Lip_{D,mu}(phi - Id) against l = sup over D_mu of ||Id - phi'(x)||

    l is measured on the sample points, along every pair segment and along
    the segment of the refined seminorm witness, all of which lie in D_mu.
    """
    d_mu = inflate(d_hat, mu)
    domain = d_hat.parent
    pairs = sample.restricted(mu)
    if pairs.n_pairs == 0:
        raise EmptySample("No pairs within mu to test the seminorm on")
    moved = phi.minus_identity()
    q = vector_norm(moved(pairs.pairs_x) - moved(pairs.pairs_y), domain.norm_kind) / pairs.displacements()
    seminorm = lip_local(moved, d_hat, mu, pairs)
    # the refined witness pair need not lie on a sampled segment
    wx, wy = (np.array([seminorm.witnesses[0][key]]) for key in ('x', 'partner'))

    points = np.vstack([sample.points, _segment_points(pairs.pairs_x, pairs.pairs_y), _segment_points(wx, wy)])
    bound = map_derivative_modulus(phi, domain, points, step)
    ell = bound.values[0]
    method = bound.extras['method']
    allowance = _FD_ALLOWANCE if method == 'finite_difference' else 0.0
    lhs = q.tolist() + [seminorm.values[0]]
    points_out = pairs.pairs_x.tolist() + [seminorm.witnesses[0]['x']]
    rhs = [ell] * len(lhs)
    return InequalityReport('lemma_derivative', points_out, lhs, rhs, tolerance + allowance,
                            {'map': phi.name, 'mu': mu, 'ell': ell, 'ell_witness': bound.witnesses[0],
                             'derivative_method': method, 'step': bound.extras['step'],
                             'd_mu_margin': d_mu.margin, 'sample': sample.describe()})


def lemma_chain_check(family: SemigroupFamily, d_hat: SubsetSpec, mu: float, t: float, p: int,
                      sample: SampleSet, tolerance: float = 1e-9) -> List[InequalityReport]:
    """
    Derivative lemma for F_{kt}, k = 1..p, feeding the iterate lemma for
    phi = F_t with l = the largest derivative bound

    Returns:
        The p derivative reports followed by the iterate report
    """
    reports = [verify_lemma_derivative(family.at(k * t), d_hat, mu, sample, tolerance) for k in range(1, p + 1)]
    ell = max(r.inputs_echo['ell'] for r in reports)
    slack = max(r.tolerance for r in reports)
    phi = family.at(t)
    reports.append(verify_lemma_iterates(phi, d_hat, mu, p, sample, slack, ell=ell))
    logger.info(f"Lemma chain for {family.name} at t={t:g}, p={p}: l={ell:.6g}")
    return reports


def verify_transfer_estimate(f_family: SemigroupFamily, d1: SubsetSpec,
                             certificate: Optional[PathLengthCertificate], t0: float,
                             t_grid: Sequence[float], sample: SampleSet, tolerance: float = 1e-9,
                             anchor=None, n_d2_points: int = 401) -> InequalityReport:
    """
    Check sup_{d1} ||f_t - f_t0|| <= (L + 1) eps_t for each t in the grid, where

        eps_t = max(sup_{d2} ||f_t' - f_t0'||, ||f_t(x1) - f_t0(x1)||)

    and (d2, L) is a finite path-length certificate for d1.
    """
    if certificate is None or certificate.is_refutation or certificate.d2 is None:
        raise Unsupported("The transfer estimate needs a finite path-length certificate for d1")
    if not t_grid:
        raise EmptySample("Empty t-grid")
    domain = d1.parent
    d2, L = certificate.d2, certificate.L_bound
    X = sample.points
    x1 = X[:1] if anchor is None else as_points(anchor, domain.ambient_dim)
    if not np.all(d1.contains(x1)):
        raise BadParameter("The anchor point must lie in d1")

    d2_points = draw_sample(d2, d2.margin / 2.0, 'grid', n_points=n_d2_points, n_pairs=0).points
    base = f_family.at(t0)
    base_jac, method, step = derivative_matrices(base, d2_points, domain)
    base_values = base(X)
    base_anchor = base(x1)

    points, lhs, rhs, eps = [], [], [], []
    for t in t_grid:
        ft = f_family.at(t)
        jac, _, _ = derivative_matrices(ft, d2_points, domain)
        eps_t = max(float(np.max(operator_norm(jac - base_jac, domain.norm_kind))),
                    float(vector_norm(ft(x1) - base_anchor, domain.norm_kind)[0]))
        gaps = vector_norm(ft(X) - base_values, domain.norm_kind)
        i = int(np.argmax(gaps))
        points.append(X[i].tolist())
        lhs.append(float(gaps[i]))
        rhs.append((L + 1.0) * eps_t)
        eps.append(eps_t)
    return InequalityReport('transfer_estimate', points, lhs, rhs, tolerance,
                            {'family': f_family.name, 't0': t0, 't_grid': list(t_grid), 'L_bound': L,
                             'eps': eps, 'anchor': x1[0].tolist(), 'derivative_method': method,
                             'step': step, 'sample': sample.describe()})
