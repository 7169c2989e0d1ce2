"""
Catalog of semigroup families used as fixtures and reproduction targets.
"""

import logging
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from src.errors import BadParameter, TrajectoryEscape
from src.models.domain import DomainSpec
from src.models.family import FamilyKind, SemigroupFamily, SmoothMap, VectorField
from src.services.semigroups.expressions import compile_family, compile_map
from src.services.semigroups.integrator import FlowIntegrator

logger = logging.getLogger(__name__)


def _piecewise_branches(t: float, x: np.ndarray):
    ax = np.abs(x)
    with np.errstate(divide='ignore'):
        seam = np.log(2.0 * ax)
    outer = ax > 0.5
    # ties on the seam t = ln(2|x|) go to the first branch
    first = outer & (t <= seam)
    second = outer & (t > seam)
    return first, second


def piecewise_branch_family() -> SemigroupFamily:
    """
    The piecewise semigroup on (-1, 1):

        e^{-t} x            if |x| > 1/2 and t <= ln(2|x|)
        2 e^{-2t} x |x|     if |x| > 1/2 and t > ln(2|x|)
        e^{-2t} x           if |x| <= 1/2

    It is T-continuous but not T-Lipschitzian, and t -> F_t(x) has a corner
    at t = ln(2|x|) for |x| > 1/2.
    """
    domain = DomainSpec.interval(-1.0, 1.0)

    def evaluator(t: float, X: np.ndarray) -> np.ndarray:
        x = X[:, 0]
        first, second = _piecewise_branches(t, x)
        value = np.where(first, np.exp(-t) * x,
                         np.where(second, 2.0 * np.exp(-2.0 * t) * x * np.abs(x), np.exp(-2.0 * t) * x))
        return value[:, None]

    def derivative(t: float, X: np.ndarray) -> np.ndarray:
        x = X[:, 0]
        first, second = _piecewise_branches(t, x)
        value = np.where(first, np.exp(-t),
                         np.where(second, 4.0 * np.exp(-2.0 * t) * np.abs(x), np.exp(-2.0 * t)))
        return value[:, None, None]

    return SemigroupFamily(domain, evaluator, FamilyKind.CLOSED_FORM, 'piecewise',
                           derivative_fn=derivative)


def linear_family(A: Any, domain: Optional[DomainSpec] = None) -> SemigroupFamily:
    """
    F_t = exp(tA) on a domain (default: euclidean ball of radius 2 at the origin)

    The derivative is exp(tA) itself and the generator is x -> A x.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise BadParameter(f"Generator matrix must be square, got shape {A.shape}")
    dim = A.shape[0]
    if domain is None:
        domain = DomainSpec.ball(np.zeros(dim), 2.0)
    if domain.ambient_dim != dim:
        raise BadParameter("Matrix dimension must match the domain dimension")

    def evaluator(t: float, X: np.ndarray) -> np.ndarray:
        return X @ expm(t * A).T

    def derivative(t: float, X: np.ndarray) -> np.ndarray:
        return np.broadcast_to(expm(t * A), (X.shape[0], dim, dim)).copy()

    generator = VectorField(lambda X: X @ A.T, domain, lipschitz_hint=float(np.linalg.norm(A, 2)),
                            jacobian=lambda X: np.broadcast_to(A, (X.shape[0], dim, dim)).copy(),
                            name='linear')
    return SemigroupFamily(domain, evaluator, FamilyKind.MATRIX_EXPONENTIAL, 'linear',
                           params={'A': A.tolist()}, derivative_fn=derivative, generator=generator)


def flow_family(field: VectorField, rtol: Optional[float] = None,
                atol: Optional[float] = None) -> SemigroupFamily:
    """
    F_t(x) = u(t) where u' = f(u), u(0) = x

    The spatial derivative comes from the variational equation when the field
    has a Jacobian.
    """
    integrator = FlowIntegrator(field, rtol=rtol, atol=atol)
    derivative = None
    if field.jacobian is not None:
        derivative = lambda t, X: integrator.flow_with_derivative(t, X)[1]
    logger.info(f"Flow family initialized for {field.name}")
    return SemigroupFamily(field.domain, integrator.flow, FamilyKind.FLOW_GENERATED, f"flow:{field.name}",
                           params={'rtol': integrator.rtol, 'atol': integrator.atol},
                           derivative_fn=derivative, generator=field, tolerance=integrator.tolerance)


def iterate_extended_family(base: SemigroupFamily, step: float) -> SemigroupFamily:
    """
    F_t = F_r o (F_step)^k with t = k step + r, 0 <= r < step

    Long times are reached by iterating one short evaluation of the base
    family; the derivative follows by the chain rule along the iterates.
    """
    if not step > 0:
        raise BadParameter("The iteration step must be positive")
    domain = base.domain

    def split(t: float):
        k = int(np.floor(t / step + 1e-12))
        return k, max(0.0, t - k * step)

    def orbit(t: float, X: np.ndarray):
        k, r = split(t)
        states = [X]
        for i in range(1, k + 1):
            Y = base.eval(step, states[-1])
            if not np.all(domain.contains(Y)):
                raise TrajectoryEscape(f"Iterate {i} of F_{step:g} left the domain",
                                       escape_time=i * step, failing_k=i)
            states.append(Y)
        return states, r

    def evaluator(t: float, X: np.ndarray) -> np.ndarray:
        states, r = orbit(t, X)
        return base.eval(r, states[-1]) if r > 0 else states[-1]

    derivative = None
    if base.has_derivative:
        def derivative(t: float, X: np.ndarray) -> np.ndarray:
            states, r = orbit(t, X)
            D = np.broadcast_to(np.eye(base.dim), (X.shape[0], base.dim, base.dim)).copy()
            for Y in states[:-1]:
                D = np.einsum('nij,njk->nik', base.derivative(step, Y), D)
            if r > 0:
                D = np.einsum('nij,njk->nik', base.derivative(r, states[-1]), D)
            return D

    return SemigroupFamily(domain, evaluator, FamilyKind.ITERATE_EXTENDED, f"iterated:{base.name}",
                           params={'step': step, 'base': base.describe()}, derivative_fn=derivative,
                           generator=base.generator, tolerance=base.tolerance)


def expression_field(components: Sequence[str], domain: DomainSpec,
                     lipschitz_hint: Optional[float] = None) -> VectorField:
    fn, jacobian, exprs = compile_map(components, domain.ambient_dim)
    return VectorField(fn, domain, lipschitz_hint, jacobian, name=', '.join(str(e) for e in exprs))


def expression_map(components: Sequence[str], dim: int) -> SmoothMap:
    fn, jacobian, exprs = compile_map(components, dim)
    return SmoothMap(fn, dim, jacobian, name=', '.join(str(e) for e in exprs))


def expression_family(components: Sequence[str], domain: DomainSpec,
                      name: str = 'closed_form') -> SemigroupFamily:
    """Closed-form family from expressions in t and the coordinates"""
    fn, jacobian, exprs = compile_family(components, domain.ambient_dim)
    return SemigroupFamily(domain, fn, FamilyKind.CLOSED_FORM, name,
                           params={'components': [str(e) for e in exprs]}, derivative_fn=jacobian)


def disk_contraction_family() -> SemigroupFamily:
    """F_t(z) = e^{-t} z on the unit disk, as a 2D real family"""
    return linear_family(-np.eye(2), DomainSpec.ball([0.0, 0.0], 1.0))


def cubic_field(domain: Optional[DomainSpec] = None) -> VectorField:
    """f(x) = -x^3 on (-1, 1)"""
    return expression_field(['-x**3'], domain or DomainSpec.interval(-1.0, 1.0))


def rotation_field(domain: Optional[DomainSpec] = None) -> VectorField:
    """The -90 degree rotation generator f(x, y) = (y, -x)"""
    return expression_field(['x1', '-x0'], domain or DomainSpec.ball([0.0, 0.0], 2.0))


def build_family(spec: Dict[str, Any], domain: DomainSpec) -> SemigroupFamily:
    """
    Family from a validated scenario block:

        {'name': 'piecewise'}
        {'name': 'linear', 'A': [[...]]}
        {'name': 'flow', 'field': ['-x**3'], 'rtol': 1e-10, 'atol': 1e-10}
        {'name': 'closed_form', 'components': ['exp(-t)*x']}
        {'name': 'iterated', 'step': 0.05, 'base': {...}}
    """
    name = spec['name']
    if name == 'piecewise':
        return piecewise_branch_family()
    if name == 'linear':
        return linear_family(spec['A'], domain)
    if name == 'flow':
        field = expression_field(spec['field'], domain, spec.get('lipschitz_hint'))
        return flow_family(field, spec.get('rtol'), spec.get('atol'))
    if name == 'closed_form':
        return expression_family(spec['components'], domain)
    if name == 'iterated':
        return iterate_extended_family(build_family(spec['base'], domain), spec['step'])
    raise BadParameter(f"Unknown family: {name}")


FAMILY_NAMES = ('piecewise', 'linear', 'flow', 'closed_form', 'iterated')
