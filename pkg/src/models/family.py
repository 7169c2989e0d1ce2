from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from src.errors import BadParameter, Unsupported
from src.models.domain import DomainSpec, as_points, jsonable

PointMap = Callable[[np.ndarray], np.ndarray]
TimeMap = Callable[[float, np.ndarray], np.ndarray]


class FamilyKind:
    """Provenance tags of a semigroup family"""
    CLOSED_FORM = 'closed_form'
    MATRIX_EXPONENTIAL = 'matrix_exponential'
    FLOW_GENERATED = 'flow_generated'
    ITERATE_EXTENDED = 'iterate_extended'

    ALL = (CLOSED_FORM, MATRIX_EXPONENTIAL, FLOW_GENERATED, ITERATE_EXTENDED)


@dataclass(frozen=True, eq=False)
class SmoothMap:
    """
    A self-map evaluated on stacks of points, with an optional Jacobian.

    `fn` takes an (n, d) array and returns an (n, d) array; `jacobian`
    returns an (n, d, d) array of derivative matrices.
    """

    fn: PointMap
    dim: int
    jacobian: Optional[PointMap] = None
    name: str = 'map'

    def __call__(self, X: Any) -> np.ndarray:
        X = as_points(X, self.dim)
        return np.asarray(self.fn(X), dtype=float).reshape(X.shape)

    @property
    def has_derivative(self) -> bool:
        return self.jacobian is not None

    def derivative(self, X: Any) -> np.ndarray:
        if self.jacobian is None:
            raise Unsupported(f"{self.name} has no analytic derivative")
        X = as_points(X, self.dim)
        return np.asarray(self.jacobian(X), dtype=float).reshape(X.shape[0], self.dim, self.dim)

    def minus_identity(self) -> 'SmoothMap':
        jac = None
        if self.jacobian is not None:
            jac = lambda X: self.derivative(X) - np.eye(self.dim)[None, :, :]
        return SmoothMap(lambda X: self(X) - X, self.dim, jac, f"{self.name} - Id")

    def scaled(self, c: float) -> 'SmoothMap':
        jac = None
        if self.jacobian is not None:
            jac = lambda X: c * self.derivative(X)
        return SmoothMap(lambda X: c * self(X), self.dim, jac, f"{c:g}*{self.name}")

    def power(self, k: int) -> 'SmoothMap':
        """k-fold composition; the Jacobian follows the chain rule"""
        if k < 0:
            raise BadParameter("Composition power must be nonnegative")

        def fn(X):
            Y = X
            for _ in range(k):
                Y = self(Y)
            return Y

        jac = None
        if self.jacobian is not None:
            def jac(X):
                J = np.broadcast_to(np.eye(self.dim), (X.shape[0], self.dim, self.dim)).copy()
                Y = X
                for _ in range(k):
                    J = np.einsum('nij,njk->nik', self.derivative(Y), J)
                    Y = self(Y)
                return J

        return SmoothMap(fn, self.dim, jac, f"{self.name}^{k}")

    @classmethod
    def identity(cls, dim: int) -> 'SmoothMap':
        return cls(lambda X: X.copy(), dim,
                   lambda X: np.broadcast_to(np.eye(dim), (X.shape[0], dim, dim)).copy(), 'Id')


@dataclass(frozen=True, eq=False)
class VectorField:
    """Autonomous field u' = f(u) on a domain"""

    f: PointMap
    domain: DomainSpec
    lipschitz_hint: Optional[float] = None
    jacobian: Optional[PointMap] = None
    name: str = 'field'

    @property
    def dim(self) -> int:
        return self.domain.ambient_dim

    def __call__(self, X: Any) -> np.ndarray:
        X = as_points(X, self.dim)
        return np.asarray(self.f(X), dtype=float).reshape(X.shape)

    def derivative(self, X: Any) -> np.ndarray:
        if self.jacobian is None:
            raise Unsupported(f"Field {self.name} has no Jacobian")
        X = as_points(X, self.dim)
        return np.asarray(self.jacobian(X), dtype=float).reshape(X.shape[0], self.dim, self.dim)

    def sup_norm(self, X: Any) -> float:
        """Sampled sup of ||f|| over the given points (boundedness check)"""
        values = self.domain.norm(self(X))
        return float(np.max(values)) if values.size else 0.0


@dataclass(frozen=True, eq=False)
class SemigroupFamily:
    """
    Two-parameter map (t, x) -> F_t(x) on a domain.

    `evaluator(t, X)` maps an (n, d) stack at a scalar time; `derivative_fn`
    returns the spatial derivatives as (n, d, d). `tolerance` is the
    evaluation accuracy (0 for closed forms, the integrator tolerance for
    flows).
    """

    domain: DomainSpec
    evaluator: TimeMap
    kind: str
    name: str
    params: Dict[str, Any] = field(default_factory=dict)
    derivative_fn: Optional[TimeMap] = None
    generator: Optional[VectorField] = None
    tolerance: float = 0.0

    def __post_init__(self):
        if self.kind not in FamilyKind.ALL:
            raise BadParameter(f"Unknown family kind: {self.kind}")

    @property
    def dim(self) -> int:
        return self.domain.ambient_dim

    @property
    def has_derivative(self) -> bool:
        return self.derivative_fn is not None

    def eval(self, t: float, X: Any) -> np.ndarray:
        X = as_points(X, self.dim)
        return np.asarray(self.evaluator(float(t), X), dtype=float).reshape(X.shape)

    def derivative(self, t: float, X: Any) -> np.ndarray:
        if self.derivative_fn is None:
            raise Unsupported(f"Family {self.name} has no analytic derivative")
        X = as_points(X, self.dim)
        return np.asarray(self.derivative_fn(float(t), X), dtype=float).reshape(X.shape[0], self.dim, self.dim)

    def at(self, t: float) -> SmoothMap:
        """F_t as a map"""
        jac = (lambda X: self.derivative(t, X)) if self.has_derivative else None
        return SmoothMap(lambda X: self.eval(t, X), self.dim, jac, f"F_{t:g}")

    def quotient(self, t: float) -> SmoothMap:
        """Difference quotient f_t = (F_t - Id) / t as a map"""
        if not t > 0:
            raise BadParameter("Difference quotients need t > 0")
        return self.at(t).minus_identity().scaled(1.0 / t)

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'kind': self.kind, 'params': jsonable(self.params),
                'tolerance': self.tolerance}

