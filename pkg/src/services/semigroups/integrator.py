"""
Flow maps of autonomous vector fields.

A whole stack of initial points is integrated as one flattened system with
scipy's DOP853 embedded pair. Leaving the domain is caught by a terminal
event on the smallest boundary margin of the stack.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.config import settings
from src.errors import StiffnessFailure, TrajectoryEscape, Unsupported
from src.models.domain import as_points
from src.models.family import VectorField

logger = logging.getLogger(__name__)


class FlowIntegrator:
    """
    Integrates u' = f(u) forward in time on a stack of initial points
    """

    def __init__(self, field: VectorField, rtol: Optional[float] = None,
                 atol: Optional[float] = None, method: str = 'DOP853'):
        self.field = field
        self.rtol = settings.integrator_rtol if rtol is None else rtol
        self.atol = settings.integrator_atol if atol is None else atol
        self.method = method
        logger.info(f"Flow integrator ready for {field.name} ({method}, rtol={self.rtol:g}, atol={self.atol:g})")

    @property
    def tolerance(self) -> float:
        return max(self.rtol, self.atol)

    def _escape_event(self, n: int):
        domain = self.field.domain
        dim = self.field.dim

        def event(s, y):
            return float(np.min(domain.margin(y[:n * dim].reshape(n, dim))))

        event.terminal = True
        event.direction = -1
        return event

    def _solve(self, rhs, y0: np.ndarray, t: float, n: int):
        event = self._escape_event(n)
        solution = solve_ivp(rhs, (0.0, t), y0, method=self.method, rtol=self.rtol,
                             atol=self.atol, events=event)
        if solution.status == -1:
            logger.error(f"Integration of {self.field.name} failed: {solution.message}")
            raise StiffnessFailure(f"Integrator failed before t = {t:g}: {solution.message}")
        if solution.status == 1:
            escape_time = float(solution.t_events[0][0])
            raise TrajectoryEscape(f"Trajectory of {self.field.name} left the domain at t = {escape_time:.6g}",
                                   escape_time=escape_time)
        return solution.y[:, -1]

    def flow(self, t: float, X) -> np.ndarray:
        """F_t on a stack of points"""
        dim = self.field.dim
        X = as_points(X, dim)
        if t == 0:
            return X.copy()
        n = X.shape[0]

        def rhs(s, y):
            return self.field(y.reshape(n, dim)).ravel()

        return self._solve(rhs, X.ravel(), t, n).reshape(n, dim)

    def flow_with_derivative(self, t: float, X) -> Tuple[np.ndarray, np.ndarray]:
        """F_t and its spatial derivative from the variational equation J' = Df(u) J"""
        if self.field.jacobian is None:
            raise Unsupported(f"Field {self.field.name} has no Jacobian for the variational equation")
        dim = self.field.dim
        X = as_points(X, dim)
        n = X.shape[0]
        J0 = np.broadcast_to(np.eye(dim), (n, dim, dim))
        if t == 0:
            return X.copy(), J0.copy()

        def rhs(s, y):
            U = y[:n * dim].reshape(n, dim)
            J = y[n * dim:].reshape(n, dim, dim)
            dJ = np.einsum('nij,njk->nik', self.field.derivative(U), J)
            return np.concatenate([self.field(U).ravel(), dJ.ravel()])

        y = self._solve(rhs, np.concatenate([X.ravel(), J0.ravel()]), t, n)
        return y[:n * dim].reshape(n, dim), y[n * dim:].reshape(n, dim, dim)
