"""
Report types produced by the estimators and verifiers.

Every report can flatten itself to CSV rows (header + body) and to a
JSON-ready dict; the reporting service adds the resolved config and version.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from src.models.domain import PathCurve, SubsetSpec, jsonable

SAMPLED_LOWER_BOUND = 'sampled_lower_bound'
DERIVATIVE_CERTIFIED_UPPER_BOUND = 'derivative_certified_upper_bound'


def _coords(prefix: str, dim: int) -> List[str]:
    return [f"{prefix}{k + 1}" for k in range(dim)]


@dataclass
class ModulusReport:
    """
    Per-t modulus values with the point or pair that witnesses each one.

    A single-map report uses t_grid = [None].
    """

    name: str
    t_grid: List[Optional[float]]
    values: List[float]
    witnesses: List[Dict[str, Any]]
    estimator_kind: str = SAMPLED_LOWER_BOUND
    sample_descriptor: Dict[str, Any] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)

    def max_value(self) -> float:
        return float(max(self.values)) if self.values else 0.0

    def decays_below(self, tolerance: float) -> bool:
        """
        True when the values ordered toward the anchor time are
        nonincreasing (up to rounding) and the last one is below tolerance.
        """
        anchor = self.extras.get('t0', 0.0) or 0.0
        order = sorted(range(len(self.t_grid)), key=lambda i: -abs((self.t_grid[i] or 0.0) - anchor))
        ordered = [self.values[i] for i in order]
        if not ordered or ordered[-1] >= tolerance:
            return False
        return all(b <= a + 1e-12 for a, b in zip(ordered, ordered[1:]))

    def csv_header(self) -> List[str]:
        dim = self._witness_dim()
        header = ['t', 'value'] + _coords('x', dim)
        if any('partner' in w for w in self.witnesses):
            header += _coords('y', dim)
        return header

    def csv_rows(self) -> List[List[Any]]:
        paired = any('partner' in w for w in self.witnesses)
        dim = self._witness_dim()
        rows = []
        for t, value, witness in zip(self.t_grid, self.values, self.witnesses):
            row: List[Any] = ['' if t is None else t, value]
            row += list(witness.get('x', [''] * dim))
            if paired:
                row += list(witness.get('partner', [''] * dim))
            rows.append(row)
        return rows

    def _witness_dim(self) -> int:
        for w in self.witnesses:
            if 'x' in w:
                return len(w['x'])
        return 0

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({'report': 'modulus', 'name': self.name, 't_grid': self.t_grid,
                         'values': self.values, 'witnesses': self.witnesses,
                         'estimator_kind': self.estimator_kind,
                         'sample_descriptor': self.sample_descriptor, 'extras': self.extras})


@dataclass
class InequalityReport:
    """Pointwise lhs <= rhs check of one displayed inequality"""

    statement_id: str
    points: List[List[float]]
    lhs: List[float]
    rhs: List[float]
    tolerance: float
    inputs_echo: Dict[str, Any] = field(default_factory=dict)

    @property
    def margins(self) -> List[float]:
        return [r - l for l, r in zip(self.lhs, self.rhs)]

    @property
    def min_margin(self) -> float:
        return float(min(self.margins)) if self.lhs else 0.0

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.tolerance

    def worst(self) -> Optional[Dict[str, Any]]:
        if not self.lhs:
            return None
        i = int(np.argmin(self.margins))
        return {'point': self.points[i], 'lhs': self.lhs[i], 'rhs': self.rhs[i], 'margin': self.margins[i]}

    def csv_header(self) -> List[str]:
        dim = len(self.points[0]) if self.points else 0
        return _coords('x', dim) + ['lhs', 'rhs', 'margin']

    def csv_rows(self) -> List[List[Any]]:
        return [list(p) + [l, r, m] for p, l, r, m in zip(self.points, self.lhs, self.rhs, self.margins)]

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({'report': 'inequality', 'statement_id': self.statement_id,
                         'pass': self.passed, 'tolerance': self.tolerance,
                         'min_margin': self.min_margin, 'worst': self.worst(),
                         'inputs_echo': self.inputs_echo,
                         'per_point': [{'point': p, 'lhs': l, 'rhs': r, 'margin': m} for p, l, r, m
                                       in zip(self.points, self.lhs, self.rhs, self.margins)]})


@dataclass
class GeneratorEstimate:
    """
    Converged difference quotients on a sample plus the Cauchy-net certificate.

    certificate holds mu, delta1, delta, epsilon, L and bound = 6 * epsilon * L.
    """

    points: np.ndarray
    f_values: np.ndarray
    t_schedule: List[float]
    gaps: List[float]
    cauchy_gap: float
    certificate: Dict[str, float]
    converged: bool
    sup_f: float
    floor: float
    cauchy_decomposition: Optional[Dict[str, Any]] = None
    sample_descriptor: Dict[str, Any] = field(default_factory=dict)

    def recomputed_L(self) -> float:
        mu, delta1 = self.certificate['mu'], self.certificate['delta1']
        return 2.0 * mu / ((1.0 - mu) * delta1)

    def certificate_holds(self, rtol: float = 1e-12) -> bool:
        """Re-assert the stored certificate from its parts"""
        L = self.recomputed_L()
        if abs(L - self.certificate['L']) > rtol * max(1.0, L):
            return False
        if abs(self.certificate['bound'] - 6.0 * self.certificate['epsilon'] * L) > rtol * max(1.0, L):
            return False
        if not self.converged:
            return True
        return self.cauchy_gap <= self.certificate['bound'] and self.sup_f <= L

    def as_field(self, family):
        """The estimated generator as a field: the difference quotient at the schedule floor"""
        from src.models.family import VectorField

        floor = self.floor
        return VectorField(lambda X: (family.eval(floor, X) - X) / floor, family.domain,
                           name=f"estimated generator of {family.name}")

    def csv_header(self) -> List[str]:
        dim = self.points.shape[1]
        return _coords('x', dim) + _coords('f', dim)

    def csv_rows(self) -> List[List[Any]]:
        return [list(x) + list(f) for x, f in zip(self.points.tolist(), self.f_values.tolist())]

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({'report': 'generator', 'converged': self.converged,
                         'cauchy_gap': self.cauchy_gap, 'certificate': self.certificate,
                         'sup_f': self.sup_f, 'floor': self.floor, 't_schedule': self.t_schedule,
                         'gaps': self.gaps, 'cauchy_decomposition': self.cauchy_decomposition,
                         'sample_descriptor': self.sample_descriptor,
                         'points': self.points, 'f_values': self.f_values})


@dataclass
class DerivativeEstimate:
    """Spatial derivative at one point and how it was obtained"""

    matrix: np.ndarray
    method: str
    step: Optional[float] = None
    truncation_error: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({'matrix': self.matrix, 'method': self.method, 'step': self.step,
                         'truncation_error': self.truncation_error})


@dataclass
class Corner:
    """A time where the one-sided t-derivatives of t -> F_t(x) disagree"""

    t_corner: float
    left_slope: np.ndarray
    right_slope: np.ndarray

    @property
    def jump(self) -> float:
        return float(np.max(np.abs(self.right_slope - self.left_slope)))


@dataclass
class PathBound:
    """Certified lower bound on connecting-curve length plus a witness curve"""

    lower_bound: float
    witness: PathCurve
    witness_length: float
    route: List[int] = field(default_factory=list)
    method: str = 'segment'

    def csv_header(self) -> List[str]:
        return ['node'] + _coords('x', self.witness.nodes.shape[1])

    def csv_rows(self) -> List[List[Any]]:
        return self.witness.csv_rows()

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({'report': 'path_bound', 'lower_bound': self.lower_bound,
                         'witness_length': self.witness_length, 'route': self.route, 'method': self.method,
                         'witness': self.witness.nodes})


@dataclass
class PathLengthCertificate:
    """
    Either a finite path-length certificate (d2, L_bound) or a refutation
    table of diverging lower bounds.
    """

    kind: str
    d2: Optional[SubsetSpec] = None
    L_bound: Optional[float] = None
    rows: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    # per-row bounds with their witness curves (refutations only)
    witnesses: List[PathBound] = field(default_factory=list)

    @property
    def is_refutation(self) -> bool:
        return self.kind == 'refutation'

    def csv_header(self) -> List[str]:
        return list(self.rows[0].keys()) if self.rows else ['L_bound']

    def csv_rows(self) -> List[List[Any]]:
        if self.rows:
            return [list(row.values()) for row in self.rows]
        return [[self.L_bound]]

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({'report': 'path_length', 'kind': self.kind, 'L_bound': self.L_bound,
                         'd2': self.d2.describe() if self.d2 is not None else None,
                         'rows': self.rows, 'details': self.details})


@dataclass
class TableReport:
    """Plain table used by the reproduction examples"""

    name: str
    header: List[str]
    rows: List[List[Any]]
    passed: bool = True
    summary: Dict[str, Any] = field(default_factory=dict)

    def csv_header(self) -> List[str]:
        return list(self.header)

    def csv_rows(self) -> List[List[Any]]:
        return [list(row) for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return jsonable({'report': 'table', 'name': self.name, 'pass': self.passed,
                         'summary': self.summary,
                         'rows': [dict(zip(self.header, row)) for row in self.rows]})
