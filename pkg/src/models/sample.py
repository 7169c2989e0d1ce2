from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

import numpy as np

from src.errors import ContractViolation
from src.models.domain import vector_norm


@dataclass(frozen=True, eq=False)
class SampleSet:
    """
    Sample points of a subset plus close pairs (x, x*) with x in the subset
    and 0 < ||x - x*|| <= mu.
    """

    points: np.ndarray
    pairs_x: np.ndarray
    pairs_y: np.ndarray
    mu: float
    norm_kind: str
    descriptor: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    @property
    def n_pairs(self) -> int:
        return int(self.pairs_x.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def displacements(self) -> np.ndarray:
        return vector_norm(self.pairs_x - self.pairs_y, self.norm_kind)

    def assert_contract(self, mu: Optional[float] = None, tol: float = 1e-12) -> None:
        """Re-check the ||x - x*|| <= mu contract of every pair"""
        mu = self.mu if mu is None else mu
        d = self.displacements()
        bad = np.nonzero(d > mu * (1.0 + tol) + tol)[0]
        if bad.size:
            i = int(bad[0])
            raise ContractViolation(
                f"Pair {i} has displacement {d[i]:.6g} > mu = {mu:.6g}")

    def restricted(self, mu: float) -> 'SampleSet':
        keep = self.displacements() <= mu * (1.0 + 1e-12)
        return replace(self, pairs_x=self.pairs_x[keep], pairs_y=self.pairs_y[keep], mu=mu)

    def with_pairs(self, extra_x: np.ndarray, extra_y: np.ndarray) -> 'SampleSet':
        if extra_x.shape[0] == 0:
            return self
        return replace(self, pairs_x=np.vstack([self.pairs_x, extra_x]),
                       pairs_y=np.vstack([self.pairs_y, extra_y]))

    def describe(self) -> Dict[str, Any]:
        info = dict(self.descriptor)
        info.update({'mu': self.mu, 'n_points': self.n_points, 'n_pairs': self.n_pairs})
        return info
