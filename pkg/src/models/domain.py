"""
Domain, subset and curve models.

A domain is a finite union of open convex pieces (boxes, norm balls or
polytopes) in R^n, measured in either the euclidean or the sup norm.
Subsets are closed sets lying strictly inside a domain; their margin to the
boundary is always recomputed here, never taken from the caller.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.sparse.csgraph import connected_components
from scipy.spatial import HalfspaceIntersection

from src.errors import BadParameter, MarginViolation, Unsupported

logger = logging.getLogger(__name__)

NORM_KINDS = ('euclidean', 'sup')
SHAPES = ('interval', 'ball', 'box', 'union_of_boxes', 'union_of_convex_polytopes')

# cap on grid size used when a margin has to be certified by dense sampling
_MARGIN_GRID_BUDGET = 20000


def as_points(x: Any, dim: Optional[int] = None) -> np.ndarray:
    """Coerce a point or a stack of points to a float array of shape (n, d)"""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if dim is None or arr.shape[0] == dim else arr.reshape(-1, 1)
    if dim is not None and arr.shape[1] != dim:
        raise BadParameter(f"Expected points with {dim} coordinates, got {arr.shape[1]}")
    return arr


def vector_norm(v: np.ndarray, norm_kind: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if norm_kind == 'sup':
        return np.max(np.abs(v), axis=-1)
    return np.linalg.norm(v, axis=-1)


def dual_norm(v: np.ndarray, norm_kind: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if norm_kind == 'sup':
        return np.sum(np.abs(v), axis=-1)
    return np.linalg.norm(v, axis=-1)


def chebyshev_center(A: np.ndarray, b: np.ndarray, norm_kind: str) -> Tuple[Optional[np.ndarray], float]:
    """Deepest point of {A x <= b} and its depth; depth <= 0 means empty interior"""
    dim = A.shape[1]
    weights = dual_norm(A, norm_kind)
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, weights[:, None]])
    bounds = [(None, None)] * dim + [(None, 1e6)]
    result = linprog(c, A_ub=A_ub, b_ub=b, bounds=bounds, method='highs')
    if result.status == 2:
        return None, -np.inf
    if result.status != 0:
        raise BadParameter(f"Polytope depth LP failed: {result.message}")
    return result.x[:dim], float(result.x[-1])


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box; open as a domain piece, closed as a subset piece"""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).ravel()
        hi = np.asarray(self.hi, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise BadParameter("Box bounds must have the same length")
        if np.any(lo > hi):
            raise BadParameter(f"Box has lo > hi: {lo.tolist()} / {hi.tolist()}")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def contains(self, X: np.ndarray, closed: bool = False) -> np.ndarray:
        X = as_points(X, self.dim)
        if closed:
            return np.all((X >= self.lo) & (X <= self.hi), axis=1)
        return np.all((X > self.lo) & (X < self.hi), axis=1)

    def boundary_distance(self, X: np.ndarray, norm_kind: str) -> np.ndarray:
        # min coordinate slack is the exact distance to the boundary in both norms
        X = as_points(X, self.dim)
        return np.min(np.minimum(X - self.lo, self.hi - X), axis=1)

    def distance(self, X: np.ndarray, norm_kind: str) -> np.ndarray:
        X = as_points(X, self.dim)
        gap = np.maximum(0.0, np.maximum(self.lo - X, X - self.hi))
        return vector_norm(gap, norm_kind)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lo.copy(), self.hi.copy()

    def diameter(self, norm_kind: str) -> float:
        return float(vector_norm(self.hi - self.lo, norm_kind))

    def shrink(self, delta: float, norm_kind: str) -> Optional['Box']:
        lo, hi = self.lo + delta, self.hi - delta
        if np.any(lo >= hi):
            return None
        return Box(lo, hi)

    def vertices(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lo, self.hi))), dtype=float)

    def halfspaces(self) -> Tuple[np.ndarray, np.ndarray]:
        eye = np.eye(self.dim)
        return np.vstack([eye, -eye]), np.concatenate([self.hi, -self.lo])

    def interior_point(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def intersection(self, other: 'Box') -> Optional['Box']:
        lo, hi = np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return Box(lo, hi)

    def overlaps(self, other: Any, norm_kind: str) -> bool:
        if isinstance(other, Box):
            return bool(np.all(np.maximum(self.lo, other.lo) < np.minimum(self.hi, other.hi)))
        return other.overlaps(self, norm_kind)

    def clip(self, X: np.ndarray, inset: float = 0.0) -> np.ndarray:
        """Nearest point of the box shrunk by `inset` (coordinate-wise projection)"""
        width = self.hi - self.lo
        pad = np.minimum(inset, 0.25 * width)
        return np.clip(X, self.lo + pad, self.hi - pad)

    def describe(self) -> Dict[str, Any]:
        return {'kind': 'box', 'lo': self.lo.tolist(), 'hi': self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class Ball:
    """Ball of the given norm"""

    center: np.ndarray
    radius: float
    norm_kind: str = 'euclidean'

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel()
        if self.radius < 0:
            raise BadParameter("Ball radius must be nonnegative")
        if self.norm_kind not in NORM_KINDS:
            raise BadParameter(f"Unknown norm kind: {self.norm_kind}")
        object.__setattr__(self, 'center', center)
        object.__setattr__(self, 'radius', float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, X: np.ndarray, closed: bool = False) -> np.ndarray:
        d = vector_norm(as_points(X, self.dim) - self.center, self.norm_kind)
        return d <= self.radius if closed else d < self.radius

    def boundary_distance(self, X: np.ndarray, norm_kind: str) -> np.ndarray:
        return self.radius - vector_norm(as_points(X, self.dim) - self.center, self.norm_kind)

    def distance(self, X: np.ndarray, norm_kind: str) -> np.ndarray:
        d = vector_norm(as_points(X, self.dim) - self.center, self.norm_kind)
        return np.maximum(0.0, d - self.radius)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius

    def diameter(self, norm_kind: str) -> float:
        return 2.0 * self.radius

    def shrink(self, delta: float, norm_kind: str) -> Optional['Ball']:
        if self.radius - delta <= 0:
            return None
        return Ball(self.center, self.radius - delta, self.norm_kind)

    def interior_point(self) -> np.ndarray:
        return self.center.copy()

    def overlaps(self, other: Any, norm_kind: str) -> bool:
        if isinstance(other, Ball):
            return bool(vector_norm(self.center - other.center, norm_kind) < self.radius + other.radius)
        if isinstance(other, Box):
            return bool(other.distance(self.center, norm_kind)[0] < self.radius)
        raise Unsupported("Ball/polytope overlap is not supported")

    def describe(self) -> Dict[str, Any]:
        return {'kind': 'ball', 'center': self.center.tolist(), 'radius': self.radius,
                'norm': self.norm_kind}


@dataclass(frozen=True, eq=False)
class Polytope:
    """Bounded polytope {x : A x < b} (closed version {A x <= b})"""

    A: np.ndarray
    b: np.ndarray
    _bounds: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.shape[0]:
            raise BadParameter("Polytope needs one offset per half-space")
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, '_bounds', self._compute_bounds())

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def _compute_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = np.empty(self.dim), np.empty(self.dim)
        for k in range(self.dim):
            c = np.zeros(self.dim)
            c[k] = 1.0
            for sign, target in ((1.0, lo), (-1.0, hi)):
                result = linprog(sign * c, A_ub=self.A, b_ub=self.b,
                                 bounds=[(None, None)] * self.dim, method='highs')
                if result.status != 0:
                    raise BadParameter(f"Polytope must be bounded and nonempty ({result.message})")
                target[k] = result.x[k]
        return lo, hi

    def contains(self, X: np.ndarray, closed: bool = False) -> np.ndarray:
        slack = self.b[None, :] - as_points(X, self.dim) @ self.A.T
        return np.all(slack >= 0, axis=1) if closed else np.all(slack > 0, axis=1)

    def boundary_distance(self, X: np.ndarray, norm_kind: str) -> np.ndarray:
        slack = self.b[None, :] - as_points(X, self.dim) @ self.A.T
        return np.min(slack / dual_norm(self.A, norm_kind)[None, :], axis=1)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._bounds[0].copy(), self._bounds[1].copy()

    def diameter(self, norm_kind: str) -> float:
        # bounding-box extent: an upper bound of the true diameter
        lo, hi = self._bounds
        return float(vector_norm(hi - lo, norm_kind))

    def shrink(self, delta: float, norm_kind: str) -> Optional['Polytope']:
        b = self.b - delta * dual_norm(self.A, norm_kind)
        _, depth = chebyshev_center(self.A, b, norm_kind)
        if depth <= 0:
            return None
        return Polytope(self.A, b)

    def halfspaces(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.A, self.b

    def distance(self, X: np.ndarray, norm_kind: str) -> np.ndarray:
        # sup-norm LP per point; a lower bound under the euclidean norm
        X = as_points(X, self.dim)
        inside = self.contains(X, closed=True)
        return np.array([0.0 if flag else set_distance(Box(x, x), self, 'sup')
                         for x, flag in zip(X, inside)])

    def vertices(self) -> np.ndarray:
        center = self.interior_point()
        halfspaces = np.hstack([self.A, -self.b[:, None]])
        return HalfspaceIntersection(halfspaces, center).intersections

    def interior_point(self, norm_kind: str = 'euclidean') -> np.ndarray:
        point, _ = chebyshev_center(self.A, self.b, norm_kind)
        return point

    def overlaps(self, other: Any, norm_kind: str) -> bool:
        A2, b2 = other.halfspaces()
        _, depth = chebyshev_center(np.vstack([self.A, A2]), np.concatenate([self.b, b2]), norm_kind)
        return depth > 1e-12

    def describe(self) -> Dict[str, Any]:
        return {'kind': 'polytope', 'A': self.A.tolist(), 'b': self.b.tolist()}


Piece = Union[Box, Ball, Polytope]


def intersect_pieces(p: Piece, q: Piece) -> Optional[Piece]:
    """Closed intersection of two pieces (boxes stay boxes)"""
    if isinstance(p, Box) and isinstance(q, Box):
        return p.intersection(q)
    if isinstance(p, Ball) or isinstance(q, Ball):
        raise Unsupported("Interfaces are computed for boxes and polytopes only")
    A1, b1 = p.halfspaces()
    A2, b2 = q.halfspaces()
    try:
        return Polytope(np.vstack([A1, A2]), np.concatenate([b1, b2]))
    except BadParameter:
        return None


def set_distance(p: Piece, q: Piece, norm_kind: str) -> float:
    """
    Distance between two closed pieces.

    Exact for boxes in both norms. For polytopes the sup-norm distance is
    solved as an LP; it is exact under the sup norm and a lower bound under
    the euclidean norm (||v||_2 >= ||v||_inf).
    """
    if isinstance(p, Box) and isinstance(q, Box):
        gap = np.maximum(0.0, np.maximum(p.lo - q.hi, q.lo - p.hi))
        return float(vector_norm(gap, norm_kind))
    if isinstance(p, Ball) or isinstance(q, Ball):
        raise Unsupported("Set distances are computed for boxes and polytopes only")
    A1, b1 = p.halfspaces()
    A2, b2 = q.halfspaces()
    dim = A1.shape[1]
    eye = np.eye(dim)
    # variables: x (dim), y (dim), s
    A_ub = np.vstack([
        np.hstack([A1, np.zeros((A1.shape[0], dim)), np.zeros((A1.shape[0], 1))]),
        np.hstack([np.zeros((A2.shape[0], dim)), A2, np.zeros((A2.shape[0], 1))]),
        np.hstack([eye, -eye, -np.ones((dim, 1))]),
        np.hstack([-eye, eye, -np.ones((dim, 1))]),
    ])
    b_ub = np.concatenate([b1, b2, np.zeros(2 * dim)])
    c = np.zeros(2 * dim + 1)
    c[-1] = 1.0
    result = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * (2 * dim) + [(0, None)],
                     method='highs')
    if result.status != 0:
        raise BadParameter(f"Set distance LP failed: {result.message}")
    return float(result.x[-1])


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Open connected domain: a finite union of open convex pieces"""

    ambient_dim: int
    norm_kind: str
    shape: str
    pieces: Tuple[Piece, ...]
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise BadParameter("ambient_dim must be a positive integer")
        if self.norm_kind not in NORM_KINDS:
            raise BadParameter(f"Unknown norm kind: {self.norm_kind}")
        if self.shape not in SHAPES:
            raise BadParameter(f"Unknown shape: {self.shape}")
        if not self.pieces:
            raise BadParameter("A domain needs at least one piece")
        object.__setattr__(self, 'pieces', tuple(self.pieces))
        for piece in self.pieces:
            if piece.dim != self.ambient_dim:
                raise BadParameter("Every piece must live in the ambient dimension")
        if len(self.pieces) > 1 and not self.is_connected():
            raise BadParameter("Union domain is not connected (overlap graph has several components)")

    # constructors -----------------------------------------------------------------

    @classmethod
    def interval(cls, lo: float, hi: float) -> 'DomainSpec':
        return cls(1, 'euclidean', 'interval', (Box([lo], [hi]),), {'lo': lo, 'hi': hi})

    @classmethod
    def ball(cls, center: Sequence[float], radius: float, norm_kind: str = 'euclidean') -> 'DomainSpec':
        center = np.atleast_1d(np.asarray(center, dtype=float))
        return cls(center.shape[0], norm_kind, 'ball', (Ball(center, radius, norm_kind),),
                   {'center': center.tolist(), 'radius': radius})

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float], norm_kind: str = 'euclidean') -> 'DomainSpec':
        piece = Box(lo, hi)
        return cls(piece.dim, norm_kind, 'box', (piece,), {'lo': piece.lo.tolist(), 'hi': piece.hi.tolist()})

    @classmethod
    def union_of_boxes(cls, boxes: Sequence[Tuple[Sequence[float], Sequence[float]]],
                       norm_kind: str = 'euclidean', **params: Any) -> 'DomainSpec':
        pieces = tuple(Box(lo, hi) for lo, hi in boxes)
        params = dict(params)
        params.setdefault('boxes', [p.describe() for p in pieces])
        return cls(pieces[0].dim, norm_kind, 'union_of_boxes', pieces, params)

    @classmethod
    def union_of_polytopes(cls, polytopes: Sequence[Tuple[Sequence[Sequence[float]], Sequence[float]]],
                           norm_kind: str = 'euclidean') -> 'DomainSpec':
        pieces = tuple(Polytope(A, b) for A, b in polytopes)
        return cls(pieces[0].dim, norm_kind, 'union_of_convex_polytopes', pieces,
                   {'polytopes': [p.describe() for p in pieces]})

    # queries ------------------------------------------------------------------------

    @property
    def is_convex(self) -> bool:
        return len(self.pieces) == 1

    def norm(self, v: np.ndarray) -> np.ndarray:
        return vector_norm(v, self.norm_kind)

    def contains(self, X: np.ndarray) -> np.ndarray:
        X = as_points(X, self.ambient_dim)
        inside = np.zeros(X.shape[0], dtype=bool)
        for piece in self.pieces:
            inside |= piece.contains(X)
        return inside

    def margin(self, X: np.ndarray) -> np.ndarray:
        """
        Signed margin: positive inside, a lower bound of the boundary distance.

        Exact for a single convex piece; for unions it is the largest
        per-piece boundary distance, which never exceeds the true distance.
        """
        X = as_points(X, self.ambient_dim)
        values = np.stack([piece.boundary_distance(X, self.norm_kind) for piece in self.pieces])
        return np.max(values, axis=0)

    def pieces_containing(self, x: np.ndarray) -> List[int]:
        x = as_points(x, self.ambient_dim)
        return [i for i, piece in enumerate(self.pieces) if piece.contains(x)[0]]

    def overlap_matrix(self) -> np.ndarray:
        n = len(self.pieces)
        adjacency = np.zeros((n, n), dtype=bool)
        for i, j in itertools.combinations(range(n), 2):
            if self.pieces[i].overlaps(self.pieces[j], self.norm_kind):
                adjacency[i, j] = adjacency[j, i] = True
        return adjacency

    def is_connected(self) -> bool:
        n_components, _ = connected_components(self.overlap_matrix().astype(int), directed=False)
        return n_components == 1

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        los, his = zip(*(piece.bounds() for piece in self.pieces))
        return np.min(los, axis=0), np.max(his, axis=0)

    def radius(self) -> float:
        """Norm-radius: largest norm of a point of the closure (bounding-box estimate)"""
        lo, hi = self.bounds()
        return float(vector_norm(np.maximum(np.abs(lo), np.abs(hi)), self.norm_kind))

    def describe(self) -> Dict[str, Any]:
        return {'shape': self.shape, 'norm': self.norm_kind, 'ambient_dim': self.ambient_dim,
                'params': jsonable(self.params)}


def jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def _grid_over(lo: np.ndarray, hi: np.ndarray, budget: int) -> Tuple[np.ndarray, np.ndarray]:
    dim = lo.shape[0]
    per_axis = max(2, int(np.floor(budget ** (1.0 / dim))))
    axes = [np.linspace(l, h, per_axis) for l, h in zip(lo, hi)]
    grid = np.array(list(itertools.product(*axes)), dtype=float)
    spacing = (hi - lo) / (per_axis - 1)
    return grid, spacing


@dataclass(frozen=True, eq=False)
class SubsetSpec:
    """
    Closed subset strictly inside a domain.

    Either an explicit point cloud or a union of closed convex pieces, in both
    cases optionally thickened by `inflation` (all points within that norm
    distance). `margin` is recomputed on construction as a certified lower
    bound of inf dist(x, boundary).
    """

    parent: DomainSpec
    points: Optional[np.ndarray] = None
    pieces: Tuple[Piece, ...] = ()
    inflation: float = 0.0
    # certified lower bound carried over from a subset this one was derived from
    known_margin: float = 0.0
    margin: float = field(init=False, default=0.0)

    def __post_init__(self):
        if (self.points is None) == (not self.pieces):
            raise BadParameter("A subset is either a point cloud or a union of pieces")
        if self.points is not None:
            object.__setattr__(self, 'points', as_points(self.points, self.parent.ambient_dim))
        object.__setattr__(self, 'pieces', tuple(self.pieces))
        if self.inflation < 0:
            raise BadParameter("Inflation must be nonnegative")
        margin = max(self._certify_margin(), self.known_margin)
        if not margin > 0:
            raise MarginViolation(f"Subset is not strictly inside the domain (certified margin {margin:.3g})")
        object.__setattr__(self, 'margin', margin)

    @property
    def dim(self) -> int:
        return self.parent.ambient_dim

    def distance(self, X: np.ndarray) -> np.ndarray:
        """Norm distance from each point to the un-inflated base set"""
        X = as_points(X, self.dim)
        if self.points is not None:
            diffs = X[:, None, :] - self.points[None, :, :]
            return np.min(vector_norm(diffs, self.parent.norm_kind), axis=1)
        return np.min(np.stack([p.distance(X, self.parent.norm_kind) for p in self.pieces]), axis=0)

    def contains(self, X: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        return self.distance(X) <= self.inflation + tol

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.points is not None:
            lo, hi = self.points.min(axis=0), self.points.max(axis=0)
        else:
            los, his = zip(*(p.bounds() for p in self.pieces))
            lo, hi = np.min(los, axis=0), np.max(his, axis=0)
        return lo - self.inflation, hi + self.inflation

    def _certify_margin(self) -> float:
        parent = self.parent
        if self.points is not None:
            return float(np.min(parent.margin(self.points)) - self.inflation)
        per_piece = []
        for base in self.pieces:
            best = -np.inf
            for host in parent.pieces:
                if isinstance(base, (Box, Polytope)):
                    # boundary distance is concave on a convex host: minimum sits at a vertex
                    value = float(np.min(host.boundary_distance(base.vertices(), parent.norm_kind)))
                elif isinstance(base, Ball):
                    value = float(host.boundary_distance(base.center, parent.norm_kind)[0]) - base.radius
                else:
                    raise Unsupported("Subset pieces must be boxes, balls or polytopes")
                best = max(best, value)
            if best <= 0:
                best = self._grid_margin(base)
            per_piece.append(best)
        return float(min(per_piece)) - self.inflation

    def _grid_margin(self, base: Piece) -> float:
        # the margin function is 1-Lipschitz, so min over a grid minus its covering radius is certified
        lo, hi = base.bounds()
        grid, spacing = _grid_over(lo, hi, _MARGIN_GRID_BUDGET)
        grid = grid if isinstance(base, Box) else grid[base.contains(grid, closed=True)]
        if grid.shape[0] == 0:
            return -np.inf
        cover = float(vector_norm(spacing / 2.0, self.parent.norm_kind))
        logger.info(f"Margin certified on a {grid.shape[0]}-point grid (covering radius {cover:.3g})")
        return float(np.min(self.parent.margin(grid))) - cover

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {'inflation': self.inflation, 'margin': self.margin}
        if self.points is not None:
            info['points'] = self.points.tolist()
        else:
            info['pieces'] = [p.describe() for p in self.pieces]
        return info


@dataclass(frozen=True, eq=False)
class PathCurve:
    """Piecewise-linear curve given by its nodes"""

    nodes: np.ndarray
    domain: DomainSpec

    def __post_init__(self):
        nodes = as_points(self.nodes, self.domain.ambient_dim)
        if nodes.shape[0] < 1:
            raise BadParameter("A curve needs at least one node")
        object.__setattr__(self, 'nodes', nodes)

    def segment_lengths(self) -> np.ndarray:
        return self.domain.norm(np.diff(self.nodes, axis=0)) if self.nodes.shape[0] > 1 else np.zeros(0)

    def csv_rows(self) -> List[List[float]]:
        return [[i] + node.tolist() for i, node in enumerate(self.nodes)]
