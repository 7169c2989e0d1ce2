"""
Curve validation, curve lengths and path-length certification.

Lower bounds on connecting-curve length come from the piece structure of a
union domain: any curve splits into arcs, each inside one convex piece, and
consecutive arcs meet in the closed interface of their two pieces. Two
bounds are computed and the larger is reported:

  * a Dijkstra bound over the interface graph (set-to-set distances);
  * for every simple chain of pieces, an LP minimizing the polygonal length
    through the chain's interfaces, measured with a polyhedral norm that
    never exceeds the domain norm.
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.sparse.csgraph import connected_components, csgraph_from_dense, dijkstra

from src.config import settings
from src.errors import BadParameter, CurveExitsDomain, OutsideDomain, Unreachable, Unsupported
from src.models.domain import (Box, DomainSpec, PathCurve, Polytope, SubsetSpec, as_points,
                               chebyshev_center, intersect_pieces, set_distance)
from src.models.reports import PathBound, PathLengthCertificate
from src.services.geometry.domains import (ELL_INFINITY_FAMILY, ell_infinity_point,
                                           staircase_lower_bound)

logger = logging.getLogger(__name__)

# chain enumeration stops here and the interface-graph bound is used alone
_CHAIN_LIMIT = 2000
# fraction of the way each witness node moves toward its interface's deepest point
_WITNESS_PULL = 1e-6
_SHRINK_HALVINGS = 30


def validate_curve(curve: PathCurve, spacing: Optional[float] = None) -> None:
    """
    Check that every node and every segment of a curve stays in its domain.

    A segment inside one convex piece is accepted exactly; any other segment
    is sampled at steps of `spacing` times its length.
    """
    spacing = settings.segment_spacing if spacing is None else spacing
    domain = curve.domain
    nodes = curve.nodes
    inside = domain.contains(nodes)
    if not np.all(inside):
        i = int(np.nonzero(~inside)[0][0])
        raise CurveExitsDomain(f"Node {i} at {nodes[i].tolist()} is outside the domain", segment=i)

    n_checks = max(2, int(math.ceil(1.0 / spacing)))
    s = np.linspace(0.0, 1.0, n_checks + 1)[:, None]
    for i, (a, b) in enumerate(zip(nodes[:-1], nodes[1:])):
        ends = np.vstack([a, b])
        if any(np.all(piece.contains(ends)) for piece in domain.pieces):
            continue
        trial = a[None, :] + s * (b - a)[None, :]
        if not np.all(domain.contains(trial)):
            raise CurveExitsDomain(f"Segment {i} leaves the domain", segment=i)


def path_length(curve: PathCurve) -> float:
    """Sum of segment norms in the domain's norm"""
    validate_curve(curve)
    return float(np.sum(curve.segment_lengths()))


def shortest_path_bound(domain: DomainSpec, x1, x2) -> PathBound:
    """
    Certified lower bound on the length of any curve in the domain joining
    x1 to x2, with an explicit witness curve

    Args:
        domain: Domain made of convex pieces
        x1: Start point (interior)
        x2: End point (interior)

    Returns:
        PathBound; the witness length always dominates the lower bound
    """
    start = as_points(x1, domain.ambient_dim)[0]
    goal = as_points(x2, domain.ambient_dim)[0]
    for label, point in (('x1', start), ('x2', goal)):
        if not domain.contains(point)[0]:
            raise OutsideDomain(f"{label} = {point.tolist()} is not an interior point")

    start_pieces = domain.pieces_containing(start)
    goal_pieces = domain.pieces_containing(goal)
    straight = float(domain.norm(goal - start))
    if set(start_pieces) & set(goal_pieces):
        shared = sorted(set(start_pieces) & set(goal_pieces))[0]
        witness = PathCurve(np.vstack([start, goal]), domain)
        return PathBound(straight, witness, straight, [shared], 'segment')

    adjacency = domain.overlap_matrix()
    baseline = _interface_graph_bound(domain, adjacency, start, goal, start_pieces, goal_pieces)

    chains, complete = _simple_chains(adjacency, start_pieces, goal_pieces, _CHAIN_LIMIT)
    directions = _norm_directions(domain.norm_kind, domain.ambient_dim)
    best_value, best_points, best_chain = np.inf, None, None
    for chain in chains:
        solved = _chain_program(domain, chain, start, goal, directions)
        if solved is None:
            continue
        value, points = solved
        if value < best_value:
            best_value, best_points, best_chain = value, points, chain
    if best_points is None:
        raise Unreachable("No chain of overlapping pieces joins the two points")
    if not complete:
        logger.warning(f"Chain enumeration stopped at {_CHAIN_LIMIT}; using the interface-graph bound")

    lower = max(baseline, straight, best_value) if complete else max(baseline, straight)
    witness = PathCurve(_pull_inside(domain, best_chain, best_points), domain)
    validate_curve(witness)
    witness_length = float(np.sum(witness.segment_lengths()))
    # LP round-off must never push the bound past a realized curve
    lower = min(lower, witness_length)
    logger.info(f"Path bound {lower:.6g} (interface graph {baseline:.6g}), witness {witness_length:.6g}")
    return PathBound(float(lower), witness, witness_length, list(best_chain), 'interface_chain')


def _interface_graph_bound(domain: DomainSpec, adjacency: np.ndarray, start: np.ndarray,
                           goal: np.ndarray, start_pieces: List[int], goal_pieces: List[int]) -> float:
    nodes = [(Box(start, start), set(start_pieces)), (Box(goal, goal), set(goal_pieces))]
    for i, j in zip(*np.nonzero(np.triu(adjacency))):
        interface = intersect_pieces(domain.pieces[i], domain.pieces[j])
        if interface is not None:
            nodes.append((interface, {int(i), int(j)}))

    n = len(nodes)
    weights = np.full((n, n), np.inf)
    for a, b in itertools.combinations(range(n), 2):
        if nodes[a][1] & nodes[b][1]:
            weights[a, b] = weights[b, a] = set_distance(nodes[a][0], nodes[b][0], domain.norm_kind)
    graph = csgraph_from_dense(weights, null_value=np.inf)
    distances = dijkstra(graph, directed=False, indices=0)
    if not np.isfinite(distances[1]):
        raise Unreachable("The two points lie in different components of the interface graph")
    return float(distances[1])


def _simple_chains(adjacency: np.ndarray, start_pieces: Sequence[int], goal_pieces: Sequence[int],
                   limit: int) -> Tuple[List[List[int]], bool]:
    """Simple paths in the overlap graph from a start piece to the first goal piece reached"""
    goals = set(goal_pieces)
    chains: List[List[int]] = []
    stack = [[p] for p in reversed(list(start_pieces))]
    while stack:
        chain = stack.pop()
        last = chain[-1]
        if last in goals:
            chains.append(chain)
            if len(chains) >= limit:
                return chains, False
            continue
        for nxt in reversed(np.nonzero(adjacency[last])[0].tolist()):
            if nxt not in chain:
                stack.append(chain + [nxt])
    return chains, True


def _norm_directions(norm_kind: str, dim: int) -> np.ndarray:
    """Unit vectors u with max_u u.v <= ||v|| (equality for the sup norm)"""
    eye = np.eye(dim)
    if norm_kind == 'sup' or dim == 1:
        return np.vstack([eye, -eye])
    if dim == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    rows = [eye, -eye]
    for i, j in itertools.combinations(range(dim), 2):
        for si, sj in itertools.product((1.0, -1.0), repeat=2):
            v = np.zeros(dim)
            v[i], v[j] = si, sj
            rows.append((v / np.sqrt(2.0))[None, :])
    if dim <= 6:
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=dim)))
        rows.append(signs / np.sqrt(dim))
    return np.vstack(rows)


def _chain_halfspaces(domain: DomainSpec, chain: Sequence[int], k: int) -> Tuple[np.ndarray, np.ndarray]:
    A1, b1 = domain.pieces[chain[k - 1]].halfspaces()
    A2, b2 = domain.pieces[chain[k]].halfspaces()
    return np.vstack([A1, A2]), np.concatenate([b1, b2])


def _chain_program(domain: DomainSpec, chain: Sequence[int], start: np.ndarray, goal: np.ndarray,
                   directions: np.ndarray) -> Optional[Tuple[float, np.ndarray]]:
    # variables: interface points p_1..p_{m-1}, then segment lengths s_0..s_{m-1}
    dim = domain.ambient_dim
    m = len(chain)
    n_points = m - 1
    n_var = n_points * dim + m
    rows, rhs = [], []
    for i in range(m):
        for u in directions:
            row = np.zeros(n_var)
            bound = 0.0
            if i + 1 <= n_points:
                row[i * dim:(i + 1) * dim] += u
            else:
                bound -= float(u @ goal)
            if i >= 1:
                row[(i - 1) * dim:i * dim] -= u
            else:
                bound += float(u @ start)
            row[n_points * dim + i] = -1.0
            rows.append(row)
            rhs.append(bound)
    for k in range(1, m):
        A, b = _chain_halfspaces(domain, chain, k)
        block = np.zeros((A.shape[0], n_var))
        block[:, (k - 1) * dim:k * dim] = A
        rows.extend(block)
        rhs.extend(b)

    c = np.zeros(n_var)
    c[n_points * dim:] = 1.0
    bounds = [(None, None)] * (n_points * dim) + [(0, None)] * m
    result = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method='highs')
    if result.status != 0:
        logger.info(f"Chain {chain} has no feasible interface points ({result.message})")
        return None
    points = np.vstack([start, result.x[:n_points * dim].reshape(n_points, dim), goal])
    return float(result.fun), points


def _pull_inside(domain: DomainSpec, chain: Sequence[int], points: np.ndarray) -> np.ndarray:
    nodes = points.copy()
    for k in range(1, len(chain)):
        A, b = _chain_halfspaces(domain, chain, k)
        center, depth = chebyshev_center(A, b, domain.norm_kind)
        if center is None or depth <= 0:
            raise Unreachable(f"Interface between pieces {chain[k - 1]} and {chain[k]} has empty interior")
        nodes[k] = nodes[k] + _WITNESS_PULL * (center - nodes[k])
    return nodes


def finite_path_length_certificate(domain: DomainSpec, d1: SubsetSpec) -> PathLengthCertificate:
    """
    Certificate (d2, L) of the finite path-length property for d1, or a
    refutation table for the staircase family.

    Convex domains shrink their piece by half the margin of d1 and bound
    lengths by its diameter. Unions shrink every piece by a common delta
    below the margin of d1 (so d1 stays covered) and bound lengths by the
    sum of the shrunk diameters; delta is halved until the shrunk pieces
    form a connected union.
    """
    if d1.parent is not domain:
        raise BadParameter("d1 must be a subset of the given domain")

    if domain.params.get('family') == ELL_INFINITY_FAMILY:
        return _staircase_refutation(domain)

    if domain.is_convex:
        # convex, and covers d1 since every point of d1 is margin-deep
        piece = domain.pieces[0].shrink(d1.margin / 2.0, domain.norm_kind)
        d2 = SubsetSpec(domain, pieces=(piece,), known_margin=d1.margin / 2.0)
        L = float(piece.diameter(domain.norm_kind))
        return PathLengthCertificate('certificate', d2, L, details={'method': 'convex'})

    if not all(isinstance(p, (Box, Polytope)) for p in domain.pieces):
        raise Unsupported(f"No path-length certificate for shape {domain.shape}")

    delta = d1.margin / 2.0
    for _ in range(_SHRINK_HALVINGS):
        shrunk = [p.shrink(delta, domain.norm_kind) for p in domain.pieces]
        shrunk = [p for p in shrunk if p is not None]
        if shrunk and _pieces_connected(shrunk, domain.norm_kind):
            d2 = SubsetSpec(domain, pieces=tuple(shrunk))
            L = float(sum(p.diameter(domain.norm_kind) for p in shrunk))
            logger.info(f"Path-length certificate with delta={delta:.3g}, L={L:.6g}")
            return PathLengthCertificate('certificate', d2, L,
                                         details={'method': 'shrunk_pieces', 'delta': delta})
        delta /= 2.0
    raise Unsupported("Shrunk pieces never formed a connected union")


def _pieces_connected(pieces: Sequence, norm_kind: str) -> bool:
    n = len(pieces)
    if n == 1:
        return True
    adjacency = np.zeros((n, n), dtype=int)
    for i, j in itertools.combinations(range(n), 2):
        if pieces[i].overlaps(pieces[j], norm_kind):
            adjacency[i, j] = adjacency[j, i] = 1
    n_components, _ = connected_components(adjacency, directed=False)
    return n_components == 1


def _staircase_refutation(domain: DomainSpec) -> PathLengthCertificate:
    a = domain.params['a']
    n = domain.ambient_dim
    origin = np.zeros(n)
    rows, witnesses = [], []
    for j in range(1, n + 1):
        bound = shortest_path_bound(domain, origin, ell_infinity_point(j, n))
        witnesses.append(bound)
        rows.append({'j': j, 'lower_bound': bound.lower_bound,
                     'witness_length': bound.witness_length, 'half_j': j / 2.0,
                     'interface_formula': staircase_lower_bound(a, j)})
    return PathLengthCertificate('refutation', rows=rows, details={'a': a, 'truncation_n': n},
                                 witnesses=witnesses)
