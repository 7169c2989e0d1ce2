"""
Scenario configuration: a JSON document validated into a ScenarioConfig.

Every problem is collected as `field.path: message` before a single
ConfigError is raised. Defaults applied while reading are written back into
`resolved`, which reporting embeds in every output file.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from src.config import settings
from src.errors import ConfigError, LabError
from src.models.domain import Ball, Box, DomainSpec, NORM_KINDS, SubsetSpec
from src.models.family import SemigroupFamily, SmoothMap
from src.services.geometry.domains import ell_infinity_example_domain, ell_infinity_subdomain
from src.services.geometry.sampling import STRATEGIES
from src.services.reporting.report_manager import FORMATS
from src.services.semigroups.catalog import FAMILY_NAMES, build_family, expression_map, iterate_extended_family

logger = logging.getLogger(__name__)

CHECKS = ('semigroup_law', 't_continuity', 't_lipschitz', 'uniform_lipschitz', 'derivative',
          'derivative_continuity')
DOMAIN_KINDS = ('interval', 'ball', 'box', 'union_of_boxes', 'union_of_polytopes', 'ell_infinity')
SUBSET_KINDS = ('interval', 'box', 'ball', 'points', 'ell_infinity')

_MISSING = object()


class _Reader:
    """Typed access to a JSON tree that records problems and resolved defaults"""

    def __init__(self, tree: Dict[str, Any], problems: List[str], path: str = ''):
        self.tree = tree
        self.problems = problems
        self.path = path

    def _where(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def fail(self, key: str, message: str) -> None:
        self.problems.append(f"{self._where(key)}: {message}")

    def has(self, key: str) -> bool:
        return key in self.tree and self.tree[key] is not None

    def child(self, key: str, required: bool = False) -> Optional['_Reader']:
        value = self.tree.get(key, _MISSING)
        if value is _MISSING or value is None:
            if required:
                self.fail(key, 'is required')
                return None
            self.tree[key] = {}
            return _Reader(self.tree[key], self.problems, self._where(key))
        if not isinstance(value, dict):
            self.fail(key, 'must be an object')
            return None
        return _Reader(value, self.problems, self._where(key))

    def number(self, key: str, default: Any = _MISSING, positive: bool = False,
               nonnegative: bool = False, integer: bool = False) -> Any:
        value = self.tree.get(key, _MISSING)
        if value is _MISSING or value is None:
            if default is _MISSING:
                self.fail(key, 'is required')
                return None
            self.tree[key] = default
            return default
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(key, f"must be a number, got {value!r}")
            return None
        if integer and int(value) != value:
            self.fail(key, f"must be an integer, got {value!r}")
            return None
        if positive and not value > 0:
            self.fail(key, f"must be positive, got {value!r}")
            return None
        if nonnegative and value < 0:
            self.fail(key, f"must be nonnegative, got {value!r}")
            return None
        return int(value) if integer else float(value)

    def choice(self, key: str, options: Sequence[str], default: Any = _MISSING) -> Optional[str]:
        value = self.tree.get(key, _MISSING)
        if value is _MISSING or value is None:
            if default is _MISSING:
                self.fail(key, f"is required (one of {', '.join(options)})")
                return None
            self.tree[key] = default
            return default
        if value not in options:
            self.fail(key, f"must be one of {', '.join(options)}, got {value!r}")
            return None
        return value

    def vector(self, key: str, default: Any = _MISSING, length: Optional[int] = None) -> Optional[List[float]]:
        value = self.tree.get(key, _MISSING)
        if value is _MISSING or value is None:
            if default is _MISSING:
                self.fail(key, 'is required')
                return None
            self.tree[key] = default
            return default
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                                  for v in value):
            self.fail(key, 'must be a list of numbers')
            return None
        if length is not None and len(value) != length:
            self.fail(key, f"must have {length} entries, got {len(value)}")
            return None
        return [float(v) for v in value]

    def strings(self, key: str, default: Any = _MISSING) -> Optional[List[str]]:
        value = self.tree.get(key, _MISSING)
        if value is _MISSING or value is None:
            if default is _MISSING:
                self.fail(key, 'is required')
                return None
            self.tree[key] = default
            return default
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
            self.fail(key, 'must be a non-empty list of expression strings')
            return None
        self.tree[key] = list(value)
        return self.tree[key]

    def raw(self, key: str, default: Any = None) -> Any:
        if key not in self.tree or self.tree[key] is None:
            self.tree[key] = default
        return self.tree[key]


@dataclass
class ScenarioConfig:
    """Validated scenario with its built domain, subset, family and map"""

    resolved: Dict[str, Any]
    domain: Optional[DomainSpec] = None
    subset: Optional[SubsetSpec] = None
    family: Optional[SemigroupFamily] = None
    phi: Optional[SmoothMap] = None
    mu: Optional[float] = None
    t_grid: List[float] = field(default_factory=list)
    t0: float = 0.0
    tolerance: float = 1e-9
    checks: List[str] = field(default_factory=list)
    sample: Dict[str, Any] = field(default_factory=dict)
    criteria: Dict[str, Any] = field(default_factory=dict)
    lemma: Dict[str, Any] = field(default_factory=dict)
    generator: Dict[str, Any] = field(default_factory=dict)
    example: Dict[str, Any] = field(default_factory=dict)
    output: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str, overrides: Optional[Dict[str, Any]] = None) -> 'ScenarioConfig':
        try:
            with open(path, 'r', encoding='utf-8') as handle:
                text = handle.read()
        except OSError as e:
            logger.error(f"Failed to read scenario {path}: {e}")
            raise ConfigError([f"config: cannot read {path} ({e.strerror})"])
        return cls.from_text(text, overrides)

    @classmethod
    def from_text(cls, text: str, overrides: Optional[Dict[str, Any]] = None) -> 'ScenarioConfig':
        try:
            tree = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError([f"config: line {e.lineno}, column {e.colno}: {e.msg}"])
        if not isinstance(tree, dict):
            raise ConfigError(['config: the top level must be an object'])
        return cls.from_dict(tree, overrides)

    @classmethod
    def from_dict(cls, tree: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> 'ScenarioConfig':
        """
        Validate a scenario tree

        Args:
            tree: Parsed JSON object (copied, never mutated)
            overrides: CLI overrides ('seed', 'tolerance', 'out', 'format')

        Raises:
            ConfigError: with every problem found
        """
        tree = json.loads(json.dumps(tree))
        _apply_overrides(tree, overrides or {})
        problems: List[str] = []
        root = _Reader(tree, problems)
        config = cls(resolved=tree)

        config.tolerance = root.number('tolerance', settings.closed_form_tolerance, positive=True)
        config.t0 = root.number('t0', 0.0, nonnegative=True)
        config.t_grid = _read_t_grid(root, 't_grid', 0.1, settings.t_grid_points)
        config.sample = _read_sample(root.child('sample'))
        config.checks = _read_checks(root)
        config.criteria = _read_criteria(root.child('criteria'))
        config.lemma = _read_lemma(root.child('lemma'))
        config.generator = _read_generator(root.child('generator'))
        config.example = _read_example(root.child('example'))
        config.output = _read_output(root.child('output'))

        if root.has('domain'):
            config.domain = _build_domain(root.child('domain', required=True))
        if config.domain is not None:
            if root.has('subset'):
                config.subset = _build_subset(root.child('subset', required=True), config.domain)
            if root.has('family'):
                config.family = _build_family(root.child('family', required=True), config.domain)
            if root.has('map'):
                config.phi = _build_map(root, config.domain)
        if root.has('mu'):
            config.mu = root.number('mu', positive=True)

        if problems:
            logger.error(f"Scenario rejected with {len(problems)} problem(s)")
            raise ConfigError(problems)
        return config

    def require(self, *names: str) -> None:
        """Raise ConfigError unless every named top-level block was given"""
        missing = [f"{name}: is required for this command" for name in names
                   if getattr(self, name) is None]
        if missing:
            raise ConfigError(missing)


def _apply_overrides(tree: Dict[str, Any], overrides: Dict[str, Any]) -> None:
    if overrides.get('seed') is not None:
        tree.setdefault('sample', {})['seed'] = overrides['seed']
    if overrides.get('tolerance') is not None:
        tree['tolerance'] = overrides['tolerance']
    if overrides.get('out') is not None:
        tree.setdefault('output', {})['dir'] = overrides['out']
    if overrides.get('format') is not None:
        tree.setdefault('output', {})['format'] = overrides['format']


def _read_t_grid(reader: _Reader, key: str, t_max: float, points: int) -> List[float]:
    value = reader.tree.get(key)
    if isinstance(value, list):
        grid = reader.vector(key)
        if grid is not None and not grid:
            reader.fail(key, 'must not be empty')
        elif grid is not None and any(t < 0 for t in grid):
            reader.fail(key, 'times must be nonnegative')
        return grid or []
    sub = reader.child(key)
    if sub is None:
        return []
    t_max = sub.number('t_max', t_max, positive=True)
    points = sub.number('points', points, positive=True, integer=True)
    if t_max is None or points is None:
        return []
    return [t_max * 2.0 ** (-k) for k in range(points)]


def _read_sample(reader: Optional[_Reader]) -> Dict[str, Any]:
    if reader is None:
        return {}
    return {'strategy': reader.choice('strategy', STRATEGIES, 'grid'),
            'n_points': reader.number('n_points', 101, positive=True, integer=True),
            'n_pairs': reader.number('n_pairs', 400, nonnegative=True, integer=True),
            'seed': reader.number('seed', 0, nonnegative=True, integer=True)}


def _read_checks(reader: _Reader) -> List[str]:
    value = reader.raw('checks', ['semigroup_law'])
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not value:
        reader.fail('checks', f"must be a non-empty list drawn from {', '.join(CHECKS)}")
        return []
    unknown = [c for c in value if c not in CHECKS]
    for name in unknown:
        reader.fail('checks', f"unknown check {name!r}")
    return [c for c in value if c in CHECKS]


def _read_criteria(reader: Optional[_Reader]) -> Dict[str, Any]:
    if reader is None:
        return {}
    return {'semigroup_law': reader.number('semigroup_law', 1e-12, positive=True),
            'decay': reader.number('decay', 1e-3, positive=True),
            'k': reader.number('k', 1.0, positive=True),
            's_t_pairs': reader.raw('s_t_pairs', [[0.1, 0.1], [0.1, 0.2], [0.2, 0.5], [0.5, 0.5]])}


def _read_lemma(reader: Optional[_Reader]) -> Dict[str, Any]:
    if reader is None:
        return {}
    ell = reader.number('ell', positive=True) if reader.has('ell') else reader.raw('ell')
    return {'p': reader.number('p', 2, positive=True, integer=True),
            't0': reader.number('t0', 0.1, positive=True),
            'ell': ell,
            'anchor': reader.vector('anchor') if reader.has('anchor') else reader.raw('anchor')}


def _read_generator(reader: Optional[_Reader]) -> Dict[str, Any]:
    if reader is None:
        return {}
    schedule = reader.vector('schedule') if reader.has('schedule') else reader.raw('schedule')
    return {'epsilon': reader.number('epsilon', 0.01, positive=True),
            't_max': reader.number('t_max', 0.1, positive=True),
            'floor': reader.number('floor', settings.schedule_floor, positive=True),
            'schedule': schedule,
            'gap_tol': reader.number('gap_tol', 1e-6, positive=True),
            'residual_step': reader.number('residual_step', 1e-4, positive=True),
            'residual_times': reader.vector('residual_times', [0.0, 0.05, 0.1, 0.2, 0.5])}


def _read_example(reader: Optional[_Reader]) -> Dict[str, Any]:
    if reader is None:
        return {}
    example = {'x_grid': reader.vector('x_grid', [0.6, 0.7, 0.8, 0.9]),
               'scan_t_max': reader.number('scan_t_max', 1.0, positive=True),
               'scan_points': reader.number('scan_points', 101, positive=True, integer=True),
               'step': reader.number('step', 1e-5, positive=True),
               'jump_threshold': reader.number('jump_threshold', 1e-3, positive=True),
               'a': reader.number('a', 0.25, positive=True),
               'a_sub': reader.number('a_sub', 0.1, positive=True),
               'n_min': reader.number('n_min', 2, positive=True, integer=True),
               'n_max': reader.number('n_max', 8, positive=True, integer=True)}
    if example['n_min'] is not None and example['n_max'] is not None and example['n_min'] > example['n_max']:
        reader.fail('n_max', 'must not be below n_min')
    return example


def _read_output(reader: Optional[_Reader]) -> Dict[str, Any]:
    if reader is None:
        return {}
    return {'dir': reader.raw('dir', settings.out_dir),
            'format': reader.choice('format', FORMATS, 'both')}


def _catch(reader: _Reader, key: str, build):
    """Run a builder and record model-level rejections as config problems"""
    try:
        return build()
    except LabError as e:
        reader.fail(key, str(e))
        return None


def _build_domain(reader: Optional[_Reader]) -> Optional[DomainSpec]:
    if reader is None:
        return None
    kind = reader.choice('kind', DOMAIN_KINDS)
    if kind is None:
        return None
    norm = reader.choice('norm', NORM_KINDS, 'sup' if kind == 'ell_infinity' else 'euclidean')
    if kind == 'interval':
        lo, hi = reader.number('lo'), reader.number('hi')
        if lo is None or hi is None:
            return None
        return _catch(reader, 'kind', lambda: DomainSpec.interval(lo, hi))
    if kind == 'ball':
        center, radius = reader.vector('center'), reader.number('radius', positive=True)
        if center is None or radius is None or norm is None:
            return None
        return _catch(reader, 'kind', lambda: DomainSpec.ball(center, radius, norm))
    if kind == 'box':
        lo, hi = reader.vector('lo'), reader.vector('hi')
        if lo is None or hi is None or norm is None:
            return None
        return _catch(reader, 'kind', lambda: DomainSpec.box(lo, hi, norm))
    if kind == 'union_of_boxes':
        boxes = reader.raw('boxes')
        if not isinstance(boxes, list) or not boxes or norm is None:
            reader.fail('boxes', 'must be a non-empty list of {"lo": [...], "hi": [...]} objects')
            return None
        pairs = []
        for i, box in enumerate(boxes):
            sub = _Reader(box, reader.problems, f"{reader.path}.boxes[{i}]") if isinstance(box, dict) else None
            if sub is None:
                reader.fail(f"boxes[{i}]", 'must be an object')
                continue
            lo, hi = sub.vector('lo'), sub.vector('hi')
            if lo is not None and hi is not None:
                pairs.append((lo, hi))
        if len(pairs) != len(boxes):
            return None
        return _catch(reader, 'boxes', lambda: DomainSpec.union_of_boxes(pairs, norm))
    if kind == 'union_of_polytopes':
        polytopes = reader.raw('polytopes')
        if not isinstance(polytopes, list) or not polytopes or norm is None:
            reader.fail('polytopes', 'must be a non-empty list of {"A": [[...]], "b": [...]} objects')
            return None
        pieces = [(p.get('A'), p.get('b')) for p in polytopes if isinstance(p, dict)]
        if len(pieces) != len(polytopes):
            reader.fail('polytopes', 'every entry must be an object')
            return None
        return _catch(reader, 'polytopes', lambda: DomainSpec.union_of_polytopes(pieces, norm))
    a = reader.number('a', 0.25, positive=True)
    n = reader.number('truncation_n', 4, positive=True, integer=True)
    if a is None or n is None:
        return None
    return _catch(reader, 'kind', lambda: ell_infinity_example_domain(a, n))


def _build_subset(reader: Optional[_Reader], domain: DomainSpec) -> Optional[SubsetSpec]:
    if reader is None:
        return None
    kind = reader.choice('kind', SUBSET_KINDS)
    inflation = reader.number('inflation', 0.0, nonnegative=True)
    if kind is None or inflation is None:
        return None
    if kind == 'interval':
        lo, hi = reader.number('lo'), reader.number('hi')
        if lo is None or hi is None:
            return None
        build = lambda: SubsetSpec(domain, pieces=(Box([lo], [hi]),), inflation=inflation)
    elif kind == 'box':
        lo, hi = reader.vector('lo'), reader.vector('hi')
        if lo is None or hi is None:
            return None
        build = lambda: SubsetSpec(domain, pieces=(Box(lo, hi),), inflation=inflation)
    elif kind == 'ball':
        center, radius = reader.vector('center'), reader.number('radius', nonnegative=True)
        if center is None or radius is None:
            return None
        build = lambda: SubsetSpec(domain, pieces=(Ball(center, radius, domain.norm_kind),), inflation=inflation)
    elif kind == 'points':
        points = reader.raw('points')
        if not isinstance(points, list) or not points:
            reader.fail('points', 'must be a non-empty list of points')
            return None
        build = lambda: SubsetSpec(domain, points=points, inflation=inflation)
    else:
        a_sub = reader.number('a_sub', 0.1, positive=True)
        if a_sub is None:
            return None
        build = lambda: ell_infinity_subdomain(domain, a_sub)
    return _catch(reader, 'kind', build)


def _build_family(reader: Optional[_Reader], domain: DomainSpec) -> Optional[SemigroupFamily]:
    if reader is None:
        return None
    name = reader.choice('name', FAMILY_NAMES)
    if name == 'linear':
        A = reader.raw('A')
        if not isinstance(A, (list, int, float)):
            reader.fail('A', 'must be a matrix (list of rows)')
            return None
    elif name == 'flow':
        reader.strings('field')
        reader.number('rtol', settings.integrator_rtol, positive=True)
        reader.number('atol', settings.integrator_atol, positive=True)
    elif name == 'closed_form':
        reader.strings('components')
    elif name == 'iterated':
        step = reader.number('step', positive=True)
        base = _build_family(reader.child('base', required=True), domain)
        if step is None or base is None:
            return None
        return _catch(reader, 'step', lambda: iterate_extended_family(base, step))
    if name is None or reader.problems and any(p.startswith(reader.path) for p in reader.problems):
        return None
    return _catch(reader, 'name', lambda: build_family(reader.tree, domain))


def _build_map(root: _Reader, domain: DomainSpec) -> Optional[SmoothMap]:
    components = root.strings('map')
    if components is None:
        return None
    return _catch(root, 'map', lambda: expression_map(components, domain.ambient_dim))


def scenario_from_args(path: Optional[str], overrides: Dict[str, Any]) -> ScenarioConfig:
    """The scenario at `path`, or an empty scenario carrying only defaults"""
    if path is None:
        return ScenarioConfig.from_dict({}, overrides)
    return ScenarioConfig.from_file(path, overrides)
