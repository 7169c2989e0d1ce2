"""
Whitelisted arithmetic expressions for fields, maps and closed-form families.

Expressions are parsed with sympy, differentiated symbolically and compiled
to numpy callables working on (n, d) stacks of points.
"""

import logging
import re
from typing import Callable, List, Sequence, Tuple

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from src.errors import BadParameter

logger = logging.getLogger(__name__)

FUNCTIONS = {'sin': sympy.sin, 'cos': sympy.cos, 'exp': sympy.exp, 'abs': sympy.Abs,
             'sqrt': sympy.sqrt, 'log': sympy.log}
CONSTANTS = {'pi': sympy.pi}

_ALLOWED_CHARS = re.compile(r'^[0-9A-Za-z_+\-*/^(). ]*$')
_IDENTIFIER = re.compile(r'[A-Za-z_][A-Za-z_0-9]*')
_TRANSFORMATIONS = standard_transformations + (convert_xor,)


def coordinate_symbols(dim: int) -> List[sympy.Symbol]:
    return [sympy.Symbol(f"x{k}", real=True) for k in range(dim)]


TIME = sympy.Symbol('t', real=True, nonnegative=True)


def parse_expression(text: str, dim: int, allow_t: bool = False) -> sympy.Expr:
    """
    Parse one scalar expression over x0..x{dim-1} (x in 1D) and optionally t

    Raises:
        BadParameter: on any token outside the whitelist
    """
    if not isinstance(text, str) or not text.strip():
        raise BadParameter("Expression must be a non-empty string")
    if not _ALLOWED_CHARS.match(text):
        raise BadParameter(f"Expression contains characters outside the arithmetic whitelist: {text!r}")

    names = {s.name: s for s in coordinate_symbols(dim)}
    if dim == 1:
        names['x'] = names['x0']
    if allow_t:
        names['t'] = TIME
    names.update(FUNCTIONS)
    names.update(CONSTANTS)

    for token in _IDENTIFIER.findall(text):
        if token not in names and not re.fullmatch(r'[eE]\d*', token):
            raise BadParameter(f"Unknown name {token!r} in expression {text!r}")

    try:
        expr = parse_expr(text, local_dict=names, global_dict={'Integer': sympy.Integer,
                                                                 'Float': sympy.Float,
                                                                 'Rational': sympy.Rational,
                                                                 'Symbol': sympy.Symbol},
                          transformations=_TRANSFORMATIONS)
    except Exception as e:
        logger.error(f"Failed to parse expression {text!r}: {e}")
        raise BadParameter(f"Cannot parse expression {text!r}: {e}")
    expr = sympy.sympify(expr)
    allowed = {s for s in names.values() if isinstance(s, sympy.Symbol)}
    stray = expr.free_symbols - allowed
    if stray:
        raise BadParameter(f"Unknown names {sorted(s.name for s in stray)} in expression {text!r}")
    return expr


def _stack(values, n: int, dim: int) -> np.ndarray:
    columns = [np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in values]
    return np.stack(columns, axis=1) if columns else np.zeros((n, dim))


def compile_map(texts: Sequence[str], dim: int) -> Tuple[Callable, Callable, List[sympy.Expr]]:
    """
    Compile d component expressions to (fn, jacobian, exprs)

    fn maps (n, d) -> (n, d) and jacobian maps (n, d) -> (n, d, d).
    """
    if len(texts) != dim:
        raise BadParameter(f"Expected {dim} component expressions, got {len(texts)}")
    symbols = coordinate_symbols(dim)
    exprs = [parse_expression(text, dim) for text in texts]
    jac_exprs = sympy.Matrix(exprs).jacobian(symbols)
    value_fn = sympy.lambdify(symbols, exprs, 'numpy')
    jac_fn = sympy.lambdify(symbols, [list(row) for row in jac_exprs.tolist()], 'numpy')

    def fn(X: np.ndarray) -> np.ndarray:
        return _stack(value_fn(*X.T), X.shape[0], dim)

    def jacobian(X: np.ndarray) -> np.ndarray:
        rows = jac_fn(*X.T)
        return np.stack([_stack(row, X.shape[0], dim) for row in rows], axis=1)

    return fn, jacobian, exprs


def compile_family(texts: Sequence[str], dim: int) -> Tuple[Callable, Callable, List[sympy.Expr]]:
    """Like compile_map, with t as an extra argument: fn(t, X), jacobian(t, X)"""
    if len(texts) != dim:
        raise BadParameter(f"Expected {dim} component expressions, got {len(texts)}")
    symbols = coordinate_symbols(dim)
    exprs = [parse_expression(text, dim, allow_t=True) for text in texts]
    jac_exprs = sympy.Matrix(exprs).jacobian(symbols)
    value_fn = sympy.lambdify([TIME] + symbols, exprs, 'numpy')
    jac_fn = sympy.lambdify([TIME] + symbols, [list(row) for row in jac_exprs.tolist()], 'numpy')

    def fn(t: float, X: np.ndarray) -> np.ndarray:
        return _stack(value_fn(t, *X.T), X.shape[0], dim)

    def jacobian(t: float, X: np.ndarray) -> np.ndarray:
        rows = jac_fn(t, *X.T)
        return np.stack([_stack(row, X.shape[0], dim) for row in rows], axis=1)

    return fn, jacobian, exprs
