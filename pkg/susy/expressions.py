"""
Expressions in the single real variable q.

An :class:`Expression` wraps an immutable sympy tree restricted to the vocabulary
of the text grammar in :mod:`susy.parsing`: exact rational and complex constants,
named parameters (complex unless bound), ``+ - * /``, integer powers, ``exp``, ``sin``, ``cos`` and
``log``. Zero testing is two-tier: exact rational canonicalization where the tree
is rational, seeded random sampling everywhere else.
"""
import cmath
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Dict, FrozenSet, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from susy.conf import setting
from susy.exceptions import (
    ExpressionError,
    PoleError,
    SamplingDomainError,
    UnboundParameterError,
)
from susy.parsing import FUNCTIONS, Q, format_tree, parse_tree, symbol

logger = logging.getLogger(__name__)

Bindings = Mapping[str, Union[Number, str]]


def exact(value) -> sympy.Expr:
    """Convert a Python, numpy or textual number to an exact sympy constant.

    Floats are taken at their shortest decimal representation, so ``0.1`` becomes
    ``1/10`` rather than the nearest binary fraction.
    """
    if isinstance(value, Expression):
        return value.tree
    if isinstance(value, sympy.Basic):
        return value
    if isinstance(value, str):
        return parse_tree(value)
    if isinstance(value, bool):
        raise TypeError("booleans are not numeric constants")
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite constant {value}")
        return sympy.Rational(repr(value))
    if isinstance(value, complex):
        return exact(value.real) + sympy.I * exact(value.imag)
    raise TypeError(f"cannot use {value!r} as a constant")


def _numeric(value) -> complex:
    if isinstance(value, str):
        return complex(sympy.N(parse_tree(value), 17))
    return complex(value)


@dataclass(frozen=True)
class Expression:
    """Immutable expression in q; structural equality and hashing come from sympy."""

    tree: sympy.Expr

    def __post_init__(self):
        if not isinstance(self.tree, sympy.Basic):
            object.__setattr__(self, 'tree', exact(self.tree))

    @classmethod
    def parse(cls, text: str) -> 'Expression':
        return cls(parse_tree(text))

    @classmethod
    def constant(cls, value) -> 'Expression':
        return cls(exact(value))

    @classmethod
    def variable(cls) -> 'Expression':
        return cls(Q)

    @classmethod
    def parameter(cls, name: str) -> 'Expression':
        return cls(symbol(name))

    @property
    def parameters(self) -> FrozenSet[str]:
        return frozenset(s.name for s in self.tree.free_symbols if s != Q)

    @property
    def is_constant(self) -> bool:
        return Q not in self.tree.free_symbols

    @property
    def is_syntactic_zero(self) -> bool:
        return self.tree == 0

    def __str__(self) -> str:
        return format_tree(self.tree)

    def __repr__(self) -> str:
        return f"Expression('{self}')"

    # Arithmetic
    def __add__(self, other):
        return Expression(self.tree + exact(other))

    def __radd__(self, other):
        return Expression(exact(other) + self.tree)

    def __sub__(self, other):
        return Expression(self.tree - exact(other))

    def __rsub__(self, other):
        return Expression(exact(other) - self.tree)

    def __mul__(self, other):
        return Expression(self.tree * exact(other))

    def __rmul__(self, other):
        return Expression(exact(other) * self.tree)

    def __truediv__(self, other):
        return Expression(self.tree / exact(other))

    def __neg__(self):
        return Expression(-self.tree)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise TypeError("only integer powers are supported")
        return Expression(self.tree ** exponent)

    # Calculus and transformations
    def derivative(self, order: int = 1) -> 'Expression':
        if order == 0:
            return self
        return Expression(sympy.diff(self.tree, Q, order))

    def expanded(self) -> 'Expression':
        return Expression(tidy(self.tree))

    def conjugate(self) -> 'Expression':
        return Expression(sympy.conjugate(self.tree))

    def substitute(self, bindings: Optional[Bindings]) -> 'Expression':
        """Replace bound parameters by their exact values."""
        if not bindings:
            return self
        mapping = {
            symbol(name): exact(value)
            for name, value in bindings.items()
            if name in self.parameters
        }
        return Expression(self.tree.xreplace(mapping)) if mapping else self

    def evaluate(self, q: float, bindings: Optional[Bindings] = None) -> complex:
        return evaluate(self, q, bindings)

    def evaluate_array(self, points, bindings: Optional[Bindings] = None) -> np.ndarray:
        return evaluate_many(self, points, bindings)


def tidy(tree: sympy.Expr) -> sympy.Expr:
    """Distribute products and powers of sums without splitting exponentials."""
    return sympy.expand(tree, power_exp=False, power_base=False, log=False)


def parse(text: str) -> Expression:
    return Expression.parse(text)


def print_expression(expression: Expression) -> str:
    return str(expression)


def differentiate(expression: Expression) -> Expression:
    return expression.derivative()


# Evaluation

def _check_bound(expression: Expression, bindings: Bindings):
    missing = expression.parameters - set(bindings)
    if missing:
        raise UnboundParameterError(missing)


def _node_text(node: sympy.Expr) -> str:
    try:
        return format_tree(node)
    except ExpressionError:
        return str(node)


def _evaluate_node(node: sympy.Expr, env: Dict[sympy.Symbol, complex]) -> complex:
    if node.is_Symbol:
        return env[node]
    if node.is_Number or node is sympy.I or node.is_NumberSymbol:
        return complex(node)
    if node.is_Add:
        return sum((_evaluate_node(arg, env) for arg in node.args), 0j)
    if node.is_Mul:
        result = 1 + 0j
        for arg in node.args:
            result *= _evaluate_node(arg, env)
        return result
    if node.is_Pow:
        base = _evaluate_node(node.base, env)
        if node.exp.is_Integer:
            exponent = int(node.exp)
            if base == 0 and exponent < 0:
                raise PoleError(_node_text(node), env[Q].real)
            return base ** exponent
        exponent = _evaluate_node(node.exp, env)
        if base == 0 and exponent.real < 0:
            raise PoleError(_node_text(node), env[Q].real)
        return base ** exponent
    if isinstance(node, sympy.log):
        argument = _evaluate_node(node.args[0], env)
        if argument == 0:
            raise PoleError(_node_text(node), env[Q].real)
        return cmath.log(argument)
    for name, function in FUNCTIONS.items():
        if isinstance(node, function):
            return getattr(cmath, name)(_evaluate_node(node.args[0], env))
    if isinstance(node, (sympy.sinh, sympy.cosh)):
        return getattr(cmath, type(node).__name__)(_evaluate_node(node.args[0], env))
    if isinstance(node, sympy.conjugate):
        return _evaluate_node(node.args[0], env).conjugate()
    raise ExpressionError(f"cannot evaluate {node!r}")


def evaluate(expression: Expression, q: float, bindings: Optional[Bindings] = None) -> complex:
    """Evaluate at one point; raises PoleError naming the singular subexpression."""
    bindings = bindings or {}
    _check_bound(expression, bindings)
    env = {symbol(name): _numeric(value) for name, value in bindings.items()}
    env[Q] = complex(q)
    return _evaluate_node(expression.tree, env)


@lru_cache(maxsize=1024)
def _compiled(tree: sympy.Expr, names: Tuple[str, ...]):
    arguments = [Q] + [symbol(name) for name in names]
    return sympy.lambdify(arguments, tree, modules='numpy')


@lru_cache(maxsize=1024)
def _compiled_terms(tree: sympy.Expr, names: Tuple[str, ...]):
    arguments = [Q] + [symbol(name) for name in names]
    return sympy.lambdify(arguments, list(sympy.Add.make_args(tree)), modules='numpy')


def _parameter_values(expression: Expression, bindings: Bindings) -> Tuple[Tuple[str, ...], list]:
    _check_bound(expression, bindings)
    names = tuple(sorted(expression.parameters))
    return names, [_numeric(bindings[name]) for name in names]


def evaluate_many(expression: Expression, points, bindings: Optional[Bindings] = None) -> np.ndarray:
    """Vectorized evaluation; poles show up as non-finite entries instead of errors."""
    bindings = bindings or {}
    names, values = _parameter_values(expression, bindings)
    points = np.asarray(points, dtype=complex)
    function = _compiled(expression.tree, names)
    with np.errstate(all='ignore'):
        result = np.asarray(function(points, *values), dtype=complex)
    return np.broadcast_to(result, points.shape).copy()


def evaluate_terms(expression: Expression, points, bindings: Optional[Bindings] = None) -> np.ndarray:
    """Values of each top-level summand, shape ``(terms, points)``."""
    bindings = bindings or {}
    names, values = _parameter_values(expression, bindings)
    points = np.asarray(points, dtype=complex)
    function = _compiled_terms(expression.tree, names)
    with np.errstate(all='ignore'):
        rows = [
            np.broadcast_to(np.asarray(term, dtype=complex), points.shape)
            for term in function(points, *values)
        ]
    return np.vstack(rows)


# Rational canonical form

@dataclass(frozen=True)
class RationalForm:
    """Reduced numerator/denominator pair with a monic denominator."""

    numerator: sympy.Poly
    denominator: sympy.Poly

    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero

    def as_expression(self) -> Expression:
        return Expression(self.numerator.as_expr() / self.denominator.as_expr())


def is_rational_tree(tree: sympy.Expr) -> bool:
    for node in sympy.preorder_traversal(tree):
        if node.is_Symbol or node is sympy.I:
            continue
        if node.is_Number:
            if not node.is_Rational:
                return False
            continue
        if node.is_Add or node.is_Mul:
            continue
        if node.is_Pow and node.exp.is_Integer:
            continue
        if node.is_Integer:
            continue
        return False
    return True


def canonicalize_rational(expression: Expression) -> Optional[RationalForm]:
    """Exact normal form of a rational expression, or None outside rational vocabulary."""
    if not is_rational_tree(expression.tree):
        return None
    generators = sorted(expression.tree.free_symbols, key=lambda s: s.name) or [Q]
    numerator, denominator = sympy.fraction(sympy.cancel(expression.tree))
    numerator = sympy.Poly(numerator, *generators).to_field()
    denominator = sympy.Poly(denominator, *generators).to_field()
    if numerator.is_zero:
        return RationalForm(numerator, sympy.Poly(1, *generators).to_field())
    leading = denominator.LC()
    return RationalForm(numerator.quo_ground(leading), denominator.quo_ground(leading))


# Zero testing

class VerdictKind(str, Enum):
    PROVEN_ZERO = 'proven_zero'
    NUMERICALLY_ZERO = 'numerically_zero'
    NON_ZERO = 'non_zero'


_SEVERITY = {
    VerdictKind.PROVEN_ZERO: 0,
    VerdictKind.NUMERICALLY_ZERO: 1,
    VerdictKind.NON_ZERO: 2,
}


@dataclass(frozen=True)
class SamplingPolicy:
    intervals: Tuple[Tuple[float, float], ...] = ((0.3, 2.1),)
    samples: int = 64
    seed: int = 12345
    rtol: float = 1e-9
    atol: float = 1e-9
    poles: Tuple[float, ...] = ()
    pole_margin: float = 1e-6

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("sampling needs at least one point")
        for low, high in self.intervals:
            if not low < high:
                raise ValueError(f"empty sampling interval [{low}, {high}]")

    @classmethod
    def from_settings(cls, **overrides) -> 'SamplingPolicy':
        values = {
            'intervals': (tuple(setting('VERIFY_DOMAIN')),),
            'samples': setting('VERIFY_SAMPLES'),
            'seed': setting('VERIFY_SEED'),
            'rtol': setting('VERIFY_RTOL'),
            'atol': setting('VERIFY_ATOL'),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def with_poles(self, poles: Sequence[float]) -> 'SamplingPolicy':
        return replace(self, poles=tuple(sorted(set(self.poles) | set(poles))))

    def _near_pole(self, points: np.ndarray) -> np.ndarray:
        mask = np.zeros(points.shape, dtype=bool)
        for pole in self.poles:
            mask |= np.abs(points - pole) <= self.pole_margin * (1.0 + abs(pole))
        return mask

    def sample_points(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        lows = np.array([low for low, _ in self.intervals])
        widths = np.array([high - low for low, high in self.intervals])
        weights = widths / widths.sum()

        kept = []
        for _ in range(100):
            chosen = rng.choice(len(self.intervals), size=self.samples, p=weights)
            candidates = lows[chosen] + rng.uniform(size=self.samples) * widths[chosen]
            kept.extend(candidates[~self._near_pole(candidates)])
            if len(kept) >= self.samples:
                break
        if not kept:
            raise SamplingDomainError("every sample point lies on a declared pole")
        return np.array(kept[:self.samples])


@dataclass(frozen=True)
class Witness:
    point: float
    value: complex

    def to_dict(self) -> dict:
        return {'q': self.point, 'value': [self.value.real, self.value.imag]}


@dataclass(frozen=True)
class ZeroVerdict:
    kind: VerdictKind
    max_residual: float = 0.0
    witness: Optional[Witness] = None
    samples_used: int = 0

    @property
    def passed(self) -> bool:
        return self.kind != VerdictKind.NON_ZERO

    @classmethod
    def proven(cls) -> 'ZeroVerdict':
        return cls(VerdictKind.PROVEN_ZERO)

    @staticmethod
    def combine(verdicts: Sequence['ZeroVerdict']) -> 'ZeroVerdict':
        """Worst of several verdicts; proven only if every part is proven."""
        if not verdicts:
            return ZeroVerdict.proven()
        worst = max(verdicts, key=lambda v: (_SEVERITY[v.kind], v.max_residual))
        return ZeroVerdict(
            kind=worst.kind,
            max_residual=max(v.max_residual for v in verdicts),
            witness=worst.witness,
            samples_used=max(v.samples_used for v in verdicts),
        )

    def to_dict(self) -> dict:
        data = {'verdict': self.kind.value, 'max_residual': self.max_residual}
        if self.witness is not None:
            data['witness'] = self.witness.to_dict()
        return data


def _sampled_verdict(expression: Expression, policy: SamplingPolicy, bindings: Bindings,
                     exact_nonzero: bool) -> ZeroVerdict:
    points = policy.sample_points()
    terms = evaluate_terms(expression, points, bindings)
    values = terms.sum(axis=0)
    finite = np.isfinite(values) & np.all(np.isfinite(terms), axis=0)
    if not finite.any():
        raise SamplingDomainError(f"all {len(points)} samples of '{expression}' hit poles")

    magnitudes = np.abs(values[finite])
    scale = float(np.max(np.abs(terms[:, finite])))
    residual = float(np.max(magnitudes))
    worst = int(np.argmax(magnitudes))
    threshold = policy.atol + policy.rtol * scale

    if residual <= threshold and not exact_nonzero:
        return ZeroVerdict(VerdictKind.NUMERICALLY_ZERO, residual, None, int(finite.sum()))
    witness = Witness(float(points[finite][worst]), complex(values[finite][worst]))
    return ZeroVerdict(VerdictKind.NON_ZERO, residual, witness, int(finite.sum()))


def is_zero(expression: Expression, policy: Optional[SamplingPolicy] = None,
            bindings: Optional[Bindings] = None) -> ZeroVerdict:
    """Decide whether ``expression`` vanishes identically on the policy's domain."""
    policy = policy or SamplingPolicy.from_settings()
    bindings = bindings or {}
    if expression.is_syntactic_zero:
        return ZeroVerdict.proven()

    bound = expression.substitute(bindings).expanded()
    form = canonicalize_rational(bound)
    if form is not None and form.is_zero:
        return ZeroVerdict.proven()
    return _sampled_verdict(bound, policy, bindings, exact_nonzero=form is not None)
