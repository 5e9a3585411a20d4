"""
Linear ordinary differential operators Σ c_k(q) ∂^k with Expression coefficients.
"""
import logging
from dataclasses import dataclass
from math import comb
from typing import Iterable, List, Optional, Sequence, Union

import sympy

from susy.exceptions import OperatorFormatError
from susy.expressions import Expression, exact, tidy
from susy.parsing import Q, parse_tree

logger = logging.getLogger(__name__)

Coefficient = Union[Expression, int, float, complex, str]


def _as_expression(value: Coefficient) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, str):
        return Expression.parse(value)
    return Expression.constant(value)


@dataclass(frozen=True)
class DifferentialOperator:
    """Coefficients are stored lowest order first, trailing zeros trimmed.

    Coefficients are kept expanded so that exact cancellations happen as soon as
    two operators are combined.
    """

    coefficients: tuple = ()

    def __post_init__(self):
        cleaned = [Expression(tidy(_as_expression(c).tree)) for c in self.coefficients]
        while cleaned and cleaned[-1].is_syntactic_zero:
            cleaned.pop()
        object.__setattr__(self, 'coefficients', tuple(cleaned))

    @classmethod
    def from_coefficients(cls, coefficients: Iterable[Coefficient]) -> 'DifferentialOperator':
        return cls(tuple(coefficients))

    @classmethod
    def zero(cls) -> 'DifferentialOperator':
        return cls(())

    @classmethod
    def identity(cls) -> 'DifferentialOperator':
        return cls((Expression.constant(1),))

    @classmethod
    def multiplication(cls, function: Coefficient) -> 'DifferentialOperator':
        return cls((_as_expression(function),))

    @classmethod
    def derivative(cls, order: int = 1) -> 'DifferentialOperator':
        return cls(tuple([0] * order + [1]))

    @classmethod
    def first_order(cls, shift: Coefficient) -> 'DifferentialOperator':
        """The factor ∂ + shift."""
        return cls((_as_expression(shift), 1))

    @property
    def order(self) -> Optional[int]:
        """Highest derivative present; None for the zero operator."""
        return len(self.coefficients) - 1 if self.coefficients else None

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, k: int) -> Expression:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return Expression.constant(0)

    def apply(self, function: Coefficient) -> Expression:
        """Σ c_k f^(k)."""
        function = _as_expression(function)
        total = sympy.Integer(0)
        derivative = function.tree
        for k, c in enumerate(self.coefficients):
            if k:
                derivative = sympy.diff(derivative, Q)
            total += c.tree * derivative
        return Expression(tidy(total))

    # Linear structure
    def __add__(self, other: 'DifferentialOperator') -> 'DifferentialOperator':
        other = _as_operator(other)
        size = max(len(self.coefficients), len(other.coefficients))
        return DifferentialOperator(tuple(
            self.coefficient(k).tree + other.coefficient(k).tree for k in range(size)
        ))

    __radd__ = __add__

    def __neg__(self) -> 'DifferentialOperator':
        return self.scale(-1)

    def __sub__(self, other: 'DifferentialOperator') -> 'DifferentialOperator':
        return self + (-_as_operator(other))

    def __rsub__(self, other) -> 'DifferentialOperator':
        return _as_operator(other) - self

    def scale(self, factor: Coefficient) -> 'DifferentialOperator':
        """Left multiplication by a function (or constant)."""
        factor = exact(factor) if not isinstance(factor, Expression) else factor.tree
        return DifferentialOperator(tuple(factor * c.tree for c in self.coefficients))

    def __mul__(self, other) -> 'DifferentialOperator':
        if isinstance(other, DifferentialOperator):
            return compose(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> 'DifferentialOperator':
        return self.scale(other)

    def __pow__(self, exponent: int) -> 'DifferentialOperator':
        return power(self, exponent)

    def __str__(self) -> str:
        return format_operator(self)

    def __repr__(self) -> str:
        return f"DifferentialOperator('{self}')"


def _as_operator(value) -> DifferentialOperator:
    if isinstance(value, DifferentialOperator):
        return value
    return DifferentialOperator.multiplication(value)


def apply(operator: DifferentialOperator, function: Coefficient) -> Expression:
    return operator.apply(function)


def add(first: DifferentialOperator, second: DifferentialOperator) -> DifferentialOperator:
    return first + second


def scale(operator: DifferentialOperator, factor: Coefficient) -> DifferentialOperator:
    return operator.scale(factor)


def compose(first: DifferentialOperator, second: DifferentialOperator) -> DifferentialOperator:
    """first ∘ second by the Leibniz rule ∂^i b = Σ_m C(i,m) b^(m) ∂^(i-m)."""
    if first.is_zero or second.is_zero:
        return DifferentialOperator.zero()
    depth = first.order
    # derivatives[j][m] = m-th derivative of the j-th coefficient of `second`
    derivatives = []
    for b in second.coefficients:
        column = [b.tree]
        for _ in range(depth):
            column.append(sympy.diff(column[-1], Q))
        derivatives.append(column)

    result = [sympy.Integer(0)] * (first.order + second.order + 1)
    for i, a in enumerate(first.coefficients):
        if a.is_syntactic_zero:
            continue
        for j, column in enumerate(derivatives):
            for m in range(i + 1):
                if column[m] == 0:
                    continue
                result[i - m + j] += comb(i, m) * a.tree * column[m]
    return DifferentialOperator(tuple(result))


def power(operator: DifferentialOperator, exponent: int) -> DifferentialOperator:
    if exponent < 0:
        raise ValueError("operators have no negative powers")
    result = DifferentialOperator.identity()
    for _ in range(exponent):
        result = compose(operator, result)
    return result


def commutator(first: DifferentialOperator, second: DifferentialOperator) -> DifferentialOperator:
    return compose(first, second) - compose(second, first)


def formal_adjoint(operator: DifferentialOperator) -> DifferentialOperator:
    """Σ (−1)^k ∂^k ∘ conj(c_k), the adjoint for the L² pairing on the real line."""
    result = DifferentialOperator.zero()
    for k, c in enumerate(operator.coefficients):
        term = compose(DifferentialOperator.derivative(k),
                       DifferentialOperator.multiplication(c.conjugate()))
        result = result + term.scale((-1) ** k)
    return result


def gauge_conjugate(operator: DifferentialOperator, w: Coefficient) -> DifferentialOperator:
    """Replace ∂ by ∂ − w, i.e. conjugate by the gauge factor e^{∫w}."""
    shifted = DifferentialOperator.first_order(-_as_expression(w))
    result = DifferentialOperator.zero()
    shifted_power = DifferentialOperator.identity()
    for k, c in enumerate(operator.coefficients):
        if k:
            shifted_power = compose(shifted, shifted_power)
        result = result + shifted_power.scale(c)
    return result


def product(factors: Sequence[DifferentialOperator]) -> DifferentialOperator:
    """Left-to-right product factors[0] ∘ factors[1] ∘ …"""
    result = DifferentialOperator.identity()
    for factor in reversed(factors):
        result = compose(factor, result)
    return result


# Printable operator form: "(c_n) d^n + … + (c_1) d + (c_0)"

def format_operator(operator: DifferentialOperator) -> str:
    if operator.is_zero:
        return "(0)"
    parts = []
    for k in range(operator.order, -1, -1):
        c = operator.coefficient(k)
        if c.is_syntactic_zero:
            continue
        suffix = "" if k == 0 else (" d" if k == 1 else f" d^{k}")
        parts.append(f"({c}){suffix}")
    return " + ".join(parts)


def parse_operator(text: str) -> DifferentialOperator:
    coefficients: List[sympy.Expr] = []
    index = 0
    length = len(text)

    def skip_spaces(i):
        while i < length and text[i].isspace():
            i += 1
        return i

    def fail(message, i):
        raise OperatorFormatError(message, len(text[:i].encode('utf-8')), text)

    while True:
        index = skip_spaces(index)
        if index >= length or text[index] != '(':
            fail("expected '('", index)
        depth, start = 0, index
        while index < length:
            if text[index] == '(':
                depth += 1
            elif text[index] == ')':
                depth -= 1
                if depth == 0:
                    break
            index += 1
        if depth != 0:
            fail("unbalanced parentheses", start)
        coefficient = parse_tree(text[start + 1:index])
        index = skip_spaces(index + 1)

        order = 0
        if index < length and text[index] == 'd':
            order = 1
            index = skip_spaces(index + 1)
            if index < length and text[index] == '^':
                index = skip_spaces(index + 1)
                digits_start = index
                while index < length and text[index].isdigit():
                    index += 1
                if digits_start == index:
                    fail("expected derivative order", digits_start)
                order = int(text[digits_start:index])
                index = skip_spaces(index)

        if len(coefficients) <= order:
            coefficients.extend([sympy.Integer(0)] * (order + 1 - len(coefficients)))
        coefficients[order] += coefficient

        if index >= length:
            break
        if text[index] != '+':
            fail(f"unexpected '{text[index]}'", index)
        index += 1
    return DifferentialOperator(tuple(coefficients))
