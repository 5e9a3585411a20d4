"""
Text grammar for expressions in the variable q.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus and associates to the right; exponents must
reduce to integer constants. Numbers are exact decimals, optionally suffixed with
``i`` for imaginary literals (``2i``). Identifiers other than ``q`` and the
function names are parameters.
"""
import re
from dataclasses import dataclass
from typing import List, Optional

import sympy

from susy.exceptions import ExpressionError, ExpressionSyntaxError, UnknownFunctionError

FUNCTIONS = {
    'exp': sympy.exp,
    'sin': sympy.sin,
    'cos': sympy.cos,
    'log': sympy.log,
}

VARIABLE_NAME = 'q'

UNDEFINED = (sympy.zoo, sympy.nan, sympy.oo, -sympy.oo)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def symbol(name: str) -> sympy.Symbol:
    """The sympy symbol for ``name``: the variable is real, parameters may bind complex values."""
    if name == VARIABLE_NAME:
        return sympy.Symbol(name, real=True)
    return sympy.Symbol(name)


Q = symbol(VARIABLE_NAME)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode('utf-8'))


def tokenize(text: str) -> List[Token]:
    tokens = []
    index = 0
    while index < len(text):
        match = _TOKEN_RE.match(text, index)
        if match is None:
            raise ExpressionSyntaxError(
                f"unexpected character '{text[index]}'", _byte_offset(text, index), text
            )
        kind = match.lastgroup
        if kind != 'ws':
            tokens.append(Token(kind, match.group(), _byte_offset(text, index)))
        index = match.end()
    tokens.append(Token('end', '', _byte_offset(text, len(text))))
    return tokens


def number_literal(text: str) -> sympy.Expr:
    """Exact value of a numeric literal such as ``0.1``, ``3e-2`` or ``2i``."""
    imaginary = text.endswith('i')
    value = sympy.Rational(text[:-1] if imaginary else text)
    return value * sympy.I if imaginary else value


class ExpressionParser:
    """Recursive-descent parser producing sympy trees."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.position = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ExpressionSyntaxError:
        token = token or self.current
        return ExpressionSyntaxError(message, token.offset, self.text)

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or 'end of input'
            raise self.error(f"expected '{text}' but found '{found}'")
        return self.advance()

    def parse(self) -> sympy.Expr:
        if self.current.kind == 'end':
            raise self.error("empty expression")
        tree = self.parse_expr()
        if self.current.kind != 'end':
            raise self.error(f"unexpected '{self.current.text}'")
        return tree

    def parse_expr(self) -> sympy.Expr:
        tree = self.parse_term()
        while self.current.text in ('+', '-'):
            op = self.advance().text
            right = self.parse_term()
            tree = tree + right if op == '+' else tree - right
        return tree

    def parse_term(self) -> sympy.Expr:
        tree = self.parse_unary()
        while self.current.text in ('*', '/'):
            op_token = self.advance()
            right_token = self.current
            right = self.parse_unary()
            if op_token.text == '*':
                tree = tree * right
            else:
                if right == 0:
                    raise self.error("division by zero", right_token)
                tree = tree / right
        return tree

    def parse_unary(self) -> sympy.Expr:
        if self.current.text == '-':
            self.advance()
            return -self.parse_unary()
        if self.current.text == '+':
            self.advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> sympy.Expr:
        base = self.parse_atom()
        if self.current.text != '^':
            return base
        self.advance()
        exponent_token = self.current
        exponent = self.parse_unary()
        if not exponent.is_Integer:
            raise self.error("exponent must be an integer constant", exponent_token)
        if base == 0 and exponent < 0:
            raise self.error("division by zero", exponent_token)
        return sympy.Pow(base, exponent)

    def parse_atom(self) -> sympy.Expr:
        token = self.current
        if token.kind == 'number':
            self.advance()
            return number_literal(token.text)
        if token.kind == 'ident':
            self.advance()
            if self.current.text == '(':
                function = FUNCTIONS.get(token.text)
                if function is None:
                    raise UnknownFunctionError(token.text, token.offset, self.text)
                self.advance()
                argument = self.parse_expr()
                self.expect(')')
                value = function(argument)
                if value.has(*UNDEFINED):
                    raise self.error(f"{token.text} is undefined here", token)
                return value
            return symbol(token.text)
        if token.text == '(':
            self.advance()
            tree = self.parse_expr()
            self.expect(')')
            return tree
        if token.kind == 'end':
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected '{token.text}'")


def parse_tree(text: str) -> sympy.Expr:
    return ExpressionParser(text).parse()


# Printing back into the grammar above.

def _is_negative(node: sympy.Expr) -> bool:
    if node.is_Number:
        return bool(node < 0)
    if node.is_Mul:
        coeff = node.as_coeff_Mul()[0]
        return coeff.is_Number and bool(coeff < 0)
    return False


def _atom(node: sympy.Expr) -> str:
    text = format_tree(node)
    if node.is_Symbol or node is sympy.I or isinstance(node, tuple(FUNCTIONS.values())):
        return text
    if node.is_Integer and node >= 0:
        return text
    if node is sympy.E:
        return text
    return f"({text})"


def _format_number(node: sympy.Expr) -> str:
    if node.is_Integer:
        return str(node.p)
    if node.is_Rational:
        return f"{node.p}/{node.q}"
    return repr(float(node))


def _format_mul(node: sympy.Expr) -> str:
    if _is_negative(node):
        return f"-{_atom(-node)}" if (-node).is_Add else f"-{format_tree(-node)}"
    numerator, denominator = [], []
    coeff, rest = node.as_coeff_Mul()
    factors = sympy.Mul.make_args(rest)
    if coeff.is_Rational and coeff != 1:
        if coeff.p != 1:
            numerator.append(str(coeff.p))
        if coeff.q != 1:
            denominator.append(str(coeff.q))
    elif coeff != 1:
        numerator.append(_atom(coeff))
    for factor in factors:
        if factor.is_Pow and factor.exp.is_Integer and factor.exp < 0:
            denominator.append(_power_text(factor.base, -factor.exp))
        elif factor.is_Pow:
            numerator.append(format_tree(factor))
        else:
            numerator.append(_atom(factor))
    text = '*'.join(numerator) or '1'
    if denominator:
        den = denominator[0] if len(denominator) == 1 else '(' + '*'.join(denominator) + ')'
        text = f"{text}/{den}"
    return text


def _power_text(base: sympy.Expr, exponent: sympy.Expr) -> str:
    if exponent == 1:
        return _atom(base)
    return f"{_atom(base)}^{exponent}"


def format_tree(node: sympy.Expr) -> str:
    """Render a sympy tree in the grammar accepted by :func:`parse_tree`.

    Nodes sympy produces on its own but the grammar lacks are spelled with the
    grammar's functions: ``pi`` as ``-i log(-1)``, fractional powers through
    ``exp`` and ``log``, and the hyperbolic functions through ``exp``.
    """
    if node is sympy.I:
        return "1i"
    if node is sympy.E:
        return "exp(1)"
    if node is sympy.pi:
        return "(-1i*log(-1))"
    if node.has(*UNDEFINED):
        raise ExpressionError(f"cannot print undefined value in {node}")
    if node.is_Number:
        return _format_number(node)
    if node.is_Symbol:
        return node.name
    if node.is_Add:
        terms = node.as_ordered_terms()
        text = format_tree(terms[0])
        for term in terms[1:]:
            if _is_negative(term):
                text += f" - {format_tree(-term)}"
            else:
                text += f" + {format_tree(term)}"
        return text
    if node.is_Mul:
        return _format_mul(node)
    if node.is_Pow:
        if node.exp.is_Integer and node.exp < 0:
            return f"1/{_power_text(node.base, -node.exp)}"
        if node.exp.is_Integer:
            return _power_text(node.base, node.exp)
        return f"exp({_atom(node.exp)}*log({format_tree(node.base)}))"
    for name, function in FUNCTIONS.items():
        if isinstance(node, function):
            return f"{name}({format_tree(node.args[0])})"
    if isinstance(node, (sympy.sinh, sympy.cosh)):
        argument = format_tree(node.args[0])
        sign = '-' if isinstance(node, sympy.sinh) else '+'
        return f"(exp({argument}) {sign} exp(-({argument})))/2"
    raise ExpressionError(f"cannot print {node} in expression syntax")
