"""Closed-form warp functions phi(omega, r).

A small infix language (``+ - * / ^``, unary minus, ``sin cos sinh cosh exp log sqrt abs``,
the constants ``pi`` and ``e``) is parsed into an immutable expression tree.  Trees can be
differentiated exactly, serialized back to text and evaluated on numpy arrays.

Evaluation raises WarpDomainError outside a function's domain, and for ``abs`` and its
derivative ``sign`` at exactly 0.
"""

import logging
import math
import re
from dataclasses import dataclass
from functools import singledispatch
from typing import (Callable, Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Sequence,
                    Tuple, Union)

import numpy as np

from warpends.types import ArrayLike, Point

LOG = logging.getLogger(__name__)
LOG.addHandler(logging.NullHandler())


RADIUS = 'r'
COORDINATES = ('theta', 'u', 'v')
CONSTANTS = {'pi': math.pi, 'e': math.e}


class WarpError(ValueError):
    pass


class WarpSyntaxError(WarpError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f'{message} at offset {offset}')
        self.offset = offset


class UnknownIdentifierError(WarpError):
    def __init__(self, name: str, offset: int, known: Sequence[str]) -> None:
        super().__init__(f'unknown identifier {name!r} at offset {offset} '
                         f'(known: {", ".join(sorted(known))})')
        self.name = name
        self.offset = offset


class ArityError(WarpError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f'{message} at offset {offset}')
        self.offset = offset


class WarpDomainError(WarpError):
    def __init__(self, reason: str, expression: str) -> None:
        super().__init__(f'{reason} in {expression!r}')
        self.reason = reason
        self.expression = expression


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: 'Node'


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'Node'
    right: 'Node'


@dataclass(frozen=True)
class Call:
    func: str
    arg: 'Node'


Node = Union[Number, Constant, Var, Neg, BinOp, Call]

ZERO = Number(0.0)
ONE = Number(1.0)
TWO = Number(2.0)


def _check_positive(x: np.ndarray) -> Optional[str]:
    return 'non-positive argument' if np.any(x <= 0) else None


def _check_non_negative(x: np.ndarray) -> Optional[str]:
    return 'negative argument' if np.any(x < 0) else None


def _check_kink(x: np.ndarray) -> Optional[str]:
    return 'abs is not differentiable at 0' if np.any(x == 0) else None


def _check_non_zero(x: np.ndarray) -> Optional[str]:
    return 'sign is not differentiable at 0' if np.any(x == 0) else None


def _no_check(x: np.ndarray) -> Optional[str]:
    return None


class Function(NamedTuple):
    apply: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], Optional[str]]


FUNCTIONS: Dict[str, Function] = {
    'sin': Function(np.sin, _no_check),
    'cos': Function(np.cos, _no_check),
    'sinh': Function(np.sinh, _no_check),
    'cosh': Function(np.cosh, _no_check),
    'exp': Function(np.exp, _no_check),
    'log': Function(np.log, _check_positive),
    'sqrt': Function(np.sqrt, _check_non_negative),
    # refused at the kink, like its derivative
    'abs': Function(np.abs, _check_kink),
    # only produced by differentiating abs
    'sign': Function(np.sign, _check_non_zero),
}


TOKEN_RE = re.compile(r'''
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
''', re.VERBOSE)


class Token(NamedTuple):
    kind: str
    text: str
    offset: int

    def describe(self) -> str:
        return 'end of input' if self.kind == 'end' else repr(self.text)


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0

    def offset(index: int) -> int:
        return len(text[:index].encode('utf-8'))

    while position < len(text):
        match = TOKEN_RE.match(text, position)
        if match is None:
            raise WarpSyntaxError(f'unexpected character {text[position]!r}', offset(position))

        kind = match.lastgroup or ''
        if kind != 'space':
            tokens.append(Token(kind, match.group(), offset(position)))
        position = match.end()

    tokens.append(Token('end', '', offset(len(text))))
    return tokens


class Parser:
    """Recursive-descent parser following the grammar::

        expr   := term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := unary ('^' factor)?
        unary  := '-'? atom
        atom   := number | ident | ident '(' expr ')' | '(' expr ')'
    """

    def __init__(self, text: str, variables: FrozenSet[str]) -> None:
        self.tokens = tokenize(text)
        self.position = 0
        self.variables = variables

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def at(self, *texts: str) -> bool:
        return self.current.kind == 'op' and self.current.text in texts

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise WarpSyntaxError(f'expected {text!r} but found {self.current.describe()}',
                                  self.current.offset)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != 'end':
            raise WarpSyntaxError(f'unexpected {self.current.describe()}', self.current.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at('+', '-'):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.at('*', '/'):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.unary()
        if self.at('^'):
            self.advance()
            return BinOp('^', base, self.factor())
        return base

    def unary(self) -> Node:
        if self.at('-'):
            self.advance()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Node:
        token = self.current

        if token.kind == 'number':
            self.advance()
            return Number(float(token.text))

        if token.kind == 'ident':
            self.advance()
            if self.at('('):
                return self.call(token)
            if token.text in FUNCTIONS:
                raise ArityError(f'function {token.text!r} takes one argument', token.offset)
            if token.text in self.variables:
                return Var(token.text)
            if token.text in CONSTANTS:
                return Constant(token.text)
            raise UnknownIdentifierError(token.text, token.offset, self.known())

        if self.at('('):
            self.advance()
            node = self.expr()
            self.expect(')')
            return node

        raise WarpSyntaxError(f'expected a number, identifier or "(" but found '
                              f'{token.describe()}', token.offset)

    def call(self, name: Token) -> Node:
        if name.text not in FUNCTIONS:
            if name.text in self.variables or name.text in CONSTANTS:
                raise ArityError(f'{name.text!r} is not a function', name.offset)
            raise UnknownIdentifierError(name.text, name.offset, self.known())

        self.expect('(')
        arg = self.expr()
        if self.at(','):
            raise ArityError(f'function {name.text!r} takes exactly one argument',
                             self.current.offset)
        self.expect(')')
        return Call(name.text, arg)

    def known(self) -> List[str]:
        return [*self.variables, *CONSTANTS, *FUNCTIONS]


# Binding strength of each node kind and the minimum strength required of operands
LEVELS = {'+': 1, '-': 1, '*': 2, '/': 2, '^': 3}
OPERAND_LEVELS = {'+': (1, 2), '-': (1, 2), '*': (2, 3), '/': (2, 3), '^': (4, 3)}


def _level(node: Node) -> int:
    if isinstance(node, BinOp):
        return LEVELS[node.op]
    if isinstance(node, Neg):
        return 4
    return 5


def _wrap(node: Node, level: int) -> str:
    text = serialize(node)
    return f'({text})' if _level(node) < level else text


def serialize(node: Node) -> str:
    if isinstance(node, Number):
        if node.value < 0:
            return f'(-{-node.value!r})'
        return repr(node.value)
    if isinstance(node, (Constant, Var)):
        return node.name
    if isinstance(node, Neg):
        return '-' + _wrap(node.operand, 5)
    if isinstance(node, Call):
        return f'{node.func}({serialize(node.arg)})'

    left, right = OPERAND_LEVELS[node.op]
    if node.op == '^':
        return f'{_wrap(node.left, left)}^{_wrap(node.right, right)}'
    return f'{_wrap(node.left, left)} {node.op} {_wrap(node.right, right)}'


def free_variables(node: Node) -> FrozenSet[str]:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, Call):
        return free_variables(node.arg)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    return frozenset()


def _is_number(node: Node, value: float) -> bool:
    return isinstance(node, Number) and node.value == value


# Constructors that drop trivial zeros and ones produced by the derivative rules
def _add(a: Node, b: Node) -> Node:
    if _is_number(a, 0.0):
        return b
    if _is_number(b, 0.0):
        return a
    return BinOp('+', a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_number(b, 0.0):
        return a
    if _is_number(a, 0.0):
        return _neg(b)
    return BinOp('-', a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_number(a, 0.0) or _is_number(b, 0.0):
        return ZERO
    if _is_number(a, 1.0):
        return b
    if _is_number(b, 1.0):
        return a
    return BinOp('*', a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_number(a, 0.0):
        return ZERO
    if _is_number(b, 1.0):
        return a
    return BinOp('/', a, b)


def _neg(a: Node) -> Node:
    if _is_number(a, 0.0):
        return ZERO
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _number(value: float) -> Node:
    return Number(value) if value >= 0 else Neg(Number(-value))


@singledispatch
def derive(node: Node, var: str) -> Node:
    raise TypeError(f'cannot differentiate {node!r}')


@derive.register(Number)
def _derive_number(node: Number, var: str) -> Node:
    return ZERO


@derive.register(Constant)
def _derive_constant(node: Constant, var: str) -> Node:
    return ZERO


@derive.register(Var)
def _derive_var(node: Var, var: str) -> Node:
    return ONE if node.name == var else ZERO


@derive.register(Neg)
def _derive_neg(node: Neg, var: str) -> Node:
    return _neg(derive(node.operand, var))


@derive.register(BinOp)
def _derive_binop(node: BinOp, var: str) -> Node:
    a, b = node.left, node.right
    da, db = derive(a, var), derive(b, var)

    if node.op == '+':
        return _add(da, db)
    if node.op == '-':
        return _sub(da, db)
    if node.op == '*':
        return _add(_mul(da, b), _mul(a, db))
    if node.op == '/':
        return _div(_sub(_mul(da, b), _mul(a, db)), BinOp('^', b, TWO))

    if var not in free_variables(b):
        if isinstance(b, Number):
            lowered = _number(b.value - 1.0)
        else:
            lowered = BinOp('-', b, ONE)
        return _mul(_mul(b, BinOp('^', a, lowered)), da)
    if var not in free_variables(a):
        return _mul(_mul(node, Call('log', a)), db)
    return _mul(node, _add(_mul(db, Call('log', a)), _div(_mul(b, da), a)))


def _outer_derivative(func: str, arg: Node) -> Node:
    if func == 'sin':
        return Call('cos', arg)
    if func == 'cos':
        return Neg(Call('sin', arg))
    if func == 'sinh':
        return Call('cosh', arg)
    if func == 'cosh':
        return Call('sinh', arg)
    if func == 'exp':
        return Call('exp', arg)
    if func == 'log':
        return BinOp('/', ONE, arg)
    if func == 'sqrt':
        return BinOp('/', ONE, BinOp('*', TWO, Call('sqrt', arg)))
    if func == 'abs':
        return Call('sign', arg)
    return ZERO


@derive.register(Call)
def _derive_call(node: Call, var: str) -> Node:
    return _mul(_outer_derivative(node.func, node.arg), derive(node.arg, var))


def _domain_error(node: Node, reason: Optional[str]) -> None:
    if reason is not None:
        raise WarpDomainError(reason, serialize(node))


def _power(node: BinOp, base: np.ndarray, exponent: np.ndarray) -> np.ndarray:
    fractional = exponent != np.round(exponent)
    if np.any((base < 0) & fractional):
        _domain_error(node, 'negative base with non-integer exponent')
    if np.any((base == 0) & (exponent < 0)):
        _domain_error(node, 'zero base with negative exponent')
    return np.power(base, exponent)


def _evaluate(node: Node, env: Mapping[str, np.ndarray]) -> np.ndarray:
    if isinstance(node, Number):
        return np.float64(node.value)  # type: ignore[return-value]
    if isinstance(node, Constant):
        return np.float64(CONSTANTS[node.name])  # type: ignore[return-value]
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_evaluate(node.operand, env)
    if isinstance(node, Call):
        arg = _evaluate(node.arg, env)
        function = FUNCTIONS[node.func]
        _domain_error(node, function.domain(arg))
        return function.apply(arg)

    left = _evaluate(node.left, env)
    right = _evaluate(node.right, env)
    if node.op == '+':
        return left + right
    if node.op == '-':
        return left - right
    if node.op == '*':
        return left * right
    if node.op == '/':
        if np.any(right == 0):
            _domain_error(node, 'division by zero')
        return left / right
    return _power(node, left, right)


class WarpExpr:
    """Parsed expression over a fixed set of cross-section coordinates and, if radial, r"""

    def __init__(self, ast: Node, coords: Sequence[str] = (), radial: bool = True) -> None:
        self.ast = ast
        self.coords = tuple(coords)
        self.radial = radial

    @property
    def variables(self) -> FrozenSet[str]:
        return free_variables(self.ast)

    @property
    def depends_on_omega(self) -> bool:
        return bool(self.variables & set(self.coords))

    def __str__(self) -> str:
        return serialize(self.ast)

    def __repr__(self) -> str:
        return f'WarpExpr({str(self)!r}, coords={self.coords!r})'

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, WarpExpr) and self.ast == other.ast
                and self.coords == other.coords and self.radial == other.radial)

    def __hash__(self) -> int:
        return hash((self.ast, self.coords, self.radial))

    def __call__(self, omega: Point = (), r: ArrayLike = 0.0) -> np.ndarray:
        if len(omega) != len(self.coords):
            raise ValueError(f'{self} expects {len(self.coords)} cross-section coordinates '
                             f'{self.coords}, got {len(omega)}')

        env = {name: np.asarray(value, dtype=float) for name, value in zip(self.coords, omega)}
        if self.radial:
            env[RADIUS] = np.asarray(r, dtype=float)

        with np.errstate(all='ignore'):
            result = _evaluate(self.ast, env)

        if not np.all(np.isfinite(result)):
            raise WarpDomainError('non-finite value', str(self))

        shape = np.broadcast_shapes(*(np.shape(value) for value in env.values()))
        return np.array(np.broadcast_to(result, shape), dtype=float)


def parse_warp(text: str, coords: Sequence[str] = (), radial: bool = True) -> WarpExpr:
    unknown = [name for name in coords if name not in COORDINATES]
    if unknown:
        raise WarpError(f'unsupported coordinate names {unknown}; use {COORDINATES}')

    variables = frozenset(coords) | ({RADIUS} if radial else frozenset())
    ast = Parser(str(text), variables).parse()
    LOG.debug('Parsed %r as %s', text, serialize(ast))
    return WarpExpr(ast, coords, radial)


def differentiate(expr: WarpExpr, var: str) -> WarpExpr:
    declared = expr.coords + ((RADIUS,) if expr.radial else ())
    if var not in declared:
        raise WarpError(f'cannot differentiate {expr} with respect to {var!r}; '
                        f'declared coordinates are {declared}')
    return WarpExpr(derive(expr.ast, var), expr.coords, expr.radial)


class WarpField:
    """phi(omega, r) with its exact partial derivatives"""

    def __init__(self, expr: WarpExpr,
                 positivity_domain: Optional[Tuple[float, float]] = None) -> None:
        if not expr.radial:
            raise WarpError(f'warp {expr} must be a function of r')

        self.expr = expr
        self.d_r = differentiate(expr, RADIUS)
        self.d_rr = differentiate(self.d_r, RADIUS)
        self.d_omega = tuple(differentiate(expr, name) for name in expr.coords)
        self.positivity_domain = positivity_domain

    @property
    def coords(self) -> Tuple[str, ...]:
        return self.expr.coords

    @property
    def is_radial(self) -> bool:
        return not self.expr.depends_on_omega

    def __str__(self) -> str:
        return str(self.expr)

    def __repr__(self) -> str:
        return f'WarpField({str(self.expr)!r}, positivity_domain={self.positivity_domain})'

    def __call__(self, omega: Point = (), r: ArrayLike = 0.0) -> np.ndarray:
        return self.expr(omega, r)

    def radial(self, r: ArrayLike) -> np.ndarray:
        """Value along the origin ray; equals the warp everywhere when it is radial"""
        return self.expr(tuple(0.0 for _ in self.coords), r)

    def radial_derivative(self, r: ArrayLike) -> np.ndarray:
        return self.d_r(tuple(0.0 for _ in self.coords), r)

    def radial_second_derivative(self, r: ArrayLike) -> np.ndarray:
        return self.d_rr(tuple(0.0 for _ in self.coords), r)


def warp_field(text: Union[str, WarpExpr, WarpField], coords: Sequence[str] = ()) -> WarpField:
    if isinstance(text, WarpField):
        return text
    if isinstance(text, WarpExpr):
        return WarpField(text)
    return WarpField(parse_warp(text, coords))


def evaluate(field: Union[WarpExpr, WarpField], omega: Point = (),
             r: ArrayLike = 0.0) -> np.ndarray:
    return field(omega, r)
