"""Univariate expression trees: evaluation, differentiation, printing, parsing.

GP search only builds Const, Var, Add, Mul, Exp and Ln. Div and Neg appear in
symbolic derivatives. Invalid evaluations are represented by NaN, which then
propagates through every operator.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator, List, Tuple, Union

import numpy as np

LN_GUARD = 1e-12
EXP_GUARD = 700.0


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Add:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Mul:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Div:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Exp:
    child: "Expression"


@dataclass(frozen=True)
class Ln:
    child: "Expression"


@dataclass(frozen=True)
class Neg:
    child: "Expression"


Expression = Union[Const, Var, Add, Mul, Div, Exp, Ln, Neg]
BINARY = (Add, Mul, Div)
UNARY = (Exp, Ln, Neg)
X = Var()


def children(e: Expression) -> Tuple[Expression, ...]:
    if isinstance(e, BINARY):
        return (e.left, e.right)
    if isinstance(e, UNARY):
        return (e.child,)
    return ()


def rebuild(e: Expression, kids) -> Expression:
    if isinstance(e, BINARY):
        return type(e)(kids[0], kids[1])
    if isinstance(e, UNARY):
        return type(e)(kids[0])
    return e


def complexity(e: Expression) -> int:
    """Number of nodes, all weighted equally."""
    return 1 + sum(complexity(c) for c in children(e))


def depth(e: Expression) -> int:
    """Edges on the longest root-to-leaf path (a lone leaf has depth 0)."""
    kids = children(e)
    return 0 if not kids else 1 + max(depth(c) for c in kids)


def iter_paths(e: Expression, prefix: Tuple[int, ...] = ()) -> Iterator[Tuple[Tuple[int, ...], Expression]]:
    """Preorder (path, node) pairs; a path is a tuple of child indices."""
    yield prefix, e
    for i, c in enumerate(children(e)):
        yield from iter_paths(c, prefix + (i,))


def get_at(e: Expression, path: Tuple[int, ...]) -> Expression:
    for i in path:
        e = children(e)[i]
    return e


def replace_at(e: Expression, path: Tuple[int, ...], new: Expression) -> Expression:
    if not path:
        return new
    kids = list(children(e))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(e, kids)


def constants(e: Expression) -> List[float]:
    return [n.value for _, n in iter_paths(e) if isinstance(n, Const)]


def with_constants(e: Expression, values) -> Expression:
    it = iter(list(values))

    def walk(n):
        if isinstance(n, Const):
            return Const(float(next(it)))
        kids = children(n)
        return rebuild(n, [walk(c) for c in kids]) if kids else n

    return walk(e)


def has_nested_unary(e: Expression, inside: bool = False) -> bool:
    """True if some Exp/Ln node lies in the subtree of another Exp/Ln node."""
    is_unary = isinstance(e, (Exp, Ln))
    if is_unary and inside:
        return True
    return any(has_nested_unary(c, inside or is_unary) for c in children(e))


# -- evaluation ---------------------------------------------------------------


def evaluate(e: Expression, x) -> np.ndarray:
    """Vectorized evaluation; invalid points come back as NaN."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        return _ev(e, x)


def _ev(e, x):
    if isinstance(e, Const):
        return np.full(x.shape, e.value)
    if isinstance(e, Var):
        return x
    if isinstance(e, Add):
        return _ev(e.left, x) + _ev(e.right, x)
    if isinstance(e, Mul):
        return _ev(e.left, x) * _ev(e.right, x)
    if isinstance(e, Div):
        den = _ev(e.right, x)
        return np.where(den == 0.0, np.nan, _ev(e.left, x) / np.where(den == 0.0, 1.0, den))
    if isinstance(e, Neg):
        return -_ev(e.child, x)
    if isinstance(e, Exp):
        a = _ev(e.child, x)
        return np.where(a > EXP_GUARD, np.nan, np.exp(np.minimum(a, EXP_GUARD)))
    if isinstance(e, Ln):
        a = _ev(e.child, x)
        return np.where(a > LN_GUARD, np.log(np.where(a > LN_GUARD, a, 1.0)), np.nan)
    raise TypeError(f"not an expression node: {e!r}")


def eval_expr(e: Expression, x: float) -> float:
    """Scalar evaluation; returns NaN (the invalid marker) outside the guards."""
    return float(evaluate(e, np.array([float(x)]))[0])


def is_invalid(v) -> bool:
    return bool(np.any(np.isnan(v)))


def eval_with_const_jacobian(e: Expression, x) -> Tuple[np.ndarray, np.ndarray]:
    """Value and d(value)/d(constants) in preorder constant order (forward mode)."""
    x = np.asarray(x, dtype=float)
    k = len(constants(e))
    counter = [0]

    def walk(n):
        if isinstance(n, Const):
            j = np.zeros((x.shape[0], k))
            j[:, counter[0]] = 1.0
            counter[0] += 1
            return np.full(x.shape, n.value), j
        if isinstance(n, Var):
            return x, np.zeros((x.shape[0], k))
        if isinstance(n, Add):
            (a, ja), (b, jb) = walk(n.left), walk(n.right)
            return a + b, ja + jb
        if isinstance(n, Mul):
            (a, ja), (b, jb) = walk(n.left), walk(n.right)
            return a * b, ja * b[:, None] + jb * a[:, None]
        if isinstance(n, Div):
            (a, ja), (b, jb) = walk(n.left), walk(n.right)
            b = np.where(b == 0.0, np.nan, b)
            return a / b, (ja * b[:, None] - jb * a[:, None]) / (b * b)[:, None]
        if isinstance(n, Neg):
            a, ja = walk(n.child)
            return -a, -ja
        if isinstance(n, Exp):
            a, ja = walk(n.child)
            v = np.where(a > EXP_GUARD, np.nan, np.exp(np.minimum(a, EXP_GUARD)))
            return v, ja * v[:, None]
        if isinstance(n, Ln):
            a, ja = walk(n.child)
            a = np.where(a > LN_GUARD, a, np.nan)
            return np.log(a), ja / a[:, None]
        raise TypeError(f"not an expression node: {n!r}")

    with np.errstate(all="ignore"):
        return walk(e)


def compile_expr(e: Expression) -> Callable[[np.ndarray], np.ndarray]:
    """Straight-line numpy function for fast repeated evaluation (no guards)."""
    src = _py(e)
    code = f"def _f(x):\n    return {src} + 0.0 * x\n"
    ns = {"exp": np.exp, "log": np.log}
    exec(compile(code, "<expression>", "exec"), ns)
    return ns["_f"]


def _py(e) -> str:
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Add):
        return f"({_py(e.left)} + {_py(e.right)})"
    if isinstance(e, Mul):
        return f"({_py(e.left)} * {_py(e.right)})"
    if isinstance(e, Div):
        return f"({_py(e.left)} / {_py(e.right)})"
    if isinstance(e, Neg):
        return f"(-{_py(e.child)})"
    if isinstance(e, Exp):
        return f"exp({_py(e.child)})"
    if isinstance(e, Ln):
        return f"log({_py(e.child)})"
    raise TypeError(f"not an expression node: {e!r}")


# -- differentiation ----------------------------------------------------------


def _is_const(e, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def s_add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def s_mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Mul(a, b)


def s_div(a, b):
    if _is_const(a, 0.0):
        return Const(0.0)
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def s_neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.child
    return Neg(a)


def diff_expr(e: Expression) -> Expression:
    """d/dx with light constant folding."""
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, Add):
        return s_add(diff_expr(e.left), diff_expr(e.right))
    if isinstance(e, Mul):
        return s_add(s_mul(diff_expr(e.left), e.right), s_mul(e.left, diff_expr(e.right)))
    if isinstance(e, Div):
        num = s_add(s_mul(diff_expr(e.left), e.right), s_neg(s_mul(e.left, diff_expr(e.right))))
        return s_div(num, s_mul(e.right, e.right))
    if isinstance(e, Neg):
        return s_neg(diff_expr(e.child))
    if isinstance(e, Exp):
        return s_mul(e, diff_expr(e.child))
    if isinstance(e, Ln):
        return s_div(diff_expr(e.child), e.child)
    raise TypeError(f"not an expression node: {e!r}")


# -- printing and parsing -----------------------------------------------------

_PREC = {Add: 1, Mul: 2, Div: 2}


def _fmt_num(v: float, digits: int) -> str:
    s = f"{v:.{digits}g}" if digits < 17 else repr(float(v))
    if digits >= 17 and float(s) != v:
        s = f"{v:.17g}"
    return s


def to_string(e: Expression, digits: int = 17, var: str = "x") -> str:
    """Deterministic infix form. With the default precision it parses back exactly."""

    def fmt(n, parent_prec=0, right=False):
        if isinstance(n, Const):
            s = _fmt_num(n.value, digits)
            return f"({s})" if n.value < 0 or s.startswith("-") else s
        if isinstance(n, Var):
            return var
        if isinstance(n, (Exp, Ln)):
            name = "exp" if isinstance(n, Exp) else "ln"
            return f"{name}({fmt(n.child)})"
        if isinstance(n, Neg):
            return f"neg({fmt(n.child)})"
        prec = _PREC[type(n)]
        op = {Add: " + ", Mul: "*", Div: "/"}[type(n)]
        s = fmt(n.left, prec, False) + op + fmt(n.right, prec, True)
        # left-associative grammar: a right child of equal precedence needs parens
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({s})"
        return s

    return fmt(e)


def display(e: Expression, var: str = "x") -> str:
    return to_string(e, digits=4, var=var)


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|nan|inf)|([A-Za-z_]\w*)|(.))")


class ParseError(ValueError):
    pass


def parse(text: str, var: str = "x") -> Expression:
    tokens = []
    for m in _TOKEN.finditer(text):
        num, name, sym = m.groups()
        if num is not None:
            tokens.append(("num", num))
        elif name is not None:
            tokens.append(("name", name))
        elif sym is not None and not sym.isspace():
            tokens.append(("sym", sym))
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else (None, None)

    def take(kind=None, value=None):
        tok = peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ParseError(f"unexpected token {tok[1]!r} at {pos[0]} in {text!r}")
        pos[0] += 1
        return tok

    def expr():
        left = term()
        while peek() == ("sym", "+"):
            take()
            left = Add(left, term())
        return left

    def term():
        left = atom()
        while peek() in (("sym", "*"), ("sym", "/")):
            op = take()[1]
            right = atom()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def atom():
        kind, value = peek()
        if kind == "num":
            take()
            return Const(float(value))
        if kind == "name":
            take()
            if value == var:
                return X
            if value in ("exp", "ln", "neg"):
                take("sym", "(")
                inner = expr()
                take("sym", ")")
                return {"exp": Exp, "ln": Ln, "neg": Neg}[value](inner)
            raise ParseError(f"unknown name {value!r}")
        if (kind, value) == ("sym", "("):
            take()
            if peek() == ("sym", "-"):
                take()
                v = take("num")[1]
                take("sym", ")")
                return Const(-float(v))
            inner = expr()
            take("sym", ")")
            return inner
        raise ParseError(f"unexpected token {value!r} in {text!r}")

    out = expr()
    if pos[0] != len(tokens):
        raise ParseError(f"trailing input in {text!r}")
    return out


def fold_constants(e: Expression) -> Expression:
    """Collapse every constant-only subtree into a single Const (when finite)."""
    kids = children(e)
    if not kids:
        return e
    kids = [fold_constants(c) for c in kids]
    node = rebuild(e, kids)
    if all(isinstance(c, Const) for c in kids):
        v = float(evaluate(node, np.zeros(1))[0])
        if np.isfinite(v):
            return Const(v)
    return node


def free_constants_close(a: Expression, b: Expression, rtol: float = 1e-12) -> bool:
    """Same structure and constants equal to ``rtol``."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Const):
        return math.isclose(a.value, b.value, rel_tol=rtol, abs_tol=0.0)
    return all(free_constants_close(x, y, rtol) for x, y in zip(children(a), children(b)))
