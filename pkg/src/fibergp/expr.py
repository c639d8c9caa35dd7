"""Expression trees: protected evaluation, random generation, rendering, parsing.

A tree is stored as a flat prefix tuple of nodes. A node is a
:class:`Function`, an ``int`` (variable index into the feature order) or a
``float`` (constant).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .dataset import FEATURE_SYMBOLS

N_FEATURES = len(FEATURE_SYMBOLS)
DEFAULT_ERC_RANGE = (-10.0, 10.0)


def protected_div(a: float, b: float) -> float:
    return 1.0 if abs(b) < K.GUARD else a / b


def protected_log(a: float) -> float:
    return 0.0 if abs(a) < K.GUARD else math.log(abs(a))


def protected_exp(a: float) -> float:
    return math.exp(min(max(a, -K.EXP_CLAMP), K.EXP_CLAMP))


def clamp_overflow(v: float) -> float:
    if v == math.inf:
        return K.OVERFLOW
    if v == -math.inf:
        return -K.OVERFLOW
    return v


@dataclass(frozen=True, eq=False)
class Function:
    name: str
    arity: int
    code: int
    symbol: str
    scalar: object

    def __call__(self, *children) -> "ExpressionTree":
        if len(children) != self.arity:
            raise ValueError(f"{self.name} takes {self.arity} argument(s), got {len(children)}")
        nodes = [self]
        for child in children:
            nodes.extend(_as_tree(child).nodes)
        return ExpressionTree(nodes)

    def __repr__(self) -> str:
        return self.name


ADD = Function("add", 2, K.ADD, "+", lambda a, b: a + b)
SUB = Function("sub", 2, K.SUB, "-", lambda a, b: a - b)
MUL = Function("mul", 2, K.MUL, "*", lambda a, b: a * b)
DIV = Function("div", 2, K.DIV, "/", protected_div)
LOG = Function("log", 1, K.LOG, "log", protected_log)
EXP = Function("exp", 1, K.EXP, "exp", protected_exp)

FUNCTIONS = (ADD, SUB, MUL, DIV, LOG, EXP)
_BY_SYMBOL = {f.symbol: f for f in FUNCTIONS}


def _arity(node) -> int:
    return node.arity if isinstance(node, Function) else 0


class ExpressionTree:
    """Immutable program tree in prefix order."""

    __slots__ = ("nodes", "_codes", "_consts", "_depth")

    def __init__(self, nodes: Sequence, n_features: int = N_FEATURES):
        nodes = tuple(_normalize(n, n_features) for n in nodes)
        need = 1
        for i, node in enumerate(nodes):
            if need == 0:
                raise ValueError(f"trailing nodes after complete tree at position {i}")
            need += _arity(node) - 1
        if need != 0 or not nodes:
            raise ValueError("incomplete tree: a function is missing children")
        self._init(nodes)

    @classmethod
    def _trusted(cls, nodes: tuple) -> "ExpressionTree":
        # for operators that splice already-valid subtrees
        self = cls.__new__(cls)
        self._init(nodes)
        return self

    def _init(self, nodes):
        self.nodes = nodes
        self._codes = None
        self._consts = None
        self._depth = None

    @property
    def codes(self) -> np.ndarray:
        if self._codes is None:
            self._codes = np.array(
                [n.code if isinstance(n, Function) else (n if type(n) is int else K.CONST)
                 for n in self.nodes],
                dtype=np.int64,
            )
            self._consts = np.array(
                [n if type(n) is float else 0.0 for n in self.nodes], dtype=np.float64
            )
        return self._codes

    @property
    def consts(self) -> np.ndarray:
        self.codes
        return self._consts

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def depth(self) -> int:
        if self._depth is None:
            self._depth = int(K.program_depth(self.codes))
        return self._depth

    def subtree_span(self, start: int) -> tuple[int, int]:
        need = 1
        end = start
        while need:
            need += _arity(self.nodes[end]) - 1
            end += 1
        return start, end

    def is_leaf(self) -> bool:
        return len(self.nodes) == 1

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, ExpressionTree):
            return NotImplemented
        return (
            len(self.nodes) == len(other.nodes)
            and np.array_equal(self.codes, other.codes)
            and self.consts.tobytes() == other.consts.tobytes()
        )

    def __hash__(self):
        return hash((self.codes.tobytes(), self.consts.tobytes()))

    def __repr__(self):
        return f"ExpressionTree({to_infix(self)!r})"

    def __str__(self):
        return to_infix(self)


def _normalize(node, n_features):
    if isinstance(node, Function):
        return node
    if isinstance(node, (bool, np.bool_)):
        raise TypeError("booleans are not tree nodes")
    if isinstance(node, (int, np.integer)):
        if not 0 <= node < n_features:
            raise ValueError(f"variable index {node} outside [0, {n_features - 1}]")
        return int(node)
    if isinstance(node, (float, np.floating)):
        if not math.isfinite(node):
            raise ValueError("constants must be finite")
        return float(node)
    raise TypeError(f"invalid tree node {node!r}")


def var(index: int) -> ExpressionTree:
    return ExpressionTree((int(index),))


def const(value: float) -> ExpressionTree:
    return ExpressionTree((float(value),))


def _as_tree(x) -> ExpressionTree:
    if isinstance(x, ExpressionTree):
        return x
    if isinstance(x, (int, np.integer)):
        return var(x)
    return const(x)


def evaluate(t: ExpressionTree, x: Sequence[float]) -> float:
    """Reference scalar evaluation at a single feature vector."""
    stack = []
    for node in reversed(t.nodes):
        if isinstance(node, Function):
            args = [stack.pop() for _ in range(node.arity)]
            stack.append(clamp_overflow(node.scalar(*args)))
        elif type(node) is int:
            stack.append(float(x[node]))
        else:
            stack.append(node)
    return stack[0]


def evaluate_batch(t: ExpressionTree, X) -> np.ndarray:
    """Vectorized :func:`evaluate` over the rows of ``X``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return K.evaluate_program(t.codes, t.consts, X)


def size(t: ExpressionTree) -> int:
    return t.size


def depth(t: ExpressionTree) -> int:
    return t.depth


def count_var_refs(t: ExpressionTree, n_features: int = N_FEATURES) -> dict[int, int]:
    counts = var_ref_vector(t, n_features)
    return {i: int(c) for i, c in enumerate(counts)}


def var_ref_vector(t: ExpressionTree, n_features: int = N_FEATURES) -> np.ndarray:
    codes = t.codes
    return np.bincount(codes[codes >= 0], minlength=n_features)[:n_features]


def random_terminal(rng: np.random.Generator, n_features: int = N_FEATURES,
                    erc_range=DEFAULT_ERC_RANGE):
    k = int(rng.integers(n_features + 1))
    if k < n_features:
        return k
    return float(rng.uniform(erc_range[0], erc_range[1]))


def random_tree(
    depth_limit: int,
    method: str,
    rng: np.random.Generator,
    n_features: int = N_FEATURES,
    erc_range=DEFAULT_ERC_RANGE,
) -> ExpressionTree:
    """Generate a tree by the ``"full"`` or ``"grow"`` method."""
    if depth_limit < 1:
        raise ValueError("depth_limit must be >= 1")
    if method not in ("full", "grow"):
        raise ValueError(f"unknown method {method!r}")
    n_terminals = n_features + 1
    p_terminal = n_terminals / (n_terminals + len(FUNCTIONS))
    nodes = []
    pending = [1]
    while pending:
        d = pending.pop()
        if d >= depth_limit or (method == "grow" and rng.random() < p_terminal):
            nodes.append(random_terminal(rng, n_features, erc_range))
        else:
            f = FUNCTIONS[int(rng.integers(len(FUNCTIONS)))]
            nodes.append(f)
            pending.extend([d + 1] * f.arity)
    return ExpressionTree._trusted(tuple(nodes))


def _fmt_const(v: float) -> str:
    return repr(float(v))


def to_infix(t: ExpressionTree, names: Sequence[str] = FEATURE_SYMBOLS) -> str:
    stack = []
    for node in reversed(t.nodes):
        if isinstance(node, Function):
            args = [stack.pop() for _ in range(node.arity)]
            if node.arity == 2:
                stack.append(f"({args[0]} {node.symbol} {args[1]})")
            else:
                stack.append(f"{node.symbol}({args[0]})")
        elif type(node) is int:
            stack.append(names[node])
        else:
            stack.append(_fmt_const(node))
    return stack[0]


_NUMBER_RE = re.compile(r"-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class InfixSyntaxError(ValueError):
    pass


def parse_infix(text: str, names: Sequence[str] = FEATURE_SYMBOLS) -> ExpressionTree:
    """Parse the fully parenthesized form produced by :func:`to_infix`."""
    pos = 0
    nodes = []
    index = {n: i for i, n in enumerate(names)}

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expect(ch):
        nonlocal pos
        skip()
        if not text.startswith(ch, pos):
            raise InfixSyntaxError(f"expected {ch!r} at offset {pos} in {text!r}")
        pos += 1

    def expr():
        nonlocal pos
        skip()
        if text.startswith("(", pos):
            pos += 1
            slot = len(nodes)
            nodes.append(None)
            expr()
            skip()
            op = text[pos:pos + 1]
            if op not in ("+", "-", "*", "/"):
                raise InfixSyntaxError(f"expected operator at offset {pos} in {text!r}")
            pos += 1
            nodes[slot] = _BY_SYMBOL[op]
            expr()
            expect(")")
            return
        m = _NUMBER_RE.match(text, pos)
        if m:
            pos = m.end()
            nodes.append(float(m.group()))
            return
        m = _NAME_RE.match(text, pos)
        if m is None:
            raise InfixSyntaxError(f"unexpected input at offset {pos} in {text!r}")
        word = m.group()
        pos = m.end()
        if word in ("log", "exp"):
            nodes.append(_BY_SYMBOL[word])
            expect("(")
            expr()
            expect(")")
        elif word in index:
            nodes.append(index[word])
        else:
            raise InfixSyntaxError(f"unknown name {word!r} in {text!r}")

    expr()
    skip()
    if pos != len(text):
        raise InfixSyntaxError(f"trailing input at offset {pos} in {text!r}")
    return ExpressionTree(nodes, n_features=len(names))
