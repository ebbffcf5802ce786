"""Textual equation language for hypothesis models.

A model declares parameters, physical dimensions, and output equations:

    hypothesis "Law of free fall" {
        id = 1;
        param g, v0, s0;
        dim t;
        out a = -g;
        out v = -g*t + v0;
        out s = -(g/2)*t^2 + v0*t + s0;
    }

Infix operators follow standard precedence, ``^`` is right-associative with
a constant exponent, and ``sqrt(...)`` is the only builtin function.
Parsing, FD-schema extraction, and grid evaluation live here.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple, Union

from .errors import (
    CyclicOutputDefinition,
    DivisionByZero,
    ModelSyntaxError,
    NegativeSqrtArgument,
    NonConstantExponent,
    UnboundParameter,
    UndeclaredVariable,
)
from .fd import FD, FDSet


# --- AST ---

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sqrt:
    operand: "Expr"


Expr = Union[Const, Var, Neg, BinOp, Sqrt]


@dataclass(frozen=True)
class HypothesisModel:
    name: str
    params: Tuple[str, ...]
    dims: Tuple[str, ...]
    outputs: Tuple[Tuple[str, Expr], ...]
    upsilon: Optional[int] = None

    @property
    def output_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.outputs)


# --- tokenizer ---

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+(\.\d+)?|\.\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<string>"[^"\n]*")
  | (?P<op>[{}();,=^*/+\-])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"hypothesis", "id", "param", "dim", "out", "sqrt"}


@dataclass
class _Token:
    kind: str  # number | name | string | op | eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        # lastgroup reports the innermost named group that matched
        for k in ("ws", "number", "name", "string", "op"):
            if m.group(k) is not None:
                kind = k
                break
        raw = m.group(0)
        if kind != "ws":
            tokens.append(_Token(kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def _expect(self, text: str) -> _Token:
        if self.cur.text != text:
            raise ModelSyntaxError(
                f"expected {text!r}, found {self.cur.text or 'end of input'!r}",
                self.cur.line,
                self.cur.column,
            )
        return self._advance()

    def _expect_name(self) -> _Token:
        if self.cur.kind != "name" or self.cur.text in _KEYWORDS:
            raise ModelSyntaxError(
                f"expected identifier, found {self.cur.text!r}",
                self.cur.line,
                self.cur.column,
            )
        return self._advance()

    def parse_model(self) -> HypothesisModel:
        self._expect("hypothesis")
        if self.cur.kind != "string":
            raise ModelSyntaxError(
                "expected quoted hypothesis name", self.cur.line, self.cur.column
            )
        name = self._advance().text[1:-1]
        self._expect("{")
        params: List[str] = []
        dims: List[str] = []
        outputs: List[Tuple[str, Expr]] = []
        upsilon: Optional[int] = None
        while self.cur.text != "}":
            tok = self.cur
            if tok.text == "id":
                self._advance()
                self._expect("=")
                num = self.cur
                if num.kind != "number":
                    raise ModelSyntaxError("expected integer id", num.line, num.column)
                upsilon = int(float(self._advance().text))
                self._expect(";")
            elif tok.text == "param":
                self._advance()
                params.extend(self._name_list())
            elif tok.text == "dim":
                self._advance()
                dims.extend(self._name_list())
            elif tok.text == "out":
                self._advance()
                out_name = self._expect_name().text
                self._expect("=")
                expr = self._expr()
                self._expect(";")
                outputs.append((out_name, expr))
            else:
                raise ModelSyntaxError(
                    f"unexpected clause {tok.text!r}", tok.line, tok.column
                )
        self._expect("}")
        if self.cur.kind != "eof":
            raise ModelSyntaxError(
                "trailing input after model", self.cur.line, self.cur.column
            )
        model = HypothesisModel(
            name=name,
            params=tuple(params),
            dims=tuple(dims),
            outputs=tuple(outputs),
            upsilon=upsilon,
        )
        _validate(model)
        return model

    def _name_list(self) -> List[str]:
        names = [self._expect_name().text]
        while self.cur.text == ",":
            self._advance()
            names.append(self._expect_name().text)
        self._expect(";")
        return names

    # precedence climbing: additive < multiplicative < unary < power < atom
    def _expr(self) -> Expr:
        left = self._term()
        while self.cur.text in ("+", "-"):
            op = self._advance().text
            left = BinOp(op, left, self._term())
        return left

    def _term(self) -> Expr:
        left = self._unary()
        while self.cur.text in ("*", "/"):
            op = self._advance().text
            left = BinOp(op, left, self._unary())
        return left

    def _unary(self) -> Expr:
        if self.cur.text == "-":
            self._advance()
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self.cur.text == "^":
            tok = self._advance()
            exponent = self._unary()
            if not _is_constant(exponent):
                raise NonConstantExponent(
                    f"exponent must be a constant (line {tok.line})"
                )
            return BinOp("^", base, exponent)
        return base

    def _atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "number":
            self._advance()
            return Const(float(tok.text))
        if tok.text == "sqrt":
            self._advance()
            self._expect("(")
            inner = self._expr()
            self._expect(")")
            return Sqrt(inner)
        if tok.kind == "name" and tok.text not in _KEYWORDS:
            self._advance()
            return Var(tok.text)
        if tok.text == "(":
            self._advance()
            inner = self._expr()
            self._expect(")")
            return inner
        raise ModelSyntaxError(
            f"unexpected token {tok.text or 'end of input'!r}", tok.line, tok.column
        )


def _is_constant(e: Expr) -> bool:
    if isinstance(e, Const):
        return True
    if isinstance(e, Neg):
        return _is_constant(e.operand)
    return False


def free_variables(e: Expr) -> Set[str]:
    if isinstance(e, Const):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Neg, Sqrt)):
        return free_variables(e.operand)
    return free_variables(e.left) | free_variables(e.right)


def _validate(model: HypothesisModel) -> None:
    declared = set(model.params) | set(model.dims) | set(model.output_names)
    if len(declared) < len(model.params) + len(model.dims) + len(model.outputs):
        raise ModelSyntaxError(
            f"params, dims, and outputs of {model.name!r} must have disjoint names"
        )
    deps: Dict[str, Set[str]] = {}
    for out_name, expr in model.outputs:
        for var in free_variables(expr):
            if var not in declared:
                raise UndeclaredVariable(
                    f"{var!r} in output {out_name!r} is not declared"
                )
        deps[out_name] = free_variables(expr) & set(model.output_names)
    _check_acyclic(deps)


def _check_acyclic(deps: Dict[str, Set[str]]) -> None:
    state: Dict[str, int] = {}  # 0 visiting, 1 done

    def visit(node: str, stack: List[str]) -> None:
        if state.get(node) == 1:
            return
        if state.get(node) == 0:
            cycle = stack[stack.index(node):] + [node]
            raise CyclicOutputDefinition(
                "outputs form a cycle: " + " -> ".join(cycle)
            )
        state[node] = 0
        for dep in sorted(deps.get(node, ())):
            visit(dep, stack + [node])
        state[node] = 1

    for node in deps:
        visit(node, [])


def parse_model(text: str) -> HypothesisModel:
    """Parse a model source; deterministic (same text, structurally equal AST)."""
    return _Parser(text).parse_model()


def evaluation_order(model: HypothesisModel) -> List[str]:
    """Output names in dependency order (declaration order when no forward
    references exist)."""
    deps = {
        name: free_variables(expr) & set(model.output_names)
        for name, expr in model.outputs
    }
    decl = list(model.output_names)
    order: List[str] = []
    done: Set[str] = set()
    while len(order) < len(decl):
        progressed = False
        for name in decl:
            if name not in done and deps[name] <= done:
                order.append(name)
                done.add(name)
                progressed = True
        if not progressed:  # pragma: no cover - cycles rejected at parse
            raise CyclicOutputDefinition("outputs form a cycle")
    return order


# --- FD extraction ---

def dependency_basis(model: HypothesisModel) -> Dict[str, Tuple[Set[str], Set[str]]]:
    """Per output, the params and dims transitively reachable through its
    expression (following references to other outputs)."""
    exprs = dict(model.outputs)
    basis: Dict[str, Tuple[Set[str], Set[str]]] = {}
    for name in evaluation_order(model):
        params: Set[str] = set()
        dims: Set[str] = set()
        for var in free_variables(exprs[name]):
            if var in model.params:
                params.add(var)
            elif var in model.dims:
                dims.add(var)
            else:
                p, d = basis[var]
                params |= p
                dims |= d
        basis[name] = (params, dims)
    return basis


def extract_fds(model: HypothesisModel) -> FDSet:
    """The model's FD schema over {phi, upsilon} + params + dims + outputs.

    Constants and mathematical structure are discarded: each output is
    functionally determined by its reachable params and dims together with
    the hypothesis id; the phenomenon id determines all parameter values.
    """
    universe = (
        {"phi", "upsilon"}
        | set(model.params)
        | set(model.dims)
        | set(model.output_names)
    )
    fds: List[FD] = []
    if model.params:
        fds.append(FD(frozenset({"phi"}), frozenset(model.params)))
    basis = dependency_basis(model)
    for name, _ in model.outputs:
        params, dims = basis[name]
        lhs = params | dims | {"upsilon"}
        fds.append(FD(frozenset(lhs), frozenset({name})))
    return FDSet(frozenset(fds), frozenset(universe))


# --- evaluation ---

def _eval(e: Expr, env: Dict[str, float]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, Sqrt):
        arg = _eval(e.operand, env)
        if arg < 0:
            raise NegativeSqrtArgument(f"sqrt of negative value {arg}")
        return math.sqrt(arg)
    left = _eval(e.left, env)
    right = _eval(e.right, env)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if e.op == "/":
        if right == 0:
            raise DivisionByZero("division by zero")
        return left / right
    if e.op == "^":
        return left ** right
    raise ValueError(f"unknown operator {e.op!r}")  # pragma: no cover


def evaluate(
    model: HypothesisModel,
    pv: Dict[str, float],
    grid: Sequence[Dict[str, float]],
) -> List[Dict[str, float]]:
    """One row per grid point, mapping dims and outputs to IEEE doubles."""
    for p in model.params:
        if p not in pv:
            raise UnboundParameter(f"parameter {p!r} is not bound")
    exprs = dict(model.outputs)
    order = evaluation_order(model)
    rows = []
    for point in grid:
        for d in model.dims:
            if d not in point:
                raise UnboundParameter(f"dimension {d!r} is not bound")
        env: Dict[str, float] = {**{p: float(pv[p]) for p in model.params},
                                 **{d: float(point[d]) for d in model.dims}}
        row = {d: env[d] for d in model.dims}
        for name in order:
            env[name] = _eval(exprs[name], env)
        for name in model.output_names:
            row[name] = env[name]
        rows.append(row)
    return rows


# --- pretty printing ---

def _fmt(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        # parenthesize the whole negation: '^' binds tighter than unary
        # minus, so a bare -(x) would re-parse wrongly as a power base
        return f"(-{_fmt(e.operand)})"
    if isinstance(e, Sqrt):
        return f"sqrt({_fmt(e.operand)})"
    return f"({_fmt(e.left)} {e.op} {_fmt(e.right)})"


def pretty_print(model: HypothesisModel) -> str:
    """Render a model back to source; parse(pretty_print(m)) == m."""
    lines = [f'hypothesis "{model.name}" {{']
    if model.upsilon is not None:
        lines.append(f"    id = {model.upsilon};")
    if model.params:
        lines.append(f"    param {', '.join(model.params)};")
    if model.dims:
        lines.append(f"    dim {', '.join(model.dims)};")
    for name, expr in model.outputs:
        lines.append(f"    out {name} = {_fmt(expr)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
