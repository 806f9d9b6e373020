"""Role conditions: boolean expressions over user attributes.

Every knowledge item carries exactly one condition; an item is visible
only when its condition evaluates true over the requesting user's
attributes. A missing attribute makes its atom false — never an error —
so access is denied by default.

Grammar, lowest precedence first::

    expr     := and_expr ("or" and_expr)*
    and_expr := not_expr ("and" not_expr)*
    not_expr := "not" not_expr | primary
    primary  := "(" expr ")" | "true" | "false" | atom
    atom     := IDENT "==" STRING | IDENT "!=" STRING
              | IDENT "in" "[" STRING ("," STRING)* "]"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from agoranet.errors import ConditionParseError

# --- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    attribute: str
    op: str  # "==", "!=", "in"
    value: Union[str, tuple[str, ...]]


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class TrueCond:
    pass


@dataclass(frozen=True)
class FalseCond:
    pass


RoleCondition = Union[Atom, And, Or, Not, TrueCond, FalseCond]

# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<op>==|!=)
  | (?P<punct>[()\[\],])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"and", "or", "not", "in", "true", "false"}


def _lex(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ConditionParseError(pos, f"valid token (got {text[pos]!r})")
        if m.lastgroup != "ws":
            kind = m.lastgroup
            value = m.group()
            if kind == "ident" and value in _KEYWORDS:
                kind = value
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _lex(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> RoleCondition:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise ConditionParseError(tok[2], "end of expression")
        return node

    def expr(self) -> RoleCondition:
        parts = [self.and_expr()]
        while self.peek()[0] == "or":
            self.advance()
            parts.append(self.and_expr())
        return Or(tuple(parts)) if len(parts) > 1 else parts[0]

    def and_expr(self) -> RoleCondition:
        parts = [self.not_expr()]
        while self.peek()[0] == "and":
            self.advance()
            parts.append(self.not_expr())
        return And(tuple(parts)) if len(parts) > 1 else parts[0]

    def not_expr(self) -> RoleCondition:
        if self.peek()[0] == "not":
            self.advance()
            return Not(self.not_expr())
        return self.primary()

    def primary(self) -> RoleCondition:
        kind, value, pos = self.peek()
        if value == "(":
            self.advance()
            node = self.expr()
            tok = self.peek()
            if tok[1] != ")":
                raise ConditionParseError(tok[2], "')'")
            self.advance()
            return node
        if kind == "true":
            self.advance()
            return TrueCond()
        if kind == "false":
            self.advance()
            return FalseCond()
        if kind == "ident":
            return self.atom()
        raise ConditionParseError(pos, "'(', literal, or attribute name")

    def atom(self) -> Atom:
        _, attr, _ = self.advance()
        kind, op, pos = self.peek()
        if kind == "op":
            self.advance()
            skind, raw, spos = self.peek()
            if skind != "string":
                raise ConditionParseError(spos, "quoted string value")
            self.advance()
            return Atom(attribute=attr, op=op, value=_unquote(raw))
        if kind == "in":
            self.advance()
            tok = self.peek()
            if tok[1] != "[":
                raise ConditionParseError(tok[2], "'['")
            self.advance()
            values = []
            while True:
                skind, raw, spos = self.peek()
                if skind != "string":
                    raise ConditionParseError(spos, "quoted string value")
                self.advance()
                values.append(_unquote(raw))
                tok = self.peek()
                if tok[1] == ",":
                    self.advance()
                    continue
                if tok[1] == "]":
                    self.advance()
                    break
                raise ConditionParseError(tok[2], "',' or ']'")
            return Atom(attribute=attr, op="in", value=tuple(values))
        raise ConditionParseError(pos, "'==', '!=', or 'in'")


def _unquote(raw: str) -> str:
    return raw[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def parse_condition(text: str) -> RoleCondition:
    """Parse an expression string into a condition AST."""
    if not text or not text.strip():
        raise ConditionParseError(0, "nonempty expression")
    return _Parser(text).parse()


# --- evaluation ---------------------------------------------------------------


def eval_condition(cond: RoleCondition, attrs: dict[str, str]) -> bool:
    """Standard boolean semantics; a missing attribute falsifies its atom."""
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, FalseCond):
        return False
    if isinstance(cond, Not):
        return not eval_condition(cond.child, attrs)
    if isinstance(cond, And):
        return all(eval_condition(c, attrs) for c in cond.children)
    if isinstance(cond, Or):
        return any(eval_condition(c, attrs) for c in cond.children)
    if isinstance(cond, Atom):
        value = attrs.get(cond.attribute)
        if value is None:
            return False
        if cond.op == "==":
            return value == cond.value
        if cond.op == "!=":
            return value != cond.value
        return value in cond.value
    raise TypeError(f"not a condition node: {cond!r}")


# --- rendering ----------------------------------------------------------------

_PREC = {Or: 1, And: 2, Not: 3}


def render_condition(cond: RoleCondition) -> str:
    """Expression text that reparses to a structurally equal AST."""
    return _render(cond, 0)


def _render(cond: RoleCondition, parent_prec: int) -> str:
    if isinstance(cond, TrueCond):
        return "true"
    if isinstance(cond, FalseCond):
        return "false"
    if isinstance(cond, Atom):
        if cond.op == "in":
            inner = ", ".join(_quote(v) for v in cond.value)
            return f"{cond.attribute} in [{inner}]"
        return f"{cond.attribute} {cond.op} {_quote(cond.value)}"
    prec = _PREC[type(cond)]
    if isinstance(cond, Not):
        body = f"not {_render(cond.child, prec)}"
    else:
        joiner = " or " if isinstance(cond, Or) else " and "
        body = joiner.join(_render(c, prec + 1) for c in cond.children)
    return f"({body})" if prec < parent_prec else body


def condition_attributes(cond: RoleCondition) -> set[str]:
    """All attribute names referenced by the condition."""
    if isinstance(cond, Atom):
        return {cond.attribute}
    if isinstance(cond, Not):
        return condition_attributes(cond.child)
    if isinstance(cond, (And, Or)):
        out: set[str] = set()
        for c in cond.children:
            out |= condition_attributes(c)
        return out
    return set()
