"""Text grammar for trees and rational linear combinations of trees.

EBNF (whitespace is ignored between tokens)::

    comb     = [sign] term { sign term } ;
    term     = factor { ["*"] factor } ;
    factor   = "Xi" | "X^" multi | "I" ["[" multi "]"] "(" comb ")" | rational ;
    multi    = "(" int { "," int } ")" ;
    rational = int ["/" int] ;
    sign     = "+" | "-" ;

A bare rational ``r`` denotes ``r`` times the unit tree, so ``1`` is the
unit and ``0`` the zero combination.  Juxtaposition and ``*`` both
multiply; ``I(...)`` plants its argument linearly and ``I(X^(...))`` is 0.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import DimensionMismatch, NoiseProduct, TreeSyntaxError
from .trees import (
    DEFAULT_DIM,
    XI,
    Comb,
    Tree,
    node,
    plant_comb,
    product_comb,
    to_dot,
    to_json,
    to_text,
    unit,
    zero,
)

__all__ = ["parse", "parse_tree", "render", "render_coeff"]


class _Parser:
    def __init__(self, text: str, d: int):
        self.text = text
        self.pos = 0
        self.d = d

    def error(self, message: str) -> TreeSyntaxError:
        return TreeSyntaxError(message, self.pos)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def startswith(self, token: str) -> bool:
        self.skip()
        return self.text.startswith(token, self.pos)

    def expect(self, token: str) -> None:
        if not self.startswith(token):
            raise self.error(f"expected {token!r}")
        self.pos += len(token)

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise self.error("expected an integer")
        return int(self.text[start:self.pos])

    def multi(self) -> tuple[int, ...]:
        start = self.pos
        self.expect("(")
        values = [self.integer()]
        while self.peek() == ",":
            self.pos += 1
            values.append(self.integer())
        self.expect(")")
        if len(values) != self.d + 1:
            self.pos = start
            raise DimensionMismatch(
                f"multi-index of length {len(values)} at position {start}, expected {self.d + 1}"
            )
        return tuple(values)

    def comb(self) -> Comb:
        total = Comb()
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        total = total + self.term().scale(sign)
        while self.peek() in ("+", "-") and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
            total = total + self.term().scale(sign)
        return total

    def starts_factor(self) -> bool:
        c = self.peek()
        return c.isdigit() or c == "X" or c == "I"

    def term(self) -> Comb:
        scalar = Fraction(1)
        trees: Comb | None = None
        if not self.starts_factor():
            raise self.error("expected a factor")
        while True:
            start = self.pos
            value = self.factor()
            if isinstance(value, Fraction):
                scalar *= value
            elif trees is None:
                trees = value
            else:
                try:
                    trees = product_comb(trees, value)
                except NoiseProduct:
                    self.pos = start
                    raise self.error("the noise cannot be multiplied") from None
            if self.peek() == "*":
                self.pos += 1
                if not self.starts_factor():
                    raise self.error("expected a factor after '*'")
            elif not self.starts_factor():
                break
        if trees is None:
            trees = Comb.single(unit(self.d))
        return trees.scale(scalar)

    def factor(self) -> Comb | Fraction:
        c = self.peek()
        if c.isdigit():
            num = self.integer()
            if self.peek() == "/":
                self.pos += 1
                den = self.integer()
                if den == 0:
                    raise self.error("zero denominator")
                return Fraction(num, den)
            return Fraction(num)
        if self.startswith("Xi"):
            self.pos += 2
            return Comb.single(XI)
        if self.startswith("X^"):
            self.pos += 2
            return Comb.single(node(self.multi()))
        if c == "I":
            self.pos += 1
            m = zero(self.d)
            if self.peek() == "[":
                self.pos += 1
                m = self.multi()
                self.expect("]")
            self.expect("(")
            inner = self.comb()
            self.expect(")")
            return plant_comb(m, inner)
        raise self.error("expected a factor")


def parse(text: str, d: int = DEFAULT_DIM) -> Comb:
    """Parse ``text`` into a canonical linear combination of trees."""
    p = _Parser(text, d)
    out = p.comb()
    if p.peek():
        raise p.error("unexpected trailing input")
    return out


def parse_tree(text: str, d: int = DEFAULT_DIM) -> Tree:
    """Parse text denoting a single tree with coefficient one."""
    comb = parse(text, d)
    if len(comb) != 1 or next(iter(comb.values())) != 1:
        raise TreeSyntaxError(f"{text!r} is not a single tree", 0)
    return next(iter(comb))


def render_coeff(c: Fraction) -> str:
    return str(Fraction(c))


def render(x: Comb | Tree, format: str = "text") -> str:
    """Deterministic rendering as ``text``, ``json`` or ``dot``."""
    if isinstance(x, Tree):
        x = Comb.single(x)
    items = x.sorted_items()
    if format == "text":
        if not items:
            return "0"
        out = []
        for i, (t, c) in enumerate(items):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = to_text(t) if mag == 1 else f"{render_coeff(mag)} {to_text(t)}"
            if i == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f" {sign} {body}")
        return "".join(out)
    if format == "json":
        return json.dumps([{"coeff": render_coeff(c), "tree": to_json(t)} for t, c in items])
    if format == "dot":
        return "\n".join(
            f"// coefficient {render_coeff(c)}\n" + to_dot(t, f"t{i}") for i, (t, c) in enumerate(items)
        )
    raise ValueError(f"unknown format {format!r}")
