"""Canonical decorated non-planar rooted trees.

A tree is either the noise atom ``XI`` or a node ``X^k prod_i I_{m_i}(tau_i)``
with a polynomial decoration ``k`` and a multiset of planted children.
Trees are hash-consed: structurally equal trees are the same object, so
identity comparison is equality and per-tree quantities are cached.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import DimensionMismatch, NoiseProduct, NotInGrammar, NotSubTernary
from .homogeneity import NOISE, SKNumber, multi_degree

Multi = tuple[int, ...]

DEFAULT_DIM = 3


# ---------------------------------------------------------------- multi-indices


def zero(d: int = DEFAULT_DIM) -> Multi:
    return (0,) * (d + 1)


def unit_vector(j: int, d: int = DEFAULT_DIM) -> Multi:
    """``e_j``; index 0 is the time direction."""
    if not 0 <= j <= d:
        raise ValueError(f"direction {j} out of range for d={d}")
    return tuple(1 if i == j else 0 for i in range(d + 1))


def madd(a: Multi, b: Multi) -> Multi:
    if len(a) != len(b):
        raise DimensionMismatch(f"multi-indices {a} and {b} differ in length")
    return tuple(x + y for x, y in zip(a, b))


def msub(a: Multi, b: Multi) -> Multi | None:
    """``a - b`` or None when a component would be negative."""
    if len(a) != len(b):
        raise DimensionMismatch(f"multi-indices {a} and {b} differ in length")
    out = tuple(x - y for x, y in zip(a, b))
    return None if min(out) < 0 else out


def mfactorial(k: Multi) -> int:
    return math.prod(math.factorial(x) for x in k)


def mbinom(n: Multi, j: Multi) -> int:
    return math.prod(math.comb(a, b) for a, b in zip(n, j))


def below(n: Multi) -> Iterator[Multi]:
    """All ``j <= n`` componentwise."""
    return itertools.product(*(range(x + 1) for x in n))


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` naturals summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multis_below(bound: SKNumber, s, d: int = DEFAULT_DIM, strict: bool = True) -> list[Multi]:
    """All ``k`` with ``|k|_s < bound`` (or ``<=`` when not strict), in canonical order."""
    out: list[Multi] = []
    k0 = 0
    while True:
        time_part = multi_degree((k0,) + (0,) * d)
        if not _within(time_part, bound, s, strict):
            break
        n = 0
        while True:
            deg = time_part + SKNumber.const(n)
            if not _within(deg, bound, s, strict):
                break
            for rest in compositions(n, d):
                out.append((k0,) + rest)
            n += 1
        k0 += 1
    out.sort()
    return out


def _within(a: SKNumber, bound: SKNumber, s, strict: bool) -> bool:
    return a.lt(bound, s) if strict else a.le(bound, s)


# ----------------------------------------------------------------------- trees


class Tree:
    """Interned decorated tree. Build with :func:`node`, :data:`XI` and friends."""

    __slots__ = ("k", "children", "key", "_hash", "_hom", "_sym", "_leaves", "__weakref__")

    def __init__(self, k: Multi | None, children: tuple[tuple[Multi, Tree], ...], key: tuple):
        self.k = k
        self.children = children
        self.key = key
        self._hash = hash(key)
        self._hom: SKNumber | None = None
        self._sym: int | None = None
        self._leaves: int | None = None

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return self is other

    def __lt__(self, other: Tree) -> bool:
        return self.key < other.key

    def __le__(self, other: Tree) -> bool:
        return self.key <= other.key

    def __reduce__(self):
        return (_rebuild, (to_json(self),))

    @property
    def is_noise(self) -> bool:
        return self.k is None

    @property
    def is_monomial(self) -> bool:
        return self.k is not None and not self.children

    @property
    def dim(self) -> int | None:
        return None if self.k is None else len(self.k) - 1

    def grouped_children(self) -> list[tuple[tuple[Multi, Tree], int]]:
        """Distinct planted factors with multiplicities, canonical order."""
        out: list[tuple[tuple[Multi, Tree], int]] = []
        for child in self.children:
            if out and out[-1][0][0] == child[0] and out[-1][0][1] is child[1]:
                out[-1] = (out[-1][0], out[-1][1] + 1)
            else:
                out.append((child, 1))
        return out

    def __repr__(self) -> str:
        return to_text(self)


def _rebuild(obj):
    return from_json(obj)


_TABLE: dict[tuple, Tree] = {}
_LOCK = threading.Lock()

XI = Tree(None, (), (0,))


def node(k: Multi, children: Iterable[tuple[Multi, Tree]] = ()) -> Tree:
    """The canonical tree ``X^k prod I_m(child)``."""
    k = tuple(int(x) for x in k)
    if min(k, default=0) < 0:
        raise ValueError(f"negative decoration {k}")
    kids = []
    for m, child in children:
        m = tuple(int(x) for x in m)
        if len(m) != len(k):
            raise DimensionMismatch(f"edge decoration {m} does not match node decoration {k}")
        if min(m) < 0:
            raise ValueError(f"negative edge decoration {m}")
        if child.k is not None and len(child.k) != len(k):
            raise DimensionMismatch("child tree has a different dimension")
        kids.append((m, child))
    kids.sort(key=lambda c: (c[0], c[1].key))
    ident = (k, tuple((m, id(c)) for m, c in kids))
    found = _TABLE.get(ident)
    if found is not None:
        return found
    with _LOCK:
        found = _TABLE.get(ident)
        if found is None:
            key = (1, k, tuple((m, c.key) for m, c in kids))
            found = Tree(k, tuple(kids), key)
            _TABLE[ident] = found
    return found


def unit(d: int = DEFAULT_DIM) -> Tree:
    """The unit ``1 = X^0``."""
    return node(zero(d))


def monomial(k: Multi) -> Tree:
    return node(k)


def planted(m: Multi, t: Tree) -> Tree | None:
    """``I_m(t)`` as a tree, or None for a pure monomial (``I(X^k) = 0``)."""
    if t.is_monomial:
        return None
    return node(zero(len(m) - 1), [(m, t)])


def product(t1: Tree, t2: Tree) -> Tree:
    """Tree product: identify the roots, add decorations, merge children."""
    if t1.is_noise or t2.is_noise:
        raise NoiseProduct("the noise atom cannot be multiplied")
    return node(madd(t1.k, t2.k), t1.children + t2.children)


def product_all(trees: Iterable[Tree], d: int = DEFAULT_DIM) -> Tree:
    out = unit(d)
    for t in trees:
        out = product(out, t)
    return out


# ------------------------------------------------------------ linear combinations


class Comb(dict):
    """Finite formal linear combination; zero coefficients are never stored.

    Keys are trees, forests or tuples of them; coefficients are Fractions or
    any ring element with ``+``, ``*`` and truthiness (jet polynomials).
    """

    @classmethod
    def single(cls, key, coeff=1) -> Comb:
        out = cls()
        out.add_term(key, Fraction(coeff) if isinstance(coeff, int) else coeff)
        return out

    def add_term(self, key, coeff) -> None:
        if isinstance(coeff, int):
            coeff = Fraction(coeff)
        if key in self:
            total = self[key] + coeff
            if total:
                self[key] = total
            else:
                del self[key]
        elif coeff:
            self[key] = coeff

    def __add__(self, other: Comb) -> Comb:
        out = type(self)(self)
        for key, c in other.items():
            out.add_term(key, c)
        return out

    def __sub__(self, other: Comb) -> Comb:
        out = type(self)(self)
        for key, c in other.items():
            out.add_term(key, -c)
        return out

    def __neg__(self) -> Comb:
        return type(self)({key: -c for key, c in self.items()})

    def scale(self, factor) -> Comb:
        out = type(self)()
        for key, c in self.items():
            out.add_term(key, c * factor)
        return out

    def __mul__(self, factor) -> Comb:
        if isinstance(factor, Comb):
            return NotImplemented
        return self.scale(factor)

    __rmul__ = __mul__

    def sorted_items(self) -> list:
        return sorted(self.items(), key=lambda kv: _sort_key(kv[0]))

    def __repr__(self) -> str:
        if not self:
            return "0"
        return " + ".join(f"{c}*{k!r}" for k, c in self.sorted_items())


def _sort_key(key):
    if isinstance(key, Tree):
        return key.key
    return tuple(_sort_key(part) for part in key)


LinComb = Comb


def plant(m: Multi, t: Tree) -> Comb:
    """``I_m(t)`` as a combination; the zero combination for monomials."""
    p = planted(m, t)
    return Comb() if p is None else Comb.single(p)


def plant_comb(m: Multi, x: Comb) -> Comb:
    out = Comb()
    for t, c in x.items():
        p = planted(m, t)
        if p is not None:
            out.add_term(p, c)
    return out


def product_comb(x: Comb, y: Comb) -> Comb:
    out = Comb()
    for a, ca in x.items():
        for b, cb in y.items():
            out.add_term(product(a, b), ca * cb)
    return out


# -------------------------------------------------------------- tree quantities


def homogeneity(t: Tree) -> SKNumber:
    """Recursive homogeneity; planting adds ``2s - |m|_s``."""
    if t._hom is None:
        if t.is_noise:
            h = NOISE
        else:
            h = multi_degree(t.k)
            for m, child in t.children:
                h = h + homogeneity(child) + SKNumber(0, 2, 0) - multi_degree(m)
        t._hom = h
    return t._hom


def symmetry_factor(t: Tree) -> int:
    """``tau! = k! prod (tau_i!)^beta_i beta_i!`` over distinct planted factors."""
    if t._sym is None:
        if t.is_noise:
            value = 1
        else:
            value = mfactorial(t.k)
            for (_, child), beta in t.grouped_children():
                value *= symmetry_factor(child) ** beta * math.factorial(beta)
        t._sym = value
    return t._sym


def orbit_count(items: list) -> int:
    """Number of distinct orderings of ``items`` found by brute force."""
    return len(set(itertools.permutations(items)))


def symmetry_factor_from_presentation(k: Multi, factors: list[tuple[Multi, Tree]]) -> int:
    """``k! (n!/delta) prod tau_i!`` for an ordered presentation of a tree.

    ``delta`` counts distinct orderings of the presented factors.
    """
    n = len(factors)
    keyed = [(tuple(m), id(t)) for m, t in factors]
    delta = orbit_count(keyed)
    value = Fraction(mfactorial(tuple(k)) * math.factorial(n), delta)
    for _, t in factors:
        value *= symmetry_factor(t)
    assert value.denominator == 1
    return int(value)


def leaves(t: Tree) -> int:
    """Number of noise leaves."""
    if t._leaves is None:
        t._leaves = 1 if t.is_noise else sum(leaves(c) for _, c in t.children)
    return t._leaves


def nodes_preorder(t: Tree) -> list[Tree]:
    out = [t]
    for _, child in t.children:
        out.extend(nodes_preorder(child))
    return out


def poly_degree(t: Tree) -> SKNumber:
    """Total polynomial decoration ``|n(tau)|_s``."""
    total = SKNumber()
    for v in nodes_preorder(t):
        if not v.is_noise:
            total = total + multi_degree(v.k)
    return total


def edge_degree(t: Tree) -> SKNumber:
    """Total edge decoration ``|e(tau)|_s``."""
    total = SKNumber()
    for v in nodes_preorder(t):
        for m, _ in v.children:
            total = total + multi_degree(m)
    return total


def is_subternary(t: Tree) -> bool:
    return all(len(v.children) <= 3 for v in nodes_preorder(t))


def is_full(t: Tree) -> bool:
    """Every non-noise node has exactly three branches (vacuous for the noise)."""
    return all(len(v.children) == 3 for v in nodes_preorder(t) if not v.is_noise)


@dataclass(frozen=True)
class TreeStats:
    leaves: int
    poly_degree: SKNumber
    edge_degree: SKNumber
    is_full: bool
    is_subternary: bool


def stats(t: Tree) -> TreeStats:
    return TreeStats(leaves(t), poly_degree(t), edge_degree(t), is_full(t), is_subternary(t))


def _is_rule_edge(m: Multi) -> bool:
    return sum(m) == 0 or (sum(m) == 1 and m[0] == 0)


def in_grammar(t: Tree) -> bool:
    """Membership in the closure of the noise and monomials under the generation rule."""
    if t.is_noise or t.is_monomial:
        return True
    n = len(t.children)
    if n > 3:
        return False
    for m, child in t.children:
        if child.is_monomial or not in_grammar(child):
            return False
        if n > 1 and sum(m) != 0:
            return False
        if not _is_rule_edge(m):
            return False
    if n == 3 and sum(t.k) != 0:
        return False
    return True


def missing_count(t: Tree) -> int:
    """Missing-branch counter: ``m(Xi) = 0`` and each node lacks ``3 - #branches``.

    This reproduces the four cases of the recursive definition on non-monomial
    trees; a bare monomial counts its three missing branches.
    """
    if not is_subternary(t):
        raise NotSubTernary(f"{to_text(t)} has a node with more than three branches")
    if not in_grammar(t):
        raise NotInGrammar(f"{to_text(t)} is not produced by the generation rule")
    return _missing(t)


def _missing(t: Tree) -> int:
    if t.is_noise:
        return 0
    return 3 - len(t.children) + sum(_missing(c) for _, c in t.children)


# ---------------------------------------------------------------- serialization


def to_text(t: Tree) -> str:
    """Canonical textual form, re-parsable by :mod:`fracphi.treeparse`."""
    if t.is_noise:
        return "Xi"
    parts: list[str] = []
    if any(t.k):
        parts.append("X^(" + ",".join(map(str, t.k)) + ")")
    for m, child in t.children:
        inner = to_text(child)
        if any(m):
            parts.append("I[(" + ",".join(map(str, m)) + ")](" + inner + ")")
        else:
            parts.append("I(" + inner + ")")
    return "*".join(parts) if parts else "1"


def to_json(t: Tree) -> dict:
    if t.is_noise:
        return {"noise": True}
    return {
        "k": list(t.k),
        "children": [{"m": list(m), "t": to_json(c)} for m, c in t.children],
    }


def from_json(obj: dict) -> Tree:
    if obj.get("noise"):
        return XI
    return node(tuple(obj["k"]), [(tuple(c["m"]), from_json(c["t"])) for c in obj["children"]])


def to_dot(t: Tree, name: str = "tree") -> str:
    """Graphviz source with node labels ``X^k`` and edge labels ``I_m``."""
    lines = [f"digraph {name} {{"]
    counter = itertools.count()

    def visit(v: Tree) -> int:
        idx = next(counter)
        if v.is_noise:
            label = "Xi"
        else:
            label = "X^(" + ",".join(map(str, v.k)) + ")"
        lines.append(f'  n{idx} [label="{label}"];')
        for m, child in v.children:
            cidx = visit(child)
            lines.append(f'  n{idx} -> n{cidx} [label="I_(' + ",".join(map(str, m)) + ')"];')
        return idx

    visit(t)
    lines.append("}")
    return "\n".join(lines)
