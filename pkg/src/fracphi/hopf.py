"""Grafting, the star product, the coaction and characters of the structure group.

Forests ``X^k prod I_{m_i}(sigma_i)`` are stored as trees: the root carries
``k`` and every branch is one planted factor.  The forest product is then
the tree product, ``mu!`` is the tree symmetry factor and the empty forest
is the unit tree.  Generators of the forest algebra are the monomials
``X_j = X^{e_j}`` (``j = 0`` is time) and the planted trees
``I_m(sigma)`` with positive homogeneity.

Tensors are :class:`~fracphi.trees.Comb` objects keyed by tuples of trees.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .errors import GraftIntoNoise, InvalidNode, MissingGeneratorValue, StarIntoNoise
from .homogeneity import SKNumber, as_fraction, multi_degree
from .trees import (
    DEFAULT_DIM,
    XI,
    Comb,
    Multi,
    Tree,
    below,
    homogeneity,
    madd,
    mbinom,
    mfactorial,
    msub,
    multis_below,
    node,
    nodes_preorder,
    planted,
    product,
    symmetry_factor,
    to_text,
    unit,
    unit_vector,
    zero,
)

__all__ = [
    "graft_at",
    "graft",
    "up",
    "star",
    "star_comb",
    "inner",
    "tensor_inner",
    "forest_factorial",
    "generators",
    "is_generator",
    "HopfStructure",
    "Character",
    "act",
    "convolve",
    "invert",
    "act_planted",
    "act_by_star",
]

TWO_S = SKNumber(0, 2, 0)


# ------------------------------------------------------------ node-level edits


@dataclass
class _Flat:
    """Pre-order view of a tree: decorations and child links by index."""

    decos: list[Multi | None]
    kids: list[list[tuple[Multi, int]]]

    @classmethod
    def of(cls, t: Tree) -> _Flat:
        decos: list[Multi | None] = []
        kids: list[list[tuple[Multi, int]]] = []

        def visit(v: Tree) -> int:
            idx = len(decos)
            decos.append(v.k)
            kids.append([])
            for m, child in v.children:
                kids[idx].append((m, visit(child)))
            return idx

        visit(t)
        return cls(decos, kids)

    def inner(self) -> list[int]:
        return [i for i, k in enumerate(self.decos) if k is not None]

    def build(self, decos: tuple, extras: tuple) -> Tree:
        def rec(i: int) -> Tree:
            if self.decos[i] is None:
                return XI
            children = [(m, rec(c)) for m, c in self.kids[i]]
            children.extend(extras[i])
            return node(decos[i], children)

        return rec(0)


def graft_at(sigma: Tree, m: Multi, v: int, tau: Tree) -> Tree:
    """Attach ``sigma`` below the ``v``-th node of ``tau`` (pre-order) by an edge ``m``."""
    flat = _Flat.of(tau)
    if not 0 <= v < len(flat.decos):
        raise InvalidNode(f"node handle {v} out of range for {to_text(tau)}")
    if flat.decos[v] is None:
        raise InvalidNode(f"node handle {v} of {to_text(tau)} is a noise leaf")
    extras = tuple(((tuple(m), sigma),) if i == v else () for i in range(len(flat.decos)))
    return flat.build(tuple(flat.decos), extras)


_State = tuple[tuple, tuple]


def _graft_states(flat: _Flat, states: dict[_State, Fraction], m: Multi, sigma: Tree) -> dict[_State, Fraction]:
    """One deformed graft of ``I_m(sigma)`` into every inner node of the original tree."""
    out: dict[_State, Fraction] = {}
    for (decos, extras), c in states.items():
        for v in flat.inner():
            n = decos[v]
            for j in below(n):
                edge = msub(m, j)
                if edge is None:
                    continue
                new_decos = decos[:v] + (msub(n, j),) + decos[v + 1:]
                new_extras = extras[:v] + (extras[v] + ((edge, sigma),),) + extras[v + 1:]
                key = (new_decos, new_extras)
                out[key] = out.get(key, Fraction(0)) + c * mbinom(n, j)
    return out


def _up_states(flat: _Flat, states: dict[_State, Fraction], k: Multi) -> dict[_State, Fraction]:
    """Distribute ``k`` over the inner nodes of the original tree in all ways."""
    inner = flat.inner()
    out: dict[_State, Fraction] = {}
    per_coord = [list(_splits(k[i], len(inner))) for i in range(len(k))]
    assignments = list(itertools.product(*per_coord))
    for (decos, extras), c in states.items():
        for combo in assignments:
            new = list(decos)
            for pos, v in enumerate(inner):
                new[v] = madd(new[v], tuple(part[pos] for part in combo))
            key = (tuple(new), extras)
            out[key] = out.get(key, Fraction(0)) + c
    return out


def _splits(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _splits(total - first, parts - 1):
            yield (first,) + rest


def _initial(flat: _Flat) -> dict[_State, Fraction]:
    n = len(flat.decos)
    return {(tuple(flat.decos), tuple(() for _ in range(n))): Fraction(1)}


def _collect(flat: _Flat, states: dict[_State, Fraction]) -> Comb:
    out = Comb()
    for (decos, extras), c in states.items():
        out.add_term(flat.build(decos, extras), c)
    return out


def graft(sigma: Tree, m: Multi, tau: Tree) -> Comb:
    """All deformed ways of grafting ``sigma`` into the inner nodes of ``tau``."""
    if tau.is_noise:
        raise GraftIntoNoise("cannot graft into the noise")
    flat = _Flat.of(tau)
    return _collect(flat, _graft_states(flat, _initial(flat), tuple(m), sigma))


def up(k: Multi, tau: Tree) -> Comb:
    """Sum over all ways of adding ``X^k`` to the inner nodes of ``tau``."""
    if tau.is_noise:
        raise StarIntoNoise("cannot decorate the noise")
    flat = _Flat.of(tau)
    return _collect(flat, _up_states(flat, _initial(flat), tuple(k)))


def star(mu: Tree, tau: Tree) -> Comb:
    """Star product of the forest ``mu`` into ``tau``.

    Each planted factor of ``mu`` is grafted, with deformation, onto a node
    of the original ``tau``; then ``X^k`` is spread over those nodes.
    """
    if tau.is_noise:
        raise StarIntoNoise("the star product into the noise is undefined")
    if mu.is_noise:
        raise ValueError("the noise is not a forest")
    flat = _Flat.of(tau)
    states = _initial(flat)
    for m, sigma in mu.children:
        states = _graft_states(flat, states, m, sigma)
    states = _up_states(flat, states, mu.k)
    return _collect(flat, states)


def star_comb(mu: Tree, x: Comb) -> Comb:
    out = Comb()
    for t, c in x.items():
        out = out + star(mu, t).scale(c)
    return out


# ------------------------------------------------------------- inner products


def forest_factorial(mu: Tree) -> int:
    return symmetry_factor(mu)


def inner(x: Comb | Tree, y: Comb | Tree) -> Fraction:
    """Symmetry-factor weighted pairing with the trees as an orthogonal basis."""
    if isinstance(x, Tree):
        x = Comb.single(x)
    if isinstance(y, Tree):
        y = Comb.single(y)
    total = Fraction(0)
    for t, c in x.items():
        if t in y:
            total += c * y[t] * symmetry_factor(t)
    return total


def tensor_inner(x: Comb, y: Comb) -> Fraction:
    """Pairing of tensors; each slot contributes its symmetry factor."""
    total = Fraction(0)
    for key, c in x.items():
        if key in y:
            weight = 1
            for part in key:
                weight *= symmetry_factor(part)
            total += c * y[key] * weight
    return total


# -------------------------------------------------------------- generators


def is_generator(mu: Tree) -> bool:
    """``X_j`` or a single planted factor with zero root decoration."""
    if mu.is_noise:
        return False
    if not mu.children:
        return sum(mu.k) == 1
    return len(mu.children) == 1 and not any(mu.k)


def generators(mu: Tree) -> list[Tree]:
    """Factorisation of a forest into generators, with repetition."""
    d = len(mu.k) - 1
    out = []
    for j, kj in enumerate(mu.k):
        out.extend([node(unit_vector(j, d) if j else _time(d))] * kj)
    for m, sigma in mu.children:
        out.append(node(zero(d), [(m, sigma)]))
    return out


def _time(d: int) -> Multi:
    return (1,) + (0,) * d


def _x(j: int, d: int) -> Tree:
    return node(_time(d) if j == 0 else unit_vector(j, d))


# ------------------------------------------------------------ coaction


class HopfStructure:
    """Coaction and forest coproduct at a fixed ``s`` (positivity depends on ``s``)."""

    def __init__(self, s, d: int = DEFAULT_DIM):
        self.s = as_fraction(s)
        self.d = d
        self._delta: dict[Tree, Comb] = {}
        self._delta_plus: dict[Tree, Comb] = {}

    def is_positive_planted(self, m: Multi, sigma: Tree) -> bool:
        if sigma.is_monomial:
            return False
        return (homogeneity(sigma) + TWO_S - multi_degree(m)).is_positive(self.s)

    def _planted_tail(self, m: Multi, sigma: Tree) -> Comb:
        """``sum_l X^l / l! (x) I_{m+l}(sigma)`` over the positive terms."""
        out = Comb()
        if sigma.is_monomial:
            return out
        top = homogeneity(sigma) + TWO_S - multi_degree(m)
        if not top.is_positive(self.s):
            return out
        for l in multis_below(top, self.s, self.d):
            right = node(zero(self.d), [(madd(m, l), sigma)])
            out.add_term((node(l), right), Fraction(1, mfactorial(l)))
        return out

    def _monomial(self, k: Multi) -> Comb:
        out = Comb()
        for l in below(k):
            out.add_term((node(l), node(msub(k, l))), mbinom(k, l))
        return out

    def coaction(self, tau: Tree) -> Comb:
        """``Delta tau`` as a combination of ``(tree, forest)`` pairs."""
        cached = self._delta.get(tau)
        if cached is not None:
            return cached
        if tau.is_noise:
            out = Comb.single((XI, unit(self.d)))
        else:
            out = self._monomial(tau.k)
            for m, child in tau.children:
                out = _tensor_product(out, self._planted_coaction(m, child))
        self._delta[tau] = out
        return out

    def _planted_coaction(self, m: Multi, child: Tree) -> Comb:
        out = Comb()
        for (left, right), c in self.coaction(child).items():
            p = planted(m, left)
            if p is not None:
                out.add_term((p, right), c)
        return out + self._planted_tail(m, child)

    def coproduct_plus(self, mu: Tree) -> Comb:
        """``Delta^+ mu`` as a combination of ``(forest, forest)`` pairs."""
        cached = self._delta_plus.get(mu)
        if cached is not None:
            return cached
        out = self._monomial(mu.k)
        for m, sigma in mu.children:
            out = _tensor_product(out, self._generator_plus(m, sigma))
        self._delta_plus[mu] = out
        return out

    def _generator_plus(self, m: Multi, sigma: Tree) -> Comb:
        out = Comb()
        for (left, right), c in self.coaction(sigma).items():
            if self.is_positive_planted(m, left):
                out.add_term((node(zero(self.d), [(m, left)]), right), c)
        return out + self._planted_tail(m, sigma)

    def coaction_comb(self, x: Comb) -> Comb:
        out = Comb()
        for t, c in x.items():
            out = out + self.coaction(t).scale(c)
        return out

    # --------------------------------------------------------- coassociativity

    def coassociativity_sides(self, tau: Tree, plus: bool = False) -> tuple[Comb, Comb]:
        """``(Delta (x) Id) Delta`` and ``(Id (x) Delta^+) Delta`` as triple tensors."""
        first = self.coproduct_plus(tau) if plus else self.coaction(tau)
        left_side, right_side = Comb(), Comb()
        for (a, b), c in first.items():
            inner_left = self.coproduct_plus(a) if plus else self.coaction(a)
            for (a1, a2), c1 in inner_left.items():
                left_side.add_term((a1, a2, b), c * c1)
            for (b1, b2), c2 in self.coproduct_plus(b).items():
                right_side.add_term((a, b1, b2), c * c2)
        return left_side, right_side

    # ------------------------------------------------------ duality helpers

    def duality_sides(self, mu: Tree, tau: Tree, sigma: Tree) -> tuple[Fraction, Fraction]:
        """``<mu * tau, sigma>`` and ``<tau (x) mu, Delta sigma>``."""
        lhs = inner(star(mu, tau), sigma)
        rhs = tensor_inner(Comb.single((tau, mu)), self.coaction(sigma))
        return lhs, rhs

    def forests_of_degree(self, target: SKNumber, tau: Tree) -> list[Tree]:
        """Forests ``mu`` of homogeneity exactly ``target`` whose planted factors
        are built from subtrees of ``tau`` (the only ones with ``mu * sigma``
        able to reach ``tau``)."""
        s = self.s
        if target.is_negative(s):
            return []
        pool: list[tuple[Tree, SKNumber]] = []
        for j in range(self.d + 1):
            pool.append((_x(j, self.d), multi_degree(_x(j, self.d).k)))
        subtrees = {v for v in nodes_preorder(tau) if not v.is_monomial}
        for b in sorted(subtrees, key=lambda t: t.key):
            top = homogeneity(b) + TWO_S
            for m in multis_below(top, s, self.d):
                if self.is_positive_planted(m, b):
                    g = node(zero(self.d), [(m, b)])
                    pool.append((g, homogeneity(g)))
        out: list[Tree] = []

        def rec(start: int, remaining: SKNumber, chosen: list[Tree]) -> None:
            if remaining == SKNumber() or (remaining.value(s) == 0 and remaining.ck == 0):
                forest = unit(self.d)
                for g in chosen:
                    forest = product(forest, g)
                out.append(forest)
                return
            if not remaining.is_positive(s):
                return
            for i in range(start, len(pool)):
                g, h = pool[i]
                if h.le(remaining, s):
                    rec(i, remaining - h, chosen + [g])

        rec(0, target, [])
        return sorted(set(out), key=lambda t: t.key)


def _tensor_product(x: Comb, y: Comb) -> Comb:
    out = Comb()
    for (a, b), c in x.items():
        for (a2, b2), c2 in y.items():
            out.add_term((product(a, a2), product(b, b2)), c * c2)
    return out


# ------------------------------------------------------------------ characters


@dataclass
class Character:
    """Multiplicative functional on forests, given on generators.

    Values are looked up in ``values`` and otherwise produced by ``source``
    (then memoised).  ``Character.random(seed)`` is reproducible.
    """

    values: dict[Tree, Fraction] = field(default_factory=dict)
    source: Callable[[Tree], Fraction] | None = None
    label: str = "character"

    def generator(self, g: Tree) -> Fraction:
        value = self.values.get(g)
        if value is None:
            if self.source is None:
                raise MissingGeneratorValue(to_text(g))
            value = Fraction(self.source(g))
            self.values[g] = value
        return value

    def __call__(self, mu: Tree) -> Fraction:
        total = Fraction(1)
        for g in generators(mu):
            total *= self.generator(g)
            if not total:
                return total
        return total

    def on_comb(self, x: Comb) -> Fraction:
        return sum((c * self(mu) for mu, c in x.items()), Fraction(0))

    @classmethod
    def identity(cls) -> Character:
        return cls(source=lambda g: Fraction(0), label="identity")

    @classmethod
    def random(cls, seed: int | str, max_num: int = 5, max_den: int = 4) -> Character:
        """Small random rationals, derived per generator from ``seed``."""

        def draw(g: Tree) -> Fraction:
            rng = random.Random(f"{seed}:{to_text(g)}")
            return Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))

        return cls(source=draw, label=f"random({seed})")

    @classmethod
    def from_dict(cls, values: dict[Tree, Fraction | int | str], label: str = "character") -> Character:
        return cls({g: Fraction(v) for g, v in values.items()}, None, label)


def act(hopf: HopfStructure, gamma: Character, x: Comb | Tree) -> Comb:
    """``Gamma_gamma x = (Id (x) gamma) Delta x``."""
    if isinstance(x, Tree):
        x = Comb.single(x)
    out = Comb()
    for t, c in x.items():
        for (left, right), cc in hopf.coaction(t).items():
            value = gamma(right)
            if value:
                out.add_term(left, c * cc * value)
    return out


def convolve(hopf: HopfStructure, g1: Character, g2: Character) -> Character:
    """``(g1 * g2)(mu) = (g1 (x) g2) Delta^+ mu``."""

    def value(g: Tree) -> Fraction:
        return sum((c * g1(a) * g2(b) for (a, b), c in hopf.coproduct_plus(g).items()), Fraction(0))

    return Character(source=value, label=f"({g1.label} * {g2.label})")


def invert(hopf: HopfStructure, g: Character) -> Character:
    """Convolution inverse, solved generator by generator in order of homogeneity."""
    inv = Character(label=f"inverse({g.label})")

    def value(x: Tree) -> Fraction:
        one = unit(hopf.d)
        total = -g(x)
        for (a, b), c in hopf.coproduct_plus(x).items():
            if (a is x and b is one) or (a is one and b is x):
                continue
            total -= c * g(a) * inv(b)
        return total

    inv.source = value
    return inv


def act_planted(hopf: HopfStructure, gamma: Character, m: Multi, tau: Tree) -> Comb:
    """``Gamma I_m(tau)`` from ``Gamma tau``: plant every component, then add
    the polynomial part ``sum_l X^l / l! gamma(I_{m+l}(tau))``."""
    out = Comb()
    for sigma, c in act(hopf, gamma, tau).items():
        p = planted(m, sigma)
        if p is not None:
            out.add_term(p, c)
    for (left, right), c in hopf._planted_tail(m, tau).items():
        out.add_term(left, c * gamma(right))
    return out


def act_by_star(hopf: HopfStructure, gamma: Character, tau: Tree, sigma: Tree) -> Fraction:
    """``<sigma, Gamma tau>`` as ``sum_mu <mu * sigma, tau> gamma(mu) / mu!``."""
    target = homogeneity(tau) - homogeneity(sigma)
    total = Fraction(0)
    for mu in hopf.forests_of_degree(target, tau):
        pairing = inner(star(mu, sigma), tau)
        if pairing:
            total += pairing * gamma(mu) / forest_factorial(mu)
    return total
