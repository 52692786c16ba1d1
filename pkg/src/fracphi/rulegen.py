"""Generation of the subcritical tree set and its classification.

The set below a cutoff is the least fixed point of the noise and the
admissible monomials under the four constructors

    X^k I(t),   X^k I_j(t),   X^k I(t1) I(t2),   I(t1) I(t2) I(t3).

Every constructor strictly raises homogeneity above each of its inputs
when ``s > 3/4``, so pruning at the cutoff during the iteration is exact.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import NotSubcritical
from .homogeneity import NOISE, SKNumber, as_fraction, multi_degree
from .trees import (
    DEFAULT_DIM,
    XI,
    Tree,
    compositions,
    homogeneity,
    in_grammar,
    is_subternary,
    multis_below,
    node,
    unit_vector,
    zero,
)

__all__ = [
    "TreeSet",
    "Classification",
    "generate",
    "classify",
    "oracle_generate",
    "boundary_wild",
    "count_edges",
]

TWO_S = SKNumber(0, 2, 0)


@dataclass
class TreeSet:
    """Canonically sorted set of trees generated at ``(s, cutoff, d)``."""

    s: Fraction
    cutoff: SKNumber
    d: int
    trees: tuple[Tree, ...]
    _members: frozenset = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._members = frozenset(self.trees)

    def __iter__(self) -> Iterator[Tree]:
        return iter(self.trees)

    def __len__(self) -> int:
        return len(self.trees)

    def __contains__(self, t: object) -> bool:
        return t in self._members

    def below(self, bound: SKNumber) -> list[Tree]:
        return [t for t in self.trees if homogeneity(t).lt(bound, self.s)]

    def to_json(self, classes: dict | None = None) -> str:
        from .export import tree_records

        return json.dumps(tree_records(self, classes), indent=1)


def _check_s(s) -> Fraction:
    s = as_fraction(s)
    if not 0 < s < 1:
        raise ValueError(f"s = {s} must lie in (0, 1)")
    return s


def _subcritical_witness(s: Fraction, d: int) -> None:
    witness = node(zero(d), [(zero(d), XI)] * 3)
    if homogeneity(witness).le(NOISE, s):
        raise NotSubcritical(
            f"s = {s}: {witness!r} has homogeneity {homogeneity(witness)} <= |Xi|", witness
        )


def generate(s, cutoff: SKNumber, d: int = DEFAULT_DIM, max_poly_degree: Fraction | int | None = None) -> TreeSet:
    """Least fixed point of the generation rule below ``cutoff``.

    ``max_poly_degree`` optionally caps ``|k|_s`` of every node decoration.
    """
    s = _check_s(s)
    _subcritical_witness(s, d)

    # homogeneities are compared as integer pairs (scale * value, kappa)
    scale = math.lcm(2, s.denominator, cutoff.c0.denominator)

    def ikey(h: SKNumber) -> tuple[int, int]:
        v = h.value(s) * scale
        return (int(v), h.ck)

    cut = ikey(cutoff)
    noise = ikey(NOISE)
    two_s = ikey(TWO_S)

    def add(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
        return (a[0] + b[0], a[1] + b[1])

    monos = multis_below(cutoff, s, d) if (0, 0) < cut else []
    # a decoration sits on top of at most two planted factors, each at least |I_j(Xi)|
    lowest_atom = NOISE + TWO_S - SKNumber.const(1)
    budget = cutoff - lowest_atom * 2 if lowest_atom.is_negative(s) else cutoff
    decorations = multis_below(budget, s, d)
    if max_poly_degree is not None:
        cap = SKNumber.const(as_fraction(max_poly_degree))
        monos = [k for k in monos if multi_degree(k).le(cap, s)]
        decorations = [k for k in decorations if multi_degree(k).le(cap, s)]
    decorations = [zero(d)] + [k for k in decorations if any(k)]
    deco_deg = [ikey(multi_degree(k)) for k in decorations]
    edges = [(m, ikey(multi_degree(m))) for m in [zero(d)] + [unit_vector(j, d) for j in range(1, d + 1)]]
    z = zero(d)

    found: dict[Tree, tuple[int, int]] = {node(k): ikey(multi_degree(k)) for k in monos}
    if noise < cut:
        found[XI] = noise
    fresh = {t for t in found if not t.is_monomial}

    while fresh:
        new: dict[Tree, tuple[int, int]] = {}

        def consider(t: Tree, h: tuple[int, int]) -> None:
            if t in found or t in new:
                return
            if h <= noise:
                raise NotSubcritical(f"s = {s}: {t!r} has homogeneity {homogeneity(t)} <= |Xi|", t)
            new[t] = h

        inner = sorted((t for t in found if not t.is_monomial), key=lambda t: (found[t], t.key))
        atoms = [(t, add(found[t], two_s), t in fresh) for t in inner]
        for t, base, is_new in atoms:
            if not is_new:
                continue
            for m, dm in edges:
                hp = (base[0] - dm[0], base[1] - dm[1])
                for k, dk in zip(decorations, deco_deg):
                    h = add(hp, dk)
                    if h < cut:
                        consider(node(k, [(m, t)]), h)
        n = len(atoms)
        # atoms are sorted, so the cheapest completion of (i, j) repeats atom j
        for i in range(n):
            ti, hi, ni = atoms[i]
            if not (add(hi, hi) < cut or add(add(hi, hi), hi) < cut):
                break
            for j in range(i, n):
                tj, hj, nj = atoms[j]
                h2 = add(hi, hj)
                if not (h2 < cut or add(h2, hj) < cut):
                    break
                if ni or nj:
                    for k, dk in zip(decorations, deco_deg):
                        h = add(h2, dk)
                        if h < cut:
                            consider(node(k, [(z, ti), (z, tj)]), h)
                for l in range(j, n):
                    tl, hl, nl = atoms[l]
                    h3 = add(h2, hl)
                    if not h3 < cut:
                        break
                    if ni or nj or nl:
                        consider(node(z, [(z, ti), (z, tj), (z, tl)]), h3)
        found.update(new)
        fresh = set(new)
    return TreeSet(s, cutoff, d, tuple(sorted(found, key=lambda t: t.key)))


@dataclass
class Classification:
    """Partition data of a generated set."""

    s: Fraction
    P: list[Tree]
    W: list[Tree]
    V: list[Tree]
    dW: list[Tree]

    def v_range(self, alpha: SKNumber, beta: SKNumber) -> list[Tree]:
        """Trees of ``V`` whose planted homogeneity lies in ``[alpha, beta)``."""
        out = []
        for t in self.V:
            h = homogeneity(t) + TWO_S
            if alpha.le(h, self.s) and h.lt(beta, self.s):
                out.append(t)
        return out

    def class_of(self, t: Tree) -> str:
        if t in self._p:
            return "P"
        if t in self._w:
            return "W"
        if t in self._v:
            return "V"
        return "-"

    def __post_init__(self) -> None:
        self._p = frozenset(self.P)
        self._w = frozenset(self.W)
        self._v = frozenset(self.V)


def boundary_wild(W: Iterable[Tree], s, d: int = DEFAULT_DIM) -> list[Tree]:
    """Ternary products of planted members of ``W`` that are not themselves in ``W``."""
    s = as_fraction(s)
    W = sorted(W, key=lambda t: t.key)
    wset = set(W)
    out = set()
    for a, b, c in itertools.combinations_with_replacement(W, 3):
        t = node(zero(d), [(zero(d), a), (zero(d), b), (zero(d), c)])
        if t not in wset:
            out.add(t)
    return sorted(out, key=lambda t: t.key)


def classify(ts: TreeSet, gamma: SKNumber | None = None) -> Classification:
    """Split ``ts`` into monomials ``P``, the negative planted set ``W`` and ``V``."""
    s = ts.s
    P = [t for t in ts if t.is_monomial]
    W, V = [], []
    for t in ts:
        if t.is_monomial:
            continue
        h = homogeneity(t) + TWO_S
        if h.is_negative(s):
            W.append(t)
        elif h.is_positive(s):
            V.append(t)
    return Classification(s, P, W, V, boundary_wild(W, s, ts.d))


# ------------------------------------------------------------------- oracle


def count_edges(t: Tree) -> int:
    return sum(1 + count_edges(c) for _, c in t.children)


def _shapes(edges: int) -> list[tuple]:
    """Unordered rooted shapes with exactly ``edges`` edges and at most three branches per node."""
    if edges not in _SHAPES_CACHE:
        _SHAPES_CACHE[edges] = _build_shapes(edges)
    return _SHAPES_CACHE[edges]


_SHAPES_CACHE: dict[int, list[tuple]] = {}


def _build_shapes(edges: int) -> list[tuple]:
    if edges == 0:
        return [()]
    out = set()
    for n_children in (1, 2, 3):
        for split in compositions(edges - n_children, n_children):
            if list(split) != sorted(split):
                continue
            pools = [_shapes(e) for e in split]
            for combo in itertools.product(*pools):
                out.add(tuple(sorted(combo)))
    return sorted(out)


def oracle_generate(s, cutoff: SKNumber, d: int = DEFAULT_DIM, max_edges: int = 8) -> TreeSet:
    """Exhaustive enumeration of decorated shapes, filtered by grammar and homogeneity.

    Shapes are enumerated by edge count; childless non-root vertices are
    noises.  Decorations are enumerated within the homogeneity budget, with
    edge decorations in ``{0, e_1..e_d}`` only below single-child vertices
    and node decorations only on vertices with one or two children (other
    placements are never in the grammar).  Membership is then decided by
    :func:`fracphi.trees.in_grammar`, which shares no code with the
    fixed-point iteration of :func:`generate`.
    """
    s = _check_s(s)
    found: set[Tree] = set()
    if NOISE.lt(cutoff, s):
        found.add(XI)
    if SKNumber().lt(cutoff, s):
        found.update(node(k) for k in multis_below(cutoff, s, d))
    edge_options = [zero(d)] + [unit_vector(j, d) for j in range(1, d + 1)]
    for e in range(1, max_edges + 1):
        for shape in _shapes(e):
            base, n_single = _shape_stats(shape, True)
            # each decorated edge lowers the homogeneity by exactly one
            budget = cutoff - base + SKNumber.const(n_single)
            if not SKNumber().lt(budget, s):
                continue
            for t, _ in _decorate(shape, True, budget, s, d, edge_options):
                if homogeneity(t).lt(cutoff, s) and is_subternary(t) and in_grammar(t):
                    found.add(t)
    return TreeSet(s, cutoff, d, tuple(sorted(found, key=lambda t: t.key)))


def _shape_stats(shape: tuple, root: bool) -> tuple[SKNumber, int]:
    """Undecorated homogeneity and the number of single-child edges."""
    if not shape and not root:
        return NOISE, 0
    h = SKNumber()
    single = 1 if len(shape) == 1 else 0
    for child in shape:
        hc, sc = _shape_stats(child, False)
        h = h + hc + TWO_S
        single += sc
    return h, single


def _decorate(shape: tuple, root: bool, budget: SKNumber, s: Fraction, d: int, edge_options):
    """Yield (tree, total node-decoration degree) with that degree below ``budget``."""
    if not shape and not root:
        yield XI, SKNumber()
        return
    ks = multis_below(budget, s, d) if len(shape) in (1, 2) else [zero(d)]
    child_options = []
    for child in shape:
        opts = []
        for sub, deg in _decorate(child, False, budget, s, d, edge_options):
            for m in (edge_options if len(shape) == 1 else [zero(d)]):
                opts.append((m, sub, deg))
        child_options.append(opts)
    for k in ks:
        dk = multi_degree(k)
        for combo in itertools.product(*child_options):
            total = dk
            for _, _, deg in combo:
                total = total + deg
            if total.lt(budget, s):
                yield node(k, [(m, sub) for m, sub, _ in combo]), total
