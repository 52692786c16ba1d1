"""Coherence map, modelled expansions of the remainder and their identities.

Jet polynomials are polynomials in the symbols ``X_k`` (``k`` a multi-index)
standing for ``d^k phi``.  ``X_0`` plays the role of ``v`` and ``X_{e_j}``
of ``v_{X_j}``.  A modelled expression is a :class:`~fracphi.trees.Comb`
from trees to jet polynomials.

The value of the coherence map on the noise is a parameter.  Every identity
that only involves the morphism property holds for any value; the squaring
identities pin it to ``-1``, which is the default.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import (
    BetaOutOfRange,
    ExcludedTree,
    GammaOutOfRange,
    IdentityViolation,
    NotInGrammar,
    ShapeViolation,
)
from .homogeneity import SKNumber, as_fraction, multi_degree
from .hopf import Character, HopfStructure, act, forest_factorial, star
from .rulegen import Classification, TreeSet, classify, generate
from .trees import (
    DEFAULT_DIM,
    XI,
    Comb,
    Multi,
    Tree,
    edge_degree,
    homogeneity,
    in_grammar,
    leaves,
    madd,
    missing_count,
    multis_below,
    node,
    orbit_count,
    plant_comb,
    planted,
    poly_degree,
    product,
    symmetry_factor,
    to_text,
    unit,
    unit_vector,
    zero,
)

__all__ = [
    "Jet",
    "CUBIC",
    "NOISE_VALUE",
    "jet_derive",
    "jet_shift",
    "Coherence",
    "upsilon",
    "CubicShape",
    "cubic_shape",
    "upsilon_star",
    "star_table_expected",
    "Exponent",
    "alpha",
    "alpha_prime",
    "alpha_closed_form",
    "Remainder",
    "remainder",
    "build_V",
    "square_V",
    "gradient_V",
    "IdentityReport",
    "base_point_check",
    "square_check",
    "gradient_check",
    "lemma224_check",
    "default_epsilon",
    "truncate",
    "multiply",
    "gamma_on_expr",
    "evaluate_character",
    "DPDReport",
    "dpd_check",
]

NOISE_VALUE = Fraction(-1)
TWO_S = SKNumber(0, 2, 0)

Monomial = tuple[tuple[Multi, int], ...]


# ----------------------------------------------------------------- jets


class Jet(dict):
    """Polynomial in jet symbols: sorted ``((k, power), ...)`` -> Fraction."""

    @classmethod
    def const(cls, c) -> Jet:
        c = Fraction(c)
        return cls({(): c}) if c else cls()

    @classmethod
    def var(cls, k: Multi, power: int = 1) -> Jet:
        return cls({((tuple(k), power),): Fraction(1)})

    def _add(self, other: Jet, sign: int) -> Jet:
        out = Jet(self)
        for mono, c in other.items():
            total = out.get(mono, Fraction(0)) + sign * c
            if total:
                out[mono] = total
            else:
                out.pop(mono, None)
        return out

    def __add__(self, other) -> Jet:
        if not isinstance(other, Jet):
            other = Jet.const(other)
        return self._add(other, 1)

    __radd__ = __add__

    def __sub__(self, other) -> Jet:
        if not isinstance(other, Jet):
            other = Jet.const(other)
        return self._add(other, -1)

    def __neg__(self) -> Jet:
        return Jet({mono: -c for mono, c in self.items()})

    def __mul__(self, other) -> Jet:
        if isinstance(other, Jet):
            out: dict[Monomial, Fraction] = {}
            for m1, c1 in self.items():
                for m2, c2 in other.items():
                    mono = _mono_mul(m1, m2)
                    out[mono] = out.get(mono, Fraction(0)) + c1 * c2
            return Jet({m: c for m, c in out.items() if c})
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return Jet({m: c * other for m, c in self.items()}) if other else Jet()
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> Jet:
        return self * (1 / Fraction(other))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Jet.const(other)
        return dict.__eq__(self, other)

    def __ne__(self, other) -> bool:
        return not self == other

    __hash__ = None  # type: ignore[assignment]

    def variables(self) -> set[Multi]:
        return {k for mono in self for k, _ in mono}

    def is_constant(self) -> bool:
        return all(mono == () for mono in self)

    def constant(self) -> Fraction:
        return self.get((), Fraction(0))

    def evaluate(self, point: dict[Multi, Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, c in self.items():
            term = c
            for k, p in mono:
                term *= Fraction(point[k]) ** p
            total += term
        return total

    def __repr__(self) -> str:
        return jet_text(self)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    powers: dict[Multi, int] = dict(a)
    for k, p in b:
        powers[k] = powers.get(k, 0) + p
    return tuple(sorted(powers.items()))


def jet_text(f: Jet) -> str:
    if not f:
        return "0"
    parts = []
    for mono, c in sorted(f.items()):
        factors = ["X" + "".join(map(str, k)) + (f"^{p}" if p > 1 else "") for k, p in mono]
        parts.append("*".join([str(c)] + factors) if factors else str(c))
    return " + ".join(parts)


def jet_derive(f: Jet, k: Multi) -> Jet:
    """Partial derivative with respect to the symbol ``X_k``."""
    k = tuple(k)
    out = Jet()
    for mono, c in f.items():
        powers = dict(mono)
        p = powers.get(k, 0)
        if not p:
            continue
        if p == 1:
            del powers[k]
        else:
            powers[k] = p - 1
        out = out + Jet({tuple(sorted(powers.items())): c * p})
    return out


def jet_shift(f: Jet, e: Multi) -> Jet:
    """Total derivative ``sum_k X_{k+e} D_k f`` in the direction of the unit multi-index ``e``."""
    out = Jet()
    for k in sorted(f.variables()):
        out = out + Jet.var(madd(k, e)) * jet_derive(f, k)
    return out


def cubic(d: int = DEFAULT_DIM) -> Jet:
    """The nonlinearity ``-X_0^3``."""
    return Jet.var(zero(d), 3) * -1


CUBIC = cubic()


# ------------------------------------------------------------ coherence map


@dataclass
class Coherence:
    """The coherence map for a jet nonlinearity ``F`` and a value on the noise."""

    F: Jet = field(default_factory=cubic)
    noise_value: Fraction = NOISE_VALUE
    d: int = DEFAULT_DIM
    _memo: dict = field(default_factory=dict, repr=False)

    def __call__(self, tau: Tree) -> Jet:
        found = self._memo.get(tau)
        if found is not None:
            return found
        if tau.is_noise:
            out = Jet.const(self.noise_value)
        else:
            out = self.derivative(tau.k, [m for m, _ in tau.children], self.F)
            for _, child in tau.children:
                if not out:
                    break
                out = out * self(child)
        self._memo[tau] = out
        return out

    def derivative(self, k: Multi, edges: Iterable[Multi], f: Jet) -> Jet:
        """``d^k D_{m_1} ... D_{m_n} f``."""
        for m in edges:
            f = jet_derive(f, m)
        for i, ki in enumerate(k):
            e = tuple(1 if j == i else 0 for j in range(len(k)))
            for _ in range(ki):
                f = jet_shift(f, e)
        return f

    def comb(self, x: Comb) -> Jet:
        out = Jet()
        for t, c in x.items():
            out = out + self(t) * c
        return out

    def star(self, mu: Tree, tau: Tree) -> Jet:
        """``prod Upsilon[sigma_i] * (d^k D_{m_1} ... D_{m_n}) Upsilon[tau]``."""
        out = self.derivative(mu.k, [m for m, _ in mu.children], self(tau))
        for _, sigma in mu.children:
            out = out * self(sigma)
        return out


_DEFAULT = Coherence()


def upsilon(tau: Tree, coherence: Coherence | None = None, check: bool = True) -> Jet:
    """Coherence map on a tree of the generation grammar."""
    if check and not in_grammar(tau):
        raise NotInGrammar(f"{to_text(tau)} is not produced by the generation rule")
    return (coherence or _DEFAULT)(tau)


def upsilon_star(mu: Tree, tau: Tree, coherence: Coherence | None = None) -> Jet:
    return (coherence or _DEFAULT).star(mu, tau)


@dataclass(frozen=True)
class CubicShape:
    """``c * X_0^power`` (shape ``"v"``), ``c * X_{e_j}`` (shape ``"vX"``) or zero."""

    c: int
    shape: str
    power: int = 0
    direction: int = 0

    def jet(self, d: int = DEFAULT_DIM) -> Jet:
        if self.shape == "zero":
            return Jet()
        if self.shape == "v":
            return Jet.var(zero(d), self.power) * self.c if self.power else Jet.const(self.c)
        return Jet.var(unit_vector(self.direction, d)) * self.c


def cubic_shape(tau: Tree, coherence: Coherence | None = None) -> CubicShape:
    f = (coherence or _DEFAULT)(tau)
    if not f:
        return CubicShape(0, "zero")
    if len(f) != 1:
        raise ShapeViolation(f"{to_text(tau)}: {jet_text(f)} has more than one monomial")
    (mono, c), = f.items()
    if c.denominator != 1:
        raise ShapeViolation(f"{to_text(tau)}: coefficient {c} is not an integer")
    if mono == ():
        return CubicShape(int(c), "v", 0)
    if len(mono) == 1:
        k, p = mono[0]
        if not any(k):
            return CubicShape(int(c), "v", p)
        if p == 1 and k[0] == 0 and sum(k) == 1:
            return CubicShape(int(c), "vX", 0, k.index(1))
    raise ShapeViolation(f"{to_text(tau)}: {jet_text(f)} is neither c v^m nor c v_X")


def star_table_expected(tau: Tree, mu: Tree, coherence: Coherence | None = None) -> Jet:
    """Closed-form ``Upsilon[mu * tau]`` from the shape of ``Upsilon[tau]``.

    Valid for ``tau`` of negative homogeneity, ``mu`` not the unit and
    ``|mu * tau| < 0``.
    """
    coh = coherence or _DEFAULT
    shape = cubic_shape(tau, coh)
    d = len(mu.k) - 1
    z = zero(d)
    c = shape.c
    plain = [sigma for m, sigma in mu.children if m == z]
    only_plain = len(plain) == len(mu.children) and not any(mu.k)
    if shape.shape == "v" and shape.power == 2 and only_plain:
        if len(plain) == 1:
            return Jet.var(z) * coh(plain[0]) * (2 * c)
        if len(plain) == 2:
            return coh(plain[0]) * coh(plain[1]) * (2 * c)
    if shape.shape == "v" and shape.power == 1:
        if only_plain and len(plain) == 1:
            return coh(plain[0]) * c
        if not mu.children and sum(mu.k) == 1:
            return Jet.var(mu.k) * c
    if shape.shape == "vX" and not any(mu.k) and len(mu.children) == 1:
        m, sigma = mu.children[0]
        if m == unit_vector(shape.direction, d):
            return coh(sigma) * c
    return Jet()


# ------------------------------------------------------------------ exponent


@dataclass(frozen=True)
class Exponent:
    """Real exponent ``value + kappa * k`` with ``k`` the infinitesimal."""

    value: Fraction
    kappa: Fraction

    def __add__(self, other: Exponent) -> Exponent:
        return Exponent(self.value + other.value, self.kappa + other.kappa)

    def __str__(self) -> str:
        sign = "-" if self.kappa < 0 else "+"
        return f"{self.value} {sign} {abs(self.kappa)}k"


def alpha(tau: Tree, s) -> Exponent:
    """``l(tau) / s * (2s - 3/2 - kappa)`` with ``l`` the number of noises."""
    s = as_fraction(s)
    n = leaves(tau)
    return Exponent(n * (2 * s - Fraction(3, 2)) / s, Fraction(-n) / s)


def alpha_prime(tau: Tree, s) -> Exponent:
    """``(|tau| - |n(tau)| + |e(tau)|) / s - m(tau) + 3`` for any grammar tree."""
    s = as_fraction(s)
    h = homogeneity(tau) - poly_degree(tau) + edge_degree(tau)
    return Exponent(h.value(s) / s - missing_count(tau) + 3, Fraction(h.ck) / s)


def alpha_closed_form(tau: Tree, s) -> Exponent:
    """The closed form on non-polynomial trees other than the noise."""
    if tau.is_noise or tau.is_monomial:
        raise ExcludedTree(f"the closed form is not asserted for {to_text(tau)}")
    return alpha_prime(tau, s)


# ------------------------------------------------------- modelled expressions


def truncate(expr: Comb, beta: SKNumber, s) -> Comb:
    """Keep the keys of homogeneity strictly below ``beta``."""
    return Comb({t: c for t, c in expr.items() if homogeneity(t).lt(beta, s)})


def multiply(x: Comb, y: Comb) -> Comb:
    out = Comb()
    for a, ca in x.items():
        for b, cb in y.items():
            out.add_term(product(a, b), ca * cb)
    return out


def gamma_on_expr(hopf: HopfStructure, gamma: Character, expr: Comb) -> Comb:
    """Apply ``Gamma_gamma`` key by key, keeping jet coefficients."""
    out = Comb()
    for t, c in expr.items():
        for key, value in act(hopf, gamma, t).items():
            out.add_term(key, c * value)
    return out


def evaluate_character(gamma: Character, expr: Comb) -> Jet:
    """``sum c * gamma(key)`` with each key read as a forest (the unit gives 1)."""
    out = Jet()
    for t, c in expr.items():
        value = gamma(t)
        if value:
            out = out + c * value
    return out


def pairing(tree: Tree, expr: Comb) -> Jet:
    """Weighted coefficient ``tree! * expr[tree]``."""
    c = expr.get(tree)
    return Jet() if c is None else c * symmetry_factor(tree)


def _expr_diff(a: Comb, b: Comb) -> Tree | None:
    for key in sorted(set(a) | set(b), key=lambda t: t.key):
        if a.get(key, Jet()) != b.get(key, Jet()):
            return key
    return None


class Remainder:
    """Trees, classes and expansions of the remainder at fixed ``(s, gamma)``."""

    def __init__(self, s, gamma: SKNumber, d: int = DEFAULT_DIM, coherence: Coherence | None = None,
                 check_gamma: bool = True):
        self.s = as_fraction(s)
        self.gamma = gamma
        self.d = d
        if check_gamma:
            lo, hi = 3 - 2 * self.s, 2 * self.s
            g = gamma.value(self.s)
            if not (lo < g < hi):
                raise GammaOutOfRange(f"gamma = {gamma} must lie in ({lo}, {hi}) at s = {self.s}")
        self.coherence = coherence or Coherence(d=d)
        self.trees: TreeSet = generate(self.s, gamma - TWO_S, d)
        self.classes: Classification = classify(self.trees)
        self.hopf = HopfStructure(self.s, d)
        self.one = unit(d)
        self.z = zero(d)

    def widened(self, gamma: SKNumber) -> Remainder:
        """Same data with the expansion index raised to ``gamma`` when needed."""
        if gamma.key(self.s) <= self.gamma.key(self.s):
            return self
        return Remainder(self.s, gamma, self.d, self.coherence, check_gamma=False)

    # sets ----------------------------------------------------------------

    def v_range(self, lo: SKNumber, hi: SKNumber) -> list[Tree]:
        return self.classes.v_range(lo, hi)

    @property
    def W(self) -> list[Tree]:
        return self.classes.W

    def boundary(self) -> list[Tree]:
        """``dW`` restricted to ``V_{0,gamma}``."""
        return [t for t in self.classes.dW if self._in_v(t, SKNumber(), self.gamma)]

    def _in_v(self, t: Tree, lo: SKNumber, hi: SKNumber) -> bool:
        h = homogeneity(t) + TWO_S
        return h.is_positive(self.s) and lo.le(h, self.s) and h.lt(hi, self.s)

    def _check_beta(self, beta: SKNumber, lo: Fraction, hi: SKNumber, closed_low: bool = False) -> None:
        b = beta.key(self.s)
        ok_low = b >= (lo, 0) if closed_low else b > (lo, 0)
        if not ok_low or b > hi.key(self.s):
            raise BetaOutOfRange(f"beta = {beta} outside the admissible range at s = {self.s}")

    # expansions -----------------------------------------------------------

    def V(self, beta: SKNumber | None = None) -> Comb:
        """``v 1 + v_X . X + sum Upsilon/tau! I(tau)`` truncated below ``beta``."""
        beta = self.gamma if beta is None else beta
        if beta.key(self.s) > self.gamma.key(self.s):
            raise BetaOutOfRange(f"beta = {beta} exceeds gamma = {self.gamma}")
        out = Comb()
        out.add_term(self.one, Jet.var(self.z))
        for j in range(1, self.d + 1):
            out.add_term(node(unit_vector(j, self.d)), Jet.var(unit_vector(j, self.d)))
        for tau in self.v_range(SKNumber(), self.gamma):
            coeff = self.coherence(tau)
            if coeff:
                out.add_term(planted(self.z, tau), coeff / symmetry_factor(tau))
        return truncate(out, beta, self.s)

    def V_square(self, beta: SKNumber) -> Comb:
        """Closed form of ``Q_<beta(V_beta^2)`` for ``beta`` in ``(0, 1]``."""
        self._check_beta(beta, Fraction(0), SKNumber.const(1))
        v = Jet.var(self.z)
        out = Comb()
        out.add_term(self.one, v * v)
        members = [t for t in self.v_range(SKNumber(), beta) if self.coherence(t)]
        for sigma in members:
            out.add_term(planted(self.z, sigma), v * self.coherence(sigma) * Fraction(2, symmetry_factor(sigma)))
        for a, b in itertools.combinations_with_replacement(members, 2):
            pair = node(self.z, [(self.z, a), (self.z, b)])
            if homogeneity(pair).lt(beta, self.s):
                coeff = self.coherence(a) * self.coherence(b) * Fraction(2, symmetry_factor(pair))
                out.add_term(pair, coeff)
        return out

    def V_square_by_product(self, beta: SKNumber) -> Comb:
        vb = self.V(beta)
        return truncate(multiply(vb, vb), beta, self.s)

    def gradient(self, j: int, beta: SKNumber | None = None) -> Comb:
        """``v_{X_j} 1 + sum_{sigma in V_{1,gamma}} Upsilon/sigma! I_j(sigma)``, truncated below ``beta``."""
        e = unit_vector(j, self.d)
        out = Comb()
        out.add_term(self.one, Jet.var(e))
        for sigma in self.v_range(SKNumber.const(1), self.gamma):
            coeff = self.coherence(sigma)
            if coeff:
                out.add_term(planted(e, sigma), coeff / symmetry_factor(sigma))
        return out if beta is None else truncate(out, beta, self.s)

    def act(self, gamma: Character, expr: Comb) -> Comb:
        return gamma_on_expr(self.hopf, gamma, expr)

    # forests ---------------------------------------------------------------

    def forests_below(self, bound: SKNumber, targets: Iterable[Tree], max_leaves: int) -> list[Tree]:
        """Forests ``mu`` with ``|mu| < bound`` whose planted factors are subtrees of ``targets``.

        Only such forests can graft onto a tree and land on one of ``targets``.
        """
        s = self.s
        subtrees: set[Tree] = set()
        for rho in targets:
            stack = [rho]
            while stack:
                t = stack.pop()
                for _, child in t.children:
                    subtrees.add(child)
                    stack.append(child)
        pool: list[tuple[Tree, SKNumber, int]] = []
        for j in range(self.d + 1):
            k = unit_vector(j, self.d) if j else (1,) + (0,) * self.d
            pool.append((node(k), multi_degree(k), 0))
        for b in subtrees:
            if b.is_monomial or leaves(b) > max_leaves:
                continue
            top = homogeneity(b) + TWO_S
            for m in multis_below(top, s, self.d):
                g = node(self.z, [(m, b)])
                h = homogeneity(g)
                if h.is_positive(s) and h.lt(bound, s):
                    pool.append((g, h, leaves(b)))
        pool.sort(key=lambda item: (item[1].key(s), item[0].key))
        out: list[Tree] = []

        def rec(start: int, total: SKNumber, room: int, current: Tree) -> None:
            out.append(current)
            for i in range(start, len(pool)):
                g, h, n = pool[i]
                nxt = total + h
                if not nxt.lt(bound, s):
                    break
                if n <= room:
                    rec(i, nxt, room - n, product(current, g))

        rec(0, SKNumber(), max_leaves, self.one)
        return out

    def planted_component_by_star(self, gamma: Character, tau: Tree, beta: SKNumber) -> Jet:
        """``sum_mu gamma(mu)/mu! * sum_rho (mu * tau)[rho] Upsilon[rho]`` over ``rho in V_{0,beta}``."""
        bound = beta - TWO_S - homogeneity(tau)
        targets = self.v_range(SKNumber(), beta)
        room = max((leaves(t) for t in targets), default=0) - leaves(tau)
        total = Jet()
        for mu in self.forests_below(bound, targets, room):
            g = gamma(mu)
            if not g:
                continue
            inner = Jet()
            for rho, c in star(mu, tau).items():
                if self._in_v(rho, SKNumber(), beta):
                    inner = inner + self.coherence(rho) * c
            if inner:
                total = total + inner * (g / forest_factorial(mu))
        return total


@functools.lru_cache(maxsize=16)
def remainder(s, gamma: SKNumber, d: int = DEFAULT_DIM) -> Remainder:
    """Cached :class:`Remainder` with the default coherence map."""
    return Remainder(as_fraction(s), gamma, d)


def build_V(s, gamma: SKNumber, d: int = DEFAULT_DIM) -> Comb:
    return remainder(as_fraction(s), gamma, d).V()


def square_V(s, gamma: SKNumber, beta: SKNumber, d: int = DEFAULT_DIM) -> Comb:
    rem = remainder(as_fraction(s), gamma, d)
    closed = rem.V_square(beta)
    if closed != rem.V_square_by_product(beta):
        raise IdentityViolation(f"closed and multiplied squares differ at beta = {beta}")
    return closed


def gradient_V(s, j: int, gamma: SKNumber, d: int = DEFAULT_DIM) -> Comb:
    return remainder(as_fraction(s), gamma, d).gradient(j)


# ------------------------------------------------------------ identity checks


@dataclass
class IdentityReport:
    name: str
    checked: int
    failures: list[str]
    extra: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def raise_if_failed(self) -> None:
        if self.failures:
            raise IdentityViolation(f"{self.name}: {self.failures[0]}")


def _compare(report: IdentityReport, label: str, lhs: Jet, rhs: Jet) -> None:
    report.checked += 1
    if lhs != rhs:
        report.failures.append(f"{label}: {jet_text(lhs)} != {jet_text(rhs)}")


def base_point_check(rem: Remainder, gamma: Character, beta: SKNumber) -> IdentityReport:
    """Coefficients of ``Gamma V_beta`` at ``1``, ``X_j`` and ``I(tau)`` against their closed forms."""
    rem._check_beta(beta, Fraction(0), rem.gamma)
    s, d = rem.s, rem.d
    report = IdentityReport("change of base point of V", 0, [])
    direct = rem.act(gamma, rem.V(beta))
    above_one = beta.key(s) > (Fraction(1), 0)
    v_0b = [t for t in rem.v_range(SKNumber(), beta)]

    expected = Jet.var(rem.z)
    if above_one:
        for j in range(1, d + 1):
            e = unit_vector(j, d)
            expected = expected + Jet.var(e) * gamma(node(e))
    for sigma in v_0b:
        expected = expected + rem.coherence(sigma) * (gamma(planted(rem.z, sigma)) / symmetry_factor(sigma))
    _compare(report, "<1, GV>", pairing(rem.one, direct), expected)

    for j in range(1, d + 1):
        e = unit_vector(j, d)
        expected = Jet.var(e) if above_one else Jet()
        for sigma in rem.v_range(SKNumber.const(1), beta):
            expected = expected + rem.coherence(sigma) * (gamma(planted(e, sigma)) / symmetry_factor(sigma))
        _compare(report, f"<X_{j}, GV>", pairing(node(e), direct), expected)

    for tau in v_0b:
        lhs = pairing(planted(rem.z, tau), direct)
        rhs = rem.planted_component_by_star(gamma, tau, beta)
        _compare(report, f"<I({to_text(tau)}), GV>", lhs, rhs)

    allowed = {rem.one} | {node(unit_vector(j, d)) for j in range(1, d + 1)}
    allowed |= {planted(rem.z, t) for t in v_0b}
    for key in direct:
        if key not in allowed:
            report.failures.append(f"unexpected component {to_text(key)}")
    return report


def square_check(rem: Remainder, gamma: Character, beta: SKNumber) -> IdentityReport:
    """``3 <t, Gamma V_beta^2> = <I(t I(Xi)), Gamma V_{beta + |I(I(Xi))|}>`` for every component ``t``."""
    rem._check_beta(beta, Fraction(0), SKNumber.const(1))
    s, z = rem.s, rem.z
    report = IdentityReport("square against V", 0, [])
    i_xi = planted(z, XI)
    shifted = beta + homogeneity(planted(z, i_xi))
    square = rem.act(gamma, rem.V_square(beta))
    wide = rem.widened(shifted)
    lifted = wide.act(gamma, wide.V(shifted))

    members = rem.v_range(SKNumber(), beta)
    targets: list[Tree] = [rem.one] + [planted(z, t) for t in members]
    for a, b in itertools.combinations_with_replacement(members, 2):
        pair = node(z, [(z, a), (z, b)])
        if homogeneity(pair).lt(beta, s):
            targets.append(pair)
    for t in targets:
        lhs = pairing(t, square) * 3
        rhs = pairing(planted(z, product(t, i_xi)), lifted)
        _compare(report, f"component {to_text(t)}", lhs, rhs)
    for key in square:
        if key not in set(targets):
            report.failures.append(f"unexpected component {to_text(key)}")
    return report


def gradient_check(rem: Remainder, gamma: Character, j: int) -> IdentityReport:
    """``<1, G V^(j)> = <X_j, G V>`` and ``<I_j(s), G V^(j)> = <I(s), G V>``."""
    d, z = rem.d, rem.z
    e = unit_vector(j, d)
    report = IdentityReport("generalised gradient", 0, [])
    grad = rem.act(gamma, rem.gradient(j))
    full = rem.act(gamma, rem.V())
    _compare(report, "<1, GV^(j)>", pairing(rem.one, grad), pairing(node(e), full))
    sigmas = rem.v_range(SKNumber.const(1), rem.gamma)
    for sigma in sigmas:
        _compare(report, f"<I_{j}({to_text(sigma)}), GV^(j)>",
                 pairing(planted(e, sigma), grad), pairing(planted(z, sigma), full))
    # left factors outside V_{1,gamma} also produce I_j components; they are listed, not asserted
    allowed = {rem.one} | {planted(e, t) for t in sigmas}
    report.extra = [to_text(key) for key in sorted(grad, key=lambda t: t.key) if key not in allowed]
    return report


def lemma224_check(rem: Remainder, gamma: Character, beta: SKNumber) -> IdentityReport:
    """``<I(tau), Gamma V_beta>`` through the shape of ``Upsilon[tau]``:
    ``c gamma(V_b)``, ``c gamma(V_b^2)``, ``c gamma(Q_<b V^(j))`` or ``c``, with ``b = beta - |I(tau)|``."""
    rem._check_beta(beta, Fraction(1), rem.gamma)
    z = rem.z
    report = IdentityReport("planted components of V", 0, [])
    direct = rem.act(gamma, rem.V(beta))
    for tau in rem.v_range(SKNumber(), beta):
        shape = cubic_shape(tau, rem.coherence)
        lhs = pairing(planted(z, tau), direct)
        rest = beta - homogeneity(planted(z, tau))
        if shape.shape == "zero":
            rhs = Jet()
        elif shape.shape == "vX":
            rhs = evaluate_character(gamma, rem.gradient(shape.direction, rest)) * shape.c
        elif shape.power == 0:
            rhs = Jet.const(shape.c)
        elif shape.power == 1:
            rhs = evaluate_character(gamma, rem.V(rest)) * shape.c
        elif shape.power == 2:
            rhs = evaluate_character(gamma, rem.V_square_by_product(rest)) * shape.c
        else:
            report.failures.append(f"{to_text(tau)}: unexpected power {shape.power}")
            continue
        _compare(report, f"<I({to_text(tau)}), GV>", lhs, rhs)
    return report


# --------------------------------------------------------- remainder identity


@dataclass
class DPDReport:
    s: Fraction
    gamma: SKNumber
    epsilon: Fraction
    ok: bool
    lhs: Comb
    rhs: Comb
    first_difference: Tree | None
    delta_checked: int
    delta_failures: list[str]

    def raise_if_failed(self) -> None:
        if self.first_difference is not None:
            raise IdentityViolation(
                f"remainder identity fails at {to_text(self.first_difference)}", self.first_difference
            )
        if self.delta_failures:
            raise IdentityViolation(self.delta_failures[0])


def default_epsilon(rem: Remainder) -> Fraction:
    """Half the smaller of ``min(gamma + |I(t1) I(t2)|)`` and ``min(1 + |I(t)|)`` over the negative set."""
    s, z = rem.s, rem.z
    g = rem.gamma.value(s)
    pair_min = min(
        g + homogeneity(node(z, [(z, a), (z, b)])).value(s)
        for a, b in itertools.combinations_with_replacement(rem.W, 2)
    )
    single_min = min(1 + (homogeneity(t) + TWO_S).value(s) for t in rem.W)
    eps = min(pair_min, single_min) / 2
    if eps <= 0:
        raise GammaOutOfRange(f"no admissible epsilon at s = {s}, gamma = {rem.gamma}")
    return eps


def dpd_check(s, gamma: SKNumber, epsilon: Fraction | None = None, d: int = DEFAULT_DIM,
              coherence: Coherence | None = None) -> DPDReport:
    """Compare ``V`` with the right-hand side of its fixed-point equation below ``gamma``."""
    rem = Remainder(s, gamma, d, coherence)
    s, z, coh = rem.s, rem.z, rem.coherence
    eps = default_epsilon(rem) if epsilon is None else as_fraction(epsilon)
    eps_h = SKNumber.const(eps)
    lhs = rem.V()

    rhs = Comb()
    for tau in rem.W:
        c = coh(tau)
        if not c:
            continue
        beta = eps_h - homogeneity(planted(z, tau))
        inner = multiply(Comb.single(planted(z, tau)), rem.V_square_by_product(beta))
        rhs = rhs + plant_comb(z, inner).scale(c * Fraction(-3, symmetry_factor(tau)))
    for t1, t2 in itertools.product(rem.W, repeat=2):
        c = coh(t1) * coh(t2)
        if not c:
            continue
        pair = node(z, [(z, t1), (z, t2)])
        beta = eps_h - homogeneity(pair)
        inner = multiply(Comb.single(pair), rem.V(beta))
        rhs = rhs + plant_comb(z, inner).scale(c * Fraction(-3, symmetry_factor(t1) * symmetry_factor(t2)))
    for tau in rem.boundary():
        c = coh(tau)
        if c:
            rhs.add_term(planted(z, tau), c / symmetry_factor(tau))
    rhs.add_term(rem.one, Jet.var(z))
    for j in range(1, d + 1):
        e = unit_vector(j, d)
        rhs.add_term(node(e), Jet.var(e))
    rhs = truncate(rhs, rem.gamma, s)

    delta_failures: list[str] = []
    checked = 0
    for a, b, c in itertools.combinations_with_replacement(rem.W, 3):
        t = node(z, [(z, a), (z, b), (z, c)])
        delta = orbit_count([a.key, b.key, c.key])
        checked += 1
        lhs_d = symmetry_factor(t) * delta
        rhs_d = 6 * symmetry_factor(a) * symmetry_factor(b) * symmetry_factor(c)
        if lhs_d != rhs_d:
            delta_failures.append(f"{to_text(t)}: {lhs_d} != {rhs_d}")

    diff = _expr_diff(lhs, rhs)
    return DPDReport(s, gamma, eps, diff is None and not delta_failures, lhs, rhs, diff, checked, delta_failures)
