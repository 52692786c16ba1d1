"""Exact homogeneities of the form ``c0 + cs*s + ck*kappa``.

``kappa`` is a formal positive infinitesimal, so two homogeneities are
ordered by their value at the concrete rational ``s`` first and by the
``kappa`` coefficient only on ties.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[Fraction, int, str]

__all__ = [
    "SKNumber",
    "as_fraction",
    "compare",
    "evaluate",
    "NOISE",
    "ZERO",
    "multi_degree",
]


# the set of distinct homogeneities in use is small, so keys are cached
_KEYS: dict[tuple, tuple[Fraction, int]] = {}


def as_fraction(value: Rational) -> Fraction:
    """Coerce ``value`` to an exact Fraction; floats are rejected."""
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted in symbolic work")
    return Fraction(value)


@dataclass(frozen=True, slots=True)
class SKNumber:
    """Value ``c0 + cs*s + ck*kappa`` with rational ``c0`` and integer ``cs``, ``ck``."""

    c0: Fraction = Fraction(0)
    cs: int = 0
    ck: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "c0", as_fraction(self.c0))
        if not isinstance(self.cs, int) or not isinstance(self.ck, int):
            raise TypeError("s and kappa coefficients must be integers")

    @classmethod
    def const(cls, value: Rational) -> SKNumber:
        return cls(as_fraction(value), 0, 0)

    def __add__(self, other: SKNumber) -> SKNumber:
        if not isinstance(other, SKNumber):
            return NotImplemented
        return SKNumber(self.c0 + other.c0, self.cs + other.cs, self.ck + other.ck)

    def __sub__(self, other: SKNumber) -> SKNumber:
        if not isinstance(other, SKNumber):
            return NotImplemented
        return SKNumber(self.c0 - other.c0, self.cs - other.cs, self.ck - other.ck)

    def __neg__(self) -> SKNumber:
        return SKNumber(-self.c0, -self.cs, -self.ck)

    def __mul__(self, n: int) -> SKNumber:
        if not isinstance(n, int):
            return NotImplemented
        return SKNumber(self.c0 * n, self.cs * n, self.ck * n)

    __rmul__ = __mul__

    def value(self, s: Rational) -> Fraction:
        """The real part ``c0 + cs*s``; the kappa part is ``self.ck``."""
        return self.c0 + self.cs * as_fraction(s)

    def key(self, s: Rational) -> tuple[Fraction, int]:
        """Sort key realising the infinitesimal-kappa order at ``s``."""
        found = _KEYS.get((self, s))
        if found is None:
            found = _KEYS[(self, s)] = (self.value(s), self.ck)
        return found

    def lt(self, other: SKNumber, s: Rational) -> bool:
        return self.key(s) < other.key(s)

    def le(self, other: SKNumber, s: Rational) -> bool:
        return self.key(s) <= other.key(s)

    def is_positive(self, s: Rational) -> bool:
        return self.key(s) > (Fraction(0), 0)

    def is_negative(self, s: Rational) -> bool:
        return self.key(s) < (Fraction(0), 0)

    def drop_kappa(self) -> SKNumber:
        return SKNumber(self.c0, self.cs, 0)

    def to_json(self) -> dict:
        return {"c0": str(self.c0), "cs": self.cs, "ck": self.ck}

    @classmethod
    def from_json(cls, obj: dict) -> SKNumber:
        return cls(Fraction(obj["c0"]), int(obj["cs"]), int(obj["ck"]))

    @classmethod
    def parse(cls, text: str) -> SKNumber:
        """Parse sums like ``"2s"``, ``"-3/2 - s - k"`` or ``"13/10"`` (``k`` is kappa)."""
        compact = text.replace(" ", "").replace("κ", "k")
        if not compact:
            raise ValueError("empty homogeneity literal")
        terms = re.findall(r"[+-]?[^+-]+", compact)
        if "".join(terms) != compact:
            raise ValueError(f"cannot parse homogeneity {text!r}")
        c0, cs, ck = Fraction(0), 0, 0
        for term in terms:
            m = re.fullmatch(r"([+-]?)(\d+(?:/\d+)?)?\*?([sk]?)", term)
            if m is None or (m.group(2) is None and not m.group(3)):
                raise ValueError(f"cannot parse term {term!r} in {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            coeff *= sign
            if m.group(3) == "":
                c0 += coeff
            else:
                if coeff.denominator != 1:
                    raise ValueError("s and kappa coefficients must be integers")
                if m.group(3) == "s":
                    cs += int(coeff)
                else:
                    ck += int(coeff)
        return cls(c0, cs, ck)

    def __str__(self) -> str:
        parts: list[str] = []
        for coeff, sym in ((self.cs, "s"), (self.c0, ""), (self.ck, "k")):
            if coeff == 0:
                continue
            mag = abs(coeff)
            body = str(mag) if sym == "" else (sym if mag == 1 else f"{mag}{sym}")
            sign = "-" if coeff < 0 else "+"
            parts.append(f"{sign} {body}" if parts else (f"-{body}" if coeff < 0 else body))
        return " ".join(parts) if parts else "0"


def compare(a: SKNumber, b: SKNumber, s: Rational) -> int:
    """Return -1, 0 or 1 as ``a`` is below, equal to or above ``b`` at ``s``."""
    ka, kb = a.key(s), b.key(s)
    return (ka > kb) - (ka < kb)


def evaluate(a: SKNumber, s: Rational) -> tuple[Fraction, int]:
    """Return ``(c0 + cs*s, ck)``."""
    return a.value(s), a.ck


ZERO = SKNumber()
NOISE = SKNumber(Fraction(-3, 2), -1, -1)


def multi_degree(k: tuple[int, ...]) -> SKNumber:
    """Parabolic degree ``2s*k0 + k1 + ... + kd`` of a multi-index."""
    return SKNumber(Fraction(sum(k[1:])), 2 * k[0], 0)
