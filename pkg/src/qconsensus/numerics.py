"""Exact integer arithmetic for averages and consensus targets.

Fractions here are deliberately *not* reduced: a node that has summed two
unit tokens holds ``12/2``, and that is what traces must show.  Equality is
by cross-multiplication, so ``12/2 == 24/4`` still holds.

Python integers are unbounded, so cross-multiplication never overflows.  The
supported input range is nonetheless pinned to ``|y_j[0]| <= MAX_ABS_VALUE``
and ``n <= MAX_NODES`` so that every product fits a signed 128-bit word.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

MAX_ABS_VALUE = 10**9
MAX_NODES = 10**4


@dataclass(frozen=True, eq=False)
class QuantizedFraction:
    """An unreduced ratio ``num/den`` of two integers with ``den >= 1``."""

    num: int
    den: int

    def __post_init__(self) -> None:
        if self.den < 1:
            raise ValueError(f"denominator must be >= 1, got {self.den}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantizedFraction):
            return NotImplemented
        return frac_eq(self, other)

    def __hash__(self) -> int:
        # Consistent with cross-multiplication equality.
        g = gcd(self.num, self.den)
        return hash((self.num // g, self.den // g))

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    def __repr__(self) -> str:
        return f"QuantizedFraction({self.num}, {self.den})"

    def same_representation(self, other: QuantizedFraction) -> bool:
        """True iff both numerator and denominator match exactly."""
        return self.num == other.num and self.den == other.den

    @classmethod
    def parse(cls, text: str) -> QuantizedFraction:
        """Parse ``"num/den"``; whitespace around the slash is allowed."""
        num, sep, den = text.partition("/")
        if not sep:
            raise ValueError(f"not a fraction: {text!r}")
        return cls(int(num.strip()), int(den.strip()))


@dataclass(frozen=True)
class AverageDecomposition:
    """``S = n*L + R`` with ``0 <= R < n``."""

    S: int
    n: int
    L: int
    R: int

    @property
    def floor(self) -> int:
        return self.L

    @property
    def ceiling(self) -> int:
        return self.L if self.R == 0 else self.L + 1


def frac_eq(a: QuantizedFraction, b: QuantizedFraction) -> bool:
    return a.num * b.den == b.num * a.den


def exact_average(initial_values: Sequence[int]) -> QuantizedFraction:
    """Return ``sum(values) / len(values)`` without reducing."""
    if len(initial_values) == 0:
        raise ValueError("cannot average an empty list")
    return QuantizedFraction(sum(initial_values), len(initial_values))


def decompose(S: int, n: int) -> AverageDecomposition:
    """Split ``S`` into quotient and remainder by ``n`` (floored convention)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    L, R = divmod(S, n)
    return AverageDecomposition(S=S, n=n, L=L, R=R)


def check_value_bounds(values: Sequence[int]) -> None:
    """Raise ``ValueError`` if ``values`` falls outside the supported range."""
    if len(values) > MAX_NODES:
        raise ValueError(f"at most {MAX_NODES} nodes supported, got {len(values)}")
    for v in values:
        if abs(v) > MAX_ABS_VALUE:
            raise ValueError(f"initial value {v} exceeds +/-{MAX_ABS_VALUE}")
