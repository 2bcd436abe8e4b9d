"""Dyadic cubes Q(n,k) = (2^n k, 2^n (k+1)] on the half-line.

Cubes are stored as the integer pair (n, k) and all order relations
(containment, disjointness) are decided with integer arithmetic, so the
nesting trichotomy is exact.  Endpoints are dyadic rationals, exposed as
:class:`fractions.Fraction` (exact) and as floats (convenient).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def _pow2(n: int) -> Fraction:
    """2^n as an exact rational, for any sign of n."""
    if n >= 0:
        return Fraction(1 << n)
    return Fraction(1, 1 << (-n))


@dataclass(frozen=True)
class Interval:
    """Half-open interval (left, right] with exact rational endpoints.

    Used for expanded cubes, which are generally not dyadic.
    """

    left: Fraction
    right: Fraction

    def __post_init__(self):
        if self.right < self.left:
            raise ValueError(f"empty interval ({self.left}, {self.right}]")

    @property
    def measure(self) -> Fraction:
        return self.right - self.left

    def contains_point(self, t) -> bool:
        return self.left < Fraction(t) <= self.right

    def __str__(self):
        return f"({float(self.left):g},{float(self.right):g}]"


@dataclass(frozen=True)
class DyadicCube:
    """The dyadic cube Q(n,k) = (2^n k, 2^n (k+1)], n in Z, k in N."""

    n: int
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("dyadic index k must be nonnegative")

    @property
    def left(self) -> Fraction:
        return _pow2(self.n) * self.k

    @property
    def right(self) -> Fraction:
        return _pow2(self.n) * (self.k + 1)

    @property
    def center(self) -> Fraction:
        """The midpoint 2^n (k + 1/2)."""
        return _pow2(self.n) * (2 * self.k + 1) / 2

    @property
    def measure(self) -> Fraction:
        return _pow2(self.n)

    def parent(self) -> "DyadicCube":
        """The unique dyadic cube of twice the side length containing this one."""
        return DyadicCube(self.n + 1, self.k // 2)

    def children(self) -> tuple["DyadicCube", "DyadicCube"]:
        """The two half-length dyadic cubes partitioning this one."""
        return (DyadicCube(self.n - 1, 2 * self.k),
                DyadicCube(self.n - 1, 2 * self.k + 1))

    def contains(self, other: "DyadicCube") -> bool:
        """True iff ``other`` is a subset of this cube (integer arithmetic only)."""
        if other.n > self.n:
            return False
        return (other.k >> (self.n - other.n)) == self.k

    def disjoint(self, other: "DyadicCube") -> bool:
        return not (self.contains(other) or other.contains(self))

    def expand(self) -> Interval:
        """The concentric interval of twice the length, clipped to (0, inf).

        This is the expansion used for measure bookkeeping around a bad
        cube; it is a plain interval, generally not dyadic.
        """
        half = self.measure  # new half-length = old full length
        left = max(Fraction(0), self.center - half)
        return Interval(left, self.center + half)

    def contains_point(self, t) -> bool:
        return self.left < Fraction(t) <= self.right

    def __str__(self):
        return f"Q({self.n},{self.k})=({float(self.left):g},{float(self.right):g}]"
