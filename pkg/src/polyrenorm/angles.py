"""Angle arithmetic on the circle R/Z with exact rational representatives.

All cut and ray angles in this package are rational; keeping them as reduced
fractions makes d-tupling orbits exact and lets serialized scenes round-trip
without losing the combinatorics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, order=True)
class Angle:
    """A point of R/Z stored as a reduced fraction num/den in [0, 1)."""

    num: int
    den: int = 1

    def __post_init__(self) -> None:
        if self.den == 0:
            raise ValueError("angle denominator must be nonzero")
        f = Fraction(self.num, self.den) % 1
        object.__setattr__(self, "num", f.numerator)
        object.__setattr__(self, "den", f.denominator)

    @classmethod
    def parse(cls, text: str) -> "Angle":
        """Parse "p/q" or "p" (integers reduce to angle 0)."""
        text = text.strip()
        if "/" in text:
            p, q = text.split("/", 1)
            return cls(int(p), int(q))
        return cls(int(text), 1)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "Angle":
        f = f % 1
        return cls(f.numerator, f.denominator)

    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def times(self, d: int) -> "Angle":
        """The image d*theta mod 1."""
        return Angle.from_fraction(self.fraction() * d)

    def as_float(self) -> float:
        return self.num / self.den

    def ccw_to(self, other: "Angle") -> Fraction:
        """Length of the counterclockwise arc from self to other, in [0, 1)."""
        return (other.fraction() - self.fraction()) % 1

    def __str__(self) -> str:
        return f"{self.num}/{self.den}" if self.den != 1 else str(self.num)


def tuple_orbit(theta: Angle, d: int) -> tuple[int, int, list[Angle]]:
    """Forward orbit of an angle under t -> d*t mod 1.

    Returns (preperiod, period, orbit) where orbit lists theta, d*theta, ...
    up to (not including) the first repetition.  Rational angles are always
    eventually periodic so this terminates.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    seen: dict[Angle, int] = {}
    orbit: list[Angle] = []
    a = theta
    while a not in seen:
        seen[a] = len(orbit)
        orbit.append(a)
        a = a.times(d)
    preperiod = seen[a]
    period = len(orbit) - preperiod
    return preperiod, period, orbit


def reduce_offset(x: float) -> float:
    """Reduce a real angle offset (in turns) to the interval (-1/2, 1/2]."""
    r = x % 1.0
    if r > 0.5:
        r -= 1.0
    return r


def angle_in_arc(theta: float, lo: float, hi: float, margin: float = 0.0) -> bool:
    """True if the angle theta (turns) lies on the ccw arc from lo to hi.

    The arc is taken open; lo == hi denotes the empty arc.  A positive margin
    shrinks the arc at both ends (conservative boundary handling).
    """
    span = (hi - lo) % 1.0
    pos = (theta - lo) % 1.0
    return margin < pos < span - margin
