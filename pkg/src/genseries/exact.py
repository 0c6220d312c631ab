"""Exact scalar arithmetic over quadratic number fields Q(sqrt(d)).

A `Surd` is p + q*sqrt(d) with rational p, q and square-free integer d.
Negative d encodes the imaginary radical i*sqrt(|d|), so complex-conjugate
pole pairs of lightly damped systems stay exact.  Sums, products and
quotients of surds over the same d close, which is all the pole algebra of
a second-order system needs: every pole combination is an integer linear
combination of the two conjugate roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

Rat = int | Fraction

# trial-division cutoff for radicand reduction; radicands up to the square
# of this bound split completely, larger ones fall back to a perfect-square
# check so the loop stays bounded (binary-float inputs produce enormous
# discriminants that would otherwise never finish factoring)
_TRIAL_BOUND = 100_000


def _square_free_split(n: int) -> tuple[int, int]:
    """Return (s, d) with n == s*s*d, pulling out all square factors with a
    prime below the trial bound.  The identity n == s*s*d always holds
    exactly; only the minimality of d is best-effort for huge inputs.
    Requires n >= 0."""
    if n < 0:
        raise ValueError("need a nonnegative integer")
    s, d = 1, 1
    k = 2
    while k * k <= n and k <= _TRIAL_BOUND:
        e = 0
        while n % k == 0:
            n //= k
            e += 1
        s *= k ** (e // 2)
        if e % 2:
            d *= k
        k += 1
    if n > 1:
        root = math.isqrt(n)
        if root * root == n:
            s *= root
        else:
            d *= n  # leftover cofactor, all primes above the bound
    return s, d


@dataclass(frozen=True)
class Surd:
    """p + q*sqrt(d), normalized so q == 0 implies d == 0."""

    p: Fraction
    q: Fraction = Fraction(0)
    d: int = 0

    def __post_init__(self):
        if not isinstance(self.p, Fraction):
            object.__setattr__(self, "p", Fraction(self.p))
        if not isinstance(self.q, Fraction):
            object.__setattr__(self, "q", Fraction(self.q))
        if self.q == 0 and self.d != 0:
            object.__setattr__(self, "d", 0)
        if self.d == 1:
            # sqrt(1) folds into the rational part
            object.__setattr__(self, "p", self.p + self.q)
            object.__setattr__(self, "q", Fraction(0))
            object.__setattr__(self, "d", 0)

    # -- helpers ---------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    @property
    def is_real(self) -> bool:
        return self.q == 0 or self.d > 0

    def _coerce(self, other) -> "Surd | None":
        if isinstance(other, Surd):
            if other.q == 0 or self.q == 0 or other.d == self.d:
                return other
            return None
        if isinstance(other, (int, Fraction)):
            return Surd(Fraction(other))
        return None

    def _join_d(self, other: "Surd") -> int:
        return self.d if self.q != 0 else other.d

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Surd(self.p + o.p, self.q + o.q, self._join_d(o))

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.p, -self.q, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self._join_d(o)
        return Surd(
            self.p * o.p + self.q * o.q * d,
            self.p * o.q + self.q * o.p,
            d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        denom = o.p * o.p - o.q * o.q * o.d
        if denom == 0:
            raise ZeroDivisionError("division by zero surd")
        conj = Surd(o.p, -o.q, o.d)
        num = self * conj
        return Surd(num.p / denom, num.q / denom, num.d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if n < 0:
            return Surd(Fraction(1)) / self ** (-n)
        out = Surd(Fraction(1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self) -> bool:
        return self.p != 0 or self.q != 0

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.q == 0 and self.p == other
        if isinstance(other, Surd):
            a, b = self, other
            if a.q == 0 and b.q == 0:
                return a.p == b.p
            return a.p == b.p and a.q == b.q and a.d == b.d
        return NotImplemented

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.d))

    # -- conversions -----------------------------------------------------

    def __float__(self) -> float:
        if not self.is_real:
            raise ValueError(f"{self!r} is not real")
        import math

        return float(self.p) + float(self.q) * math.sqrt(self.d)

    def __complex__(self) -> complex:
        import math

        if self.d >= 0:
            return complex(float(self))
        return complex(float(self.p), float(self.q) * math.sqrt(-self.d))

    def conjugate(self) -> "Surd":
        """Field conjugate p - q*sqrt(d) (also complex conjugate when d < 0)."""
        return Surd(self.p, -self.q, self.d)

    def __repr__(self) -> str:
        if self.q == 0:
            return str(self.p)
        rad = f"sqrt({self.d})" if self.d >= 0 else f"i*sqrt({-self.d})"
        if self.p == 0:
            return f"{self.q}*{rad}"
        sign = "+" if self.q > 0 else "-"
        return f"({self.p} {sign} {abs(self.q)}*{rad})"


def sqrt_fraction(x: Rat) -> Surd:
    """Exact square root of a rational as a Surd (imaginary radical if x < 0)."""
    x = Fraction(x)
    if x == 0:
        return Surd(Fraction(0))
    neg = x < 0
    mag = abs(x)
    s, d = _square_free_split(mag.numerator * mag.denominator)
    q = Fraction(s, mag.denominator)
    if d == 1:  # perfect square
        root = Surd(q)
        return Surd(0, q, -1) if neg else root
    return Surd(0, q, -d if neg else d)


def solve_monic_quadratic(b: Rat, c: Rat) -> tuple[Surd, Surd]:
    """Exact roots of z^2 + b z + c = 0, larger real part first."""
    b, c = Fraction(b), Fraction(c)
    disc = b * b - 4 * c
    root = sqrt_fraction(disc)
    half = Fraction(1, 2)
    r1 = (Surd(-b) + root) * half
    r2 = (Surd(-b) - root) * half
    return r1, r2


def as_exact(x) -> Surd:
    """Coerce an int/Fraction/Surd into a Surd."""
    if isinstance(x, Surd):
        return x
    return Surd(Fraction(x))
