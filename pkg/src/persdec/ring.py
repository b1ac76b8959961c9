"""Exact scalar arithmetic for the coefficient rings.

Scalars are opaque values interpreted by a ring object: arbitrary-precision
Python integers for the integers, canonical residues in [0, p) for prime
fields.  Ring instances are stateless and immutable, and every operation is
pure, so scalars and rings are safe to share across threads.

JSON payloads always carry scalars as decimal strings so values stay exact
past 53 bits.
"""

from __future__ import annotations

from typing import Optional, Tuple

Scalar = int  # both shipped rings use ints as their opaque carrier


class InexactDivision(ArithmeticError):
    """Exact division was requested for a non-divisible pair."""


class NotAUnit(ArithmeticError):
    """A unit inverse was requested for a non-unit element."""


class Ring:
    """Interface of a Euclidean domain with exact arithmetic.

    Concrete rings fix the carrier set and make every operation total on it;
    matrix and lattice code never looks inside a scalar.  ``unit_normalize``
    picks one canonical representative per associate class (nonnegative for
    integers, 1 for nonzero field elements), which is what makes Smith
    diagonals and Hermite basis matrices unique.
    """

    label: str = "?"
    fraction_label: str = "?"
    zero: Scalar = 0
    one: Scalar = 1

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        raise NotImplementedError

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        raise NotImplementedError

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        raise NotImplementedError

    def neg(self, a: Scalar) -> Scalar:
        raise NotImplementedError

    def is_zero(self, a: Scalar) -> bool:
        raise NotImplementedError

    def is_unit(self, a: Scalar) -> bool:
        raise NotImplementedError

    def exact_div(self, a: Scalar, b: Scalar) -> Scalar:
        """Return q with a = q*b, raising InexactDivision if none exists."""
        q = self.try_div(a, b)
        if q is None:
            raise InexactDivision(f"{self.to_str(a)} is not divisible by {self.to_str(b)} in {self.label}")
        return q

    def try_div(self, a: Scalar, b: Scalar) -> Optional[Scalar]:
        """Return q with a = q*b, or None if b does not divide a."""
        raise NotImplementedError

    def rem(self, a: Scalar, b: Scalar) -> Scalar:
        """Euclidean remainder of a by b; equals a when b is zero."""
        raise NotImplementedError

    def ext_gcd(self, a: Scalar, b: Scalar) -> Tuple[Scalar, Scalar, Scalar]:
        """Return (g, u, v) with u*a + v*b = g, g | a, g | b, g canonical."""
        raise NotImplementedError

    def unit_normalize(self, a: Scalar) -> Tuple[Scalar, Scalar]:
        """Return (unit, canonical) with a = unit * canonical."""
        raise NotImplementedError

    def inv_unit(self, u: Scalar) -> Scalar:
        """Inverse of a unit; raises NotAUnit otherwise."""
        raise NotImplementedError

    def canonical_quo_rem(self, a: Scalar, m: Scalar) -> Tuple[Scalar, Scalar]:
        """Reduce a modulo a canonical nonzero m: a = q*m + r with r canonical.

        Used by the Hermite form to pick the unique representative of an entry
        modulo its pivot (``0 <= r < m`` over the integers, ``r = 0`` over a
        field).
        """
        raise NotImplementedError

    def magnitude(self, a: Scalar) -> int:
        """Nonnegative pivot size; zero only for the zero element."""
        raise NotImplementedError

    def from_int(self, n: int) -> Scalar:
        raise NotImplementedError

    def to_str(self, a: Scalar) -> str:
        return str(a)

    def from_str(self, s: str) -> Scalar:
        return self.from_int(int(s, 10))

    def __repr__(self) -> str:
        return self.label


class IntegerRing(Ring):
    """The integers with arbitrary precision; canonical associates are >= 0.

    >>> Z.ext_gcd(4, 6)
    (2, -1, 1)
    >>> Z.unit_normalize(-5)
    (-1, 5)
    """

    label = "Z"
    fraction_label = "Q"

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a == 1 or a == -1

    def try_div(self, a, b):
        if b == 0:
            return None
        q, r = divmod(a, b)
        return q if r == 0 else None

    def rem(self, a, b):
        return a % b if b != 0 else a

    def ext_gcd(self, a, b):
        if a == 0 and b == 0:
            return 0, 0, 0
        # Euclid on (g, next_g) while carrying the Bezout rows along.
        u, next_u = 1, 0
        v, next_v = 0, 1
        g, next_g = a, b
        while next_g:
            q = g // next_g
            u, next_u = next_u, u - q * next_u
            v, next_v = next_v, v - q * next_v
            g, next_g = next_g, g - q * next_g
        if g < 0:
            g, u, v = -g, -u, -v
        return g, u, v

    def unit_normalize(self, a):
        if a < 0:
            return -1, -a
        return 1, a

    def inv_unit(self, u):
        if u == 1 or u == -1:
            return u
        raise NotAUnit(f"{u} is not a unit in Z")

    def canonical_quo_rem(self, a, m):
        if m <= 0:
            raise ValueError("canonical modulus must be positive")
        q, r = divmod(a, m)
        return q, r

    def magnitude(self, a):
        return abs(a)

    def from_int(self, n):
        return int(n)

    def __eq__(self, other):
        return isinstance(other, IntegerRing)

    def __hash__(self):
        return hash("persdec.IntegerRing")


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


class PrimeField(Ring):
    """GF(p): residues in [0, p); every nonzero element is a unit.

    >>> GF(5).exact_div(1, 2)
    3
    """

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not _is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p

    @property
    def label(self):  # type: ignore[override]
        return f"GF({self.p})"

    @property
    def fraction_label(self):  # type: ignore[override]
        return self.label

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0

    def try_div(self, a, b):
        if b == 0:
            return None
        return (a * pow(b, -1, self.p)) % self.p

    def rem(self, a, b):
        return a if b == 0 else 0

    def ext_gcd(self, a, b):
        # Over a field the gcd is a unit as soon as either input is nonzero.
        if a != 0:
            return 1, pow(a, -1, self.p), 0
        if b != 0:
            return 1, 0, pow(b, -1, self.p)
        return 0, 0, 0

    def unit_normalize(self, a):
        if a == 0:
            return 1, 0
        return a, 1

    def inv_unit(self, u):
        if u == 0:
            raise NotAUnit(f"0 is not a unit in {self.label}")
        return pow(u, -1, self.p)

    def canonical_quo_rem(self, a, m):
        return self.exact_div(a, m), 0

    def magnitude(self, a):
        return 0 if a == 0 else 1

    def from_int(self, n):
        return n % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("persdec.PrimeField", self.p))


Z = IntegerRing()

_FIELD_CACHE: dict[int, PrimeField] = {}


def GF(p: int) -> PrimeField:
    """The prime field with p elements (cached per modulus)."""
    field = _FIELD_CACHE.get(p)
    if field is None:
        field = _FIELD_CACHE[p] = PrimeField(p)
    return field


def ext_gcd(ring: Ring, a: Scalar, b: Scalar) -> Tuple[Scalar, Scalar, Scalar]:
    """Extended gcd in the given ring: (g, u, v) with u*a + v*b = g."""
    return ring.ext_gcd(a, b)


def is_unit(ring: Ring, a: Scalar) -> bool:
    """True iff a divides 1 in the given ring."""
    return ring.is_unit(a)
