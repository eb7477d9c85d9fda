"""Exact arithmetic in Z[tau] and Z[i], prime classification, residue rings.

tau is the golden ratio, tau**2 = tau + 1; conjugation sends tau to 1 - tau.
All residue rings are either Z_d with canonical representatives in [0, d),
or a quadratic extension Z_d[w] with w**2 = s*w + t, whose elements are
pairs (x, y) meaning x + w*y.  Everything here is immutable and pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import gcd, isqrt

from .errors import (
    BadIdeal,
    NoEmbedding,
    NoPair,
    NotPrime,
    OddCharRequired,
    ParseError,
)


# ---------------------------------------------------------------------------
# quadratic integers


class QuadInt:
    """a + b*tau with tau**2 = tau + 1 (ring of integers of Q(sqrt 5))."""

    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int = 0):
        self.a = int(a)
        self.b = int(b)

    def conj(self) -> "QuadInt":
        # (a + b*tau)' = (a + b) - b*tau
        return QuadInt(self.a + self.b, -self.b)

    def norm(self) -> int:
        return self.a * self.a + self.a * self.b - self.b * self.b

    def is_unit(self) -> bool:
        return self.norm() in (1, -1)

    def __add__(self, other):
        other = _quad(other)
        return QuadInt(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _quad(other)
        return QuadInt(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _quad(other) - self

    def __neg__(self):
        return QuadInt(-self.a, -self.b)

    def __mul__(self, other):
        other = _quad(other)
        a, b, c, d = self.a, self.b, other.a, other.b
        # (a+b t)(c+d t) = ac + bd + (ad + bc + bd) t
        return QuadInt(a * c + b * d, a * d + b * c + b * d)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            n = self.norm()
            if n not in (1, -1):
                raise ValueError("negative powers only for units")
            inv = self.conj() if n == 1 else -self.conj()
            return inv ** (-k)
        out, base = QuadInt(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            return self.a == other and self.b == 0
        return isinstance(other, QuadInt) and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b, "t"))

    def __repr__(self):
        return f"QuadInt({self.a}, {self.b})"

    def __str__(self):
        return format_element(self.a, self.b, "t")


class GaussInt:
    """a + b*i, Gaussian integers."""

    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int = 0):
        self.a = int(a)
        self.b = int(b)

    def conj(self) -> "GaussInt":
        return GaussInt(self.a, -self.b)

    def norm(self) -> int:
        return self.a * self.a + self.b * self.b

    def is_unit(self) -> bool:
        return self.norm() == 1

    def __add__(self, other):
        other = _gauss(other)
        return GaussInt(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _gauss(other)
        return GaussInt(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _gauss(other) - self

    def __neg__(self):
        return GaussInt(-self.a, -self.b)

    def __mul__(self, other):
        other = _gauss(other)
        a, b, c, d = self.a, self.b, other.a, other.b
        return GaussInt(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers not supported")
        out, base = GaussInt(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            return self.a == other and self.b == 0
        return isinstance(other, GaussInt) and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b, "i"))

    def __repr__(self):
        return f"GaussInt({self.a}, {self.b})"

    def __str__(self):
        return format_element(self.a, self.b, "i")


def _quad(x) -> QuadInt:
    if isinstance(x, QuadInt):
        return x
    if isinstance(x, int):
        return QuadInt(x)
    raise TypeError(f"cannot coerce {x!r} to QuadInt")


def _gauss(x) -> GaussInt:
    if isinstance(x, GaussInt):
        return x
    if isinstance(x, int):
        return GaussInt(x)
    raise TypeError(f"cannot coerce {x!r} to GaussInt")


TAU = QuadInt(0, 1)
SQRT5 = QuadInt(-1, 2)  # = 2*tau - 1


def tau_conj(z: QuadInt) -> QuadInt:
    return _quad(z).conj()


def tau_norm(z: QuadInt) -> int:
    return _quad(z).norm()


def tau_is_unit(z: QuadInt) -> bool:
    return _quad(z).is_unit()


def tau_associates(z: QuadInt, w: QuadInt) -> bool:
    """True when z = u*w for a unit u of Z[tau]."""
    z, w = _quad(z), _quad(w)
    n = w.norm()
    if n == 0:
        return z == w
    q = z * w.conj()
    if q.a % n or q.b % n:
        return False
    return QuadInt(q.a // n, q.b // n).is_unit()


# ---------------------------------------------------------------------------
# primality over Z and prime classification over Z[tau]

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_below(n: int) -> list[int]:
    sieve = bytearray([1]) * n if n > 0 else bytearray()
    out = []
    for p in range(2, n):
        if sieve[p]:
            out.append(p)
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return out


@dataclass(frozen=True)
class TauPrimeClass:
    kind: str  # "ramified" | "inert" | "split"
    residue_order: int
    residue_char: int


def tau_classify_prime(pi: QuadInt) -> TauPrimeClass:
    """Classify a prime of Z[tau] by the absolute value of its norm.

    ramified: |N| = 5 (associates of sqrt 5); inert: |N| = p**2 for a
    rational prime p = +-2 mod 5; split: |N| = q, a rational prime
    q = +-1 mod 5.  Anything else is rejected.
    """
    pi = _quad(pi)
    n = abs(pi.norm())
    if n == 5:
        return TauPrimeClass("ramified", 5, 5)
    if is_prime(n) and n % 5 in (1, 4):
        return TauPrimeClass("split", n, n)
    r = isqrt(n)
    if r * r == n and is_prime(r) and r % 5 in (2, 3):
        return TauPrimeClass("inert", n, r)
    raise NotPrime(f"{pi} is not a prime of Z[tau] (|norm| = {n})")


def tau_primes_over(q: int) -> tuple[QuadInt, QuadInt]:
    """The two conjugate primes over a split rational prime q."""
    if not (is_prime(q) and q % 5 in (1, 4)):
        raise NotPrime(f"{q} does not split in Z[tau]")
    for b in range(1, q + 1):
        for a in range(-2 * q, 2 * q + 1):
            if abs(a * a + a * b - b * b) == q:
                pi = QuadInt(a, b)
                return pi, pi.conj()
    raise NotPrime(f"no prime of norm +-{q} found")  # pragma: no cover


# ---------------------------------------------------------------------------
# residue rings


@dataclass(frozen=True)
class IdealSpec:
    """Ideal of Z[i]: full:m is m*Z[i]; principal:b,c is (b+ci)*Z[i]."""

    kind: str  # "full" | "principal"
    m: int = 0
    b: int = 0
    c: int = 0

    def __str__(self):
        if self.kind == "full":
            return f"full:{self.m}"
        return f"principal:{self.b},{self.c}"


class RingSpec:
    """A concrete finite coefficient ring with exact arithmetic.

    Scalar rings hold ints in [0, d); quadratic extensions Z_d[w] with
    w**2 = s*w + t hold pairs (x, y).  kind is one of "Zmod", "GF",
    "GF2" (= Z[tau]/(p), basis {1, theta}), "tau" (split/ramified
    residue field with a recorded tau image), "gauss_full", and
    "gauss_principal".
    """

    __slots__ = (
        "kind", "d", "pair", "s", "t", "order", "char",
        "is_field", "tau_image", "i_image", "label",
    )

    def __init__(self, kind, d, pair, s, t, order, char, is_field,
                 tau_image=None, i_image=None, label=""):
        self.kind = kind
        self.d = d
        self.pair = pair
        self.s = s
        self.t = t
        self.order = order
        self.char = char
        self.is_field = is_field
        self.tau_image = tau_image
        self.i_image = i_image
        self.label = label or kind

    def __repr__(self):
        return f"RingSpec({self.label})"

    def __eq__(self, other):
        return isinstance(other, RingSpec) and (
            (self.kind, self.d, self.pair, self.s, self.t,
             self.tau_image, self.i_image)
            == (other.kind, other.d, other.pair, other.s, other.t,
                other.tau_image, other.i_image))

    def __hash__(self):
        return hash((self.kind, self.d, self.pair, self.s, self.t))

    # -- element arithmetic (canonical representatives) --

    def zero(self):
        return (0, 0) if self.pair else 0

    def one(self):
        return (1, 0) if self.pair else 1

    def from_int(self, k: int):
        return (k % self.d, 0) if self.pair else k % self.d

    def add(self, x, y):
        if self.pair:
            return ((x[0] + y[0]) % self.d, (x[1] + y[1]) % self.d)
        return (x + y) % self.d

    def sub(self, x, y):
        if self.pair:
            return ((x[0] - y[0]) % self.d, (x[1] - y[1]) % self.d)
        return (x - y) % self.d

    def neg(self, x):
        if self.pair:
            return (-x[0] % self.d, -x[1] % self.d)
        return -x % self.d

    def mul(self, x, y):
        if self.pair:
            x0, x1 = x
            y0, y1 = y
            cross = x1 * y1
            return ((x0 * y0 + self.t * cross) % self.d,
                    (x0 * y1 + x1 * y0 + self.s * cross) % self.d)
        return x * y % self.d

    def inv(self, x):
        if self.pair:
            x0, x1 = x
            n = (x0 * x0 + self.s * x0 * x1 - self.t * x1 * x1) % self.d
            ninv = pow(n, -1, self.d)
            return ((x0 + self.s * x1) * ninv % self.d, -x1 * ninv % self.d)
        return pow(x, -1, self.d)

    def is_unit(self, x) -> bool:
        try:
            self.inv(x)
            return True
        except ValueError:
            return False

    def pow_(self, x, e: int):
        if e < 0:
            return self.pow_(self.inv(x), -e)
        out = self.one()
        while e:
            if e & 1:
                out = self.mul(out, x)
            x = self.mul(x, x)
            e >>= 1
        return out

    def is_zero(self, x) -> bool:
        return x == self.zero()

    def embed(self, v):
        """Map an int, QuadInt or GaussInt into this ring."""
        if isinstance(v, int):
            return self.from_int(v)
        if isinstance(v, QuadInt):
            if v.b == 0:
                return self.from_int(v.a)
            if self.tau_image is None:
                raise NoEmbedding(f"no image of tau in {self.label}")
            return self.add(self.from_int(v.a),
                            self.mul(self.from_int(v.b), self.tau_image))
        if isinstance(v, GaussInt):
            if v.b == 0:
                return self.from_int(v.a)
            if self.i_image is None:
                raise NoEmbedding(f"no image of i in {self.label}")
            return self.add(self.from_int(v.a),
                            self.mul(self.from_int(v.b), self.i_image))
        raise NoEmbedding(f"cannot embed {v!r} into {self.label}")

    def elements(self):
        if self.pair:
            for x in range(self.d):
                for y in range(self.d):
                    yield (x, y)
        else:
            yield from range(self.d)

    def units(self):
        return [x for x in self.elements() if self.is_unit(x)]

    def chi(self, x) -> int:
        """Quadratic character of x in this field (odd characteristic)."""
        if not self.is_field:
            raise ValueError("quadratic character needs a field")
        if self.char == 2:
            raise OddCharRequired("character undefined in characteristic 2")
        if self.is_zero(x):
            return 0
        return 1 if self.pow_(x, (self.order - 1) // 2) == self.one() else -1

    def to_json(self, x):
        return list(x) if self.pair else x


def integers_mod(d: int) -> RingSpec:
    if d < 2:
        raise ValueError("modulus must be >= 2")
    return RingSpec("Zmod", d, False, 0, 0, d, d, is_prime(d), label=f"Z_{d}")


def prime_field(p: int) -> RingSpec:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return RingSpec("GF", p, False, 0, 0, p, p, True, label=f"GF({p})")


def quad_field(p: int) -> RingSpec:
    """GF(p^2) modelled as Z[tau]/(p), basis {1, theta}, theta**2 = theta+1."""
    if not is_prime(p) or p % 5 not in (2, 3):
        raise NotPrime(f"x^2 - x - 1 is reducible mod {p}")
    return RingSpec("GF2", p, True, 1, 1, p * p, p, True,
                    tau_image=(0, 1), label=f"GF({p}^2)")


def tau_residue_ring(pi: QuadInt) -> RingSpec:
    """The finite field Z[tau]/(pi), of order |N(pi)|."""
    pi = _quad(pi)
    cls = tau_classify_prime(pi)
    if cls.kind == "inert":
        return quad_field(cls.residue_char)
    q = cls.residue_order
    b = pi.b % q
    # validated primes of norm +-5 or +-q always have b invertible mod q
    img = -pi.a * pow(b, -1, q) % q
    assert (img * img - img - 1) % q == 0
    return RingSpec("tau", q, False, 0, 0, q, q, True,
                    tau_image=img, label=f"GF({q}) t->{img}")


def gauss_residue_ring(J: IdealSpec) -> RingSpec:
    """Z[i]/J for J = full:m (ring Z_m[i]) or principal:b,c (ring Z_m)."""
    if J.kind == "full":
        if J.m < 2:
            raise BadIdeal("full ideal needs m >= 2")
        m = J.m
        # Z_m[i] is the field GF(m^2) exactly when m is a prime = 3 mod 4
        field = is_prime(m) and m % 4 == 3
        return RingSpec("gauss_full", m, True, 0, -1, m * m, m,
                        field, i_image=(0, 1), label=f"Z_{m}[i]")
    if J.kind != "principal":
        raise BadIdeal(f"unknown ideal kind {J.kind!r}")
    b, c = J.b, J.c
    if gcd(b, c) != 1:
        raise BadIdeal(f"gcd({b},{c}) != 1")
    m = b * b + c * c
    if m < 2:
        raise BadIdeal("principal ideal is the whole ring")
    # b + c*ihat = 0 mod m fixes the image of i
    ihat = -b * pow(c % m, -1, m) % m
    assert (ihat * ihat + 1) % m == 0
    return RingSpec("gauss_principal", m, False, 0, 0, m, m, is_prime(m),
                    i_image=ihat, label=f"Z_{m} i->{ihat}")


def gauss_ideal_self_conjugate(J: IdealSpec) -> bool:
    """Does complex conjugation map J onto itself?"""
    if J.kind == "full":
        return True
    # b - ci is an associate of b + ci only for b = 0, c = 0, or |b| = |c|
    return J.b == 0 or J.c == 0 or abs(J.b) == abs(J.c)


# ---------------------------------------------------------------------------
# quadratic symbols


def legendre(a: int, p: int) -> int:
    """Rational Legendre symbol (a/p) for an odd prime p."""
    if p == 2 or not is_prime(p):
        raise NotPrime(f"{p} is not an odd prime")
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return -1 if r == p - 1 else 1


def legendre_tau(alpha: QuadInt, pi: QuadInt) -> int:
    """Legendre symbol of alpha mod a prime pi of Z[tau] (Euler criterion)."""
    cls = tau_classify_prime(_quad(pi))
    if cls.residue_char == 2:
        raise OddCharRequired("no quadratic symbol modulo associates of 2")
    ring = tau_residue_ring(pi)
    return ring.chi(ring.embed(_quad(alpha)))


# ---------------------------------------------------------------------------
# Gaussian-integer ideal utilities


def gauss_solve_ihat(m: int) -> list[int]:
    """All solutions of x**2 = -1 mod m, ascending (empty if none)."""
    if m < 3:
        raise ValueError("m must be >= 3")
    return [x for x in range(m) if (x * x + 1) % m == 0]


def gauss_pair_from_ihat(m: int, ihat: int) -> tuple[int, int]:
    """The positive pair (b, c) with m = b^2 + c^2, gcd 1, b = -ihat*c mod m."""
    if (ihat * ihat + 1) % m != 0:
        raise NoPair(f"{ihat}^2 != -1 mod {m}")
    for c in range(1, isqrt(m) + 1):
        b = -ihat * c % m
        if b > 0 and b * b + c * c == m and gcd(b, c) == 1:
            return b, c
    raise NoPair(f"no pair for m={m}, ihat={ihat}")


# ---------------------------------------------------------------------------
# element and ideal grammar

_TERM_RE = re.compile(r"^([+-]?\d+)?(?:([+-]?\d*)\*?([ti]))?$")


def _parse_ab(text: str, sym: str) -> tuple[int, int]:
    s = text.replace(" ", "")
    if not s:
        raise ParseError("empty element text")
    # split into signed terms
    terms = re.findall(r"[+-]?[^+-]+", s)
    a = b = 0
    for term in terms:
        m = re.fullmatch(r"([+-]?)(\d+)?\*?([ti])?", term)
        if not m or (m.group(2) is None and m.group(3) is None):
            raise ParseError(f"bad term {term!r} in {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        coeff = int(m.group(2)) if m.group(2) else 1
        if m.group(3):
            if m.group(3) != sym:
                raise ParseError(f"unexpected symbol {m.group(3)!r} in {text!r}")
            b += sign * coeff
        else:
            a += sign * coeff
    return a, b


def parse_quadint(text: str) -> QuadInt:
    """Parse "a+b*t" (also "sqrt5" for 2*tau - 1)."""
    if text.strip() == "sqrt5":
        return SQRT5
    return QuadInt(*_parse_ab(text, "t"))


def parse_gaussint(text: str) -> GaussInt:
    return GaussInt(*_parse_ab(text, "i"))


def parse_ideal(text: str) -> IdealSpec:
    s = text.strip()
    if s.startswith("full:"):
        try:
            return IdealSpec("full", m=int(s[5:]))
        except ValueError as e:
            raise BadIdeal(str(e)) from None
    if s.startswith("principal:"):
        try:
            b, c = (int(x) for x in s[10:].split(","))
        except ValueError as e:
            raise BadIdeal(str(e)) from None
        return IdealSpec("principal", b=b, c=c)
    raise BadIdeal(f"bad ideal text {text!r}")


def format_element(a: int, b: int, sym: str) -> str:
    if b == 0:
        return str(a)
    bs = f"{b:+d}*{sym}" if a != 0 else f"{b}*{sym}"
    return (str(a) if a != 0 else "") + bs
